#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "levycouple/quadrature.hpp"

using namespace levycouple;

TEST_CASE("adaptive simpson integrates polynomials exactly") {
  const auto f = [](double x) { return 3.0 * x * x - 2.0 * x + 1.0; };
  CHECK(integrate(f, 0.0, 2.0) == Catch::Approx(8.0 - 4.0 + 2.0).epsilon(1e-12));
  CHECK(integrate(f, 2.0, 0.0) == Catch::Approx(-6.0).epsilon(1e-12));
  CHECK(integrate(f, 1.0, 1.0) == 0.0);
}

TEST_CASE("adaptive simpson meets the relative tolerance on smooth integrands") {
  const double val = integrate([](double x) { return std::exp(-x * x); }, 0.0, 3.0);
  const double exact = 0.5 * std::sqrt(M_PI) * std::erf(3.0);
  CHECK(std::fabs(val - exact) / exact < 1e-8);
}

TEST_CASE("left-singular integrator handles power singularities") {
  // int_0^b x^{-1/2} dx = 2 sqrt(b)
  const double val = integrate_left_singular([](double x) { return 1.0 / std::sqrt(x); }, 0.5);
  CHECK(val == Catch::Approx(2.0 * std::sqrt(0.5)).epsilon(1e-8));
  // int_0^b x^{1/2} dx = (2/3) b^{3/2}; 1e-8 relative is the configured
  // accuracy contract of the density integrals
  const double val2 = integrate_left_singular([](double x) { return std::sqrt(x); }, 0.125);
  CHECK(val2 == Catch::Approx(2.0 / 3.0 * std::pow(0.125, 1.5)).epsilon(1e-8));
}

TEST_CASE("tail integrator matches closed forms") {
  // int_1^inf x^{-5/2} dx = 2/3
  const double val = integrate_to_infinity([](double x) { return std::pow(x, -2.5); }, 1.0);
  CHECK(val == Catch::Approx(2.0 / 3.0).epsilon(1e-8));
}

TEST_CASE("cumulative trapezoid and pairwise sum") {
  std::vector<double> x{0.0, 1.0, 2.0, 3.0};
  std::vector<double> y{0.0, 1.0, 2.0, 3.0};
  const auto cum = cumulative_trapezoid(x, y);
  REQUIRE(cum.size() == 4);
  CHECK(cum[0] == 0.0);
  CHECK(cum[3] == Catch::Approx(4.5));

  std::vector<double> v(1000, 0.1);
  CHECK(pairwise_sum(v) == Catch::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("bisection helpers") {
  const double root = bisect_root([](double x) { return x * x - 2.0; }, 0.0, 2.0, 1e-12);
  CHECK(root == Catch::Approx(std::sqrt(2.0)).margin(1e-10));
  const double thr =
      bisect_threshold([](double x) { return x >= 1.25; }, 0.0, 2.0, 1e-9);
  CHECK(thr == Catch::Approx(1.25).margin(1e-7));
}
