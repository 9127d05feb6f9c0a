#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "levycouple/rng.hpp"

using namespace levycouple;

TEST_CASE("streams are deterministic and substreams differ") {
  RngStream a = RngStream::for_path(42, 7, 0);
  RngStream b = RngStream::for_path(42, 7, 0);
  RngStream c = RngStream::for_path(42, 8, 0);
  RngStream d = RngStream::for_path(42, 7, 1);
  for (int i = 0; i < 64; ++i) CHECK(a.next_u64() == b.next_u64());
  bool differs_path = false, differs_purpose = false;
  RngStream a2 = RngStream::for_path(42, 7, 0);
  for (int i = 0; i < 8; ++i) {
    const auto base = a2.next_u64();
    if (base != c.next_u64()) differs_path = true;
    if (base != d.next_u64()) differs_purpose = true;
  }
  CHECK(differs_path);
  CHECK(differs_purpose);
}

TEST_CASE("u01 stays in [0,1) and open variant in (0,1]") {
  RngStream rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.u01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double v = rng.u01_open();
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("exponential draws have the right mean") {
  RngStream rng(2);
  const int n = 200000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rng.exponential(4.0);
  const double mean = sum / n;
  // mean 1/4, sd of the estimate = 1/(4 sqrt n)
  CHECK(std::fabs(mean - 0.25) < 3.0 * 0.25 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("unit vectors have norm one in every dimension") {
  RngStream rng(3);
  for (int d : {1, 2, 3, 5}) {
    std::vector<double> v(d);
    for (int i = 0; i < 100; ++i) {
      rng.unit_vector(d, v.data());
      double s = 0.0;
      for (double x : v) s += x * x;
      CHECK(std::fabs(std::sqrt(s) - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("d=1 directions are fair signs") {
  RngStream rng(4);
  int pos = 0;
  const int n = 100000;
  double v;
  for (int i = 0; i < n; ++i) {
    rng.unit_vector(1, &v);
    if (v > 0) ++pos;
  }
  CHECK(std::fabs(pos / static_cast<double>(n) - 0.5) < 0.01);
}
