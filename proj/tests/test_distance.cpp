#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <vector>

#include "levycouple/distance.hpp"
#include "levycouple/rng.hpp"

using namespace levycouple;

namespace {

const double kSqrt2 = std::sqrt(2.0);
const RadialLevyMeasure kStable15 = RadialLevyMeasure::alpha_stable(1, 1.5);

DistanceOptions base_options() {
  DistanceOptions opts;
  opts.epsilon = 0.5;
  opts.delta = 0.5;
  return opts;
}

DistanceFunction build_step_fixture() {
  return build_distance(kStable15, DriftSpec::step_profile(2.0 * kSqrt2, 1.0), base_options());
}

DistanceFunction build_double_well_fixture() {
  return build_distance(kStable15, DriftSpec::double_well(), base_options());
}

}  // namespace

TEST_CASE("h_bar: zero for nonnegative profiles, window supremum otherwise") {
  std::vector<double> grid;
  for (int i = 0; i <= 4000; ++i) grid.push_back(5.0 * i / 4000.0);

  const auto nonneg = build_h_bar([](double) { return 1.0; }, 0.5, grid);
  for (double v : nonneg) CHECK(v == 0.0);

  const auto dw = build_h_bar([](double r) { return 0.25 * r * r - 1.0; }, 0.5, grid);
  // sup over (0, 0.5) of t (1 - t^2/4) sits at the right endpoint
  CHECK(dw[0] == Catch::Approx(0.46875).margin(1e-6));
  // vanishes past R0 = 2
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] >= 2.0) CHECK(dw[i] == 0.0);
  }
  // still positive just below R0 - eps
  const auto at = [&](double r) {
    return dw[static_cast<std::size_t>(r / 5.0 * 4000.0)];
  };
  CHECK(at(1.4) > 0.0);
}

TEST_CASE("phi and Phi: identity profile case and basic normalization") {
  std::vector<double> grid;
  for (int i = 0; i <= 1000; ++i) grid.push_back(3.0 * i / 1000.0);
  std::vector<double> zero(grid.size(), 0.0);
  const auto [phi, Phi] = build_phi_Phi(grid, zero, kSqrt2);
  CHECK(phi.front() == 1.0);
  CHECK(Phi.front() == 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(phi[i] == 1.0);
    CHECK(Phi[i] == Catch::Approx(grid[i]).margin(1e-12));
  }
  std::vector<double> huge(grid.size(), 1e6);
  CHECK_THROWS_AS(build_phi_Phi(grid, huge, 1.0), std::domain_error);
}

TEST_CASE("refinement ladder stabilizes phi(R0) and c1 for the double-well profile") {
  const auto kappa = [](double r) { return 0.25 * r * r - 1.0; };
  DistanceOptions opts = base_options();
  TruncationParams trunc{1.0, 1e-2};
  const DistanceFunction df = build_distance_from_profile(
      kappa, 1.0, kSqrt2, 32.0 / 3.0, 28.0 / 3.0, trunc, opts);
  // the ladder's last doubling moved phi(R0), c1 and f1(delta) by < 1e-8
  CHECK(df.refine_residual < 1e-8);

  // doubling the converged grid once more changes c1 by < 1e-6 relative
  DistanceOptions once_more = opts;
  once_more.grid_points = static_cast<int>(2 * (df.table_points - 1) + 1);
  once_more.max_refinements = 0;
  const DistanceFunction doubled = build_distance_from_profile(
      kappa, 1.0, kSqrt2, 32.0 / 3.0, 28.0 / 3.0, trunc, once_more);
  CHECK(std::fabs(doubled.c1 - df.c1) / df.c1 < 1e-6);
  CHECK(std::fabs(doubled.phi_r0 - df.phi_r0) / df.phi_r0 < 1e-6);
}

TEST_CASE("step-profile fixture reproduces the flat-phi closed forms") {
  const DistanceFunction df = build_step_fixture();
  CHECK(std::fabs(df.c_eps - kSqrt2) < 1e-15);
  CHECK(df.c_delta == Catch::Approx(32.0 / 3.0).epsilon(1e-12));
  CHECK(df.c_delta_m == Catch::Approx(28.0 / 3.0).epsilon(1e-12));
  CHECK(df.r0 == 0.0);
  CHECK(df.r1 == Catch::Approx(1.0).margin(1e-3));
  CHECK(df.phi_r0 == 1.0);
  CHECK(df.phi_at(0.0) == 1.0);
  CHECK(df.Phi_at(0.7) == Catch::Approx(0.7).margin(1e-10));

  // c1 = C_eps / (R1^2 + 2 eps R1) = sqrt(2)/2
  CHECK(df.c1 == Catch::Approx(0.5 * kSqrt2).epsilon(1e-5));

  // g pinned at both ends, f1 polynomial value at delta
  CHECK(df.g_at(0.0) == 1.0);
  CHECK(df.g_at(df.r1) == 0.5);
  CHECK(df.f1_at(0.0) == 0.0);
  CHECK(df.f1_at(0.5) == Catch::Approx(0.4583333333333333).epsilon(1e-5));

  // K = 1 at C_L = 0, a = f1(delta), c = sqrt(2)/4
  CHECK(df.K == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(df.a == Catch::Approx(0.4583333333333333).epsilon(1e-5));
  CHECK(df.c == Catch::Approx(0.25 * kSqrt2).epsilon(1e-5));
  CHECK(df.c >= kSqrt2 / 8.0);  // conservative floor
  CHECK(df.prefactor_w1 == Catch::Approx(2.0).epsilon(1e-12));
  CHECK(df.prefactor_tv == Catch::Approx(2.0 / df.a).epsilon(1e-12));
}

TEST_CASE("f evaluation: discontinuity at zero, affine tail") {
  const DistanceFunction df = build_step_fixture();
  CHECK(df.f_at(0.0) == 0.0);
  CHECK(df.f_at(0.5) == Catch::Approx(0.9166666666666666).epsilon(1e-5));
  CHECK_THROWS_AS(df.f_at(-0.1), std::domain_error);
  // slope of the affine extension is phi(R0)/2 = 1/2
  const double far = df.grid_max() + 5.0;
  CHECK(df.f_at(far + 1.0) - df.f_at(far) == Catch::Approx(0.5).epsilon(1e-12));
  // f(r) >= a for every r > 0 (cost of not being coupled)
  for (double r : {1e-9, 0.1, 1.0, 30.0}) CHECK(df.f_at(r) >= df.a);
}

TEST_CASE("assemble_constants: conventions and failure modes") {
  // C_L = 0 makes K = 1 under both conventions
  for (KConvention conv : {KConvention::Proof, KConvention::Statement}) {
    const auto cc = assemble_constants(0.45, 0.5, 10.0, 0.0, 0.7, conv);
    CHECK(cc.K == 1.0);
    CHECK(cc.a == Catch::Approx(0.45));
    CHECK(cc.c == Catch::Approx(std::min(0.35, 2.5)));
  }
  // spec arithmetic: C_L = 1, delta = 0.5, overlap 32/3, f1(delta) = 0.4583333
  const auto cc =
      assemble_constants(0.4583333333333333, 0.5, 32.0 / 3.0, 1.0, 0.5 * kSqrt2);
  CHECK(cc.K == Catch::Approx(1.4090909090909092).epsilon(1e-9));
  // statement convention halves the denominator weight
  const auto cs = assemble_constants(0.4583333333333333, 0.5, 32.0 / 3.0, 1.0, 0.5 * kSqrt2,
                                     KConvention::Statement);
  CHECK(cs.K == Catch::Approx(1.0 + 0.5 / ((32.0 / 3.0) * 0.4583333333333333 / 2.0))
                    .epsilon(1e-9));
  CHECK_THROWS_AS(assemble_constants(0.45, 0.5, 0.0, 1.0, 0.7), FeasibilityError);
}

TEST_CASE("functional inequality holds for both fixtures") {
  const DistanceFunction step = build_step_fixture();
  const auto kappa_step = [&](double r) { return r >= 1.0 ? 2.0 * kSqrt2 : 0.0; };
  const auto rep = verify_functional_inequality(step, kappa_step, 10.0);
  CHECK(rep.pass);
  CHECK(rep.max_violation <= 1e-8);

  const DistanceFunction dw = build_double_well_fixture();
  const auto kappa_dw = [](double r) { return 0.25 * r * r - 1.0; };
  const auto rep2 = verify_functional_inequality(dw, kappa_dw, 10.0 * dw.r1);
  CHECK(rep2.pass);
  CHECK(rep2.max_violation <= 1e-8);
}

TEST_CASE("beyond R1 the window supremum of f1'' vanishes") {
  const DistanceFunction df = build_step_fixture();
  CHECK(df.fbar_eps(df.r1 + df.epsilon + 0.1) == 0.0);
  // there the inequality reduces to -f1' kappa r + c1 f1 <= 0
  for (double r : {1.7, 2.5, 6.0}) {
    const double lhs = -0.5 * df.phi_r0 * (2.0 * kSqrt2) * r + df.c1 * df.f1_at(r);
    CHECK(lhs <= 0.0);
  }
}

TEST_CASE("functional inequality fuzz over random dissipative profiles") {
  RngStream rng(99);
  int built = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const double base = 1.0 + 2.0 * rng.u01();
    const double dip = 0.5 + 2.0 * rng.u01();
    const double center = 0.5 + 1.5 * rng.u01();
    const double width = 0.3 + 0.7 * rng.u01();
    const auto kappa = [=](double r) {
      return base - dip * std::exp(-(r - center) * (r - center) / (width * width));
    };
    const double c_l = one_sided_lipschitz_from_profile(kappa, 100.0);
    DistanceOptions opts = base_options();
    opts.grid_points = 2049;
    opts.max_refinements = 1;
    TruncationParams trunc{1.0, 1e-2};
    const DistanceFunction df = build_distance_from_profile(kappa, c_l, kSqrt2, 32.0 / 3.0,
                                                            28.0 / 3.0, trunc, opts);
    const auto rep = verify_functional_inequality(df, kappa, 8.0 * df.r1, 500);
    INFO("trial " << trial << " base " << base << " dip " << dip << " center " << center
                  << " width " << width << " violation " << rep.max_violation);
    CHECK(rep.max_violation <= 1e-8);
    ++built;
  }
  CHECK(built == 50);
}

TEST_CASE("f1 is concave with the sandwich bounds") {
  for (const DistanceFunction& df : {build_step_fixture(), build_double_well_fixture()}) {
    // nonincreasing difference quotients (1e-9 slack for accumulated
    // rounding in the long cumulative sums)
    double prev_quot = kInf;
    for (std::size_t i = 1; i < df.f1.size(); i += 7) {
      const double quot = (df.f1[i] - df.f1[i - 1]) / df.step;
      CHECK(quot <= prev_quot + 1e-9);
      prev_quot = quot;
    }
    // (phi(R0)/2) r <= f1(r) <= r on the grid
    for (std::size_t i = 0; i < df.f1.size(); i += 11) {
      const double r = df.step * static_cast<double>(i);
      CHECK(df.f1[i] >= 0.5 * df.phi_r0 * r - 1e-12);
      CHECK(df.f1[i] <= r + 1e-12);
    }
    CHECK(df.c <= 0.25 * df.c_delta + 1e-15);
    CHECK(df.c > 0.0);
  }
}

TEST_CASE("scan over eps = delta reports feasibility and the best rate") {
  const DriftSpec drift = DriftSpec::step_profile(2.0 * kSqrt2, 1.0);
  DistanceOptions opts = base_options();
  opts.grid_points = 1025;
  opts.max_refinements = 1;
  const auto scan = scan_epsilon_delta(kStable15, drift, 0.3, 0.7, 5, opts);
  REQUIRE(scan.size() == 5);
  double best_c = 0.0;
  for (const auto& p : scan) {
    CHECK(p.feasible);  // alpha-stable admits every eps = delta here
    best_c = std::max(best_c, p.c);
  }
  // direct evaluation at the scan's best point agrees
  for (const auto& p : scan) {
    if (p.c == best_c) {
      opts.epsilon = p.eps_delta;
      opts.delta = p.eps_delta;
      const DistanceFunction df = build_distance(kStable15, drift, opts);
      CHECK(df.c == Catch::Approx(p.c).epsilon(1e-12));
    }
  }
}
