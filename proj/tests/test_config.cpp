#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <string>

#include "levycouple/config.hpp"
#include "levycouple/report.hpp"

using namespace levycouple;

namespace {

const char* kFullConfig = R"(
# example configuration
[measure]
kind = "alpha-stable"
dimension = 1
alpha = 1.5

[drift]
kind = "linear"
strength = 1.0

[distance]
epsilon = 0.5
delta = 0.5
k_convention = "proof"
variance_budget_rel = 0.3

[simulation]
time_step = 1e-3
horizon = 4.0
n_paths = 100
base_seed = 42
x0 = [2.0]
y0 = [-2.0]
snapshot_times = [0.5, 1.0, 2.0, 4.0]
threads = 2

[output]
dir = "out"
write_distance_csv = true
trace_paths = 1
)";

}  // namespace

TEST_CASE("full config parses and resolves") {
  const RunConfig rc = resolve_run_config(parse_toml(kFullConfig));
  CHECK(rc.measure.kind == MeasureKind::AlphaStable);
  CHECK(rc.measure.alpha == 1.5);
  CHECK(rc.drift.kind == DriftKind::Linear);
  CHECK(rc.drift.c_l == 0.0);
  CHECK(rc.distance.epsilon == 0.5);
  CHECK(rc.distance.delta == 0.5);
  CHECK(rc.distance.trunc.variance_budget_rel == 0.3);
  CHECK(rc.time_step == 1e-3);
  CHECK(rc.horizon == 4.0);
  CHECK(rc.n_paths == 100);
  CHECK(rc.base_seed == 42);
  CHECK(rc.x0 == std::vector<double>{2.0});
  CHECK(rc.y0 == std::vector<double>{-2.0});
  CHECK(rc.snapshot_times.size() == 4);
  CHECK(rc.threads == 2);
  CHECK(rc.output.trace_paths == 1);

  // truncation resolution picks a usable pair (m, eta)
  const TruncationParams t = resolve_truncation(rc);
  CHECK(t.eta > 0.0);
  CHECK(t.eta < t.m);
  const SimConfig sim = make_sim_config(rc, t);
  CHECK_NOTHROW(sim.validate());

  const json manifest = manifest_json(rc, "simulate");
  CHECK(manifest["measure"]["kind"] == "alpha-stable");
  CHECK(manifest["simulation"]["n_paths"] == 100);
}

TEST_CASE("delta defaults to epsilon") {
  const std::string text = R"(
[measure]
kind = "alpha-stable"
alpha = 1.2
[drift]
kind = "double-well"
[distance]
epsilon = 0.4
)";
  const RunConfig rc = resolve_run_config(parse_toml(text));
  CHECK(rc.distance.delta == 0.4);
  CHECK(rc.drift.c_l == 1.0);
}

TEST_CASE("parser diagnostics") {
  CHECK_THROWS_AS(parse_toml("[measure\nkind = \"x\""), ConfigError);
  CHECK_THROWS_AS(parse_toml("key_without_section = 1"), ConfigError);
  CHECK_THROWS_AS(parse_toml("[a]\nkey = \"unterminated"), ConfigError);
  CHECK_THROWS_AS(parse_toml("[a]\nkey = [1, 2"), ConfigError);
  CHECK_THROWS_AS(parse_toml("[a]\nkey = nonsense"), ConfigError);
  CHECK_THROWS_AS(parse_toml("[a]\nnovalue"), ConfigError);
}

TEST_CASE("schema validation rejects unknown names and bad values") {
  CHECK_THROWS_AS(resolve_run_config(parse_toml("[weird]\nx = 1")), ConfigError);
  CHECK_THROWS_AS(resolve_run_config(parse_toml("[measure]\nkind = \"nope\"")), ConfigError);
  const std::string typo = R"(
[measure]
kind = "alpha-stable"
alpha = 1.5
alfa = 2
[drift]
kind = "linear"
)";
  CHECK_THROWS_AS(resolve_run_config(parse_toml(typo)), ConfigError);
  const std::string badconv = R"(
[measure]
kind = "alpha-stable"
alpha = 1.5
[drift]
kind = "linear"
[distance]
epsilon = 0.5
k_convention = "maybe"
)";
  CHECK_THROWS_AS(resolve_run_config(parse_toml(badconv)), ConfigError);
  CHECK_THROWS_AS(resolve_run_config(parse_toml("[drift]\nkind = \"linear\"")), ConfigError);
}

TEST_CASE("scan request requires both bounds") {
  const std::string text = R"(
[measure]
kind = "alpha-stable"
alpha = 1.5
[drift]
kind = "linear"
[distance]
epsilon = 0.5
scan_points = 5
)";
  CHECK_THROWS_AS(resolve_run_config(parse_toml(text)), ConfigError);
}

TEST_CASE("tabulated measure from config") {
  const std::string text = R"(
[measure]
kind = "tabulated-radial"
dimension = 1
radii = [0.1, 0.5, 1.0, 2.0, 4.0]
densities = [5.0, 1.0, 0.3, 0.05, 0.01]
[drift]
kind = "linear"
strength = 2.0
)";
  const RunConfig rc = resolve_run_config(parse_toml(text));
  CHECK(rc.measure.kind == MeasureKind::TabulatedRadial);
  CHECK(rc.measure.radial_density(0.5) == Catch::Approx(1.0));
}

TEST_CASE("initial law from sample files") {
  const std::string dir = "/tmp/levycouple_test_samples";
  std::filesystem::create_directories(dir);
  {
    std::ofstream fx(dir + "/x.txt");
    fx << "# comment line\n1.0\n2.0\n3.0\n";
    std::ofstream fy(dir + "/y.txt");
    fy << "-1.0\n-2.0\n";
  }
  const std::string text = R"(
[measure]
kind = "alpha-stable"
alpha = 1.5
[drift]
kind = "linear"
[distance]
epsilon = 0.5
[simulation]
x0_file = ")" + dir + R"(/x.txt"
y0_file = ")" + dir + R"(/y.txt"
m = 1.0
eta = 0.05
)";
  const RunConfig rc = resolve_run_config(parse_toml(text));
  const SimConfig cfg = make_sim_config(rc, resolve_truncation(rc));
  CHECK(cfg.initial.kind == InitialLaw::Kind::Samples);
  REQUIRE(cfg.initial.x_samples.size() == 3);
  REQUIRE(cfg.initial.y_samples.size() == 2);
  CHECK(cfg.initial.x_samples[1][0] == 2.0);

  // one file without the other is rejected
  const std::string lonely = R"(
[measure]
kind = "alpha-stable"
alpha = 1.5
[drift]
kind = "linear"
[simulation]
x0_file = "/tmp/nope.txt"
)";
  CHECK_THROWS_AS(resolve_run_config(parse_toml(lonely)), ConfigError);
}

TEST_CASE("truncation overrides") {
  const std::string text = R"(
[measure]
kind = "alpha-stable"
alpha = 1.5
[drift]
kind = "linear"
[distance]
epsilon = 0.5
[simulation]
m = 2.0
eta = 0.01
)";
  const RunConfig rc = resolve_run_config(parse_toml(text));
  const TruncationParams t = resolve_truncation(rc);
  CHECK(t.m == 2.0);
  CHECK(t.eta == 0.01);
}
