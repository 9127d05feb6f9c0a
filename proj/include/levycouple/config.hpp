#pragma once

#include <cctype>
#include <cerrno>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "levycouple/common.hpp"
#include "levycouple/coupling.hpp"
#include "levycouple/distance.hpp"
#include "levycouple/drift.hpp"
#include "levycouple/levy_measure.hpp"

namespace levycouple {

/// Minimal TOML subset: [sections], key = value with booleans, integers,
/// floats, quoted strings and flat arrays. Covers the whole configuration
/// schema of this tool; no nested tables, no multiline values.
struct TomlValue {
  enum class Type { Bool, Int, Float, String, FloatArray, StringArray };
  Type type = Type::Float;
  bool b = false;
  long long i = 0;
  double f = 0.0;
  std::string s;
  std::vector<double> fa;
  std::vector<std::string> sa;

  double as_double(const std::string& key) const {
    if (type == Type::Float) return f;
    if (type == Type::Int) return static_cast<double>(i);
    throw ConfigError("config key '" + key + "' must be a number");
  }
  long long as_int(const std::string& key) const {
    if (type == Type::Int) return i;
    throw ConfigError("config key '" + key + "' must be an integer");
  }
  bool as_bool(const std::string& key) const {
    if (type == Type::Bool) return b;
    throw ConfigError("config key '" + key + "' must be a boolean");
  }
  const std::string& as_string(const std::string& key) const {
    if (type == Type::String) return s;
    throw ConfigError("config key '" + key + "' must be a string");
  }
  std::vector<double> as_double_array(const std::string& key) const {
    if (type == Type::FloatArray) return fa;
    throw ConfigError("config key '" + key + "' must be an array of numbers");
  }
};

using TomlSection = std::map<std::string, TomlValue>;
using TomlTable = std::map<std::string, TomlSection>;

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

inline TomlValue parse_scalar(const std::string& raw, int line_no) {
  const std::string s = trim(raw);
  TomlValue v;
  if (s.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty value");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') {
      throw ConfigError("line " + std::to_string(line_no) + ": unterminated string");
    }
    v.type = TomlValue::Type::String;
    v.s = s.substr(1, s.size() - 2);
    return v;
  }
  if (s == "true" || s == "false") {
    v.type = TomlValue::Type::Bool;
    v.b = (s == "true");
    return v;
  }
  if (s == "inf") {
    v.type = TomlValue::Type::Float;
    v.f = kInf;
    return v;
  }
  errno = 0;
  char* end = nullptr;
  const double d = std::strtod(s.c_str(), &end);
  if (end == nullptr || *end != '\0' || errno != 0) {
    throw ConfigError("line " + std::to_string(line_no) + ": cannot parse value '" + s + "'");
  }
  if (s.find_first_of(".eE") == std::string::npos) {
    v.type = TomlValue::Type::Int;
    v.i = static_cast<long long>(d);
    v.f = d;
  } else {
    v.type = TomlValue::Type::Float;
    v.f = d;
  }
  return v;
}

inline TomlValue parse_value(const std::string& raw, int line_no) {
  const std::string s = trim(raw);
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') {
      throw ConfigError("line " + std::to_string(line_no) + ": unterminated array");
    }
    TomlValue v;
    const std::string body = s.substr(1, s.size() - 2);
    std::vector<std::string> items;
    std::string cur;
    bool in_string = false;
    for (char ch : body) {
      if (ch == '"') in_string = !in_string;
      if (ch == ',' && !in_string) {
        items.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    if (!trim(cur).empty()) items.push_back(cur);
    bool strings = false;
    for (const auto& it : items) {
      if (!trim(it).empty() && trim(it).front() == '"') strings = true;
    }
    if (strings) {
      v.type = TomlValue::Type::StringArray;
      for (const auto& it : items) v.sa.push_back(parse_scalar(it, line_no).s);
    } else {
      v.type = TomlValue::Type::FloatArray;
      for (const auto& it : items) {
        const TomlValue sv = parse_scalar(it, line_no);
        v.fa.push_back(sv.type == TomlValue::Type::Int ? static_cast<double>(sv.i) : sv.f);
      }
    }
    return v;
  }
  return parse_scalar(s, line_no);
}

}  // namespace detail

inline TomlTable parse_toml(const std::string& text) {
  TomlTable table;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = detail::trim(detail::strip_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3) {
        throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      }
      section = detail::trim(s.substr(1, s.size() - 2));
      table[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = detail::trim(s.substr(0, eq));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    }
    if (section.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": key outside any [section]");
    }
    table[section][key] = detail::parse_value(s.substr(eq + 1), line_no);
  }
  return table;
}

inline TomlTable parse_toml_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_toml(ss.str());
}

struct OutputOptions {
  std::string dir = "out";
  bool write_distance_csv = true;
  bool write_decay_csv = true;
  int trace_paths = 0;
};

struct ScanRequest {
  double lo = 0.0, hi = 0.0;
  int points = 0;
  bool enabled() const { return points >= 2; }
};

/// Fully resolved run configuration (one TOML file plus CLI overrides).
struct RunConfig {
  RadialLevyMeasure measure;
  DriftSpec drift;
  DistanceOptions distance;
  ScanRequest scan;

  double time_step = 1e-3;
  double horizon = 1.0;
  std::size_t n_paths = 0;
  std::uint64_t base_seed = 0;
  std::vector<double> x0, y0;
  std::string x0_file, y0_file;  // whitespace-separated rows of d numbers
  std::vector<double> snapshot_times;
  double blowup_guard = 1e9;
  std::optional<double> m_override, eta_override;
  int threads = 1;

  OutputOptions output;
};

namespace detail {

inline void reject_unknown_keys(const TomlSection& sec, const std::string& name,
                                const std::set<std::string>& known) {
  for (const auto& [key, _] : sec) {
    if (!known.contains(key)) {
      throw ConfigError("unknown key '" + key + "' in [" + name + "]");
    }
  }
}

inline const TomlValue* find(const TomlSection& sec, const std::string& key) {
  const auto it = sec.find(key);
  return it == sec.end() ? nullptr : &it->second;
}

inline RadialLevyMeasure resolve_measure(const TomlSection& sec) {
  reject_unknown_keys(sec, "measure",
                      {"kind", "dimension", "alpha", "theta", "beta", "radii", "densities"});
  const TomlValue* kind = find(sec, "kind");
  if (kind == nullptr) throw ConfigError("[measure] requires 'kind'");
  int d = 1;
  if (const TomlValue* dim = find(sec, "dimension")) {
    d = static_cast<int>(dim->as_int("dimension"));
  }
  const std::string k = kind->as_string("kind");
  if (k == "alpha-stable") {
    const TomlValue* a = find(sec, "alpha");
    if (a == nullptr) throw ConfigError("[measure] alpha-stable requires 'alpha'");
    return RadialLevyMeasure::alpha_stable(d, a->as_double("alpha"));
  }
  if (k == "shell-uniform") {
    const TomlValue* th = find(sec, "theta");
    const TomlValue* be = find(sec, "beta");
    if (th == nullptr || be == nullptr) {
      throw ConfigError("[measure] shell-uniform requires 'theta' and 'beta'");
    }
    if (d != 1) throw ConfigError("[measure] shell-uniform is one-dimensional");
    return RadialLevyMeasure::shell_uniform(th->as_double("theta"), be->as_double("beta"));
  }
  if (k == "tabulated-radial") {
    const TomlValue* r = find(sec, "radii");
    const TomlValue* q = find(sec, "densities");
    if (r == nullptr || q == nullptr) {
      throw ConfigError("[measure] tabulated-radial requires 'radii' and 'densities'");
    }
    return RadialLevyMeasure::tabulated(d, r->as_double_array("radii"),
                                        q->as_double_array("densities"));
  }
  throw ConfigError("[measure] unknown kind '" + k + "'");
}

inline DriftSpec resolve_drift(const TomlSection& sec, int dimension) {
  reject_unknown_keys(sec, "drift", {"kind", "strength", "radius", "c_l"});
  const TomlValue* kind = find(sec, "kind");
  if (kind == nullptr) throw ConfigError("[drift] requires 'kind'");
  const std::string k = kind->as_string("kind");
  double strength = 1.0;
  if (const TomlValue* s = find(sec, "strength")) strength = s->as_double("strength");
  DriftSpec drift;
  if (k == "linear") {
    drift = DriftSpec::linear(dimension, strength);
  } else if (k == "double-well") {
    if (dimension != 1) throw ConfigError("[drift] double-well is one-dimensional");
    drift = DriftSpec::double_well();
  } else if (k == "step-profile") {
    double radius = 1.0;
    if (const TomlValue* r = find(sec, "radius")) radius = r->as_double("radius");
    drift = DriftSpec::step_profile(strength, radius);
  } else {
    throw ConfigError("[drift] unknown kind '" + k + "'");
  }
  if (const TomlValue* cl = find(sec, "c_l")) {
    const double v = cl->as_double("c_l");
    if (v < 0.0) throw ConfigError("[drift] c_l must be nonnegative");
    drift.c_l = v;
  }
  return drift;
}

}  // namespace detail

inline RunConfig resolve_run_config(const TomlTable& table) {
  for (const auto& [name, _] : table) {
    if (name != "measure" && name != "drift" && name != "distance" && name != "simulation" &&
        name != "output") {
      throw ConfigError("unknown section [" + name + "]");
    }
  }
  const auto section = [&](const char* name) -> const TomlSection& {
    static const TomlSection empty;
    const auto it = table.find(name);
    return it == table.end() ? empty : it->second;
  };

  RunConfig rc;
  if (table.find("measure") == table.end()) throw ConfigError("missing [measure] section");
  rc.measure = detail::resolve_measure(section("measure"));
  if (table.find("drift") == table.end()) throw ConfigError("missing [drift] section");
  rc.drift = detail::resolve_drift(section("drift"), rc.measure.dimension);

  const TomlSection& dist = section("distance");
  detail::reject_unknown_keys(dist, "distance",
                              {"epsilon", "delta", "k_convention", "grid_points",
                               "span_factor", "r_max", "variance_budget_rel", "scan_lo",
                               "scan_hi", "scan_points"});
  if (const TomlValue* v = detail::find(dist, "epsilon")) {
    rc.distance.epsilon = v->as_double("epsilon");
  }
  if (const TomlValue* v = detail::find(dist, "delta")) {
    rc.distance.delta = v->as_double("delta");
  } else {
    rc.distance.delta = rc.distance.epsilon;
  }
  if (const TomlValue* v = detail::find(dist, "k_convention")) {
    const std::string s = v->as_string("k_convention");
    if (s == "proof") {
      rc.distance.k_convention = KConvention::Proof;
    } else if (s == "statement") {
      rc.distance.k_convention = KConvention::Statement;
    } else {
      throw ConfigError("k_convention must be 'proof' or 'statement'");
    }
  }
  if (const TomlValue* v = detail::find(dist, "grid_points")) {
    rc.distance.grid_points = static_cast<int>(v->as_int("grid_points"));
  }
  if (const TomlValue* v = detail::find(dist, "span_factor")) {
    rc.distance.span_factor = v->as_double("span_factor");
  }
  if (const TomlValue* v = detail::find(dist, "r_max")) {
    rc.distance.r_max = v->as_double("r_max");
  }
  if (const TomlValue* v = detail::find(dist, "variance_budget_rel")) {
    rc.distance.trunc.variance_budget_rel = v->as_double("variance_budget_rel");
  }
  if (const TomlValue* v = detail::find(dist, "scan_points")) {
    rc.scan.points = static_cast<int>(v->as_int("scan_points"));
    const TomlValue* lo = detail::find(dist, "scan_lo");
    const TomlValue* hi = detail::find(dist, "scan_hi");
    if (lo == nullptr || hi == nullptr) {
      throw ConfigError("scan_points requires scan_lo and scan_hi");
    }
    rc.scan.lo = lo->as_double("scan_lo");
    rc.scan.hi = hi->as_double("scan_hi");
  }

  const TomlSection& sim = section("simulation");
  detail::reject_unknown_keys(
      sim, "simulation",
      {"time_step", "horizon", "n_paths", "base_seed", "x0", "y0", "x0_file", "y0_file",
       "snapshot_times", "blowup_guard", "m", "eta", "threads"});
  if (const TomlValue* v = detail::find(sim, "time_step")) {
    rc.time_step = v->as_double("time_step");
  }
  if (const TomlValue* v = detail::find(sim, "horizon")) rc.horizon = v->as_double("horizon");
  if (const TomlValue* v = detail::find(sim, "n_paths")) {
    rc.n_paths = static_cast<std::size_t>(v->as_int("n_paths"));
  }
  if (const TomlValue* v = detail::find(sim, "base_seed")) {
    rc.base_seed = static_cast<std::uint64_t>(v->as_int("base_seed"));
  }
  if (const TomlValue* v = detail::find(sim, "x0")) rc.x0 = v->as_double_array("x0");
  if (const TomlValue* v = detail::find(sim, "y0")) rc.y0 = v->as_double_array("y0");
  if (const TomlValue* v = detail::find(sim, "x0_file")) rc.x0_file = v->as_string("x0_file");
  if (const TomlValue* v = detail::find(sim, "y0_file")) rc.y0_file = v->as_string("y0_file");
  if ((rc.x0_file.empty()) != (rc.y0_file.empty())) {
    throw ConfigError("x0_file and y0_file must be given together");
  }
  if (const TomlValue* v = detail::find(sim, "snapshot_times")) {
    rc.snapshot_times = v->as_double_array("snapshot_times");
  }
  if (const TomlValue* v = detail::find(sim, "blowup_guard")) {
    rc.blowup_guard = v->as_double("blowup_guard");
  }
  if (const TomlValue* v = detail::find(sim, "m")) rc.m_override = v->as_double("m");
  if (const TomlValue* v = detail::find(sim, "eta")) rc.eta_override = v->as_double("eta");
  if (const TomlValue* v = detail::find(sim, "threads")) {
    rc.threads = static_cast<int>(v->as_int("threads"));
  }

  const TomlSection& outsec = section("output");
  detail::reject_unknown_keys(outsec, "output",
                              {"dir", "write_distance_csv", "write_decay_csv", "trace_paths"});
  if (const TomlValue* v = detail::find(outsec, "dir")) rc.output.dir = v->as_string("dir");
  if (const TomlValue* v = detail::find(outsec, "write_distance_csv")) {
    rc.output.write_distance_csv = v->as_bool("write_distance_csv");
  }
  if (const TomlValue* v = detail::find(outsec, "write_decay_csv")) {
    rc.output.write_decay_csv = v->as_bool("write_decay_csv");
  }
  if (const TomlValue* v = detail::find(outsec, "trace_paths")) {
    rc.output.trace_paths = static_cast<int>(v->as_int("trace_paths"));
  }
  return rc;
}

inline RunConfig load_run_config(const std::string& path) {
  return resolve_run_config(parse_toml_file(path));
}

/// Truncation parameters for a run: selected from the measure unless the
/// config pins them explicitly.
inline TruncationParams resolve_truncation(const RunConfig& rc) {
  if (rc.m_override && rc.eta_override) {
    TruncationParams t;
    t.m = *rc.m_override;
    t.eta = *rc.eta_override;
    if (!(t.eta > 0.0 && t.eta < t.m)) throw ConfigError("need 0 < eta < m");
    return t;
  }
  TruncationParams t = select_truncation(rc.measure, rc.distance.epsilon, rc.distance.delta,
                                         rc.distance.trunc);
  if (rc.m_override) t.m = *rc.m_override;
  if (rc.eta_override) t.eta = *rc.eta_override;
  if (!(t.eta > 0.0 && t.eta < t.m)) throw ConfigError("need 0 < eta < m");
  return t;
}

/// Rows of d whitespace-separated numbers, one initial point per line.
inline std::vector<std::vector<double>> load_sample_file(const std::string& path, int d) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open sample file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(f, line)) {
    const std::string s = detail::trim(line);
    if (s.empty() || s.front() == '#') continue;
    std::istringstream in(s);
    std::vector<double> row;
    double v;
    while (in >> v) row.push_back(v);
    if (static_cast<int>(row.size()) != d) {
      throw ConfigError("sample file " + path + ": row with " + std::to_string(row.size()) +
                        " values, expected " + std::to_string(d));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("sample file " + path + " contains no rows");
  return rows;
}

inline SimConfig make_sim_config(const RunConfig& rc, const TruncationParams& trunc) {
  SimConfig cfg;
  cfg.measure = rc.measure;
  cfg.trunc = trunc;
  cfg.drift = rc.drift;
  cfg.time_step = rc.time_step;
  cfg.horizon = rc.horizon;
  cfg.n_paths = rc.n_paths;
  cfg.base_seed = rc.base_seed;
  if (!rc.x0_file.empty()) {
    cfg.initial.kind = InitialLaw::Kind::Samples;
    cfg.initial.x_samples = load_sample_file(rc.x0_file, rc.measure.dimension);
    cfg.initial.y_samples = load_sample_file(rc.y0_file, rc.measure.dimension);
  } else {
    cfg.initial.kind = InitialLaw::Kind::Points;
    cfg.initial.x0 = rc.x0;
    cfg.initial.y0 = rc.y0.empty() ? rc.x0 : rc.y0;  // single-marginal runs omit y0
  }
  cfg.snapshot_times = rc.snapshot_times;
  cfg.blowup_guard = rc.blowup_guard;
  return cfg;
}

}  // namespace levycouple
