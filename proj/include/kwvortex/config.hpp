#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "kwvortex/blowup.hpp"
#include "kwvortex/expression.hpp"
#include "kwvortex/fixtures.hpp"
#include "kwvortex/kw_solver.hpp"
#include "kwvortex/metric.hpp"
#include "kwvortex/vortex_geometry.hpp"

namespace kwv {

using json = nlohmann::ordered_json;

enum class ExperimentKind { solve, sweep, vortex, metric, volume, blowup };

inline std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::solve: return "solve";
    case ExperimentKind::sweep: return "sweep";
    case ExperimentKind::vortex: return "vortex";
    case ExperimentKind::metric: return "metric";
    case ExperimentKind::volume: return "volume";
    case ExperimentKind::blowup: return "blowup";
  }
  return "?";
}

inline std::optional<ExperimentKind> parse_experiment_kind(std::string_view s) {
  for (auto k : {ExperimentKind::solve, ExperimentKind::sweep, ExperimentKind::vortex, ExperimentKind::metric,
                 ExperimentKind::volume, ExperimentKind::blowup})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

struct RunConfig {
  ExperimentKind experiment = ExperimentKind::solve;
  GridKind grid_kind = GridKind::circle;
  int resolution = 64;
  Scheme scheme = Scheme::finite_difference;

  // solve / sweep
  std::string h_expression;  // "random" is replaced by a seeded fixture during validation
  double c1 = 0.0;
  double c2 = 1.0;
  int max_order = 2;

  // vortex / metric
  std::vector<Polynomial> map;
  int map_degree = -1;  // -1: largest component degree
  std::vector<Polynomial> direction;
  double fd_step = 1e-3;

  // volume
  VolumeParams volume;

  // blowup: the quadratic degeneration family
  std::vector<double> epsilon_list;

  std::vector<double> s_list;
  SolverOptions solver;
  int workers = 1;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
};

namespace config_detail {

inline void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw ConfigError(path + "." + it.key(), "unknown key");
}

inline double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "expected a finite number");
  return v;
}

inline long long get_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  return j.get<long long>();
}

inline std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

inline std::vector<double> get_number_list(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

// A coefficient is a number or a [re, im] pair.
inline std::complex<double> get_complex(const json& j, const std::string& path) {
  if (j.is_number()) return {get_number(j, path), 0.0};
  if (j.is_array() && j.size() == 2) return {get_number(j[0], path + "[0]"), get_number(j[1], path + "[1]")};
  throw ConfigError(path, "expected a number or a [re, im] pair");
}

inline std::vector<Polynomial> get_components(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a nonempty array of coefficient lists");
  std::vector<Polynomial> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    if (!j[i].is_array() || j[i].empty()) throw ConfigError(p, "expected a nonempty coefficient list, low degree first");
    Polynomial poly;
    for (std::size_t d = 0; d < j[i].size(); ++d) poly.push_back(get_complex(j[i][d], p + "[" + std::to_string(d) + "]"));
    out.push_back(std::move(poly));
  }
  return out;
}

inline json complex_json(std::complex<double> c) {
  if (c.imag() == 0.0) return c.real();
  return json::array({c.real(), c.imag()});
}

inline json components_json(const std::vector<Polynomial>& comps) {
  json a = json::array();
  for (const auto& p : comps) {
    json c = json::array();
    for (const auto& v : p) c.push_back(complex_json(v));
    a.push_back(c);
  }
  return a;
}

inline void require_s_list(const RunConfig& c) {
  if (c.s_list.empty()) throw ConfigError("$.s_list", "must not be empty");
  for (std::size_t i = 0; i < c.s_list.size(); ++i) {
    const std::string p = "$.s_list[" + std::to_string(i) + "]";
    if (!(c.s_list[i] > 0.0)) throw ConfigError(p, "s must be positive");
    if (i > 0 && !(c.s_list[i] > c.s_list[i - 1])) throw ConfigError(p, "s_list must be increasing");
  }
}

inline void require_existence(const RunConfig& c, int r) {
  const double bound = 4.0 * std::numbers::pi * r;
  for (std::size_t i = 0; i < c.s_list.size(); ++i) {
    const double s = c.s_list[i];
    if (s * s < bound) {
      char buf[200];
      std::snprintf(buf, sizeof buf,
                    "$.s_list[%zu]: s = %.17g is below the existence threshold s^2 tau >= 4 pi r / vol M "
                    "(r = %d, tau = 1, vol M = 1, so s >= %.6g)",
                    i, s, r, std::sqrt(bound));
      throw ThresholdError(buf, s, std::sqrt(bound));
    }
  }
}

}  // namespace config_detail

inline RationalTuple config_map(const RunConfig& c) { return make_rational_tuple(c.map, c.map_degree); }

// Checks everything that can be checked before a solve, and resolves
// h = "random" into the seeded fixture text. Throws ConfigError or ThresholdError.
inline void validate_config(RunConfig& c) {
  using namespace config_detail;
  if (c.resolution < kMinResolution || c.resolution > kMaxResolution)
    throw ConfigError("$.grid.resolution", "must lie in [" + std::to_string(kMinResolution) + ", " +
                                               std::to_string(kMaxResolution) + "]");
  if (c.workers < 1) throw ConfigError("$.workers", "must be at least 1");
  if (c.out_dir.empty()) throw ConfigError("$.output.dir", "must not be empty");
  const SolverOptions& o = c.solver;
  if (!(o.margin >= 0.0)) throw ConfigError("$.tolerances.margin", "must be nonnegative");
  if (!(o.tol_sup > 0.0)) throw ConfigError("$.tolerances.tol_sup", "must be positive");
  if (!(o.residual_tol > 0.0)) throw ConfigError("$.tolerances.residual_tol", "must be positive");
  if (o.max_iter < 1) throw ConfigError("$.tolerances.max_iter", "must be at least 1");
  if (!(o.violation_tol > 0.0)) throw ConfigError("$.tolerances.violation_tol", "must be positive");

  switch (c.experiment) {
    case ExperimentKind::solve:
    case ExperimentKind::sweep: {
      if (c.h_expression.empty()) throw ConfigError("$.problem.h", "required");
      if (c.h_expression == "random") c.h_expression = random_negative_trig_h(c.grid_kind, c.seed);
      if (!(c.c2 > 0.0)) throw ConfigError("$.problem.c2", "must be positive");
      if (c.experiment == ExperimentKind::sweep && (c.max_order < 0 || c.max_order > 3))
        throw ConfigError("$.sweep.max_order", "must lie in [0, 3]");
      require_s_list(c);
      Expression e;
      try {
        e = parse_scalar_expression(c.h_expression);
      } catch (const ParseError& err) {
        throw ConfigError("$.problem.h", err.what());
      }
      const ManifoldGrid grid = build_grid(c.grid_kind, c.resolution);
      ScalarField h;
      try {
        h = e.sample(grid);
      } catch (const DomainError& err) {
        throw ConfigError("$.problem.h", err.what());
      }
      if (!h.all_finite()) throw ConfigError("$.problem.h", "sampled values are not finite");
      KWProblem p;
      try {
        p = make_problem(grid, h, c.c1, c.c2);
      } catch (const DomainError& err) {
        throw ConfigError("$.problem.h", err.what());
      }
      const double K = bound_K(p, o.margin);
      const double s_min = sub_threshold_s(p, K);
      for (std::size_t i = 0; i < c.s_list.size(); ++i)
        if (!(c.s_list[i] > s_min)) {
          char buf[200];
          std::snprintf(buf, sizeof buf,
                        "$.s_list[%zu]: s = %.17g leaves the sub solution undefined (need -K - c(s) > 0, s > %.6g)", i,
                        c.s_list[i], s_min);
          throw ThresholdError(buf, c.s_list[i], s_min);
        }
      break;
    }
    case ExperimentKind::vortex:
    case ExperimentKind::metric: {
      if (c.grid_kind != GridKind::sphere) throw ConfigError("$.grid.kind", "vortex experiments need the sphere");
      if (c.map.empty()) throw ConfigError("$.map.components", "required");
      RationalTuple m;
      try {
        m = config_map(c);
      } catch (const DomainError& err) {
        throw ConfigError("$.map", err.what());
      }
      const CommonZeroReport z = validate_no_common_zeros(m);
      if (!z.pass) throw ConfigError("$.map", "components share a zero (sampled min " + std::to_string(z.min_value) + ")");
      if (c.experiment == ExperimentKind::metric) {
        if (c.direction.size() != c.map.size()) throw ConfigError("$.family.direction", "needs one entry per map component");
        for (std::size_t i = 0; i < c.direction.size(); ++i)
          if (polynomial_degree(c.direction[i]) > m.degree_r)
            throw ConfigError("$.family.direction[" + std::to_string(i) + "]", "exceeds the map degree");
        if (!(c.fd_step > 0.0)) throw ConfigError("$.family.fd_step", "must be positive");
      }
      require_s_list(c);
      require_existence(c, m.degree_r);
      break;
    }
    case ExperimentKind::volume: {
      require_s_list(c);
      const VolumeParams& v = c.volume;
      if (v.k < 1) throw ConfigError("$.volume.k", "must be at least 1");
      if (v.b < 0) throw ConfigError("$.volume.b", "must be nonnegative");
      if (v.r < 0) throw ConfigError("$.volume.r", "must be nonnegative");
      if (!(v.vol_sigma > 0.0)) throw ConfigError("$.volume.vol_sigma", "must be positive");
      if (v.q() < 0) throw ConfigError("$.volume", "q = b + k (r + 1 - b) - 1 is negative");
      for (std::size_t i = 0; i < c.s_list.size(); ++i) {
        const double s = c.s_list[i];
        if (!(v.vol_sigma - 2.0 * std::numbers::pi * v.r / (s * s) > 0.0))
          throw ThresholdError("$.s_list[" + std::to_string(i) + "]: vol - 2 pi r / s^2 is not positive", s,
                               std::sqrt(2.0 * std::numbers::pi * v.r / v.vol_sigma));
      }
      break;
    }
    case ExperimentKind::blowup: {
      if (c.grid_kind != GridKind::sphere) throw ConfigError("$.grid.kind", "blowup experiments need the sphere");
      if (c.epsilon_list.empty()) throw ConfigError("$.blowup.epsilon_list", "must not be empty");
      for (std::size_t i = 0; i < c.epsilon_list.size(); ++i) {
        const std::string p = "$.blowup.epsilon_list[" + std::to_string(i) + "]";
        if (!(c.epsilon_list[i] > 0.0)) throw ConfigError(p, "epsilon must be positive");
        if (i > 0 && !(c.epsilon_list[i] < c.epsilon_list[i - 1])) throw ConfigError(p, "epsilon_list must be decreasing");
      }
      require_s_list(c);
      require_existence(c, 2);
      break;
    }
  }
}

inline RunConfig config_from_json(const json& j) {
  using namespace config_detail;
  check_keys(j, "$", {"experiment", "grid", "scheme", "problem", "sweep", "map", "family", "volume", "blowup",
                      "s_list", "tolerances", "workers", "seed", "output"});
  RunConfig c;
  if (!j.contains("experiment")) throw ConfigError("$.experiment", "required");
  const auto kind = parse_experiment_kind(get_string(j["experiment"], "$.experiment"));
  if (!kind) throw ConfigError("$.experiment", "must be one of solve, sweep, vortex, metric, volume, blowup");
  c.experiment = *kind;
  if (c.experiment == ExperimentKind::vortex || c.experiment == ExperimentKind::metric ||
      c.experiment == ExperimentKind::blowup) {
    c.grid_kind = GridKind::sphere;
    c.resolution = 48;
  }
  if (j.contains("grid")) {
    const json& g = j["grid"];
    check_keys(g, "$.grid", {"kind", "resolution"});
    if (g.contains("kind")) {
      try {
        c.grid_kind = parse_grid_kind(get_string(g["kind"], "$.grid.kind"));
      } catch (const DomainError& e) {
        throw ConfigError("$.grid.kind", e.what());
      }
    }
    if (g.contains("resolution")) c.resolution = static_cast<int>(get_integer(g["resolution"], "$.grid.resolution"));
  }
  if (j.contains("scheme")) {
    try {
      c.scheme = parse_scheme(get_string(j["scheme"], "$.scheme"));
    } catch (const DomainError& e) {
      throw ConfigError("$.scheme", e.what());
    }
  }
  if (j.contains("problem")) {
    const json& p = j["problem"];
    check_keys(p, "$.problem", {"h", "c1", "c2"});
    if (p.contains("h")) c.h_expression = get_string(p["h"], "$.problem.h");
    if (p.contains("c1")) c.c1 = get_number(p["c1"], "$.problem.c1");
    if (p.contains("c2")) c.c2 = get_number(p["c2"], "$.problem.c2");
  }
  if (j.contains("sweep")) {
    check_keys(j["sweep"], "$.sweep", {"max_order"});
    if (j["sweep"].contains("max_order"))
      c.max_order = static_cast<int>(get_integer(j["sweep"]["max_order"], "$.sweep.max_order"));
  }
  if (j.contains("map")) {
    const json& m = j["map"];
    check_keys(m, "$.map", {"components", "degree"});
    if (m.contains("components")) c.map = get_components(m["components"], "$.map.components");
    if (m.contains("degree")) c.map_degree = static_cast<int>(get_integer(m["degree"], "$.map.degree"));
  }
  if (j.contains("family")) {
    const json& f = j["family"];
    check_keys(f, "$.family", {"direction", "fd_step"});
    if (f.contains("direction")) c.direction = get_components(f["direction"], "$.family.direction");
    if (f.contains("fd_step")) c.fd_step = get_number(f["fd_step"], "$.family.fd_step");
  }
  if (j.contains("volume")) {
    const json& v = j["volume"];
    check_keys(v, "$.volume", {"k", "b", "r", "vol_sigma"});
    if (v.contains("k")) c.volume.k = static_cast<int>(get_integer(v["k"], "$.volume.k"));
    if (v.contains("b")) c.volume.b = static_cast<int>(get_integer(v["b"], "$.volume.b"));
    if (v.contains("r")) c.volume.r = static_cast<int>(get_integer(v["r"], "$.volume.r"));
    if (v.contains("vol_sigma")) c.volume.vol_sigma = get_number(v["vol_sigma"], "$.volume.vol_sigma");
  }
  if (j.contains("blowup")) {
    check_keys(j["blowup"], "$.blowup", {"epsilon_list"});
    if (j["blowup"].contains("epsilon_list"))
      c.epsilon_list = get_number_list(j["blowup"]["epsilon_list"], "$.blowup.epsilon_list");
  }
  if (j.contains("s_list")) c.s_list = get_number_list(j["s_list"], "$.s_list");
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    check_keys(t, "$.tolerances", {"margin", "tol_sup", "residual_tol", "max_iter", "violation_tol"});
    if (t.contains("margin")) c.solver.margin = get_number(t["margin"], "$.tolerances.margin");
    if (t.contains("tol_sup")) c.solver.tol_sup = get_number(t["tol_sup"], "$.tolerances.tol_sup");
    if (t.contains("residual_tol")) c.solver.residual_tol = get_number(t["residual_tol"], "$.tolerances.residual_tol");
    if (t.contains("max_iter")) c.solver.max_iter = static_cast<int>(get_integer(t["max_iter"], "$.tolerances.max_iter"));
    if (t.contains("violation_tol"))
      c.solver.violation_tol = get_number(t["violation_tol"], "$.tolerances.violation_tol");
  }
  if (j.contains("workers")) c.workers = static_cast<int>(get_integer(j["workers"], "$.workers"));
  if (j.contains("seed")) {
    const long long s = get_integer(j["seed"], "$.seed");
    if (s < 0) throw ConfigError("$.seed", "must be nonnegative");
    c.seed = static_cast<std::uint64_t>(s);
  }
  if (j.contains("output")) {
    check_keys(j["output"], "$.output", {"dir"});
    if (j["output"].contains("dir")) c.out_dir = get_string(j["output"]["dir"], "$.output.dir");
  }
  return c;
}

// Every field the run depends on, defaults included. Parsing the echo gives back the same run.
inline json config_to_json(const RunConfig& c) {
  using namespace config_detail;
  json j;
  j["experiment"] = to_string(c.experiment);
  j["grid"] = {{"kind", to_string(c.grid_kind)}, {"resolution", c.resolution}};
  j["scheme"] = c.scheme == Scheme::finite_difference ? "fd" : "spectral";
  switch (c.experiment) {
    case ExperimentKind::solve:
    case ExperimentKind::sweep:
      j["problem"] = {{"h", c.h_expression}, {"c1", c.c1}, {"c2", c.c2}};
      if (c.experiment == ExperimentKind::sweep) j["sweep"] = {{"max_order", c.max_order}};
      break;
    case ExperimentKind::vortex:
    case ExperimentKind::metric:
      j["map"] = {{"components", components_json(c.map)}, {"degree", config_map(c).degree_r}};
      if (c.experiment == ExperimentKind::metric)
        j["family"] = {{"direction", components_json(c.direction)}, {"fd_step", c.fd_step}};
      break;
    case ExperimentKind::volume:
      j["volume"] = {{"k", c.volume.k}, {"b", c.volume.b}, {"r", c.volume.r}, {"vol_sigma", c.volume.vol_sigma}};
      break;
    case ExperimentKind::blowup:
      j["blowup"] = {{"epsilon_list", c.epsilon_list}};
      break;
  }
  j["s_list"] = c.s_list;
  j["tolerances"] = {{"margin", c.solver.margin},
                     {"tol_sup", c.solver.tol_sup},
                     {"residual_tol", c.solver.residual_tol},
                     {"max_iter", c.solver.max_iter},
                     {"violation_tol", c.solver.violation_tol}};
  j["workers"] = c.workers;
  j["seed"] = c.seed;
  j["output"] = {{"dir", c.out_dir}};
  return j;
}

// `adjust` runs between schema parsing and validation (command-line overrides).
inline RunConfig parse_config_text(const std::string& text, const std::string& source = "<config>",
                                   const std::function<void(RunConfig&)>& adjust = {}) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source, std::string("not valid JSON: ") + e.what());
  }
  RunConfig c = config_from_json(j);
  if (adjust) adjust(c);
  validate_config(c);
  return c;
}

inline RunConfig parse_config(const std::string& path, const std::function<void(RunConfig&)>& adjust = {}) {
  std::ifstream in(path);
  if (!in) throw IoError(path + ": cannot open config");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path, adjust);
}

}  // namespace kwv
