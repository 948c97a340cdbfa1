#pragma once

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "kwvortex/blowup.hpp"
#include "kwvortex/config.hpp"
#include "kwvortex/expression.hpp"
#include "kwvortex/kw_solver.hpp"
#include "kwvortex/metric.hpp"
#include "kwvortex/report.hpp"
#include "kwvortex/vortex_geometry.hpp"

namespace kwv {

namespace experiment_detail {

inline std::string hash_hex(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline nlohmann::ordered_json grid_metadata(const ManifoldGrid& g) {
  return {{"kind", to_string(g.kind())}, {"resolution", g.resolution()}, {"nodes", g.size()},
          {"hash", hash_hex(g.hash())}};
}

inline SolverOptions solver_options(const RunConfig& c) {
  SolverOptions o = c.solver;
  o.scheme = c.scheme;
  return o;
}

inline KWProblem config_problem(const RunConfig& c, const ManifoldGrid& grid) {
  const ScalarField h = parse_scalar_expression(c.h_expression).sample(grid);
  return make_problem(grid, h, c.c1, c.c2);
}

inline void add_solver_metadata(Report& r, const RunConfig& c) {
  r.metadata["solver_scheme"] = to_string(c.scheme);
  r.metadata["k_coeff_rule"] = "per s: (1 + margin) max(-h e^{phi_+}) with margin " + format_double(c.solver.margin);
}

inline Report solve_report(const RunConfig& c, const ManifoldGrid& grid) {
  Report r;
  const KWProblem p = config_problem(c, grid);
  const SolverOptions opt = solver_options(c);
  const auto results = parallel_for_each_index(c.s_list.size(), c.workers,
                                               [&](std::size_t i) { return monotone_solve(p, c.s_list[i], opt); });
  Table t{"solve",
          {"s", "K", "k_coeff", "sigma", "iterations", "residual_sup", "residual_sup_spectral", "monotonicity_margin",
           "min_phi", "max_phi", "gap_super_sub"},
          {}};
  Table fields{"fields", {"node", "x", "y", "h"}, {}};
  for (std::size_t i = 0; i < results.size(); ++i) fields.columns.push_back("phi_" + std::to_string(i));
  nlohmann::ordered_json per_s = nlohmann::ordered_json::array();
  for (const auto& res : results) {
    double gap = 0.0;
    for (std::size_t n = 0; n < res.phi_s.size(); ++n) gap = std::max(gap, res.phi_super[n] - res.phi_sub[n]);
    t.add_row({res.s, res.K, res.k_coeff, res.sigma, static_cast<long long>(res.iterations), res.residual_sup,
               res.residual_sup_spectral, res.monotonicity_margin, res.phi_s.min(), res.phi_s.max(), gap});
    per_s.push_back({{"s", res.s}, {"K", res.K}, {"k_coeff", res.k_coeff}});
  }
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const auto u = grid.unit_coordinates(n);
    std::vector<Cell> row{static_cast<long long>(n), u[0], u[1], p.h[n]};
    for (const auto& res : results) row.emplace_back(res.phi_s[n]);
    fields.add_row(std::move(row));
  }
  if (grid.kind() == GridKind::circle)
    for (std::size_t i = 0; i < results.size(); ++i) {
      Series s{"phi_" + std::to_string(i), "x", "phi_s(s=" + format_double(results[i].s) + ")", {}};
      for (std::size_t n = 0; n < grid.size(); ++n) s.points.emplace_back(grid.unit_coordinates(n)[0], results[i].phi_s[n]);
      r.series.push_back(std::move(s));
    }
  r.metadata["h_max"] = p.h_max;
  r.metadata["per_s"] = per_s;
  r.summary["max_residual_sup"] = 0.0;
  for (const auto& res : results)
    r.summary["max_residual_sup"] = std::max(r.summary["max_residual_sup"].get<double>(), res.residual_sup);
  r.tables.push_back(std::move(t));
  r.tables.push_back(std::move(fields));
  return r;
}

inline Report sweep_report(const RunConfig& c, const ManifoldGrid& grid) {
  Report r;
  const KWProblem p = config_problem(c, grid);
  const SweepTable st = convergence_sweep(p, c.s_list, c.max_order, solver_options(c), c.workers);
  Table t{"sweep", {"s", "sup_err_linf"}, {}};
  for (int o = 1; o <= c.max_order; ++o) t.columns.push_back("sup_err_d" + std::to_string(o));
  for (const char* col : {"gap_super_sub", "claim_s2_exp_diff", "residual_sup", "iterations"}) t.columns.push_back(col);
  Table extra{"sweep_diagnostics", {"s", "sup_E", "residual_sup_spectral", "K", "k_coeff"}, {}};
  Series err{"sup_err_linf", "s", "sup|phi_s - phi_inf|", {}};
  Series claim{"claim_s2_exp_diff", "s", "sup|s^2 (e^phi_s - e^v_s)|", {}};
  Series gap{"gap_super_sub", "s", "sup(phi_+ - phi_-)", {}};
  nlohmann::ordered_json per_s = nlohmann::ordered_json::array();
  for (const auto& row : st.rows) {
    std::vector<Cell> cells{row.s, row.sup_err_linf};
    for (double d : row.sup_err_derivatives) cells.emplace_back(d);
    cells.emplace_back(row.gap_super_sub);
    cells.emplace_back(row.claim_s2_exp_diff);
    cells.emplace_back(row.residual_sup);
    cells.emplace_back(static_cast<long long>(row.iterations));
    t.add_row(std::move(cells));
    extra.add_row({row.s, row.sup_E, row.residual_sup_spectral, row.K, row.k_coeff});
    err.points.emplace_back(row.s, row.sup_err_linf);
    claim.points.emplace_back(row.s, row.claim_s2_exp_diff);
    gap.points.emplace_back(row.s, row.gap_super_sub);
    per_s.push_back({{"s", row.s}, {"K", row.K}, {"k_coeff", row.k_coeff}});
  }
  Table rates{"rates", {"s_from", "s_to", "log2_err_ratio"}, {}};
  for (std::size_t i = 0; i < st.rates.size(); ++i) rates.add_row({st.rows[i].s, st.rows[i + 1].s, st.rates[i]});
  r.metadata["h_max"] = p.h_max;
  r.metadata["per_s"] = per_s;
  r.summary["rates"] = st.rates;
  r.tables = {std::move(t), std::move(extra), std::move(rates)};
  r.series = {std::move(err), std::move(claim), std::move(gap)};
  return r;
}

inline Report vortex_report(const RunConfig& c, const ManifoldGrid& grid) {
  Report r;
  const PullbackData d = pullback_data(config_map(c), grid);
  const SolverOptions opt = solver_options(c);
  const auto sols = parallel_for_each_index(c.s_list.size(), c.workers,
                                            [&](std::size_t i) { return solve_vortex(d, c.s_list[i], opt); });
  Table t{"vortex",
          {"s", "u_min", "u_max", "u_oscillation", "sup_e2u_sections_minus_tau", "third_eq_residual_sup", "iterations",
           "K", "k_coeff"},
          {}};
  Series dev{"adiabatic_deviation", "s", "sup|e^{2u} |p|^2_H - 1|", {}};
  nlohmann::ordered_json per_s = nlohmann::ordered_json::array();
  for (const auto& v : sols) {
    double dmax = 0.0;
    for (std::size_t n = 0; n < grid.size(); ++n)
      dmax = std::max(dmax, std::abs(std::exp(2.0 * v.u_s[n]) * d.section_norms_sq[n] - d.tau));
    t.add_row({v.s, v.u_s.min(), v.u_s.max(), v.u_s.max() - v.u_s.min(), dmax, v.third_eq_residual_sup,
               static_cast<long long>(v.solve.iterations), v.solve.K, v.solve.k_coeff});
    dev.points.emplace_back(v.s, dmax);
    per_s.push_back({{"s", v.s}, {"K", v.solve.K}, {"k_coeff", v.solve.k_coeff}});
  }
  r.metadata["per_s"] = per_s;
  r.metadata["c1_geom"] = d.c1_geom;
  r.metadata["c1_quadrature"] = d.c1_quadrature;
  r.metadata["chern_weil_correction"] = d.chern_weil_correction;
  r.metadata["common_zero_min"] = d.zeros.min_value;
  r.summary["degree"] = d.map.degree_r;
  r.tables.push_back(std::move(t));
  r.series.push_back(std::move(dev));
  return r;
}

inline Report metric_report(const RunConfig& c, const ManifoldGrid& grid) {
  Report r;
  MapFamily fam{config_map(c), c.direction, c.fd_step};
  const MetricReport m = metric_limit_report(fam, grid, c.s_list, solver_options(c), c.workers);
  Table t{"metric", {"s", "first_term", "second_term", "ratio", "J"}, {}};
  Table extra{"metric_diagnostics",
              {"s", "deviation", "min_h_e_phi", "max_h_e_phi", "step_halving_disagreement", "iterations", "K", "k_coeff"},
              {}};
  Series ratio{"ratio", "s", "g_s/J", {}};
  Series first{"first_term", "s", "first_term", {}};
  nlohmann::ordered_json per_s = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < m.s_list.size(); ++i) {
    t.add_row({m.s_list[i], m.first_term[i], m.second_term[i], m.ratio[i], m.J});
    extra.add_row({m.s_list[i], m.deviation[i], m.min_h_e_phi[i], m.max_h_e_phi[i], m.step_halving_disagreement[i],
                   static_cast<long long>(m.iterations[i]), m.K[i], m.k_coeff[i]});
    ratio.points.emplace_back(m.s_list[i], m.ratio[i]);
    first.points.emplace_back(m.s_list[i], m.first_term[i]);
    per_s.push_back({{"s", m.s_list[i]}, {"K", m.K[i]}, {"k_coeff", m.k_coeff[i]}});
  }
  r.metadata["per_s"] = per_s;
  r.summary["J"] = m.J;
  r.summary["first_term_decay_order"] = m.first_term_decay_order;
  r.summary["final_deviation"] = m.deviation.back();
  r.tables = {std::move(t), std::move(extra)};
  r.series = {std::move(ratio), std::move(first)};
  return r;
}

inline Report volume_report(const RunConfig& c) {
  Report r;
  Table t{"volume", {"s", "volume", "limit", "relative_difference"}, {}};
  Series s{"volume", "s", "Vol(s)", {}};
  double limit = volume_limit(c.volume);
  for (double sv : c.s_list) {
    VolumeParams p = c.volume;
    p.s = sv;
    const double v = volume_formula(p);
    t.add_row({sv, v, limit, (v - limit) / limit});
    s.points.emplace_back(sv, v);
  }
  r.summary["q"] = c.volume.q();
  r.summary["limit"] = limit;
  r.tables.push_back(std::move(t));
  r.series.push_back(std::move(s));
  return r;
}

inline Report blowup_report(const RunConfig& c, const ManifoldGrid& grid) {
  Report r;
  DegenerationFamily fam{c.epsilon_list, c.s_list, quadratic_degeneration};
  const BlowupReport b = degeneration_sweep(fam, grid, solver_options(c), c.workers);
  Table t{"blowup",
          {"epsilon", "s", "converged", "iterations", "K", "sup_phi", "sup_phi_minus_limit", "sup_density", "radius_50",
           "mass_identity", "chern_weil_correction"},
          {}};
  Table tr{"blowup_trends", {"epsilon", "sup_phi_growing", "radius_shrinking", "sup_phi_exponent"}, {}};
  nlohmann::ordered_json failures = nlohmann::ordered_json::array();
  for (const auto& row : b.rows) {
    t.add_row({row.epsilon, row.s, static_cast<long long>(row.converged), static_cast<long long>(row.iterations), row.K,
               row.sup_phi, row.sup_phi_minus_limit, row.sup_density, row.radius_50, row.mass_identity,
               row.chern_weil_correction});
    if (!row.converged) failures.push_back({{"epsilon", row.epsilon}, {"s", row.s}, {"failure", row.failure}});
  }
  for (const auto& e : b.trends) {
    tr.add_row({e.epsilon, static_cast<long long>(e.sup_phi_growing), static_cast<long long>(e.radius_shrinking),
                e.sup_phi_exponent});
    Series s{"sup_phi_eps_" + std::to_string(r.series.size()), "s", "sup|phi_s| (epsilon=" + format_double(e.epsilon) + ")",
             {}};
    for (const auto& row : b.rows)
      if (row.epsilon == e.epsilon && row.converged) s.points.emplace_back(row.s, row.sup_phi);
    r.series.push_back(std::move(s));
  }
  r.metadata["chern_weil_enforced"] = false;
  r.summary["failures"] = failures;
  r.tables = {std::move(t), std::move(tr)};
  return r;
}

}  // namespace experiment_detail

// Runs a validated config. Tables depend only on the config, so identical
// configs give byte-identical output.
inline Report run_experiment(const RunConfig& c) {
  using namespace experiment_detail;
  Report r;
  std::optional<ManifoldGrid> grid;
  if (c.experiment != ExperimentKind::volume) grid = build_grid(c.grid_kind, c.resolution);
  switch (c.experiment) {
    case ExperimentKind::solve: r = solve_report(c, *grid); break;
    case ExperimentKind::sweep: r = sweep_report(c, *grid); break;
    case ExperimentKind::vortex: r = vortex_report(c, *grid); break;
    case ExperimentKind::metric: r = metric_report(c, *grid); break;
    case ExperimentKind::volume: r = volume_report(c); break;
    case ExperimentKind::blowup: r = blowup_report(c, *grid); break;
  }
  r.config_echo = config_to_json(c);
  nlohmann::ordered_json meta;
  meta["experiment"] = to_string(c.experiment);
  if (grid) meta["grid"] = grid_metadata(*grid);
  if (c.experiment != ExperimentKind::volume) add_solver_metadata(r, c);
  for (auto it = r.metadata.begin(); it != r.metadata.end(); ++it) meta[it.key()] = it.value();
  r.metadata = std::move(meta);
  return r;
}

}  // namespace kwv
