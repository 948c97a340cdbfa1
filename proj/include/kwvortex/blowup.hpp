#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "kwvortex/vortex_geometry.hpp"

namespace kwv {

// (z^2 - eps, z^2 + eps): the two sections share the zero z = 0 in the limit.
inline RationalTuple quadratic_degeneration(double eps) {
  return make_rational_tuple({{-eps, 0.0, 1.0}, {eps, 0.0, 1.0}}, 2);
}

struct DegenerationFamily {
  std::vector<double> epsilon_list;  // positive, decreasing
  std::vector<double> s_list;        // increasing
  std::function<RationalTuple(double)> map_builder = quadratic_degeneration;
};

struct BlowupRow {
  double epsilon = 0.0;
  double s = 0.0;
  bool converged = false;
  std::string failure;  // solver message when not converged
  int iterations = 0;
  double K = 0.0;
  double sup_phi = 0.0;
  double sup_phi_minus_limit = 0.0;
  double sup_density = 0.0;  // s^2 (-h) e^phi
  double radius_50 = 0.0;    // geodesic radius holding half the density mass
  double mass_identity = 0.0;  // integral of c(s) - s^2 h e^phi
  double chern_weil_correction = 0.0;
};

struct BlowupTrend {
  double epsilon = 0.0;
  bool sup_phi_growing = false;   // across every s doubling
  bool radius_shrinking = false;
  double sup_phi_exponent = 0.0;  // least-squares slope of log sup|phi| against log s
};

struct BlowupReport {
  std::vector<BlowupRow> rows;
  std::vector<BlowupTrend> trends;
};

// Geodesic radius, on the unit-area sphere, of the smallest cap about
// (theta0, lambda0) carrying half the integral of density.
inline double half_mass_radius(const ManifoldGrid& grid, const ScalarField& density, double theta0,
                               double lambda0) {
  const auto coords = grid.coordinates();
  const auto w = grid.weights();
  const double radius = 1.0 / std::sqrt(4.0 * std::numbers::pi);
  std::vector<std::pair<double, double>> pts;
  pts.reserve(grid.size());
  double total = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double th = coords[i][0], lam = coords[i][1];
    const double cosd = std::cos(th) * std::cos(theta0) + std::sin(th) * std::sin(theta0) * std::cos(lam - lambda0);
    pts.emplace_back(radius * std::acos(std::clamp(cosd, -1.0, 1.0)), w[i] * density[i]);
    total += w[i] * density[i];
  }
  std::sort(pts.begin(), pts.end());
  double acc = 0.0, prev_d = 0.0, prev_acc = 0.0;
  std::size_t i = 0;
  while (i < pts.size()) {
    const double d = pts[i].first;
    double bin = 0.0;
    while (i < pts.size() && pts[i].first <= d + 1e-14) bin += pts[i++].second;
    acc += bin;
    if (acc >= 0.5 * total) {
      const double frac = bin > 0.0 ? (0.5 * total - prev_acc) / (acc - prev_acc) : 1.0;
      return prev_d + frac * (d - prev_d);
    }
    prev_d = d;
    prev_acc = acc;
  }
  return prev_d;
}

inline BlowupRow blowup_point(const RationalTuple& map, double eps, double s, const ManifoldGrid& grid,
                              const SolverOptions& base_opt) {
  BlowupRow row;
  row.epsilon = eps;
  row.s = s;
  PullbackOptions popt;
  popt.enforce_chern_weil = false;
  const PullbackData d = pullback_data(map, grid, popt);
  row.chern_weil_correction = d.chern_weil_correction;
  SolverOptions opt = base_opt;
  opt.allow_undefined_sub = true;
  try {
    const VortexSolution v = solve_vortex(d, s, opt, true);
    const KWProblem p = vortex_problem(d, true);
    row.converged = true;
    row.iterations = v.solve.iterations;
    row.K = v.solve.K;
    row.sup_phi = v.phi_s.sup_abs();
    row.sup_phi_minus_limit = (v.phi_s - adiabatic_limit_field(p)).sup_abs();
    ScalarField density(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) density[i] = s * s * (-p.h[i]) * std::exp(v.phi_s[i]);
    row.sup_density = density.sup_abs();
    row.radius_50 = half_mass_radius(grid, density, d.zeros.theta_at_min, d.zeros.lambda_at_min);
    row.mass_identity = integrate(grid, density) + p.c(s);
  } catch (const SolverError& e) {
    row.converged = false;
    row.failure = e.what();
  }
  return row;
}

inline BlowupReport degeneration_sweep(const DegenerationFamily& family, const ManifoldGrid& grid,
                                       const SolverOptions& opt = {}, int workers = 1) {
  for (std::size_t i = 0; i < family.epsilon_list.size(); ++i) {
    if (!(family.epsilon_list[i] > 0.0)) throw DomainError("degeneration epsilons must be positive");
    if (i > 0 && !(family.epsilon_list[i] < family.epsilon_list[i - 1]))
      throw DomainError("degeneration epsilons must be decreasing");
  }
  for (std::size_t i = 1; i < family.s_list.size(); ++i)
    if (!(family.s_list[i] > family.s_list[i - 1])) throw DomainError("s list must be increasing");
  struct Job {
    double eps, s;
  };
  std::vector<Job> jobs;
  for (double e : family.epsilon_list)
    for (double s : family.s_list) {
      if (!existence_threshold(family.map_builder(e), s))
        throw ThresholdError("s = " + std::to_string(s) + " below the existence threshold", s,
                             std::sqrt(4.0 * std::numbers::pi * family.map_builder(e).degree_r));
      jobs.push_back({e, s});
    }
  BlowupReport rep;
  rep.rows = parallel_for_each_index(jobs.size(), workers, [&](std::size_t i) {
    return blowup_point(family.map_builder(jobs[i].eps), jobs[i].eps, jobs[i].s, grid, opt);
  });
  for (double e : family.epsilon_list) {
    BlowupTrend t;
    t.epsilon = e;
    t.sup_phi_growing = true;
    t.radius_shrinking = true;
    std::vector<const BlowupRow*> rows;
    for (const auto& r : rep.rows)
      if (r.epsilon == e) rows.push_back(&r);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!rows[i]->converged) {
        t.sup_phi_growing = t.radius_shrinking = false;
        continue;
      }
      const double x = std::log(rows[i]->s), y = std::log(rows[i]->sup_phi);
      sx += x, sy += y, sxx += x * x, sxy += x * y, ++n;
      if (i > 0 && rows[i - 1]->converged) {
        t.sup_phi_growing = t.sup_phi_growing && rows[i]->sup_phi > rows[i - 1]->sup_phi;
        t.radius_shrinking = t.radius_shrinking && rows[i]->radius_50 < rows[i - 1]->radius_50;
      }
    }
    if (n >= 2) t.sup_phi_exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    rep.trends.push_back(t);
  }
  return rep;
}

}  // namespace kwv
