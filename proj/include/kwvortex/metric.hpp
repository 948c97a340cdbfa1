#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "kwvortex/operators.hpp"
#include "kwvortex/vortex_geometry.hpp"

namespace kwv {

// p(t) = base + t * direction, one curve through the space of maps.
struct MapFamily {
  RationalTuple base;
  std::vector<Polynomial> direction;
  double fd_step = 1e-3;

  RationalTuple at(double t) const {
    if (direction.size() != base.components.size())
      throw DomainError("map family direction has the wrong number of components");
    std::vector<Polynomial> comps = base.components;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      if (polynomial_degree(direction[i]) > base.degree_r)
        throw DomainError("map family direction exceeds the base degree");
      for (std::size_t d = 0; d < direction[i].size(); ++d) comps[i][d] += t * direction[i][d];
    }
    return make_rational_tuple(std::move(comps), base.degree_r);
  }
};

struct TangentData {
  ScalarField Hdot_over_H;
  ScalarField psi_dot;
  ScalarField phi_s_dot;
  ScalarField u_s_dot;
  ScalarField section_dot_norm_sq;
  double step_halving_disagreement = 0.0;
  // Base-point quantities the metric needs.
  PullbackData base;
  VortexSolution vortex;
};

inline constexpr double kStepHalvingTolerance = 1e-4;

// (|pdot|^2 - |<pdot, p>|^2 / |p|^2) / |p|^2: the norm of the projection of pdot
// orthogonal to p, measured in the Fubini-Study metric.
inline double projected_norm_sq(const std::vector<std::complex<double>>& p,
                                const std::vector<std::complex<double>>& pdot) {
  double pp = 0.0, dd = 0.0;
  std::complex<double> dp = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    pp += std::norm(p[i]);
    dd += std::norm(pdot[i]);
    dp += pdot[i] * std::conj(p[i]);
  }
  return (dd - std::norm(dp) / pp) / pp;
}

inline TangentData tangent_data(const MapFamily& family, const ManifoldGrid& grid, double s,
                                const SolverOptions& opt = {}) {
  if (!(family.fd_step > 0.0)) throw DomainError("fd_step must be positive");
  TangentData td;
  td.base = pullback_data(family.base, grid);
  td.vortex = solve_vortex(td.base, s, opt);
  struct Diff {
    ScalarField w, psi, phi;
  };
  const auto central = [&](double step) {
    const PullbackData plus = pullback_data(family.at(step), grid);
    const PullbackData minus = pullback_data(family.at(-step), grid);
    const VortexSolution vp = solve_vortex(plus, s, opt);
    const VortexSolution vm = solve_vortex(minus, s, opt);
    const double inv = 1.0 / (2.0 * step);
    return Diff{(plus.log_weight - minus.log_weight) * inv, (plus.psi - minus.psi) * inv,
                (vp.phi_s - vm.phi_s) * inv};
  };
  const Diff full = central(family.fd_step);
  const Diff half = central(0.5 * family.fd_step);
  const auto rel = [](const ScalarField& a, const ScalarField& b) {
    return (a - b).sup_abs() / std::max(b.sup_abs(), 1e-8);
  };
  td.step_halving_disagreement =
      std::max({rel(full.w, half.w), rel(full.psi, half.psi), rel(full.phi, half.phi)});
  if (td.step_halving_disagreement > kStepHalvingTolerance)
    throw SolverError("tangent finite differences disagree under step halving by " +
                      std::to_string(td.step_halving_disagreement));
  td.Hdot_over_H = full.w;
  td.psi_dot = full.psi;
  td.phi_s_dot = full.phi;
  td.u_s_dot = td.phi_s_dot * 0.5 + td.psi_dot;
  td.section_dot_norm_sq = ScalarField(grid.size());
  std::vector<std::complex<double>> p(family.base.components.size()), pd(p.size());
  for (std::size_t node = 0; node < grid.size(); ++node) {
    const auto z = grid.chart_point(node);
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = polynomial_eval(family.base.components[i], z);
      pd[i] = polynomial_eval(family.direction[i], z);
    }
    td.section_dot_norm_sq[node] = projected_norm_sq(p, pd);
  }
  return td;
}

struct MetricValue {
  double first_term = 0.0;
  double second_term = 0.0;
  double J = 0.0;
  double g = 0.0;
  double min_h_e_phi = 0.0;  // min and max of -h_thm e^{phi_s}
  double max_h_e_phi = 0.0;
  double step_halving_disagreement = 0.0;
};

inline MetricValue pullback_metric_value(const TangentData& td, double s) {
  const ManifoldGrid& grid = td.base.grid;
  const ComplexField a = chart_dz(grid, td.Hdot_over_H);
  const ComplexField b = chart_dz(grid, td.phi_s_dot);
  const ComplexField c = chart_dz(grid, td.psi_dot);
  ScalarField conn(grid.size()), sec(grid.size());
  MetricValue mv;
  mv.min_h_e_phi = std::numeric_limits<double>::infinity();
  mv.max_h_e_phi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    conn[i] = std::norm(a[i] + b[i] + 2.0 * c[i]) / (4.0 * s * s);
    const double weight = -td.base.h_thm[i] * std::exp(td.vortex.phi_s[i]);
    mv.min_h_e_phi = std::min(mv.min_h_e_phi, weight);
    mv.max_h_e_phi = std::max(mv.max_h_e_phi, weight);
    sec[i] = td.section_dot_norm_sq[i] * weight;
  }
  mv.first_term = integrate(grid, conn);
  mv.second_term = integrate(grid, sec);
  mv.J = integrate(grid, td.section_dot_norm_sq);
  mv.g = mv.first_term + mv.second_term;
  mv.step_halving_disagreement = td.step_halving_disagreement;
  return mv;
}

inline MetricValue pullback_metric_value(const MapFamily& family, const ManifoldGrid& grid, double s,
                                         const SolverOptions& opt = {}) {
  return pullback_metric_value(tangent_data(family, grid, s, opt), s);
}

struct MetricReport {
  std::vector<double> s_list;
  std::vector<double> first_term;
  std::vector<double> second_term;
  std::vector<double> ratio;      // (first + second) / J
  std::vector<double> deviation;  // |ratio - 1/2|
  double J = 0.0;
  double first_term_decay_order = 0.0;  // least-squares slope of -log(first) against log(s)
  // per s
  std::vector<double> K, k_coeff;
  std::vector<int> iterations;
  std::vector<double> min_h_e_phi, max_h_e_phi;
  std::vector<double> step_halving_disagreement;
};

inline MetricReport metric_limit_report(const MapFamily& family, const ManifoldGrid& grid,
                                        const std::vector<double>& s_list, const SolverOptions& opt = {},
                                        int workers = 1) {
  if (s_list.empty()) throw DomainError("metric_limit_report: empty s list");
  for (double s : s_list)
    if (!existence_threshold(family.base, s))
      throw ThresholdError("s = " + std::to_string(s) + " below the existence threshold", s,
                           std::sqrt(4.0 * std::numbers::pi * family.base.degree_r));
  struct Point {
    MetricValue v;
    SolveResult solve;
  };
  const auto values = parallel_for_each_index(s_list.size(), workers, [&](std::size_t i) {
    const TangentData td = tangent_data(family, grid, s_list[i], opt);
    return Point{pullback_metric_value(td, s_list[i]), td.vortex.solve};
  });
  MetricReport rep;
  rep.s_list = s_list;
  for (const auto& [v, solve] : values) {
    rep.K.push_back(solve.K);
    rep.k_coeff.push_back(solve.k_coeff);
    rep.iterations.push_back(solve.iterations);
    rep.min_h_e_phi.push_back(v.min_h_e_phi);
    rep.max_h_e_phi.push_back(v.max_h_e_phi);
    rep.step_halving_disagreement.push_back(v.step_halving_disagreement);
    rep.first_term.push_back(v.first_term);
    rep.second_term.push_back(v.second_term);
    rep.ratio.push_back(v.g / v.J);
    rep.deviation.push_back(std::abs(v.g / v.J - 0.5));
    rep.J = v.J;
  }
  if (s_list.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(s_list.size());
    for (std::size_t i = 0; i < s_list.size(); ++i) {
      const double x = std::log(s_list[i]), y = -std::log(rep.first_term[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    rep.first_term_decay_order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return rep;
}

struct VolumeParams {
  int k = 2;
  int b = 0;
  int r = 1;
  double s = 0.0;
  double vol_sigma = 1.0;
  int q() const noexcept { return b + k * (r + 1 - b) - 1; }
};

namespace detail {
inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}
inline void validate_volume_params(const VolumeParams& p) {
  if (p.k < 1 || p.b < 0 || p.r < 0) throw DomainError("volume parameters need k >= 1, b >= 0, r >= 0");
  if (p.q() < 0) throw DomainError("volume parameters give q < 0");
  if (!(p.vol_sigma > 0.0)) throw DomainError("vol_sigma must be positive");
}
}  // namespace detail

// pi^q sum_{i=0}^{b} b! k^{b-i} / (i! (q-i)! (b-i)!) (2 pi / s^2)^i (vol - 2 pi r / s^2)^{q-i}
inline double volume_formula(const VolumeParams& p) {
  detail::validate_volume_params(p);
  using std::numbers::pi;
  const int q = p.q();
  const double s2 = p.s * p.s;
  const double bracket = p.vol_sigma - 2.0 * pi * p.r / s2;
  if (!(bracket > 0.0)) throw ThresholdError("volume bracket vol - 2 pi r / s^2 is nonpositive", p.s, std::sqrt(2.0 * pi * p.r / p.vol_sigma));
  double sum = 0.0;
  for (int i = 0; i <= std::min(p.b, q); ++i) {
    const double coeff = detail::factorial(p.b) * std::pow(static_cast<double>(p.k), p.b - i) /
                         (detail::factorial(i) * detail::factorial(q - i) * detail::factorial(p.b - i));
    sum += coeff * std::pow(2.0 * pi / s2, i) * std::pow(bracket, q - i);
  }
  return std::pow(pi, q) * sum;
}

// k^b (pi vol)^q / q!
inline double volume_limit(const VolumeParams& p) {
  detail::validate_volume_params(p);
  const int q = p.q();
  return std::pow(static_cast<double>(p.k), p.b) * std::pow(std::numbers::pi * p.vol_sigma, q) /
         detail::factorial(q);
}

}  // namespace kwv
