#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "kwvortex/kw_solver.hpp"
#include "kwvortex/manifold.hpp"
#include "kwvortex/operators.hpp"

namespace kwv {

using Polynomial = std::vector<std::complex<double>>;  // coefficients low to high degree

inline int polynomial_degree(const Polynomial& p) {
  for (int d = static_cast<int>(p.size()) - 1; d >= 0; --d)
    if (p[static_cast<std::size_t>(d)] != std::complex<double>(0.0)) return d;
  return -1;
}

inline std::complex<double> polynomial_eval(const Polynomial& p, std::complex<double> z) {
  std::complex<double> acc = 0.0;
  for (std::size_t i = p.size(); i-- > 0;) acc = acc * z + p[i];
  return acc;
}

inline Polynomial polynomial_derivative(const Polynomial& p) {
  Polynomial d;
  for (std::size_t i = 1; i < p.size(); ++i) d.push_back(static_cast<double>(i) * p[i]);
  return d;
}

inline Polynomial polynomial_multiply(const Polynomial& a, const Polynomial& b) {
  if (a.empty() || b.empty()) return {};
  Polynomial out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

inline Polynomial polynomial_subtract(Polynomial a, const Polynomial& b) {
  if (a.size() < b.size()) a.resize(b.size(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i) a[i] -= b[i];
  return a;
}

// Degree-r map CP^1 -> CP^{k-1} in the affine chart, [p_1(z) : ... : p_k(z)].
struct RationalTuple {
  int k = 0;
  int degree_r = 0;
  std::vector<Polynomial> components;

  // Leading (degree-r) coefficients: the map's value at z = infinity.
  std::vector<std::complex<double>> at_infinity() const {
    std::vector<std::complex<double>> out;
    for (const auto& p : components)
      out.push_back(p.size() > static_cast<std::size_t>(degree_r) ? p[static_cast<std::size_t>(degree_r)] : 0.0);
    return out;
  }

  // sum |p_i(z)|^2 / (1 + |z|^2)^r, continuous on the whole sphere.
  double homogenized_norm(std::complex<double> z) const {
    double acc = 0.0;
    const double rho2 = std::norm(z);
    if (rho2 > 1e8) {
      // Evaluate through w = 1/z: p_i(z) / z^r = sum_d a_d w^{r-d}.
      const std::complex<double> w = 1.0 / z;
      for (const auto& p : components) {
        std::complex<double> v = 0.0;
        for (std::size_t d = 0; d < p.size(); ++d) v += p[d] * std::pow(w, degree_r - static_cast<int>(d));
        acc += std::norm(v);
      }
      return acc / std::pow(1.0 + 1.0 / rho2, degree_r);
    }
    for (const auto& p : components) acc += std::norm(polynomial_eval(p, z));
    return acc / std::pow(1.0 + rho2, degree_r);
  }

  double homogenized_norm_at_infinity() const {
    double acc = 0.0;
    for (const auto& a : at_infinity()) acc += std::norm(a);
    return acc;
  }
};

// degree_r < 0 infers r as the largest component degree.
inline RationalTuple make_rational_tuple(std::vector<Polynomial> components, int degree_r = -1) {
  if (components.size() < 2) throw DomainError("rational map needs k >= 2 components");
  int maxdeg = -1;
  for (const auto& p : components) {
    for (const auto& c : p)
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
        throw DomainError("rational map has non-finite coefficients");
    maxdeg = std::max(maxdeg, polynomial_degree(p));
  }
  if (maxdeg < 0) throw DomainError("rational map components are all identically zero");
  if (degree_r < 0) degree_r = maxdeg;
  if (degree_r < 1) throw DomainError("rational map degree must be >= 1");
  if (maxdeg != degree_r)
    throw DomainError("no component has degree exactly r = " + std::to_string(degree_r));
  RationalTuple m;
  m.k = static_cast<int>(components.size());
  m.degree_r = degree_r;
  for (auto& p : components) {
    p.resize(static_cast<std::size_t>(degree_r) + 1, 0.0);
    m.components.push_back(std::move(p));
  }
  return m;
}

struct CommonZeroReport {
  double min_value = 0.0;    // sampled minimum of the homogenized section norm
  double theta_at_min = 0.0;  // colatitude of the minimizer (pi is z = 0)
  double lambda_at_min = 0.0;
  bool pass = false;
};

inline constexpr double kCommonZeroThreshold = 1e-10;

// Dense colatitude/longitude sampling including both poles, then a shrinking
// pattern search around the best samples.
inline CommonZeroReport validate_no_common_zeros(const RationalTuple& map, int nlat = 257, int nlon = 512) {
  using std::numbers::pi;
  const auto value = [&](double th, double lam) {
    if (th <= 0.0) return map.homogenized_norm_at_infinity();
    return map.homogenized_norm(std::polar(1.0 / std::tan(0.5 * std::min(th, pi)), lam));
  };
  struct Sample {
    double v, th, lam;
  };
  std::vector<Sample> samples;
  samples.push_back({value(0.0, 0.0), 0.0, 0.0});
  samples.push_back({value(pi, 0.0), pi, 0.0});
  for (int i = 1; i < nlat - 1; ++i) {
    const double th = pi * i / (nlat - 1);
    for (int j = 0; j < nlon; ++j) {
      const double lam = 2.0 * pi * j / nlon;
      samples.push_back({value(th, lam), th, lam});
    }
  }
  const std::size_t keep = std::min<std::size_t>(8, samples.size());
  std::partial_sort(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(keep), samples.end(),
                    [](const Sample& a, const Sample& b) { return a.v < b.v; });
  Sample best = samples.front();
  for (std::size_t c = 0; c < keep; ++c) {
    Sample cur = samples[c];
    double step_th = pi / (nlat - 1), step_lam = 2.0 * pi / nlon;
    while (step_th > 1e-12) {
      bool moved = false;
      for (const auto& d : {std::array<double, 2>{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        const double th = std::clamp(cur.th + d[0] * step_th, 0.0, pi);
        const double lam = cur.lam + d[1] * step_lam;
        const double v = value(th, lam);
        if (v < cur.v) {
          cur = {v, th, lam};
          moved = true;
        }
      }
      if (!moved) {
        step_th *= 0.5;
        step_lam *= 0.5;
      }
    }
    if (cur.v < best.v) best = cur;
  }
  CommonZeroReport rep;
  rep.min_value = best.v;
  rep.theta_at_min = best.th;
  rep.lambda_at_min = std::fmod(best.lam + 4.0 * pi, 2.0 * pi);
  rep.pass = best.v > kCommonZeroThreshold;
  return rep;
}

struct PullbackOptions {
  double chern_weil_tolerance = 5e-3;  // relative to 2 pi r
  bool enforce_chern_weil = true;
};

struct PullbackData {
  ManifoldGrid grid;
  RationalTuple map;
  ScalarField log_weight;        // -log sum|p|^2 + r log(1 + |z|^2)
  ScalarField section_norms_sq;  // sum |p_i|^2_H
  ScalarField curvature_trace;   // mean-corrected
  double c1_geom = 0.0;          // integral of curvature_trace
  double c1_quadrature = 0.0;    // integral before the mean correction
  double chern_weil_correction = 0.0;
  double curvature_spectral_defect = 0.0;  // sup|trace - (2 pi r - Delta_spec log_weight / 2)|
  ScalarField psi;
  ScalarField h_thm;             // -e^{2 psi} sum|p|^2_H / 2
  double tau = 1.0;
  CommonZeroReport zeros;
};

inline PullbackData pullback_data(const RationalTuple& map, const ManifoldGrid& grid,
                                  const PullbackOptions& opt = {}) {
  using std::numbers::pi;
  if (grid.kind() != GridKind::sphere) throw DomainError("pullback_data requires a sphere grid");
  PullbackData d;
  d.grid = grid;
  d.map = map;
  d.zeros = validate_no_common_zeros(map);
  if (!d.zeros.pass)
    throw DomainError("rational map has a common zero (sampled min " + std::to_string(d.zeros.min_value) + ")");
  const int r = map.degree_r;
  std::vector<Polynomial> dp;
  for (const auto& p : map.components) dp.push_back(polynomial_derivative(p));
  // Wronskians p_i p_j' - p_j p_i' as polynomials, so the Lagrange identity
  // |p|^2|p'|^2 - |<p,p'>|^2 = sum_{i<j} |W_ij|^2 has no cancellation.
  std::vector<Polynomial> wronskians;
  for (int i = 0; i < map.k; ++i)
    for (int j = i + 1; j < map.k; ++j) {
      const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
      wronskians.push_back(polynomial_subtract(polynomial_multiply(map.components[ui], dp[uj]),
                                               polynomial_multiply(map.components[uj], dp[ui])));
    }
  const std::size_t n = grid.size();
  d.log_weight = ScalarField(n);
  d.section_norms_sq = ScalarField(n);
  ScalarField raw(n);
  for (std::size_t node = 0; node < n; ++node) {
    const std::complex<double> z = grid.chart_point(node);
    const double rho2 = std::norm(z);
    double S = 0.0;
    for (const auto& p : map.components) S += std::norm(polynomial_eval(p, z));
    double W = 0.0;
    for (const auto& w : wronskians) W += std::norm(polynomial_eval(w, z));
    d.log_weight[node] = -std::log(S) + r * std::log1p(rho2);
    double norms = 0.0;
    for (const auto& p : map.components) norms += std::norm(polynomial_eval(p, z)) / S;
    d.section_norms_sq[node] = norms;
    const double conf = (1.0 + rho2) * (1.0 + rho2);
    raw[node] = 2.0 * pi * conf * W / (S * S);
  }
  d.c1_quadrature = integrate(grid, raw);
  const double target = 2.0 * pi * r;
  if (opt.enforce_chern_weil && std::abs(d.c1_quadrature - target) > opt.chern_weil_tolerance * target)
    throw DomainError("curvature integral " + std::to_string(d.c1_quadrature) + " deviates from 2 pi r = " +
                      std::to_string(target) + " beyond tolerance; grid under-resolved");
  d.chern_weil_correction = target - d.c1_quadrature;
  d.curvature_trace = raw + d.chern_weil_correction;
  d.c1_geom = integrate(grid, d.curvature_trace);
  const ScalarField spectral = (laplacian(grid, d.log_weight, Scheme::spectral) * -0.5) + target;
  d.curvature_spectral_defect = (spectral - d.curvature_trace).sup_abs();
  d.psi = poisson_solve(grid, d.curvature_trace - d.c1_geom, Scheme::spectral);
  d.h_thm = ScalarField(n);
  for (std::size_t i = 0; i < n; ++i) d.h_thm[i] = -std::exp(2.0 * d.psi[i]) * d.section_norms_sq[i] / 2.0;
  return d;
}

inline bool existence_threshold(const RationalTuple& map, double s) {
  return s * s >= 4.0 * std::numbers::pi * map.degree_r;
}

// Scalar reduction of the vortex equation: c(s) = 2 c1_geom - s^2, h = 2 h_thm.
inline KWProblem vortex_problem(const PullbackData& d, bool allow_degenerate = false) {
  return make_problem(d.grid, d.h_thm * 2.0, 2.0 * d.c1_geom, 1.0, allow_degenerate);
}

struct VortexSolution {
  double s = 0.0;
  ScalarField u_s;
  ScalarField phi_s;
  double third_eq_residual_sup = 0.0;
  SolveResult solve;
};

inline ScalarField third_equation_residual(const PullbackData& d, double s, const ScalarField& u) {
  const ScalarField lap = laplacian(d.grid, u, Scheme::spectral);
  ScalarField r(u.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    r[i] = d.curvature_trace[i] - lap[i] + 0.5 * s * s * (std::exp(2.0 * u[i]) * d.section_norms_sq[i] - d.tau);
  return r;
}

inline VortexSolution solve_vortex(const PullbackData& d, double s, const SolverOptions& opt = {},
                                   bool allow_degenerate = false) {
  if (!existence_threshold(d.map, s))
    throw ThresholdError("s = " + std::to_string(s) + " violates s^2 tau >= 4 pi r / vol", s,
                         std::sqrt(4.0 * std::numbers::pi * d.map.degree_r));
  const KWProblem p = vortex_problem(d, allow_degenerate);
  VortexSolution v;
  v.s = s;
  v.solve = monotone_solve(p, s, opt);
  v.phi_s = v.solve.phi_s;
  v.u_s = v.phi_s * 0.5 + d.psi;
  v.third_eq_residual_sup = third_equation_residual(d, s, v.u_s).sup_abs();
  return v;
}

inline VortexSolution solve_vortex(const RationalTuple& map, const ManifoldGrid& grid, double s,
                                   const SolverOptions& opt = {}) {
  return solve_vortex(pullback_data(map, grid), s, opt);
}

}  // namespace kwv
