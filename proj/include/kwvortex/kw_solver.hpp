#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "kwvortex/manifold.hpp"
#include "kwvortex/operators.hpp"

namespace kwv {

// Normal form  Delta phi = c(s) - s^2 h e^phi,  c(s) = c1 - c2 s^2.
struct KWProblem {
  ManifoldGrid grid;
  ScalarField h;
  double c1 = 0.0;
  double c2 = 1.0;
  double h_max = 0.0;  // measured max of h, reported as the negativity margin

  double c(double s) const noexcept { return c1 - c2 * s * s; }
};

// Validates the data. h must satisfy max(h) < -1e-8 max|h|; allow_degenerate
// relaxes this to max(h) < 0 (the blow-up experiments, where h nearly touches zero).
inline KWProblem make_problem(ManifoldGrid grid, ScalarField h, double c1, double c2,
                              bool allow_degenerate = false) {
  require_on_grid(grid, h, "KWProblem");
  require_finite(h, "KWProblem");
  if (!std::isfinite(c1)) throw DomainError("KWProblem: c1 must be finite");
  if (!(c2 > 0.0) || !std::isfinite(c2)) throw DomainError("KWProblem: c2 must be positive");
  KWProblem p{std::move(grid), std::move(h), c1, c2, 0.0};
  p.h_max = p.h.max();
  const double bound = allow_degenerate ? 0.0 : -1e-8 * p.h.sup_abs();
  if (!(p.h_max < bound))
    throw DomainError("KWProblem: h must be strictly negative, max(h) = " + std::to_string(p.h_max));
  return p;
}

struct SolverOptions {
  double margin = 1e-3;
  double tol_sup = 1e-10;
  double residual_tol = 1e-6;
  int max_iter = 200000;
  Scheme scheme = Scheme::finite_difference;
  double violation_tol = 1e-9;
  bool keep_iterates = false;
  // Iterate from phi_+ even when phi_- is undefined (s below the threshold).
  bool allow_undefined_sub = false;
};

// -log(-h).
inline ScalarField log_potential(const KWProblem& p) {
  return p.h.map([](double v) { return -std::log(-v); });
}

// sup|Delta L| under both schemes (spectral skipped where unavailable).
inline double potential_laplacian_sup(const KWProblem& p) {
  const ScalarField L = log_potential(p);
  double m = laplacian(p.grid, L, Scheme::finite_difference).sup_abs();
  try {
    m = std::max(m, laplacian(p.grid, L, Scheme::spectral).sup_abs());
  } catch (const UnavailableError&) {
  }
  return m;
}

inline double bound_K(const KWProblem& p, double margin) {
  return (1.0 + margin) * potential_laplacian_sup(p) + margin;
}

// c(s) < -K: smallest s for which phi_- exists.
inline double sub_threshold_s(const KWProblem& p, double K) {
  return std::sqrt(std::max(0.0, (p.c1 + K) / p.c2));
}

struct SubSuper {
  ScalarField phi_sub;  // empty when undefined
  ScalarField phi_super;
  double K = 0.0;
  bool sub_defined = false;
  double sub_residual_min = std::numeric_limits<double>::quiet_NaN();
  double super_residual_max = std::numeric_limits<double>::quiet_NaN();
};

// Delta phi - c(s) + s^2 h e^phi.
inline ScalarField residual(const KWProblem& p, double s, const ScalarField& phi,
                            Scheme scheme = Scheme::spectral) {
  require_on_grid(p.grid, phi, "residual");
  ScalarField r = laplacian(p.grid, phi, scheme);
  const double c = p.c(s), s2 = s * s;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += -c + s2 * p.h[i] * std::exp(phi[i]);
  return r;
}

// phi_pm = log((+-K - c) / (-s^2 h)). With K given explicitly (K >= 0) the
// margin only affects the verification slack.
inline SubSuper sub_super_solutions(const KWProblem& p, double s, double margin,
                                    bool allow_undefined_sub = false,
                                    std::optional<double> K_override = std::nullopt) {
  if (!(s > 0.0)) throw DomainError("sub_super_solutions: s must be positive");
  SubSuper out;
  out.K = K_override ? *K_override : bound_K(p, margin);
  const double c = p.c(s), s2 = s * s;
  const double lower = -out.K - c;
  if (!(lower > 0.0) && !allow_undefined_sub)
    throw ThresholdError("s = " + std::to_string(s) + " below the sub-solution threshold " +
                             std::to_string(sub_threshold_s(p, out.K)),
                         s, sub_threshold_s(p, out.K));
  out.phi_super = p.h.map([&](double v) { return std::log((out.K - c) / (-s2 * v)); });
  const auto check_scheme = [&](const ScalarField& phi, bool is_sub) {
    double ext = is_sub ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    for (Scheme sc : {Scheme::finite_difference, Scheme::spectral}) {
      ScalarField r;
      try {
        r = residual(p, s, phi, sc);
      } catch (const UnavailableError&) {
        continue;
      }
      ext = is_sub ? std::min(ext, r.min()) : std::max(ext, r.max());
    }
    return ext;
  };
  out.super_residual_max = check_scheme(out.phi_super, false);
  if (out.super_residual_max > 1e-8)
    throw SolverError("super-solution inequality fails by " + std::to_string(out.super_residual_max));
  if (lower > 0.0) {
    out.sub_defined = true;
    out.phi_sub = p.h.map([&](double v) { return std::log(lower / (-s2 * v)); });
    out.sub_residual_min = check_scheme(out.phi_sub, true);
    if (out.sub_residual_min < -1e-8)
      throw SolverError("sub-solution inequality fails by " + std::to_string(-out.sub_residual_min));
  }
  return out;
}

struct IterationPlan {
  double s = 0.0;
  double K = 0.0;
  double k_coeff = 0.0;  // sigma = s^2 k_coeff
  SolverOptions options;
};

inline IterationPlan make_plan(const KWProblem& p, double s, const SolverOptions& opt = {}) {
  IterationPlan plan;
  plan.s = s;
  plan.K = bound_K(p, opt.margin);
  // -h e^{phi_+} is the constant (K - c)/s^2.
  plan.k_coeff = (1.0 + opt.margin) * (plan.K - p.c(s)) / (s * s);
  plan.options = opt;
  return plan;
}

struct SolveResult {
  double s = 0.0;
  ScalarField phi_s;
  int iterations = 0;
  double residual_sup = 0.0;           // with the solve scheme
  double residual_sup_spectral = std::numeric_limits<double>::quiet_NaN();
  double residual_sup_fd = 0.0;
  ScalarField phi_sub;                 // empty when undefined
  ScalarField phi_super;
  double K = 0.0;
  double k_coeff = 0.0;
  double sigma = 0.0;
  double monotonicity_margin = 0.0;    // most negative phi_i - phi_{i+1}
  double sub_margin = std::numeric_limits<double>::infinity();  // most negative phi_{i+1} - phi_-
  std::vector<double> trace_sup_norms;
  std::vector<ScalarField> iterates;
  Scheme scheme = Scheme::finite_difference;
};

inline SolveResult monotone_solve(const KWProblem& p, const IterationPlan& plan) {
  const auto& opt = plan.options;
  const double s = plan.s, s2 = s * s, c = p.c(s);
  const SubSuper bounds = sub_super_solutions(p, s, opt.margin, opt.allow_undefined_sub, plan.K);
  if (!(plan.k_coeff > 0.0)) throw DomainError("monotone_solve: k_coeff must be positive");
  const double need = (plan.K - c) / s2;
  if (plan.k_coeff < need * (1.0 - 1e-14))
    throw DomainError("monotone_solve: k_coeff below sup(-h e^{phi_+})");

  SolveResult res;
  res.s = s;
  res.K = plan.K;
  res.k_coeff = plan.k_coeff;
  res.sigma = s2 * plan.k_coeff;
  res.scheme = opt.scheme;
  res.phi_super = bounds.phi_super;
  res.phi_sub = bounds.phi_sub;
  ScalarField phi = bounds.phi_super;
  if (opt.keep_iterates) res.iterates.push_back(phi);
  const std::size_t n = phi.size();
  ScalarField rhs(n);
  for (int it = 1; it <= opt.max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) rhs[i] = c - res.sigma * phi[i] - s2 * p.h[i] * std::exp(phi[i]);
    ScalarField next = helmholtz_solve(p.grid, res.sigma, rhs, opt.scheme);
    double diff = 0.0, worst_up = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      diff = std::max(diff, std::abs(next[i] - phi[i]));
      worst_up = std::max(worst_up, next[i] - phi[i]);
    }
    res.monotonicity_margin = std::min(res.monotonicity_margin, -worst_up);
    if (worst_up > opt.violation_tol)
      throw MonotonicityError("iterate increased by " + std::to_string(worst_up) + " at iteration " +
                                  std::to_string(it),
                              it, worst_up);
    if (bounds.sub_defined) {
      double below = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) below = std::min(below, next[i] - bounds.phi_sub[i]);
      res.sub_margin = std::min(res.sub_margin, below);
      if (below < -opt.violation_tol)
        throw MonotonicityError("iterate fell below the sub-solution by " + std::to_string(-below) +
                                    " at iteration " + std::to_string(it),
                                it, -below);
    }
    res.trace_sup_norms.push_back(diff);
    phi = std::move(next);
    if (opt.keep_iterates) res.iterates.push_back(phi);
    if (diff < opt.tol_sup) {
      const double r = residual(p, s, phi, opt.scheme).sup_abs();
      if (r < opt.residual_tol) {
        res.iterations = it;
        res.residual_sup = r;
        break;
      }
    }
    if (it == opt.max_iter)
      throw NonConvergenceError("monotone iteration did not converge in " + std::to_string(it) +
                                    " iterations at s = " + std::to_string(s),
                                it, res.trace_sup_norms);
  }
  res.residual_sup_fd = residual(p, s, phi, Scheme::finite_difference).sup_abs();
  try {
    res.residual_sup_spectral = residual(p, s, phi, Scheme::spectral).sup_abs();
  } catch (const UnavailableError&) {
  }
  res.phi_s = std::move(phi);
  return res;
}

inline SolveResult monotone_solve(const KWProblem& p, double s, const SolverOptions& opt = {}) {
  return monotone_solve(p, make_plan(p, s, opt));
}

// log(c2 / (-h)).
inline ScalarField adiabatic_limit_field(const KWProblem& p) {
  return p.h.map([&](double v) { return std::log(p.c2 / (-v)); });
}

struct ApproxPair {
  ScalarField v_s;
  ScalarField E_s;
};

// v_s = log((Delta L - c(s)) / (-s^2 h)),  E_s = Delta log(Delta L - c(s)); spectral.
inline ApproxPair approx_solution_pair(const KWProblem& p, double s) {
  const ScalarField A = laplacian(p.grid, log_potential(p), Scheme::spectral) - p.c(s);
  if (!(A.min() > 0.0))
    throw ThresholdError("approx_solution_pair: log argument nonpositive at s = " + std::to_string(s), s,
                         std::numeric_limits<double>::quiet_NaN());
  ApproxPair out;
  const double s2 = s * s;
  out.v_s = ScalarField(A.size());
  for (std::size_t i = 0; i < A.size(); ++i) out.v_s[i] = std::log(A[i] / (-s2 * p.h[i]));
  out.E_s = laplacian(p.grid, A.map([](double a) { return std::log(a); }), Scheme::spectral);
  return out;
}

struct SweepRow {
  double s = 0.0;
  double sup_err_linf = 0.0;
  std::vector<double> sup_err_derivatives;  // orders 1..max_order
  double gap_super_sub = 0.0;
  double claim_s2_exp_diff = 0.0;
  double sup_E = 0.0;
  double residual_sup = 0.0;
  double residual_sup_spectral = 0.0;
  int iterations = 0;
  double K = 0.0;
  double k_coeff = 0.0;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  std::vector<double> rates;  // log2(e_s / e_{2s}) between consecutive rows
};

// Runs fn(i) for i in [0, n), on `workers` threads when workers > 1. Results keep index order.
template <class F>
auto parallel_for_each_index(std::size_t n, int workers, F&& fn) {
  using R = decltype(fn(std::size_t{0}));
  std::vector<R> out;
  out.reserve(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(fn(i));
    return out;
  }
  std::vector<std::future<R>> futures;
  for (std::size_t i = 0; i < n; ++i) futures.push_back(std::async(std::launch::async, fn, i));
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

inline SweepRow sweep_row(const KWProblem& p, double s, int max_order, const SolverOptions& opt) {
  const SolveResult r = monotone_solve(p, s, opt);
  const ScalarField phi_inf = adiabatic_limit_field(p);
  const ScalarField err = r.phi_s - phi_inf;
  SweepRow row;
  row.s = s;
  const auto norms = derivative_sup_norms(p.grid, err, max_order);
  row.sup_err_linf = norms[0];
  row.sup_err_derivatives.assign(norms.begin() + 1, norms.end());
  for (std::size_t i = 0; i < r.phi_s.size(); ++i)
    row.gap_super_sub = std::max(row.gap_super_sub, r.phi_super[i] - r.phi_sub[i]);
  const ApproxPair ap = approx_solution_pair(p, s);
  for (std::size_t i = 0; i < r.phi_s.size(); ++i)
    row.claim_s2_exp_diff =
        std::max(row.claim_s2_exp_diff, std::abs(s * s * (std::exp(r.phi_s[i]) - std::exp(ap.v_s[i]))));
  row.sup_E = ap.E_s.sup_abs();
  row.residual_sup = r.residual_sup;
  row.residual_sup_spectral = r.residual_sup_spectral;
  row.iterations = r.iterations;
  row.K = r.K;
  row.k_coeff = r.k_coeff;
  return row;
}

inline SweepTable convergence_sweep(const KWProblem& p, const std::vector<double>& s_list, int max_order,
                                    const SolverOptions& opt = {}, int workers = 1) {
  if (s_list.empty()) throw DomainError("convergence_sweep: empty s list");
  for (std::size_t i = 1; i < s_list.size(); ++i)
    if (!(s_list[i] > s_list[i - 1])) throw DomainError("convergence_sweep: s list must be increasing");
  SweepTable t;
  t.rows = parallel_for_each_index(s_list.size(), workers,
                                   [&](std::size_t i) { return sweep_row(p, s_list[i], max_order, opt); });
  for (std::size_t i = 1; i < t.rows.size(); ++i)
    t.rates.push_back(std::log2(t.rows[i - 1].sup_err_linf / t.rows[i].sup_err_linf));
  return t;
}

}  // namespace kwv
