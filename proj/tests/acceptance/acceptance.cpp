// Acceptance runner: one PASS/FAIL line per criterion.
//
//   acceptance                 run every criterion
//   acceptance --criterion N   run criterion N only
//
// Exit status is 0 only when every criterion run passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "kwvortex/kwvortex.hpp"
#include "oracles/newton.hpp"
#include "oracles/quadrature.hpp"

using namespace kwv;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string sci(double v) { return fmt("%.3e", v); }

KWProblem random_problem(GridKind kind, int n, std::uint64_t seed) {
  auto g = build_grid(kind, n);
  auto h = parse_scalar_expression(random_negative_trig_h(kind, seed, 3, 2)).sample(g);
  return make_problem(std::move(g), std::move(h), 0.5, 1.0);
}

KWProblem cosine_problem(double amp, int n) {
  auto g = build_grid(GridKind::circle, n);
  auto h = sample(g, [amp](double x, double) { return -(2.0 + amp * std::cos(2 * pi * x)); });
  return make_problem(std::move(g), std::move(h), 0.0, 1.0);
}

// Smallest doubling of 8 safely above the sub-solution threshold.
double admissible_s(const KWProblem& p) {
  const double t = sub_threshold_s(p, bound_K(p, SolverOptions{}.margin));
  double s = 8.0;
  while (s <= 1.05 * t) s *= 2.0;
  return s;
}

struct Fixture {
  std::string name;
  KWProblem p;
  double s;
};

std::vector<Fixture> random_fixtures() {
  std::vector<Fixture> out;
  for (auto [kind, n] : {std::pair{GridKind::circle, 64}, std::pair{GridKind::torus2, 32}})
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto p = random_problem(kind, n, seed);
      const double s = admissible_s(p);
      out.push_back({to_string(kind) + "/" + std::to_string(seed), std::move(p), s});
    }
  return out;
}

Eigen::VectorXd to_eigen(const ScalarField& f) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(f.size()));
  for (std::size_t i = 0; i < f.size(); ++i) v(static_cast<Eigen::Index>(i)) = f[i];
  return v;
}

Outcome criterion_1() {
  Outcome o;
  auto g = build_grid(GridKind::circle, 64);
  const ScalarField h(g.size(), -1.0);
  const auto p = make_problem(std::move(g), h, 1.0, 1.0);
  for (double s : {2.0, 4.0, 8.0}) {
    const auto r = monotone_solve(p, s);
    const double err = (r.phi_s - std::log(1.0 - 1.0 / (s * s))).sup_abs();
    o.require(err <= 1e-8, "s=" + fmt("%g", s) + " err " + sci(err));
  }
  return o;
}

Outcome criterion_2() {
  Outcome o;
  double worst = -std::numeric_limits<double>::infinity();
  std::size_t checked = 0;
  for (const auto& f : random_fixtures()) {
    SolverOptions opt;
    opt.keep_iterates = true;
    const auto r = monotone_solve(f.p, f.s, opt);
    bool ok = r.iterates.size() >= 2 && r.phi_sub.size() == r.phi_s.size();
    for (std::size_t it = 0; ok && it + 1 < r.iterates.size(); ++it) {
      const auto& a = r.iterates[it];
      const auto& b = r.iterates[it + 1];
      for (std::size_t i = 0; i < a.size(); ++i) {
        // largest violation of phi_- <= phi_{i+1} <= phi_i <= phi_+
        worst = std::max({worst, r.phi_sub[i] - b[i], b[i] - a[i], a[i] - r.phi_super[i]});
        ++checked;
      }
    }
    o.require(ok, f.name + " s=" + fmt("%g", f.s) + " " + std::to_string(r.iterates.size() - 1) + " iterations");
  }
  o.require(worst <= 1e-12, "worst violation " + sci(worst) + " over " + std::to_string(checked) + " node checks");
  return o;
}

Outcome criterion_3() {
  Outcome o;
  double worst = 0.0;
  for (const auto& f : random_fixtures()) {
    const auto b = sub_super_solutions(f.p, f.s, SolverOptions{}.margin);
    const double c1 = f.p.c1, c2 = f.p.c2, s2 = f.s * f.s;
    const double expect = std::log((b.K - c1 + c2 * s2) / (-b.K - c1 + c2 * s2));
    for (std::size_t i = 0; i < b.phi_super.size(); ++i)
      worst = std::max(worst, std::abs(b.phi_super[i] - b.phi_sub[i] - expect));
  }
  const auto p = cosine_problem(0.5, 128);
  std::vector<double> gaps;
  for (double s : {8.0, 16.0, 32.0}) {
    const auto r = monotone_solve(p, s);
    double gap = 0.0;
    for (std::size_t i = 0; i < r.phi_s.size(); ++i) gap = std::max(gap, r.phi_super[i] - r.phi_sub[i]);
    const double expect = std::log((r.K + s * s) / (-r.K + s * s));
    worst = std::max(worst, std::abs(gap - expect));
    gaps.push_back(gap);
  }
  o.require(worst <= 1e-12, "closed form err " + sci(worst));
  for (std::size_t i = 1; i < gaps.size(); ++i) {
    const double ratio = gaps[i] / gaps[i - 1];
    o.require(ratio >= 0.22 && ratio <= 0.28, "ratio " + fmt("%.4f", ratio));
  }
  return o;
}

Outcome criterion_4() {
  Outcome o;
  const auto p = cosine_problem(1.0, 128);
  const auto t = convergence_sweep(p, {8.0, 16.0, 32.0, 64.0}, 2, {}, 4);
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    const auto& a = t.rows[i - 1];
    const auto& b = t.rows[i];
    const double ratio = b.sup_err_linf / a.sup_err_linf;
    o.require(ratio >= 0.2 && ratio <= 0.35, "e" + fmt("%g", b.s) + "/e" + fmt("%g", a.s) + " " + fmt("%.4f", ratio));
    for (std::size_t k = 0; k < a.sup_err_derivatives.size(); ++k)
      o.require(b.sup_err_derivatives[k] < a.sup_err_derivatives[k],
                "d" + std::to_string(k + 1) + " " + sci(a.sup_err_derivatives[k]) + "->" +
                    sci(b.sup_err_derivatives[k]));
  }
  return o;
}

Outcome criterion_5() {
  Outcome o;
  const auto p = cosine_problem(1.0, 128);
  const auto t = convergence_sweep(p, {8.0, 16.0, 32.0}, 0, {}, 3);
  std::string values;
  for (const auto& r : t.rows) values += (values.empty() ? "" : ", ") + sci(r.claim_s2_exp_diff);
  o.require(t.rows[1].claim_s2_exp_diff < t.rows[0].claim_s2_exp_diff &&
                t.rows[2].claim_s2_exp_diff < t.rows[1].claim_s2_exp_diff,
            "strictly decreasing " + values);
  const double frac = t.rows[2].claim_s2_exp_diff / t.rows[0].claim_s2_exp_diff;
  o.require(frac < 0.25, "s=32 over s=8 " + fmt("%.4f", frac));
  return o;
}

Outcome criterion_6() {
  Outcome o;
  double worst = 0.0;
  for (const auto& f : random_fixtures()) {
    const auto r = monotone_solve(f.p, f.s);
    const bool torus = f.p.grid.kind() == GridKind::torus2;
    const auto nr = oracle::damped_newton(oracle::periodic_laplacian(f.p.grid.nx(), torus), to_eigen(f.p.h),
                                          f.p.c(f.s), f.s, to_eigen(r.phi_sub));
    double d = 0.0;
    for (std::size_t i = 0; i < r.phi_s.size(); ++i)
      d = std::max(d, std::abs(r.phi_s[i] - nr.phi(static_cast<Eigen::Index>(i))));
    worst = std::max(worst, d);
  }
  o.require(worst <= 1e-8, "max sup difference " + sci(worst) + " over 10 fixtures");
  return o;
}

Outcome criterion_7() {
  Outcome o;
  const auto g = build_grid(GridKind::sphere, 48);
  const auto d = pullback_data(make_rational_tuple({{0.0, 1.0}, {1.0}}), g);
  for (double s : {4.0, 8.0, 16.0}) {
    const auto v = solve_vortex(d, s);
    const double osc = v.u_s.max() - v.u_s.min();
    double dev = 0.0;
    for (double u : v.u_s) dev = std::max(dev, std::abs(std::exp(2 * u) - (1.0 - 4 * pi / (s * s))));
    const std::string tag = "s=" + fmt("%g", s) + " ";
    o.require(osc <= 1e-5, tag + "osc " + sci(osc));
    o.require(dev <= 1e-4, tag + "e^2u err " + sci(dev));
    o.require(v.third_eq_residual_sup <= 1e-4, tag + "residual " + sci(v.third_eq_residual_sup));
  }
  return o;
}

Outcome criterion_8() {
  Outcome o;
  const MapFamily family{make_rational_tuple({{0.0, 1.0}, {1.0}}), {{1.0}, {0.0}}, 1e-3};
  const auto rep = metric_limit_report(family, build_grid(GridKind::sphere, 48), {4.0, 8.0, 16.0, 32.0}, {}, 4);
  bool decreasing = true;
  std::string devs;
  for (std::size_t i = 0; i < rep.deviation.size(); ++i) {
    if (i > 0 && !(rep.deviation[i] < rep.deviation[i - 1])) decreasing = false;
    devs += (i ? ", " : "") + fmt("%.4f", rep.deviation[i]);
  }
  o.require(decreasing, "|g/J - 1/2| " + devs);
  o.require(rep.deviation.back() <= 0.02, "final " + fmt("%.4f", rep.deviation.back()));
  const double ft = rep.first_term.back() / rep.second_term.back();
  o.require(ft <= 0.02, "first/second at s=32 " + sci(ft));
  const double J = oracle::radial_sphere_integral([](double rho) { return 1.0 / std::pow(1.0 + rho * rho, 2); });
  o.require(std::abs(rep.J - J) <= 1e-3, "J " + fmt("%.9f", rep.J) + " vs oracle " + fmt("%.9f", J));
  return o;
}

Outcome criterion_9() {
  Outcome o;
  for (auto [b, k, r] : {std::array{0, 2, 1}, std::array{0, 3, 2}, std::array{1, 1, 2}, std::array{2, 2, 3}}) {
    VolumeParams v;
    v.b = b;
    v.k = k;
    v.r = r;
    v.s = 1e6;
    const double rel = std::abs(volume_formula(v) / volume_limit(v) - 1.0);
    o.require(rel <= 1e-4, "(" + std::to_string(b) + "," + std::to_string(k) + "," + std::to_string(r) + ") " + sci(rel));
  }
  VolumeParams base;
  base.b = 0;
  base.k = 2;
  base.r = 1;
  const double lim = volume_limit(base);
  o.require(std::abs(lim - pi * pi * pi / 6) <= 1e-12, "pi^3/6 err " + sci(std::abs(lim - pi * pi * pi / 6)));
  return o;
}

Outcome criterion_10() {
  Outcome o;
  const auto rep = degeneration_sweep({{1e-3}, {8.0, 16.0, 32.0}}, build_grid(GridKind::sphere, 64), {}, 3);
  std::string sups, radii;
  bool converged = true;
  for (const auto& r : rep.rows) {
    converged = converged && r.converged;
    sups += (sups.empty() ? "" : ", ") + fmt("%.3f", r.sup_phi);
    radii += (radii.empty() ? "" : ", ") + fmt("%.4f", r.radius_50);
  }
  o.require(converged, "all solves converged");
  o.require(rep.rows.back().sup_phi > 2 * rep.rows.front().sup_phi, "sup|phi| " + sups);
  bool shrinking = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    shrinking = shrinking && rep.rows[i].radius_50 < rep.rows[i - 1].radius_50;
  o.require(shrinking, "r50 " + radii);
  return o;
}

Outcome criterion_11() {
  Outcome o;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double worst = -std::numeric_limits<double>::infinity();
  for (auto [kind, n] : {std::pair{GridKind::circle, 128}, std::pair{GridKind::torus2, 32}}) {
    const auto g = build_grid(kind, n);
    for (double sigma : {0.1, 1.0, 10.0})
      for (int trial = 0; trial < 100; ++trial) {
        ScalarField rhs(g.size());
        // sparse supports as well as dense ones
        const double density = u01(rng);
        for (auto& v : rhs) v = u01(rng) < density ? u01(rng) : 0.0;
        worst = std::max(worst, helmholtz_solve(g, sigma, rhs, Scheme::finite_difference).max());
      }
  }
  o.require(worst <= 1e-12, "max of solution " + sci(worst) + " over 600 solves");
  return o;
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> list = {
      {"constant-coefficient exactness", criterion_1},
      {"monotone iteration invariant", criterion_2},
      {"super/sub gap law", criterion_3},
      {"adiabatic limit with rate", criterion_4},
      {"approximate pair claim", criterion_5},
      {"uniqueness against Newton", criterion_6},
      {"vortex symmetry", criterion_7},
      {"pullback metric limit", criterion_8},
      {"volume formulas", criterion_9},
      {"blow-up trend", criterion_10},
      {"discrete maximum principle", criterion_11},
  };
  return list;
}

bool run(int n) {
  const auto& [name, fn] = criteria()[static_cast<std::size_t>(n - 1)];
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("criterion %d: %s  %s (%.1fs): %s\n", n, o.pass ? "PASS" : "FAIL", name.c_str(), secs,
              o.detail.c_str());
  std::fflush(stdout);
  return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
  const int count = static_cast<int>(criteria().size());
  if (argc == 3 && std::strcmp(argv[1], "--criterion") == 0) {
    const int n = std::atoi(argv[2]);
    if (n < 1 || n > count) {
      std::fprintf(stderr, "criterion must be in 1..%d\n", count);
      return 2;
    }
    return run(n) ? 0 : 1;
  }
  if (argc != 1) {
    std::fprintf(stderr, "usage: acceptance [--criterion N]\n");
    return 2;
  }
  bool all = true;
  for (int n = 1; n <= count; ++n) all = run(n) && all;
  return all ? 0 : 1;
}
