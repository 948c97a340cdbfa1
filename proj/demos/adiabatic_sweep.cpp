// Solves the circle problem h = -(2 + cos 2 pi x), c1 = 0, c2 = 1 for a few s
// and prints how phi_s approaches log(c2 / -h).
#include <cstdio>
#include <numbers>

#include "kwvortex/kwvortex.hpp"

int main() {
  using namespace kwv;
  const ManifoldGrid grid = build_grid(GridKind::circle, 128);
  const ScalarField h = sample(grid, [](double x, double) { return -(2.0 + std::cos(2.0 * std::numbers::pi * x)); });
  const KWProblem p = make_problem(grid, h, 0.0, 1.0);
  const SweepTable t = convergence_sweep(p, {8.0, 16.0, 32.0, 64.0}, 2);
  std::printf("%6s %12s %12s %12s %12s %6s\n", "s", "sup_err", "gap", "claim", "residual", "iters");
  for (const auto& r : t.rows)
    std::printf("%6.0f %12.4e %12.4e %12.4e %12.4e %6d\n", r.s, r.sup_err_linf, r.gap_super_sub, r.claim_s2_exp_diff,
                r.residual_sup, r.iterations);
  for (std::size_t i = 0; i < t.rates.size(); ++i)
    std::printf("rate %g -> %g: %.3f\n", t.rows[i].s, t.rows[i + 1].s, t.rates[i]);
}
