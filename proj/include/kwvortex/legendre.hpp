#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

namespace kwv {

struct GaussLegendreRule {
  std::vector<double> nodes;    // descending in [-1, 1], i.e. colatitude ascending
  std::vector<double> weights;  // sum to 2
};

// Newton iteration on P_n from the Tricomi initial guess.
inline GaussLegendreRule gauss_legendre(int n) {
  GaussLegendreRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = -x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

// Recurrence coefficients for fully normalized associated Legendre functions
// with int_{-1}^{1} Pbar_lm^2 dx = 1.
namespace legendre_detail {
inline double a_lm(int l, int m) {
  return std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - static_cast<double>(m) * m));
}
inline double b_lm(int l, int m) {
  const double lm1 = l - 1.0;
  return std::sqrt((lm1 * lm1 - static_cast<double>(m) * m) / (4.0 * lm1 * lm1 - 1.0));
}
inline double e_lm(int l, int m) {
  return std::sqrt((2.0 * l + 1.0) * (static_cast<double>(l) * l - static_cast<double>(m) * m) /
                   (2.0 * l - 1.0));
}
}  // namespace legendre_detail

// Pbar_{l,m}(cos theta) for l = m..lmax, and optionally d/dtheta.
// pmm is Pbar_{m,m} at this point, carried by the caller across m.
inline void legendre_column(int m, int lmax, double x, double sin_theta, double pmm, double* p,
                            double* dp) {
  double prev = 0.0, cur = pmm;
  for (int l = m; l <= lmax; ++l) {
    if (l > m) {
      const double next = legendre_detail::a_lm(l, m) *
                          (x * cur - (l > m + 1 ? legendre_detail::b_lm(l, m) * prev : 0.0));
      prev = cur;
      cur = next;
    }
    p[l - m] = cur;
    if (dp != nullptr) {
      const double lower = (l > m) ? legendre_detail::e_lm(l, m) * prev : 0.0;
      dp[l - m] = (l * x * cur - lower) / sin_theta;
    }
  }
}

// Advance Pbar_{m-1,m-1} to Pbar_{m,m}.
inline double legendre_diagonal_step(int m, double pmm_prev, double sin_theta) {
  return pmm_prev * std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * sin_theta;
}

inline constexpr double kLegendreP00 = 0.70710678118654752440;

}  // namespace kwv
