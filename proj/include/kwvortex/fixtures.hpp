#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>

#include "kwvortex/manifold.hpp"

namespace kwv {

// Seeded strictly negative trigonometric polynomial, returned as expression
// text so it can be echoed into a config and parsed back.
//   h = -(c0 + sum a_j cos(2 pi (m_j x + n_j y)) + b_j sin(...)), c0 >= 1 + sum(|a_j| + |b_j|)
// so that max h <= -1. On the circle n_j = 0.
inline std::string random_negative_trig_h(GridKind kind, std::uint64_t seed, int terms = 3, int max_mode = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(-0.5, 0.5);
  std::uniform_int_distribution<int> mode(-max_mode, max_mode);
  std::string body;
  double bound = 0.0;
  char buf[160];
  for (int j = 0; j < terms; ++j) {
    int m = mode(rng);
    int n = kind == GridKind::circle ? 0 : mode(rng);
    if (m == 0 && n == 0) m = 1;
    const double a = amp(rng), b = amp(rng);
    bound += std::abs(a) + std::abs(b);
    std::snprintf(buf, sizeof buf, " + %.17g*cos(2*pi*(%d*x + %d*y)) + %.17g*sin(2*pi*(%d*x + %d*y))", a, m, n, b,
                  m, n);
    body += buf;
  }
  std::uniform_real_distribution<double> extra(0.0, 1.0);
  std::snprintf(buf, sizeof buf, "-(%.17g", 1.0 + bound + extra(rng));
  return std::string(buf) + body + ")";
}

}  // namespace kwv
