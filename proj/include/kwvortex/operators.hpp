#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "kwvortex/manifold.hpp"

namespace kwv {

namespace detail {

using cvec = std::vector<std::complex<double>>;

// 1D (circle) or 2D (torus) DFT of a real field, index iy*N + ix.
inline cvec periodic_forward(const ManifoldGrid& grid, std::span<const double> f) {
  const int n = grid.nx();
  cvec a(f.begin(), f.end());
  const auto un = static_cast<std::size_t>(n);
  for (int iy = 0; iy < grid.ny(); ++iy)
    grid.fft().forward(std::span(a).subspan(static_cast<std::size_t>(iy) * un, un));
  if (grid.kind() == GridKind::torus2) {
    cvec col(un);
    for (std::size_t ix = 0; ix < un; ++ix) {
      for (std::size_t iy = 0; iy < un; ++iy) col[iy] = a[iy * un + ix];
      grid.fft_y().forward(col);
      for (std::size_t iy = 0; iy < un; ++iy) a[iy * un + ix] = col[iy];
    }
  }
  return a;
}

inline ScalarField periodic_inverse_real(const ManifoldGrid& grid, cvec a) {
  const auto un = static_cast<std::size_t>(grid.nx());
  if (grid.kind() == GridKind::torus2) {
    cvec col(un);
    for (std::size_t ix = 0; ix < un; ++ix) {
      for (std::size_t iy = 0; iy < un; ++iy) col[iy] = a[iy * un + ix];
      grid.fft_y().inverse(col);
      for (std::size_t iy = 0; iy < un; ++iy) a[iy * un + ix] = col[iy];
    }
  }
  for (int iy = 0; iy < grid.ny(); ++iy)
    grid.fft().inverse(std::span(a).subspan(static_cast<std::size_t>(iy) * un, un));
  ScalarField out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i].real();
  return out;
}

// Multiplies DFT bin (mx, my) by symbol(mx, my).
template <class Symbol>
ScalarField periodic_multiply(const ManifoldGrid& grid, std::span<const double> f, Symbol&& symbol) {
  cvec a = periodic_forward(grid, f);
  const int n = grid.nx();
  for (int my = 0; my < grid.ny(); ++my)
    for (int mx = 0; mx < n; ++mx) {
      const auto i = static_cast<std::size_t>(my) * static_cast<std::size_t>(n) + static_cast<std::size_t>(mx);
      a[i] *= symbol(mx, my);
    }
  return periodic_inverse_real(grid, std::move(a));
}

inline double fd_symbol(int m, int n) {
  return -2.0 * n * n * (1.0 - std::cos(2.0 * std::numbers::pi * m / n));
}

inline double spectral_symbol(int m, int n) {
  const double k = 2.0 * std::numbers::pi * signed_wavenumber(m, n);
  return -k * k;
}

// (i 2 pi k)^order with the Nyquist bin removed for odd orders.
inline std::complex<double> derivative_symbol(int m, int n, int order) {
  if (order == 0) return 1.0;
  if (order % 2 == 1 && n % 2 == 0 && m == n / 2) return 0.0;
  const std::complex<double> ik(0.0, 2.0 * std::numbers::pi * signed_wavenumber(m, n));
  std::complex<double> out = 1.0;
  for (int j = 0; j < order; ++j) out *= ik;
  return out;
}

// Spherical harmonic coefficients with m >= 0, stored by m then l.
struct ShCoefficients {
  int lmax = 0;
  cvec c;
  static std::size_t offset(int m, int lmax) {
    return static_cast<std::size_t>(m) * static_cast<std::size_t>(lmax + 1) -
           static_cast<std::size_t>(m) * static_cast<std::size_t>(m - 1) / 2;
  }
  std::complex<double>& at(int l, int m) { return c[offset(m, lmax) + static_cast<std::size_t>(l - m)]; }
  std::complex<double> at(int l, int m) const { return c[offset(m, lmax) + static_cast<std::size_t>(l - m)]; }
};

inline void require_spectral_sphere(const ManifoldGrid& grid) {
  if (grid.resolution() > kMaxSpectralSphereResolution)
    throw UnavailableError("spectral sphere operators need resolution <= " +
                           std::to_string(kMaxSpectralSphereResolution));
}

inline ShCoefficients sht_analysis(const ManifoldGrid& grid, std::span<const double> f) {
  require_spectral_sphere(grid);
  const auto& g = grid.sphere();
  const int lmax = g.nlat - 1;
  const auto nlon = static_cast<std::size_t>(g.nlon);
  ShCoefficients out;
  out.lmax = lmax;
  out.c.assign(ShCoefficients::offset(lmax + 1, lmax), 0.0);
  std::vector<double> p(static_cast<std::size_t>(lmax) + 1);
  cvec ring(nlon);
  for (int i = 0; i < g.nlat; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    for (std::size_t j = 0; j < nlon; ++j) ring[j] = f[ui * nlon + j];
    grid.fft().forward(ring);
    const double x = g.cos_theta[ui], st = g.sin_theta[ui];
    const double w = g.gl_weight[ui] / static_cast<double>(nlon);
    double pmm = kLegendreP00;
    for (int m = 0; m <= lmax; ++m) {
      if (m > 0) pmm = legendre_diagonal_step(m, pmm, st);
      legendre_column(m, lmax, x, st, pmm, p.data(), nullptr);
      const std::complex<double> fm = ring[static_cast<std::size_t>(m)] * w;
      std::complex<double>* dst = &out.c[ShCoefficients::offset(m, lmax)];
      for (int l = m; l <= lmax; ++l) dst[l - m] += p[static_cast<std::size_t>(l - m)] * fm;
    }
  }
  return out;
}

// Field values, and optionally d/dtheta and d/dlambda, of a coefficient set.
inline void sht_synthesis(const ManifoldGrid& grid, const ShCoefficients& coef, double* f,
                          double* f_theta = nullptr, double* f_lambda = nullptr) {
  const auto& g = grid.sphere();
  const int lmax = coef.lmax;
  const auto nlon = static_cast<std::size_t>(g.nlon);
  std::vector<double> p(static_cast<std::size_t>(lmax) + 1), dp(static_cast<std::size_t>(lmax) + 1);
  cvec gm(static_cast<std::size_t>(lmax) + 1), gt(gm.size());
  cvec ring(nlon);
  auto emit = [&](const cvec& modes, double* dst, std::size_t row, bool dlam) {
    std::fill(ring.begin(), ring.end(), std::complex<double>(0.0));
    for (int m = 0; m <= lmax; ++m) {
      std::complex<double> v = modes[static_cast<std::size_t>(m)];
      if (dlam) v *= std::complex<double>(0.0, m);
      ring[static_cast<std::size_t>(m)] += v;
      if (m > 0) ring[nlon - static_cast<std::size_t>(m)] += std::conj(v);
    }
    grid.fft().inverse(ring);
    for (std::size_t j = 0; j < nlon; ++j) dst[row * nlon + j] = ring[j].real() * static_cast<double>(nlon);
  };
  const bool need_dp = f_theta != nullptr;
  for (int i = 0; i < g.nlat; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const double x = g.cos_theta[ui], st = g.sin_theta[ui];
    double pmm = kLegendreP00;
    for (int m = 0; m <= lmax; ++m) {
      if (m > 0) pmm = legendre_diagonal_step(m, pmm, st);
      legendre_column(m, lmax, x, st, pmm, p.data(), need_dp ? dp.data() : nullptr);
      const std::complex<double>* src = &coef.c[ShCoefficients::offset(m, lmax)];
      std::complex<double> acc = 0.0, acct = 0.0;
      for (int l = m; l <= lmax; ++l) {
        acc += src[l - m] * p[static_cast<std::size_t>(l - m)];
        if (need_dp) acct += src[l - m] * dp[static_cast<std::size_t>(l - m)];
      }
      gm[static_cast<std::size_t>(m)] = acc;
      gt[static_cast<std::size_t>(m)] = acct;
    }
    if (f != nullptr) emit(gm, f, ui, false);
    if (f_theta != nullptr) emit(gt, f_theta, ui, false);
    if (f_lambda != nullptr) emit(gm, f_lambda, ui, true);
  }
}

inline double sphere_eigenvalue(int l) { return -4.0 * std::numbers::pi * l * (l + 1.0); }

inline ScalarField sphere_fd_apply(const ManifoldGrid& grid, const ScalarField& f, double sigma) {
  const auto& g = grid.sphere();
  const auto nlat = static_cast<std::size_t>(g.nlat), nlon = static_cast<std::size_t>(g.nlon);
  ScalarField out(f.size());
  for (std::size_t i = 0; i < nlat; ++i) {
    for (std::size_t j = 0; j < nlon; ++j) {
      const std::size_t k = i * nlon + j;
      const double c = f[k];
      double v = 0.0;
      if (i > 0) v += g.coef_north[i] * (f[k - nlon] - c);
      if (i + 1 < nlat) v += g.coef_south[i] * (f[k + nlon] - c);
      const double east = f[i * nlon + (j + 1) % nlon];
      const double west = f[i * nlon + (j + nlon - 1) % nlon];
      v += g.coef_lon[i] * (east - 2.0 * c + west);
      if (g.coef_pole[i] != 0.0) v += g.coef_pole[i] * (f[i * nlon + (j + nlon / 2) % nlon] - c);
      out[k] = v - sigma * c;
    }
  }
  return out;
}

inline ScalarField periodic_fd_apply(const ManifoldGrid& grid, const ScalarField& f, double sigma) {
  const int n = grid.nx();
  const double h2 = static_cast<double>(n) * n;
  ScalarField out(f.size());
  const auto un = static_cast<std::size_t>(n);
  for (std::size_t iy = 0; iy < static_cast<std::size_t>(grid.ny()); ++iy) {
    for (std::size_t ix = 0; ix < un; ++ix) {
      const std::size_t k = iy * un + ix;
      const double c = f[k];
      double v = (f[iy * un + (ix + 1) % un] - 2.0 * c + f[iy * un + (ix + un - 1) % un]) * h2;
      if (grid.kind() == GridKind::torus2)
        v += (f[((iy + 1) % un) * un + ix] - 2.0 * c + f[((iy + un - 1) % un) * un + ix]) * h2;
      out[k] = v - sigma * c;
    }
  }
  return out;
}

// Upper bound on the operator norm of the discrete Laplacian.
inline double laplacian_norm_bound(const ManifoldGrid& grid, Scheme scheme) {
  const double n = grid.resolution();
  const double pi = std::numbers::pi;
  switch (grid.kind()) {
    case GridKind::circle: return scheme == Scheme::spectral ? pi * pi * n * n : 4.0 * n * n;
    case GridKind::torus2: return scheme == Scheme::spectral ? 2.0 * pi * pi * n * n : 8.0 * n * n;
    case GridKind::sphere: {
      if (scheme == Scheme::spectral) return -sphere_eigenvalue(static_cast<int>(n) - 1);
      const auto& g = grid.sphere();
      double m = 0.0;
      for (int i = 0; i < g.nlat; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        m = std::max(m, 2.0 * (g.coef_north[ui] + g.coef_south[ui] + g.coef_pole[ui] + 2.0 * g.coef_lon[ui]));
      }
      return m;
    }
  }
  return 0.0;
}

// Thomas algorithm for a tridiagonal complex system; sub[0] and sup[n-1] are ignored.
inline void thomas_solve(std::span<const double> sub, std::span<const double> diag,
                         std::span<const double> sup, std::span<std::complex<double>> rhs) {
  const std::size_t n = diag.size();
  std::vector<double> cp(n);
  double denom = diag[0];
  cp[0] = n > 1 ? sup[0] / denom : 0.0;
  rhs[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = diag[i] - sub[i] * cp[i - 1];
    cp[i] = i + 1 < n ? sup[i] / denom : 0.0;
    rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= cp[i] * rhs[i + 1];
}

// Solves (Delta_fd - sigma) u = r on the sphere by a DFT in longitude and one
// tridiagonal solve per wavenumber. sigma == 0 pins the m = 0 mode at the first
// ring; the caller removes the mean afterwards.
inline ScalarField sphere_fd_direct(const ManifoldGrid& grid, const ScalarField& r, double sigma) {
  const auto& g = grid.sphere();
  const auto nlat = static_cast<std::size_t>(g.nlat), nlon = static_cast<std::size_t>(g.nlon);
  std::vector<cvec> spec(nlat, cvec(nlon));
  for (std::size_t i = 0; i < nlat; ++i) {
    for (std::size_t j = 0; j < nlon; ++j) spec[i][j] = r[i * nlon + j];
    grid.fft().forward(spec[i]);
  }
  std::vector<double> sub(nlat), diag(nlat), sup(nlat);
  cvec col(nlat);
  for (std::size_t m = 0; m < nlon; ++m) {
    const double lon = 2.0 * (1.0 - std::cos(static_cast<double>(m) * g.dlambda));
    for (std::size_t i = 0; i < nlat; ++i) {
      sub[i] = g.coef_north[i];
      sup[i] = g.coef_south[i];
      // The antipodal node contributes (-1)^m in longitude wavenumber m.
      const double pole = (m % 2 == 0) ? 0.0 : 2.0 * g.coef_pole[i];
      diag[i] = -g.coef_north[i] - g.coef_south[i] - g.coef_lon[i] * lon - pole - sigma;
      col[i] = spec[i][m];
    }
    if (m == 0 && sigma == 0.0) {
      // Row 0 is implied by the others for consistent data.
      std::span<double> s(sub), d(diag), p(sup);
      thomas_solve(s.subspan(1), d.subspan(1), p.subspan(1), std::span(col).subspan(1));
      col[0] = 0.0;
    } else {
      thomas_solve(sub, diag, sup, col);
    }
    for (std::size_t i = 0; i < nlat; ++i) spec[i][m] = col[i];
  }
  ScalarField out(r.size());
  for (std::size_t i = 0; i < nlat; ++i) {
    grid.fft().inverse(spec[i]);
    for (std::size_t j = 0; j < nlon; ++j) out[i * nlon + j] = spec[i][j].real();
  }
  return out;
}

inline double euclid(const ScalarField& f) {
  double s = 0.0;
  for (double x : f) s += x * x;
  return std::sqrt(s);
}

}  // namespace detail

// Negative semidefinite Laplacian of the unit-volume metric.
inline ScalarField laplacian(const ManifoldGrid& grid, const ScalarField& f,
                             Scheme scheme = Scheme::spectral) {
  require_on_grid(grid, f, "laplacian");
  require_finite(f, "laplacian");
  if (grid.kind() == GridKind::sphere) {
    if (scheme == Scheme::finite_difference) return detail::sphere_fd_apply(grid, f, 0.0);
    auto c = detail::sht_analysis(grid, f.values());
    for (int m = 0; m <= c.lmax; ++m)
      for (int l = m; l <= c.lmax; ++l) c.at(l, m) *= detail::sphere_eigenvalue(l);
    ScalarField out(f.size());
    detail::sht_synthesis(grid, c, out.data());
    return out;
  }
  if (scheme == Scheme::finite_difference) return detail::periodic_fd_apply(grid, f, 0.0);
  const int n = grid.nx();
  const bool torus = grid.kind() == GridKind::torus2;
  return detail::periodic_multiply(grid, f.values(), [&](int mx, int my) {
    return std::complex<double>(detail::spectral_symbol(mx, n) + (torus ? detail::spectral_symbol(my, n) : 0.0));
  });
}

// (Delta - sigma) u.
inline ScalarField apply_helmholtz(const ManifoldGrid& grid, const ScalarField& u, double sigma,
                                   Scheme scheme = Scheme::finite_difference) {
  ScalarField out = laplacian(grid, u, scheme);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= sigma * u[i];
  return out;
}

// Normwise backward error ||r - A u|| / (||A|| ||u|| + ||r||) for A = Delta - sigma.
inline double helmholtz_backward_error(const ManifoldGrid& grid, double sigma, const ScalarField& rhs,
                                       const ScalarField& u, Scheme scheme = Scheme::finite_difference) {
  const ScalarField res = rhs - apply_helmholtz(grid, u, sigma, scheme);
  const double norm_a = detail::laplacian_norm_bound(grid, scheme) + std::abs(sigma);
  const double denom = norm_a * detail::euclid(u) + detail::euclid(rhs);
  return denom > 0.0 ? detail::euclid(res) / denom : 0.0;
}

inline constexpr double kHelmholtzTolerance = 1e-12;

// Solves (Delta - sigma) u = rhs for sigma > 0.
inline ScalarField helmholtz_solve(const ManifoldGrid& grid, double sigma, const ScalarField& rhs,
                                   Scheme scheme = Scheme::finite_difference) {
  require_on_grid(grid, rhs, "helmholtz_solve");
  require_finite(rhs, "helmholtz_solve");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("helmholtz_solve: sigma must be positive and finite");
  auto direct = [&](const ScalarField& r) -> ScalarField {
    if (grid.kind() == GridKind::sphere) {
      if (scheme == Scheme::finite_difference) return detail::sphere_fd_direct(grid, r, sigma);
      // Exact inverse of S Lambda A + sigma (I - S A) - sigma.
      auto c = detail::sht_analysis(grid, r.values());
      ScalarField band(r.size());
      detail::sht_synthesis(grid, c, band.data());
      for (int m = 0; m <= c.lmax; ++m)
        for (int l = m; l <= c.lmax; ++l) c.at(l, m) /= (detail::sphere_eigenvalue(l) - sigma);
      ScalarField u(r.size());
      detail::sht_synthesis(grid, c, u.data());
      for (std::size_t i = 0; i < u.size(); ++i) u[i] -= (r[i] - band[i]) / sigma;
      return u;
    }
    const int n = grid.nx();
    const bool torus = grid.kind() == GridKind::torus2;
    const bool fd = scheme == Scheme::finite_difference;
    return detail::periodic_multiply(grid, r.values(), [&](int mx, int my) {
      const double lx = fd ? detail::fd_symbol(mx, n) : detail::spectral_symbol(mx, n);
      const double ly = torus ? (fd ? detail::fd_symbol(my, n) : detail::spectral_symbol(my, n)) : 0.0;
      return std::complex<double>(1.0 / (lx + ly - sigma));
    });
  };
  ScalarField u = direct(rhs);
  double err = helmholtz_backward_error(grid, sigma, rhs, u, scheme);
  for (int step = 0; step < 3 && err > 1e-15; ++step) {
    const ScalarField res = rhs - apply_helmholtz(grid, u, sigma, scheme);
    ScalarField trial = u + direct(res);
    const double e = helmholtz_backward_error(grid, sigma, rhs, trial, scheme);
    if (!(e < err)) break;
    u = std::move(trial);
    err = e;
  }
  if (!(err <= kHelmholtzTolerance))
    throw SolverError("helmholtz_solve: backward error " + std::to_string(err) + " above tolerance");
  return u;
}

// Mean-zero solution of Delta u = rhs. The rhs mean is projected out if it is at
// rounding level and rejected otherwise.
inline ScalarField poisson_solve(const ManifoldGrid& grid, const ScalarField& rhs,
                                 Scheme scheme = Scheme::spectral) {
  require_on_grid(grid, rhs, "poisson_solve");
  require_finite(rhs, "poisson_solve");
  const double mean = integrate(grid, rhs);
  if (std::abs(mean) > 1e-8 * std::max(1.0, rhs.sup_abs()))
    throw DomainError("poisson_solve: rhs has nonzero mean " + std::to_string(mean));
  const ScalarField r = rhs - mean;
  ScalarField u;
  if (grid.kind() == GridKind::sphere) {
    if (scheme == Scheme::finite_difference) {
      u = detail::sphere_fd_direct(grid, r, 0.0);
    } else {
      auto c = detail::sht_analysis(grid, r.values());
      c.at(0, 0) = 0.0;
      for (int m = 0; m <= c.lmax; ++m)
        for (int l = std::max(m, 1); l <= c.lmax; ++l) c.at(l, m) /= detail::sphere_eigenvalue(l);
      u = ScalarField(r.size());
      detail::sht_synthesis(grid, c, u.data());
    }
  } else {
    const int n = grid.nx();
    const bool torus = grid.kind() == GridKind::torus2;
    const bool fd = scheme == Scheme::finite_difference;
    u = detail::periodic_multiply(grid, r.values(), [&](int mx, int my) {
      if (mx == 0 && my == 0) return std::complex<double>(0.0);
      const double lx = fd ? detail::fd_symbol(mx, n) : detail::spectral_symbol(mx, n);
      const double ly = torus ? (fd ? detail::fd_symbol(my, n) : detail::spectral_symbol(my, n)) : 0.0;
      return std::complex<double>(1.0 / (lx + ly));
    });
  }
  const double umean = integrate(grid, u);
  return u - umean;
}

// d/dz in the natural chart: x on the circle, x + iy on the torus, the
// stereographic coordinate on the sphere. Computed spectrally.
inline ComplexField chart_dz(const ManifoldGrid& grid, const ScalarField& f) {
  require_on_grid(grid, f, "chart_dz");
  require_finite(f, "chart_dz");
  ComplexField out(f.size());
  if (grid.kind() == GridKind::sphere) {
    const auto c = detail::sht_analysis(grid, f.values());
    std::vector<double> ft(f.size()), fl(f.size());
    detail::sht_synthesis(grid, c, nullptr, ft.data(), fl.data());
    const auto coords = grid.coordinates();
    for (std::size_t k = 0; k < f.size(); ++k) {
      const double th = coords[k][0], lam = coords[k][1];
      const double sh = std::sin(0.5 * th);
      const std::complex<double> inner(-2.0 * sh * sh * ft[k], -std::tan(0.5 * th) * fl[k]);
      out[k] = 0.5 * std::polar(1.0, -lam) * inner;
    }
    return out;
  }
  const int n = grid.nx();
  const ScalarField fx = detail::periodic_multiply(grid, f.values(), [&](int mx, int) {
    return detail::derivative_symbol(mx, n, 1);
  });
  if (grid.kind() == GridKind::circle) {
    for (std::size_t k = 0; k < f.size(); ++k) out[k] = 0.5 * fx[k];
    return out;
  }
  const ScalarField fy = detail::periodic_multiply(grid, f.values(), [&](int, int my) {
    return detail::derivative_symbol(my, n, 1);
  });
  for (std::size_t k = 0; k < f.size(); ++k) out[k] = {0.5 * fx[k], -0.5 * fy[k]};
  return out;
}

// sup-norms of all partial derivatives of each order 0..max_order, spectral.
// On the sphere only orders <= 1 are available, measured in the stereographic
// chart on every ring except the northernmost (closest to z = infinity).
inline std::vector<double> derivative_sup_norms(const ManifoldGrid& grid, const ScalarField& f, int max_order) {
  require_on_grid(grid, f, "derivative_sup_norms");
  require_finite(f, "derivative_sup_norms");
  if (max_order < 0) throw DomainError("derivative_sup_norms: negative order");
  std::vector<double> out(static_cast<std::size_t>(max_order) + 1, 0.0);
  out[0] = f.sup_abs();
  if (grid.kind() == GridKind::sphere) {
    if (max_order > 1) throw UnavailableError("sphere derivative norms are available up to order 1");
    if (max_order == 1) {
      const ComplexField dz = chart_dz(grid, f);
      const auto nlon = static_cast<std::size_t>(grid.sphere().nlon);
      double m = 0.0;
      for (std::size_t k = nlon; k < f.size(); ++k)
        m = std::max({m, std::abs(2.0 * dz[k].real()), std::abs(2.0 * dz[k].imag())});
      out[1] = m;
    }
    return out;
  }
  const int n = grid.nx();
  const bool torus = grid.kind() == GridKind::torus2;
  const auto spectrum = detail::periodic_forward(grid, f.values());
  for (int order = 1; order <= max_order; ++order) {
    double m = 0.0;
    for (int a = order; a >= (torus ? 0 : order); --a) {
      const int b = order - a;
      detail::cvec s = spectrum;
      for (int my = 0; my < grid.ny(); ++my)
        for (int mx = 0; mx < n; ++mx)
          s[static_cast<std::size_t>(my * n + mx)] *=
              detail::derivative_symbol(mx, n, a) * (torus ? detail::derivative_symbol(my, n, b) : 1.0);
      m = std::max(m, detail::periodic_inverse_real(grid, std::move(s)).sup_abs());
    }
    out[static_cast<std::size_t>(order)] = m;
  }
  return out;
}

// Structural facts about the finite-difference matrix of Delta - sigma.
struct MMatrixReport {
  double min_offdiagonal = 0.0;        // should be >= 0
  double max_abs_row_sum = 0.0;        // of Delta alone; should vanish
  double weighted_symmetry_defect = 0.0;  // max |w_i A_ij - w_j A_ji| / max |w_i A_ij|
  double min_diagonal_excess = 0.0;    // |a_ii| - sum_j |a_ij|, equals sigma
  bool is_m_matrix = false;
};

inline MMatrixReport fd_matrix_report(const ManifoldGrid& grid, double sigma) {
  MMatrixReport rep;
  rep.min_offdiagonal = std::numeric_limits<double>::infinity();
  rep.min_diagonal_excess = std::numeric_limits<double>::infinity();
  if (grid.kind() == GridKind::sphere) {
    const auto& g = grid.sphere();
    double scale = 0.0, row_scale = 0.0;
    for (int i = 0; i < g.nlat; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      if (i > 0) rep.min_offdiagonal = std::min(rep.min_offdiagonal, g.coef_north[ui]);
      if (i + 1 < g.nlat) rep.min_offdiagonal = std::min(rep.min_offdiagonal, g.coef_south[ui]);
      if (i == 0 || i + 1 == g.nlat) rep.min_offdiagonal = std::min(rep.min_offdiagonal, g.coef_pole[ui]);
      rep.min_offdiagonal = std::min(rep.min_offdiagonal, g.coef_lon[ui]);
      const double off_sum = g.coef_north[ui] + g.coef_south[ui] + g.coef_pole[ui] + 2.0 * g.coef_lon[ui];
      rep.min_diagonal_excess = std::min(rep.min_diagonal_excess, std::abs(-off_sum - sigma) - off_sum);
      row_scale = std::max(row_scale, off_sum);
      if (i + 1 < g.nlat) {
        const double a = g.gl_weight[ui] * g.coef_south[ui];
        const double b = g.gl_weight[ui + 1] * g.coef_north[ui + 1];
        scale = std::max(scale, std::abs(a));
        rep.weighted_symmetry_defect = std::max(rep.weighted_symmetry_defect, std::abs(a - b));
      }
    }
    if (scale > 0.0) rep.weighted_symmetry_defect /= scale;
    // Row sums, measured by applying the operator to a constant.
    rep.max_abs_row_sum = detail::sphere_fd_apply(grid, ScalarField(grid.size(), 1.0), 0.0).sup_abs() / row_scale;
  } else {
    const double n = grid.resolution();
    const double off = n * n;
    const int neighbours = grid.kind() == GridKind::torus2 ? 4 : 2;
    rep.min_offdiagonal = off;
    rep.max_abs_row_sum = 0.0;
    rep.min_diagonal_excess = std::abs(-neighbours * off - sigma) - neighbours * off;
    rep.weighted_symmetry_defect = 0.0;
  }
  rep.is_m_matrix = rep.min_offdiagonal >= 0.0 && rep.max_abs_row_sum < 1e-12 && sigma > 0.0 &&
                    rep.min_diagonal_excess > 0.0;
  return rep;
}

}  // namespace kwv
