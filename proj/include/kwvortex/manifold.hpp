#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kwvortex/error.hpp"
#include "kwvortex/fft.hpp"
#include "kwvortex/legendre.hpp"

namespace kwv {

enum class GridKind { circle, torus2, sphere };
enum class Scheme { finite_difference, spectral };

inline constexpr int kMinResolution = 8;
inline constexpr int kMaxResolution = 1024;
// Spherical harmonic transforms are O(N^3); above this they are refused.
inline constexpr int kMaxSpectralSphereResolution = 512;

inline std::string to_string(GridKind k) {
  switch (k) {
    case GridKind::circle: return "circle";
    case GridKind::torus2: return "torus2";
    case GridKind::sphere: return "sphere";
  }
  return "unknown";
}

inline std::string to_string(Scheme s) {
  return s == Scheme::spectral ? "spectral" : "fd";
}

inline GridKind parse_grid_kind(std::string_view name) {
  if (name == "circle") return GridKind::circle;
  if (name == "torus2" || name == "torus") return GridKind::torus2;
  if (name == "sphere") return GridKind::sphere;
  throw DomainError("unknown grid kind '" + std::string(name) + "'");
}

inline Scheme parse_scheme(std::string_view name) {
  if (name == "fd" || name == "finite_difference") return Scheme::finite_difference;
  if (name == "spectral") return Scheme::spectral;
  throw DomainError("unknown scheme '" + std::string(name) + "'");
}

// Rings run north to south in colatitude. Stencil coefficients are scaled so
// that the operator is the Laplacian of the unit-area round metric.
struct SphereGeometry {
  int nlat = 0;
  int nlon = 0;
  double dlambda = 0.0;
  std::vector<double> theta, cos_theta, sin_theta;
  std::vector<double> gl_weight;  // in cos(theta), sums to 2
  std::vector<double> coef_north, coef_south, coef_lon;
  std::vector<double> coef_pole;  // coupling to the antipodal node of the same ring
};

class ManifoldGrid {
 public:
  ManifoldGrid() = default;

  GridKind kind() const noexcept { return impl_->kind; }
  int resolution() const noexcept { return impl_->resolution; }
  std::size_t size() const noexcept { return impl_->weights.size(); }
  int nx() const noexcept { return impl_->nx; }
  int ny() const noexcept { return impl_->ny; }
  std::span<const double> weights() const noexcept { return impl_->weights; }
  // circle: (x, 0); torus2: (x, y); sphere: (theta, lambda)
  std::span<const std::array<double, 2>> coordinates() const noexcept { return impl_->coords; }
  double total_volume() const noexcept { return 1.0; }
  const Fft& fft() const noexcept { return impl_->fft; }
  const Fft& fft_y() const noexcept { return impl_->fft_y; }
  std::uint64_t hash() const noexcept { return impl_->hash; }
  bool valid() const noexcept { return static_cast<bool>(impl_); }

  const SphereGeometry& sphere() const {
    if (impl_->kind != GridKind::sphere) throw DomainError("grid is not a sphere");
    return impl_->sphere;
  }

  // Coordinates in [0,1)^2 used by field expressions: torus (x, y); circle (x, 0);
  // sphere (lambda / 2pi, theta / pi).
  std::array<double, 2> unit_coordinates(std::size_t node) const {
    const auto& c = impl_->coords[node];
    if (impl_->kind == GridKind::sphere)
      return {c[1] / (2.0 * std::numbers::pi), c[0] / std::numbers::pi};
    return c;
  }

  // Chart coordinate of a node: x on the circle, x + i y on the torus,
  // stereographic z = cot(theta/2) e^{i lambda} on the sphere.
  std::complex<double> chart_point(std::size_t node) const {
    const auto& c = impl_->coords[node];
    if (impl_->kind == GridKind::sphere)
      return std::polar(1.0 / std::tan(0.5 * c[0]), c[1]);
    return {c[0], impl_->kind == GridKind::torus2 ? c[1] : 0.0};
  }

  bool operator==(const ManifoldGrid& o) const noexcept {
    return impl_ == o.impl_ ||
           (impl_ && o.impl_ && impl_->kind == o.impl_->kind &&
            impl_->resolution == o.impl_->resolution);
  }

 private:
  struct Impl {
    GridKind kind{};
    int resolution = 0;
    int nx = 0;
    int ny = 0;
    std::vector<double> weights;
    std::vector<std::array<double, 2>> coords;
    Fft fft;
    Fft fft_y;
    SphereGeometry sphere;
    std::uint64_t hash = 0;
  };
  std::shared_ptr<const Impl> impl_;

  friend ManifoldGrid build_grid(GridKind kind, int resolution);
};

namespace detail {
inline std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}
}  // namespace detail

inline ManifoldGrid build_grid(GridKind kind, int resolution) {
  if (resolution < kMinResolution || resolution > kMaxResolution)
    throw DomainError("resolution " + std::to_string(resolution) + " outside [" +
                      std::to_string(kMinResolution) + ", " + std::to_string(kMaxResolution) + "]");
  using std::numbers::pi;
  auto impl = std::make_shared<ManifoldGrid::Impl>();
  impl->kind = kind;
  impl->resolution = resolution;
  const int n = resolution;
  switch (kind) {
    case GridKind::circle: {
      impl->nx = n;
      impl->ny = 1;
      impl->weights.assign(static_cast<std::size_t>(n), 1.0 / n);
      for (int j = 0; j < n; ++j) impl->coords.push_back({static_cast<double>(j) / n, 0.0});
      impl->fft = Fft(static_cast<std::size_t>(n));
      break;
    }
    case GridKind::torus2: {
      impl->nx = n;
      impl->ny = n;
      impl->weights.assign(static_cast<std::size_t>(n) * n, 1.0 / (static_cast<double>(n) * n));
      for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
          impl->coords.push_back({static_cast<double>(ix) / n, static_cast<double>(iy) / n});
      impl->fft = Fft(static_cast<std::size_t>(n));
      impl->fft_y = Fft(static_cast<std::size_t>(n));
      break;
    }
    case GridKind::sphere: {
      auto& g = impl->sphere;
      g.nlat = n;
      g.nlon = 2 * n;
      g.dlambda = 2.0 * pi / g.nlon;
      const auto rule = gauss_legendre(n);
      g.gl_weight = rule.weights;
      g.cos_theta = rule.nodes;
      for (int i = 0; i < n; ++i) {
        const double x = rule.nodes[static_cast<std::size_t>(i)];
        g.theta.push_back(std::acos(x));
        g.sin_theta.push_back(std::sqrt((1.0 - x) * (1.0 + x)));
      }
      // Finite volumes whose cells are bounded by the cumulative Gauss-Legendre
      // weights, so cell areas equal the quadrature weights and the operator is
      // self-adjoint and conservative in the grid inner product.
      std::vector<double> face_cos(static_cast<std::size_t>(n) + 1);
      face_cos[0] = 1.0;
      for (int i = 0; i < n; ++i)
        face_cos[static_cast<std::size_t>(i) + 1] = face_cos[static_cast<std::size_t>(i)] - g.gl_weight[static_cast<std::size_t>(i)];
      const auto face_sin = [&](std::size_t f) {
        if (f == 0 || f == static_cast<std::size_t>(n)) return 0.0;
        return std::sqrt(std::max(0.0, (1.0 - face_cos[f]) * (1.0 + face_cos[f])));
      };
      const double metric = 4.0 * pi;  // unit-area sphere has radius^2 = 1/(4 pi)
      g.coef_north.assign(static_cast<std::size_t>(n), 0.0);
      g.coef_south.assign(static_cast<std::size_t>(n), 0.0);
      g.coef_pole.assign(static_cast<std::size_t>(n), 0.0);
      g.coef_lon.assign(static_cast<std::size_t>(n), 0.0);
      for (int i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const double area = g.gl_weight[ui];
        if (i > 0) g.coef_north[ui] = metric * face_sin(ui) / (area * (g.theta[ui] - g.theta[ui - 1]));
        if (i < n - 1) g.coef_south[ui] = metric * face_sin(ui + 1) / (area * (g.theta[ui + 1] - g.theta[ui]));
        g.coef_lon[ui] = metric / (g.sin_theta[ui] * g.sin_theta[ui] * g.dlambda * g.dlambda);
      }
      // The polar cells are wedges meeting at the pole; a coupling to the
      // antipodal node of the same ring makes them exact for sin(t) e^{il}.
      for (const int i : {0, n - 1}) {
        const auto ui = static_cast<std::size_t>(i);
        const auto uj = static_cast<std::size_t>(i == 0 ? 1 : n - 2);
        const double c = i == 0 ? g.coef_south[ui] : g.coef_north[ui];
        const double st = g.sin_theta[ui];
        const double lon = 2.0 * g.coef_lon[ui] * (1.0 - std::cos(g.dlambda));
        g.coef_pole[ui] = (c * (g.sin_theta[uj] - st) - lon * st + 2.0 * metric * st) / (2.0 * st);
      }
      impl->nx = g.nlon;
      impl->ny = g.nlat;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < g.nlon; ++j) {
          impl->coords.push_back({g.theta[static_cast<std::size_t>(i)], j * g.dlambda});
          impl->weights.push_back(g.gl_weight[static_cast<std::size_t>(i)] * g.dlambda / (4.0 * pi));
        }
      impl->fft = Fft(static_cast<std::size_t>(g.nlon));
      break;
    }
  }
  std::uint64_t h = 14695981039346656037ull;
  const int k = static_cast<int>(kind);
  h = detail::fnv1a(h, &k, sizeof k);
  h = detail::fnv1a(h, &resolution, sizeof resolution);
  h = detail::fnv1a(h, impl->weights.data(), impl->weights.size() * sizeof(double));
  h = detail::fnv1a(h, impl->coords.data(), impl->coords.size() * sizeof(std::array<double, 2>));
  impl->hash = h;
  ManifoldGrid grid;
  grid.impl_ = std::move(impl);
  return grid;
}

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(std::size_t n, double value = 0.0) : v_(n, value) {}
  explicit ScalarField(std::vector<double> values) : v_(std::move(values)) {}

  std::size_t size() const noexcept { return v_.size(); }
  double& operator[](std::size_t i) noexcept { return v_[i]; }
  double operator[](std::size_t i) const noexcept { return v_[i]; }
  std::span<double> values() noexcept { return v_; }
  std::span<const double> values() const noexcept { return v_; }
  const std::vector<double>& vector() const noexcept { return v_; }
  double* data() noexcept { return v_.data(); }
  const double* data() const noexcept { return v_.data(); }
  auto begin() noexcept { return v_.begin(); }
  auto end() noexcept { return v_.end(); }
  auto begin() const noexcept { return v_.begin(); }
  auto end() const noexcept { return v_.end(); }

  double max() const { return *std::max_element(v_.begin(), v_.end()); }
  double min() const { return *std::min_element(v_.begin(), v_.end()); }
  double sup_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }
  bool all_finite() const {
    return std::all_of(v_.begin(), v_.end(), [](double x) { return std::isfinite(x); });
  }

  template <class F>
  ScalarField map(F&& f) const {
    ScalarField out(v_.size());
    for (std::size_t i = 0; i < v_.size(); ++i) out.v_[i] = f(v_[i]);
    return out;
  }

  ScalarField& operator+=(const ScalarField& o) { return zip(o, [](double a, double b) { return a + b; }); }
  ScalarField& operator-=(const ScalarField& o) { return zip(o, [](double a, double b) { return a - b; }); }
  ScalarField& operator*=(const ScalarField& o) { return zip(o, [](double a, double b) { return a * b; }); }
  ScalarField& operator*=(double c) {
    for (double& x : v_) x *= c;
    return *this;
  }
  ScalarField& operator+=(double c) {
    for (double& x : v_) x += c;
    return *this;
  }

  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(ScalarField a, const ScalarField& b) { return a *= b; }
  friend ScalarField operator*(ScalarField a, double c) { return a *= c; }
  friend ScalarField operator*(double c, ScalarField a) { return a *= c; }
  friend ScalarField operator+(ScalarField a, double c) { return a += c; }
  friend ScalarField operator-(ScalarField a, double c) { return a += -c; }
  friend ScalarField operator-(ScalarField a) { return a *= -1.0; }

 private:
  template <class Op>
  ScalarField& zip(const ScalarField& o, Op op) {
    if (o.size() != size()) throw DomainError("field size mismatch");
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] = op(v_[i], o.v_[i]);
    return *this;
  }
  std::vector<double> v_;
};

class ComplexField {
 public:
  ComplexField() = default;
  explicit ComplexField(std::size_t n) : v_(n) {}
  std::size_t size() const noexcept { return v_.size(); }
  std::complex<double>& operator[](std::size_t i) noexcept { return v_[i]; }
  const std::complex<double>& operator[](std::size_t i) const noexcept { return v_[i]; }
  std::span<std::complex<double>> values() noexcept { return v_; }
  std::span<const std::complex<double>> values() const noexcept { return v_; }

  ScalarField abs_squared() const {
    ScalarField out(v_.size());
    for (std::size_t i = 0; i < v_.size(); ++i) out[i] = std::norm(v_[i]);
    return out;
  }

 private:
  std::vector<std::complex<double>> v_;
};

inline void require_on_grid(const ManifoldGrid& grid, const ScalarField& f, const char* what) {
  if (f.size() != grid.size())
    throw DomainError(std::string(what) + ": field has " + std::to_string(f.size()) +
                      " values, grid has " + std::to_string(grid.size()));
}

inline void require_finite(const ScalarField& f, const char* what) {
  if (!f.all_finite()) throw DomainError(std::string(what) + ": field contains non-finite values");
}

// Quadrature with the grid weights, summed in node order.
inline double integrate(const ManifoldGrid& grid, const ScalarField& f) {
  require_on_grid(grid, f, "integrate");
  const auto w = grid.weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += w[i] * f[i];
  return acc;
}

// Evaluates fn(x, y) on the unit coordinates of every node.
inline ScalarField sample(const ManifoldGrid& grid, const std::function<double(double, double)>& fn) {
  ScalarField out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto u = grid.unit_coordinates(i);
    out[i] = fn(u[0], u[1]);
  }
  return out;
}

// Evaluates fn on the native coordinates (see ManifoldGrid::coordinates).
inline ScalarField sample_native(const ManifoldGrid& grid,
                                 const std::function<double(double, double)>& fn) {
  ScalarField out(grid.size());
  const auto c = grid.coordinates();
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = fn(c[i][0], c[i][1]);
  return out;
}

inline double weighted_l2(const ManifoldGrid& grid, const ScalarField& f) {
  return std::sqrt(integrate(grid, f * f));
}

}  // namespace kwv
