#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kwvortex/kwvortex.hpp"
#include "oracles/dense.hpp"

using namespace kwv;
using std::numbers::pi;

namespace {

// Smooth random trig polynomial in unit coordinates; y is ignored on the circle.
ScalarField random_trig(const ManifoldGrid& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> a(-1.0, 1.0);
  std::uniform_int_distribution<int> k(-3, 3);
  std::vector<std::array<double, 4>> terms;
  for (int j = 0; j < 4; ++j) terms.push_back({a(rng), a(rng), double(k(rng)), double(k(rng))});
  const bool planar = g.kind() != GridKind::circle;
  const double c0 = a(rng);
  return sample(g, [&](double x, double y) {
    double v = c0;
    for (const auto& t : terms) {
      const double arg = 2 * pi * (t[2] * x + (planar ? t[3] * y : 0.0));
      v += t[0] * std::cos(arg) + t[1] * std::sin(arg);
    }
    return v;
  });
}

// Band-limited field on the sphere built from spherical harmonics.
ScalarField random_harmonics(const ManifoldGrid& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> a(-1.0, 1.0);
  std::vector<std::array<double, 4>> terms;
  for (int l = 0; l <= 4; ++l)
    for (int m = 0; m <= l; ++m) terms.push_back({double(l), double(m), a(rng), a(rng)});
  return sample_native(g, [&](double th, double lam) {
    double v = 0.0;
    for (const auto& t : terms) {
      const auto l = static_cast<unsigned>(t[0]), m = static_cast<unsigned>(t[1]);
      v += std::sph_legendre(l, m, th) * (t[2] * std::cos(m * lam) + t[3] * std::sin(m * lam));
    }
    return v;
  });
}

ScalarField smooth_field(const ManifoldGrid& g, unsigned seed) {
  return g.kind() == GridKind::sphere ? random_harmonics(g, seed) : random_trig(g, seed);
}

double max_abs_diff(const ScalarField& a, const ScalarField& b) { return (a - b).sup_abs(); }

}  // namespace

TEST(Laplacian, CircleCosineEigenfunction) {
  const auto g = build_grid(GridKind::circle, 64);
  const auto f = sample(g, [](double x, double) { return std::cos(2 * pi * x); });
  EXPECT_LE(max_abs_diff(laplacian(g, f, Scheme::spectral), f * (-4 * pi * pi)), 1e-10);
}

TEST(Laplacian, ConstantsAreAnnihilated) {
  for (auto kind : {GridKind::circle, GridKind::torus2, GridKind::sphere})
    for (auto scheme : {Scheme::spectral, Scheme::finite_difference}) {
      const auto g = build_grid(kind, 16);
      EXPECT_LE(laplacian(g, ScalarField(g.size(), 3.0), scheme).sup_abs(), 1e-9) << to_string(kind);
    }
}

TEST(Laplacian, TorusProductEigenfunction) {
  const auto g = build_grid(GridKind::torus2, 32);
  const auto f = sample(g, [](double x, double y) { return std::cos(2 * pi * x) * std::cos(2 * pi * y); });
  EXPECT_LE(max_abs_diff(laplacian(g, f, Scheme::spectral), f * (-8 * pi * pi)), 1e-9);
}

TEST(Laplacian, SphereHarmonicsAreEigenfunctions) {
  const auto g = build_grid(GridKind::sphere, 24);
  for (unsigned l : {1u, 2u, 5u})
    for (unsigned m = 0; m <= l; m += 2) {
      const auto f = sample_native(g, [&](double th, double lam) { return std::sph_legendre(l, m, th) * std::cos(m * lam); });
      const double ev = -4 * pi * l * (l + 1.0);
      EXPECT_LE(max_abs_diff(laplacian(g, f, Scheme::spectral), f * ev), 1e-10 * std::abs(ev)) << l << " " << m;
    }
}

TEST(Laplacian, FiniteDifferenceCircleSymbol) {
  const int n = 32;
  const auto g = build_grid(GridKind::circle, n);
  const auto f = sample(g, [](double x, double) { return std::sin(4 * pi * x); });
  const double symbol = -4.0 * n * n * std::pow(std::sin(2 * pi / n), 2);
  EXPECT_LE(max_abs_diff(laplacian(g, f, Scheme::finite_difference), f * symbol), 1e-10);
}

TEST(Laplacian, RejectsMismatchAndNonFinite) {
  const auto g = build_grid(GridKind::circle, 16);
  EXPECT_THROW(laplacian(g, ScalarField(8, 0.0)), DomainError);
  ScalarField f(16, 0.0);
  f[3] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(laplacian(g, f), DomainError);
}

TEST(Helmholtz, CosineExample) {
  const auto g = build_grid(GridKind::circle, 64);
  const auto rhs = sample(g, [](double x, double) { return std::cos(2 * pi * x); });
  const auto u = helmholtz_solve(g, 1.0, rhs, Scheme::spectral);
  EXPECT_LE(max_abs_diff(u, rhs * (-1.0 / (4 * pi * pi + 1.0))), 1e-12);
}

TEST(Helmholtz, ConstantsAndZero) {
  for (auto kind : {GridKind::circle, GridKind::torus2, GridKind::sphere})
    for (auto scheme : {Scheme::spectral, Scheme::finite_difference}) {
      const auto g = build_grid(kind, 16);
      EXPECT_LE(max_abs_diff(helmholtz_solve(g, 5.0, ScalarField(g.size(), 5.0), scheme), ScalarField(g.size(), -1.0)),
                1e-12);
      EXPECT_LE(helmholtz_solve(g, 1.0, ScalarField(g.size(), 0.0), scheme).sup_abs(), 1e-15);
    }
}

TEST(Helmholtz, RejectsNonPositiveSigma) {
  const auto g = build_grid(GridKind::circle, 16);
  EXPECT_THROW(helmholtz_solve(g, 0.0, ScalarField(16, 1.0)), DomainError);
  EXPECT_THROW(helmholtz_solve(g, -1.0, ScalarField(16, 1.0)), DomainError);
}

TEST(Helmholtz, RoundTripResidual) {
  for (auto kind : {GridKind::circle, GridKind::torus2, GridKind::sphere})
    for (auto scheme : {Scheme::spectral, Scheme::finite_difference})
      for (double sigma : {0.1, 10.0, 1e4}) {
        const auto g = build_grid(kind, 32);
        const auto rhs = smooth_field(g, 11);
        const auto u = helmholtz_solve(g, sigma, rhs, scheme);
        const auto res = rhs - apply_helmholtz(g, u, sigma, scheme);
        EXPECT_LE(weighted_l2(g, res) / weighted_l2(g, rhs), 1e-10) << to_string(kind) << " " << sigma;
        EXPECT_LE(helmholtz_backward_error(g, sigma, rhs, u, scheme), kHelmholtzTolerance);
      }
}

TEST(Helmholtz, DeterministicForFixedInput) {
  const auto g = build_grid(GridKind::sphere, 24);
  const auto rhs = random_harmonics(g, 5);
  const auto a = helmholtz_solve(g, 2.0, rhs), b = helmholtz_solve(g, 2.0, rhs);
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a[i], b[i]);
}

TEST(Helmholtz, SphereFiniteDifferenceConvergesAtSecondOrder) {
  // Solution error in the weighted L2 norm for a mix of harmonics, sigma = 1.
  std::vector<double> err;
  for (int n : {16, 32, 64}) {
    const auto g = build_grid(GridKind::sphere, n);
    ScalarField u(g.size(), 0.0), rhs(g.size(), 0.0);
    for (unsigned m : {0u, 1u, 2u}) {
      const auto y = sample_native(g, [&](double th, double lam) { return std::sph_legendre(3, m, th) * std::cos(m * lam); });
      u = u + y;
      rhs = rhs + y * (-48 * pi - 1.0);
    }
    err.push_back(weighted_l2(g, helmholtz_solve(g, 1.0, rhs, Scheme::finite_difference) - u));
  }
  EXPECT_GE(err[0] / err[1], 3.3);
  EXPECT_GE(err[1] / err[2], 3.3);
}

TEST(MaximumPrinciple, NonnegativeRhsGivesNonpositiveSolution) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (auto kind : {GridKind::circle, GridKind::torus2, GridKind::sphere}) {
    const auto g = build_grid(kind, 24);
    for (int trial = 0; trial < 10; ++trial)
      for (double sigma : {0.1, 1.0, 10.0}) {
        ScalarField rhs(g.size());
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = u01(rng) < 0.3 ? 0.0 : u01(rng);
        EXPECT_LE(helmholtz_solve(g, sigma, rhs, Scheme::finite_difference).max(), 1e-12) << to_string(kind);
      }
  }
}

TEST(DiscreteProperties, SelfAdjointness) {
  for (auto kind : {GridKind::circle, GridKind::torus2, GridKind::sphere})
    for (auto scheme : {Scheme::spectral, Scheme::finite_difference}) {
      const auto g = build_grid(kind, 32);
      const auto u = smooth_field(g, 1), v = smooth_field(g, 2);
      const double a = integrate(g, u * laplacian(g, v, scheme));
      const double b = integrate(g, v * laplacian(g, u, scheme));
      EXPECT_NEAR(a, b, 1e-9) << to_string(kind) << " " << to_string(scheme);
    }
}

TEST(DiscreteProperties, LaplacianIntegratesToZero) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  for (auto kind : {GridKind::circle, GridKind::torus2, GridKind::sphere})
    for (auto scheme : {Scheme::spectral, Scheme::finite_difference}) {
      const auto g = build_grid(kind, 32);
      EXPECT_NEAR(integrate(g, laplacian(g, smooth_field(g, 4), scheme)), 0.0, 1e-9);
      // also for rough fields
      ScalarField r(g.size());
      for (std::size_t i = 0; i < r.size(); ++i) r[i] = nd(rng);
      EXPECT_NEAR(integrate(g, laplacian(g, r, scheme)), 0.0, 1e-9) << to_string(kind) << " " << to_string(scheme);
    }
}

TEST(DiscreteProperties, DenseFiniteDifferenceMatrixIsMMatrix) {
  for (auto kind : {GridKind::circle, GridKind::torus2, GridKind::sphere}) {
    const auto g = build_grid(kind, kind == GridKind::circle ? 32 : 8);
    const auto n = g.size();
    const Eigen::MatrixXd A = oracle::probe(n, [&](const ScalarField& f) { return laplacian(g, f, Scheme::finite_difference); });
    Eigen::VectorXd w(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) w(static_cast<Eigen::Index>(i)) = g.weights()[i];
    const Eigen::MatrixXd WA = w.asDiagonal() * A;
    EXPECT_LE((WA - WA.transpose()).cwiseAbs().maxCoeff(), 1e-12 * WA.cwiseAbs().maxCoeff()) << to_string(kind);
    double min_off = 0.0, max_row = 0.0;
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      max_row = std::max(max_row, std::abs(A.row(i).sum()) / A.row(i).cwiseAbs().sum());
      for (Eigen::Index j = 0; j < A.cols(); ++j)
        if (i != j) min_off = std::min(min_off, A(i, j));
    }
    EXPECT_GE(min_off, 0.0) << to_string(kind);
    EXPECT_LE(max_row, 1e-13) << to_string(kind);
    const Eigen::MatrixXd inv = (A - Eigen::MatrixXd::Identity(A.rows(), A.cols())).inverse();
    EXPECT_LE(inv.maxCoeff(), 1e-14) << to_string(kind);
  }
}

TEST(DiscreteProperties, MatrixReportAgreesWithDenseProbe) {
  for (auto kind : {GridKind::circle, GridKind::torus2, GridKind::sphere}) {
    const auto g = build_grid(kind, 16);
    const auto rep = fd_matrix_report(g, 2.0);
    EXPECT_TRUE(rep.is_m_matrix) << to_string(kind);
    EXPECT_GE(rep.min_offdiagonal, 0.0);
    EXPECT_LE(rep.weighted_symmetry_defect, 1e-12);
    EXPECT_NEAR(rep.min_diagonal_excess, 2.0, 1e-9 * (1.0 + 16.0 * 16.0 * 4 * pi));
  }
  EXPECT_FALSE(fd_matrix_report(build_grid(GridKind::circle, 16), 0.0).is_m_matrix);
}

TEST(Poisson, Examples) {
  const auto c = build_grid(GridKind::circle, 64);
  const auto rhs = sample(c, [](double x, double) { return std::cos(2 * pi * x); });
  EXPECT_LE(max_abs_diff(poisson_solve(c, rhs), rhs * (-1.0 / (4 * pi * pi))), 1e-12);
  EXPECT_LE(poisson_solve(c, ScalarField(64, 0.0)).sup_abs(), 1e-15);
  const auto t = build_grid(GridKind::torus2, 32);
  const auto s = sample(t, [](double, double y) { return std::sin(2 * pi * y); });
  EXPECT_LE(max_abs_diff(poisson_solve(t, s), s * (-1.0 / (4 * pi * pi))), 1e-12);
}

TEST(Poisson, SolutionIsMeanZeroAndSolves) {
  for (auto kind : {GridKind::circle, GridKind::torus2, GridKind::sphere})
    for (auto scheme : {Scheme::spectral, Scheme::finite_difference}) {
      const auto g = build_grid(kind, 32);
      const auto f = laplacian(g, smooth_field(g, 7), scheme);
      const auto u = poisson_solve(g, f, scheme);
      EXPECT_NEAR(integrate(g, u), 0.0, 1e-12);
      EXPECT_LE((laplacian(g, u, scheme) - f).sup_abs(), 1e-10 * std::max(1.0, f.sup_abs())) << to_string(kind);
    }
}

TEST(Poisson, RejectsNonzeroMean) {
  const auto g = build_grid(GridKind::circle, 32);
  EXPECT_THROW(poisson_solve(g, ScalarField(32, 1.0)), DomainError);
}

TEST(DerivativeNorms, Examples) {
  const auto g = build_grid(GridKind::circle, 64);
  const auto k = derivative_sup_norms(g, ScalarField(64, 2.5), 3);
  ASSERT_EQ(k.size(), 4u);
  EXPECT_EQ(k[0], 2.5);
  for (int i = 1; i <= 3; ++i) EXPECT_LE(k[static_cast<std::size_t>(i)], 1e-10);

  const auto c = sample(g, [](double x, double) { return std::cos(2 * pi * x); });
  const auto d = derivative_sup_norms(g, c, 1);
  EXPECT_NEAR(d[0], 1.0, 1e-14);
  // nodes hit x = 1/4 exactly, where |sin| = 1
  EXPECT_NEAR(d[1], 2 * pi, 1e-10);

  const auto f = sample(g, [](double x, double) { return std::sin(2 * pi * x) + std::cos(4 * pi * x); });
  double oracle = 0.0;
  for (int i = 0; i < 64; ++i) {
    const double x = i / 64.0;
    oracle = std::max(oracle, std::abs(-4 * pi * pi * std::sin(2 * pi * x) - 16 * pi * pi * std::cos(4 * pi * x)));
  }
  EXPECT_NEAR(derivative_sup_norms(g, f, 2)[2], oracle, 1e-8);
}

TEST(DerivativeNorms, TorusIncludesMixedPartials) {
  const auto g = build_grid(GridKind::torus2, 32);
  const auto f = sample(g, [](double x, double y) { return std::sin(2 * pi * x) * std::sin(2 * pi * y); });
  const auto d = derivative_sup_norms(g, f, 2);
  EXPECT_NEAR(d[1], 2 * pi, 1e-10);
  EXPECT_NEAR(d[2], 4 * pi * pi, 1e-9);
}

TEST(DerivativeNorms, Limits) {
  const auto s = build_grid(GridKind::sphere, 16);
  EXPECT_THROW(derivative_sup_norms(s, ScalarField(s.size(), 1.0), 2), UnavailableError);
  EXPECT_NO_THROW(derivative_sup_norms(s, ScalarField(s.size(), 1.0), 1));
  const auto c = build_grid(GridKind::circle, 16);
  EXPECT_THROW(derivative_sup_norms(c, ScalarField(16, 1.0), -1), DomainError);
}

TEST(ChartDz, Examples) {
  const auto g = build_grid(GridKind::torus2, 32);
  EXPECT_LE(chart_dz(g, ScalarField(g.size(), 4.0)).abs_squared().sup_abs(), 1e-20);
  const auto f = sample(g, [](double x, double) { return std::cos(2 * pi * x); });
  const auto dz = chart_dz(g, f);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.unit_coordinates(i)[0];
    EXPECT_NEAR(dz[i].real(), -pi * std::sin(2 * pi * x), 1e-10);
    EXPECT_NEAR(dz[i].imag(), 0.0, 1e-10);
  }
}

TEST(ChartDz, TorusDiagonalWave) {
  // d/dz cos(2 pi (x + y)) = (1 - i)/2 * (-2 pi sin)
  const auto g = build_grid(GridKind::torus2, 32);
  const auto f = sample(g, [](double x, double y) { return std::cos(2 * pi * (x + y)); });
  const auto dz = chart_dz(g, f);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto u = g.unit_coordinates(i);
    const double s = std::sin(2 * pi * (u[0] + u[1]));
    EXPECT_NEAR(dz[i].real(), -pi * s, 1e-10);
    EXPECT_NEAR(dz[i].imag(), pi * s, 1e-10);
  }
}

TEST(ChartDz, SphereStereographicDerivative) {
  // f = cos(theta) = (|z|^2 - 1)/(|z|^2 + 1) in the chart z = cot(theta/2) e^{i lambda};
  // df/dz = 2 conj(z) / (1 + |z|^2)^2.
  const auto g = build_grid(GridKind::sphere, 32);
  const auto f = sample_native(g, [](double th, double) { return std::cos(th); });
  const auto dz = chart_dz(g, f);
  for (std::size_t i = static_cast<std::size_t>(g.sphere().nlon); i < g.size(); ++i) {
    const auto z = g.chart_point(i);
    const std::complex<double> expect = 2.0 * std::conj(z) / std::pow(1.0 + std::norm(z), 2);
    EXPECT_LE(std::abs(dz[i] - expect), 1e-10 * (1.0 + std::abs(expect)));
  }
}
