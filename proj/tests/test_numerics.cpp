#include <tslasso/error.hpp>
#include <tslasso/numerics.hpp>

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace tslasso;
using tslasso::testing::random_matrix;
using tslasso::testing::random_psd;

TEST(SpectralRadius, Identity)
{
    EXPECT_NEAR(spectral_radius(DenseMatrix::identity(3)), 1.0, 1e-12);
}

TEST(SpectralRadius, Nilpotent)
{
    EXPECT_NEAR(spectral_radius(DenseMatrix{{0, 1}, {0, 0}}), 0.0, 1e-12);
}

TEST(SpectralRadius, ScaledRotation)
{
    const double th = std::numbers::pi / 6;
    DenseMatrix r{{std::cos(th), -std::sin(th)}, {std::sin(th), std::cos(th)}};
    r *= 0.9;
    // Characteristic polynomial x² - 1.8 cos(θ) x + 0.81 has complex roots of modulus 0.9.
    EXPECT_NEAR(spectral_radius(r), 0.9, 0.9e-8);
}

TEST(SpectralRadius, NonSquareThrows)
{
    EXPECT_THROW(spectral_radius(DenseMatrix(2, 3)), DimensionError);
}

TEST(SpectralRadius, NeverAboveOperatorNorm)
{
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const DenseMatrix m = random_matrix(6, 6, seed);
        EXPECT_LE(spectral_radius(m), operator_norm(m) * (1 + 1e-10)) << "seed " << seed;
    }
}

TEST(OperatorNorm, KnownValues)
{
    EXPECT_NEAR(operator_norm(DenseMatrix::identity(4)), 1.0, 1e-12);
    EXPECT_NEAR(operator_norm(DenseMatrix{{3, 0}, {0, -4}}), 4.0, 4e-8);
    EXPECT_NEAR(operator_norm(DenseMatrix{{1, 1}, {0, 1}}), (1 + std::sqrt(5.0)) / 2, 1.7e-8);
}

TEST(MinEigen, Diagonal)
{
    const double d[] = {2, 1, 0.5};
    EXPECT_NEAR(min_eigen_sym(SymmetricMatrix::diagonal(d)), 0.5, 1e-12);
    EXPECT_NEAR(min_eigen_sym(SymmetricMatrix::identity(5)), 1.0, 1e-12);
}

TEST(MinEigen, ConstructedSpectrum)
{
    // Q = Householder reflection of a fixed vector, S = Q diag(0.1, 1, 2) Qᵀ.
    const double u[] = {1.0 / std::sqrt(3.0), -1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)};
    DenseMatrix q = DenseMatrix::identity(3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) q(i, j) -= 2 * u[i] * u[j];
    const double lam[] = {0.1, 1.0, 2.0};
    const DenseMatrix s = matmul(matmul(q, DenseMatrix::diagonal(lam)), q.transpose());
    const auto sym = SymmetricMatrix::from_dense(s);
    EXPECT_NEAR(min_eigen_sym(sym), 0.1, 1e-8 * 1.1);
    EXPECT_NEAR(max_eigen_sym(sym), 2.0, 1e-8 * 3);
}

TEST(MinEigen, LargeDimensionUsesIterativePath)
{
    std::vector<double> d(80);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = 1.0 + 0.05 * static_cast<double>(i);
    const auto s = SymmetricMatrix::diagonal(d);
    EXPECT_NEAR(min_eigen_sym(s), 1.0, 2e-8);
    EXPECT_NEAR(max_eigen_sym(s), d.back(), 1e-8 * (1 + d.back()));
}

TEST(MinEigen, BelowRayleighQuotients)
{
    Philox4x32 g(99);
    std::normal_distribution<double> n;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const std::size_t dim = 4 * seed;
        const auto s = random_psd(dim, seed);
        const double lo = min_eigen_sym(s);
        std::vector<double> v(dim);
        for (int k = 0; k < 1000; ++k) {
            for (double& x : v) x = n(g);
            const double nv = norm2(v);
            for (double& x : v) x /= nv;
            ASSERT_LE(lo, s.quadratic_form(v) + 1e-10);
        }
    }
}

TEST(JacobiEigen, ReconstructsMatrix)
{
    const auto s = random_psd(7, 5, 0.1);
    const SymEigen e = jacobi_eigen(s);
    DenseMatrix rec = matmul(matmul(e.vectors, DenseMatrix::diagonal(e.values)), e.vectors.transpose());
    EXPECT_LT((rec - s.to_dense()).max_abs(), 1e-12);
    EXPECT_TRUE(std::is_sorted(e.values.begin(), e.values.end()));
}

TEST(Lyapunov, ScalarGeometricSeries)
{
    const auto sigma = solve_discrete_lyapunov(DenseMatrix{{0.5}}, SymmetricMatrix::identity(1));
    EXPECT_NEAR(sigma(0, 0), 4.0 / 3.0, 1e-12);
}

TEST(Lyapunov, ZeroTransition)
{
    const auto q = random_psd(4, 3);
    const auto sigma = solve_discrete_lyapunov(DenseMatrix(4, 4), q);
    EXPECT_EQ(sigma, q);
}

TEST(Lyapunov, DiagonalCase)
{
    const auto sigma = solve_discrete_lyapunov(DenseMatrix{{0.9, 0}, {0, 0.5}}, SymmetricMatrix::identity(2));
    EXPECT_NEAR(sigma(0, 0), 1 / (1 - 0.81), 1e-10);
    EXPECT_NEAR(sigma(1, 1), 1 / (1 - 0.25), 1e-12);
    EXPECT_NEAR(sigma(0, 1), 0.0, 1e-14);
}

TEST(Lyapunov, UnstableThrows)
{
    EXPECT_THROW(solve_discrete_lyapunov(DenseMatrix{{1.1}}, SymmetricMatrix::identity(1)), StabilityError);
}

TEST(Lyapunov, ResidualOnRandomStableInstances)
{
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const DenseMatrix a = tslasso::testing::random_stable(6, seed, 0.95);
        const auto q = random_psd(6, seed + 100);
        const auto sigma = solve_discrete_lyapunov(a, q);
        const DenseMatrix res = sigma.to_dense() - matmul(matmul(a, sigma.to_dense()), a.transpose()) - q.to_dense();
        EXPECT_LE(res.frobenius_norm(), 1e-8 * q.frobenius_norm()) << "seed " << seed;
    }
}

TEST(SoftThreshold, Values)
{
    EXPECT_EQ(soft_threshold(3, 1), 2);
    EXPECT_EQ(soft_threshold(-0.5, 1), 0);
    EXPECT_EQ(soft_threshold(-2.25, 0.25), -2.0);
}

TEST(SoftThreshold, OneLipschitz)
{
    Philox4x32 g(7);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int i = 0; i < 10000; ++i) {
        const double a = u(g), b = u(g), t = std::abs(u(g));
        ASSERT_LE(std::abs(soft_threshold(a, t) - soft_threshold(b, t)), std::abs(a - b) + 1e-15);
    }
}

// Oracle values: mpmath, sup over p <= 32 of p^{-1/2} (E|U|^p)^{1/p} with the
// closed-form absolute moments; the supremum sits at p = 1 for these laws.
TEST(SubgaussianNorm, PointMassAtZero)
{
    EXPECT_EQ(scalar_subgaussian_norm(DistributionSpec::point_mass(0.0)), 0.0);
}

TEST(SubgaussianNorm, StandardGaussian)
{
    EXPECT_NEAR(scalar_subgaussian_norm(DistributionSpec::gaussian(1.0)), 0.79788456080286541, 1e-12);
}

TEST(SubgaussianNorm, UnitUniform)
{
    EXPECT_NEAR(scalar_subgaussian_norm(DistributionSpec::unit_uniform()), 0.86602540378443865, 1e-12);
}

TEST(SubgaussianNorm, AsymmetricBounded)
{
    EXPECT_NEAR(scalar_subgaussian_norm(DistributionSpec::from_name("bounded", -1, 2)), 0.83333333333333333, 1e-12);
}

TEST(SubgaussianNorm, Homogeneous)
{
    for (double c : {0.5, 2.0}) {
        EXPECT_NEAR(scalar_subgaussian_norm(DistributionSpec::unit_uniform(c)),
                    c * scalar_subgaussian_norm(DistributionSpec::unit_uniform()), 1e-12);
        EXPECT_NEAR(scalar_subgaussian_norm(DistributionSpec::gaussian(1.0).scaled(c)),
                    c * scalar_subgaussian_norm(DistributionSpec::gaussian(1.0)), 1e-12);
    }
}

TEST(SubgaussianNorm, UnknownFamilyRejected)
{
    EXPECT_THROW(DistributionSpec::from_name("student_t", 3, 0), UnsupportedError);
}

TEST(Cholesky, SemidefiniteBlock)
{
    SymmetricMatrix s(3);
    s(0, 0) = 4;
    s(0, 1) = 2;
    s(1, 1) = 2; // third row/column zero
    const DenseMatrix l = cholesky_psd(s);
    EXPECT_LT((matmul_nt(l, l) - s.to_dense()).max_abs(), 1e-14);
    EXPECT_EQ(l(2, 2), 0.0);
}

TEST(SolveSpd, RecoversSolution)
{
    const auto s = random_psd(5, 11, 0.5);
    const DenseMatrix x = random_matrix(5, 2, 12);
    const DenseMatrix b = matmul(s.to_dense(), x);
    EXPECT_LT((solve_spd(s, b) - x).max_abs(), 1e-10);
}
