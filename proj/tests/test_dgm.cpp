#include <tslasso/dgm.hpp>
#include <tslasso/error.hpp>
#include <tslasso/numerics.hpp>

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace tslasso;

namespace {

GaussianVar scalar_ar(std::vector<double> coeffs)
{
    GaussianVar g;
    for (double a : coeffs) g.coeffs.push_back(DenseMatrix{{a}});
    g.noise_cov = SymmetricMatrix::identity(1);
    return g;
}

} // namespace

TEST(Companion, OrderOneIsIdentityMap)
{
    const DenseMatrix a{{0.1, 0.2}, {0.3, 0.4}};
    EXPECT_EQ(companion_form({a}), a);
}

TEST(Companion, ScalarOrderTwo)
{
    EXPECT_EQ(companion_form({DenseMatrix{{0.5}}, DenseMatrix{{0.2}}}), (DenseMatrix{{0.5, 0.2}, {1, 0}}));
}

TEST(Companion, OrderThreeLayout)
{
    std::vector<DenseMatrix> a(3, DenseMatrix(2, 2, 0.0));
    const DenseMatrix c = companion_form(a);
    ASSERT_EQ(c.rows(), 6u);
    EXPECT_EQ(c.block(2, 0, 2, 2), DenseMatrix::identity(2));
    EXPECT_EQ(c.block(4, 2, 2, 2), DenseMatrix::identity(2));
    EXPECT_EQ(c.block(4, 0, 2, 2), DenseMatrix(2, 2));
    EXPECT_EQ(c.block(2, 2, 2, 2), DenseMatrix(2, 2));
}

TEST(Companion, MismatchedBlocksThrow)
{
    EXPECT_THROW(companion_form({DenseMatrix(2, 2), DenseMatrix(3, 3)}), DimensionError);
}

// Largest root modulus of x^d - a1 x^{d-1} - ... - ad, from numpy.roots.
TEST(Companion, RadiusMatchesPolynomialRoots)
{
    struct Case
    {
        std::vector<double> a;
        double radius;
    };
    const Case cases[] = {
        {{0.5, 0.2}, 0.76234753829798},
        {{0.3, -0.4, 0.2}, 0.6775631158314593},
        {{-0.6, 0.1}, 0.7358898943540673},
        {{0.9}, 0.9},
    };
    for (const auto& c : cases) {
        std::vector<DenseMatrix> m;
        for (double x : c.a) m.push_back(DenseMatrix{{x}});
        EXPECT_NEAR(spectral_radius(companion_form(m)), c.radius, 1e-8);
    }
}

TEST(Validate, StableGaussian)
{
    GaussianVar g{{0.9 * DenseMatrix::identity(3)}, SymmetricMatrix::identity(3)};
    const auto rep = validate_model(g);
    EXPECT_TRUE(rep.ok());
    ASSERT_NE(rep.find("stability"), nullptr);
    EXPECT_NEAR(rep.find("stability")->margin, 0.1, 1e-8);
}

TEST(Validate, UnstableGaussianReportsFailure)
{
    GaussianVar g{{1.1 * DenseMatrix::identity(3)}, SymmetricMatrix::identity(3)};
    ValidationReport rep;
    ASSERT_NO_THROW(rep = validate_model(g));
    EXPECT_FALSE(rep.ok());
    EXPECT_FALSE(rep.find("stability")->passed);
}

TEST(Validate, ArchExponentOutOfRange)
{
    ClippedArch a{0.5 * DenseMatrix::identity(2), 1.0, 1.2, 0.5, 1.0};
    const auto rep = validate_model(a);
    EXPECT_FALSE(rep.find("arch_exponent")->passed);
    EXPECT_TRUE(rep.find("arch_clip")->passed);
}

TEST(Validate, SparsityCount)
{
    const DenseMatrix a = banded_sparse_coefficients(10, 4, 0.9);
    EXPECT_EQ(validate_model(SubgaussianVar{a}).find("sparsity")->value, 4.0);
}

TEST(StationaryCovariance, IidCase)
{
    GaussianVar g{{DenseMatrix(3, 3)}, SymmetricMatrix::identity(3)};
    EXPECT_EQ(stationary_covariance(g), SymmetricMatrix::identity(3));
}

TEST(StationaryCovariance, ScalarAr1)
{
    EXPECT_NEAR(stationary_covariance(scalar_ar({0.5}))(0, 0), 4.0 / 3.0, 1e-12);
}

// AR(2) autocovariances: γ0 = (1-φ2)/((1+φ2)((1-φ2)² - φ1²)), γ1 = φ1 γ0/(1-φ2).
TEST(StationaryCovariance, ScalarAr2Companion)
{
    const auto s = stationary_covariance(scalar_ar({0.5, 0.2}));
    EXPECT_NEAR(s(0, 0), 1.7094017094017094, 1e-12);
    EXPECT_NEAR(s(1, 1), 1.7094017094017094, 1e-12);
    EXPECT_NEAR(s(0, 1), 1.0683760683760684, 1e-12);
}

TEST(StationaryCovariance, ArchUnsupported)
{
    EXPECT_THROW(stationary_covariance(ClippedArch{0.5 * DenseMatrix::identity(2)}), UnsupportedError);
}

TEST(Simulate, IidSampleCovariance)
{
    GaussianVar g{{DenseMatrix(3, 3)}, SymmetricMatrix::identity(3)};
    const Series z = simulate(g, 100000, 1);
    const DenseMatrix c = matmul_tn(z.values, z.values);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(c(i, j) / 1e5, i == j ? 1.0 : 0.0, 0.05);
}

TEST(Simulate, VarTwoMatchesCompanion)
{
    const DenseMatrix a1{{0.4, 0.1}, {0.0, 0.3}};
    const DenseMatrix a2{{0.1, 0.0}, {-0.2, 0.2}};
    SymmetricMatrix sigma(2);
    sigma(0, 0) = 1.0;
    sigma(0, 1) = 0.3;
    sigma(1, 1) = 0.8;
    const GaussianVar direct{{a1, a2}, sigma};

    SymmetricMatrix big(4);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = i; j < 2; ++j) big(i, j) = sigma(i, j);
    const GaussianVar companion{{companion_form({a1, a2})}, big};

    const Series zd = simulate(direct, 500, 77);
    const Series zc = simulate(companion, 500, 77);
    ASSERT_EQ(zc.dim(), 4u);
    double worst = 0.0;
    for (std::size_t t = 0; t < 500; ++t)
        for (std::size_t i = 0; i < 2; ++i) worst = std::max(worst, std::abs(zd.values(t, i) - zc.values(t, i)));
    EXPECT_LE(worst, 1e-12);
}

TEST(Simulate, ArchWithEqualClipsIsLinear)
{
    const DenseMatrix a = banded_sparse_coefficients(5, 3, 0.8);
    const double c = 0.7, level = 1.3;
    const ClippedArch arch{a, c, 0.4, level, level, DistributionSpec::unit_uniform()};
    const SubgaussianVar lin{a, DistributionSpec::unit_uniform(c * level)};
    const Series za = simulate(arch, 300, 5);
    const Series zl = simulate(lin, 300, 5);
    EXPECT_LE((za.values - zl.values).max_abs(), 1e-12);
}

TEST(Simulate, ArchScalesStayInsideClip)
{
    const ClippedArch arch{banded_sparse_coefficients(8, 3, 0.9), 0.7, 0.2, 0.5, 1.5};
    SimulationOptions opts;
    opts.record_innovations = true;
    const auto trace = simulate_traced(arch, 2000, 3, opts);
    ASSERT_EQ(trace.noise_scales.size(), 2000u);
    for (double s : trace.noise_scales) {
        EXPECT_GE(s, 0.7 * 0.5);
        EXPECT_LE(s, 0.7 * 1.5);
    }
}

TEST(Simulate, Replicable)
{
    const SubgaussianVar m{banded_sparse_coefficients(6, 3, 0.9)};
    EXPECT_EQ(simulate(m, 400, 9).values, simulate(m, 400, 9).values);
    EXPECT_NE(simulate(m, 400, 9).values, simulate(m, 400, 10).values);
}

TEST(Simulate, Errors)
{
    EXPECT_THROW(simulate(scalar_ar({0.5}), 0, 1), ArgumentError);
    EXPECT_THROW(simulate(scalar_ar({1.01}), 10, 1), StabilityError);
    EXPECT_THROW(simulate(SubgaussianVar{DenseMatrix{{1.2}}}, 10, 1), StabilityError);
}

TEST(Simulate, OmittedReturnsRetainedCoordinates)
{
    const OmittedVarVar m{omitted_variable_coefficients(4, 2, 0.9), 4};
    EXPECT_EQ(simulate(m, 50, 1).dim(), 4u);
}

TEST(Simulate, GaussianMatchesStationaryCovariance)
{
    const GaussianVar g{{DenseMatrix{{0.6, 0.2}, {-0.1, 0.5}}}, SymmetricMatrix::identity(2)};
    const std::size_t T = 200000, batches = 100, len = T / batches;
    const Series z = simulate(g, T, 21);
    const auto sigma = stationary_covariance(g);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = i; j < 2; ++j) {
            // Batch means give a standard error that accounts for autocorrelation.
            std::vector<double> means(batches, 0.0);
            for (std::size_t b = 0; b < batches; ++b) {
                for (std::size_t t = b * len; t < (b + 1) * len; ++t) means[b] += z.values(t, i) * z.values(t, j);
                means[b] /= static_cast<double>(len);
            }
            double m = 0.0, v = 0.0;
            for (double x : means) m += x;
            m /= batches;
            for (double x : means) v += (x - m) * (x - m);
            const double se = std::sqrt(v / (batches - 1) / batches);
            EXPECT_LE(std::abs(m - sigma(i, j)), 3 * se) << i << "," << j;
        }
}

TEST(Blocking, PaperExamples)
{
    const auto a = blocking_indices(10, 2);
    EXPECT_EQ(a.mu, 2u);
    EXPECT_EQ(a.odd, (std::vector<Interval>{{1, 2}, {5, 6}}));
    EXPECT_EQ(a.even, (std::vector<Interval>{{3, 4}, {7, 8}}));
    EXPECT_EQ(a.remainder, (Interval{9, 10}));

    const auto b = blocking_indices(8, 2);
    EXPECT_EQ(b.mu, 2u);
    EXPECT_FALSE(b.remainder.has_value());

    const auto c = blocking_indices(7, 3);
    EXPECT_EQ(c.mu, 1u);
    EXPECT_EQ(c.odd, (std::vector<Interval>{{1, 3}}));
    EXPECT_EQ(c.even, (std::vector<Interval>{{4, 6}}));
    EXPECT_EQ(c.remainder, (Interval{7, 7}));
}

TEST(Blocking, ExactPartition)
{
    for (std::size_t T = 2; T <= 200; ++T)
        for (std::size_t a = 1; 2 * a <= T; ++a) {
            const auto part = blocking_indices(T, a);
            std::vector<int> hits(T + 1, 0);
            auto mark = [&](const Interval& iv) {
                for (std::size_t t = iv.first; t <= iv.last; ++t) ++hits[t];
            };
            for (const auto& iv : part.odd) mark(iv);
            for (const auto& iv : part.even) mark(iv);
            if (part.remainder) mark(*part.remainder);
            for (std::size_t t = 1; t <= T; ++t) ASSERT_EQ(hits[t], 1) << "T=" << T << " a=" << a << " t=" << t;
        }
}

TEST(Blocking, OutOfRange)
{
    EXPECT_THROW(blocking_indices(10, 0), ArgumentError);
    EXPECT_THROW(blocking_indices(10, 6), ArgumentError);
}

TEST(SparseCoefficients, CountAndNorm)
{
    for (std::size_t p : {5u, 25u, 50u, 100u}) {
        const auto s = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(p))));
        const DenseMatrix a = banded_sparse_coefficients(p, s, 0.9);
        EXPECT_EQ(a.count_nonzero(), s);
        EXPECT_NEAR(operator_norm(a), 0.9, 1e-8);
        const DenseMatrix o = omitted_variable_coefficients(p, s, 0.9);
        EXPECT_NEAR(operator_norm(o), 0.9, 1e-8);
        EXPECT_NE(o(p, p), 0.0);
    }
}
