#include <tslasso/error.hpp>
#include <tslasso/kernels.hpp>
#include <tslasso/lasso.hpp>
#include <tslasso/numerics.hpp>

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace tslasso;
using tslasso::testing::orthonormal_design;
using tslasso::testing::random_matrix;

namespace {

struct Instance
{
    DenseMatrix X, Y, theta;
};

Instance sparse_instance(std::size_t T, std::size_t n, std::size_t q, std::uint64_t seed)
{
    Instance in;
    in.X = random_matrix(T, n, seed);
    for (std::size_t t = 1; t < T; ++t) // some column correlation
        for (std::size_t j = 1; j < n; ++j) in.X(t, j) += 0.5 * in.X(t, j - 1);
    in.theta = DenseMatrix(n, q);
    for (std::size_t k = 0; k < q; ++k) {
        in.theta(k % n, k) = 1.0;
        in.theta((3 * k + 1) % n, k) = -0.7;
    }
    in.Y = matmul(in.X, in.theta) + random_matrix(T, q, seed + 1, 0.5);
    return in;
}

} // namespace

TEST(Lasso, ZeroPenaltyIsLeastSquares)
{
    const auto in = sparse_instance(200, 8, 3, 1);
    LassoConfig cfg;
    cfg.lambda = 0.0;
    cfg.tol = 1e-12;
    cfg.max_sweeps = 100000;
    const auto sol = solve(in.X, in.Y, cfg);
    const DenseMatrix ols = solve_spd(kernels::gram_serial(in.X), kernels::cross_serial(in.X, in.Y));
    EXPECT_LE((sol.theta_hat - ols).frobenius_norm(), 1e-6);
    EXPECT_TRUE(sol.converged);
}

TEST(Lasso, OrthonormalDesignIsSoftThreshold)
{
    const DenseMatrix x = orthonormal_design(100, 6, 3);
    const DenseMatrix y = random_matrix(100, 2, 4);
    const double lambda = 0.3;
    LassoConfig cfg;
    cfg.lambda = lambda;
    const auto sol = solve(x, y, cfg);
    const DenseMatrix c = kernels::cross_serial(x, y);
    for (std::size_t j = 0; j < 6; ++j)
        for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(sol.theta_hat(j, k), soft_threshold(c(j, k), lambda / 2), 1e-8);
    EXPECT_LE(kkt_residual(x, y, sol.theta_hat, lambda), 1e-8);
}

TEST(Lasso, TwoCoordinateGridSearch)
{
    const auto in = sparse_instance(40, 2, 1, 5);
    const double lambda = 0.4;
    LassoConfig cfg;
    cfg.lambda = lambda;
    const auto sol = solve(in.X, in.Y, cfg);

    double best = 1e300, b0 = 0, b1 = 0;
    DenseMatrix th(2, 1);
    for (int i = -2000; i <= 2000; ++i)
        for (int j = -2000; j <= 2000; ++j) {
            th(0, 0) = i * 1e-3;
            th(1, 0) = j * 1e-3;
            const double f = lasso_objective(in.X, in.Y, th, lambda);
            if (f < best) {
                best = f;
                b0 = th(0, 0);
                b1 = th(1, 0);
            }
        }
    EXPECT_NEAR(sol.theta_hat(0, 0), b0, 2e-3);
    EXPECT_NEAR(sol.theta_hat(1, 0), b1, 2e-3);
}

TEST(Lasso, ObjectiveRecomputedFromScratch)
{
    const auto in = sparse_instance(300, 20, 4, 7);
    LassoConfig cfg;
    cfg.lambda = 0.1;
    const auto sol = solve(in.X, in.Y, cfg);
    const DenseMatrix r = in.Y - matmul(in.X, sol.theta_hat);
    double ss = 0.0;
    for (double v : r.data()) ss += v * v;
    const double direct = ss / 300.0 + 0.1 * norm1(sol.theta_hat.data());
    EXPECT_NEAR(sol.objective, direct, 1e-10 * direct);
    EXPECT_LE(sol.kkt_residual, 10 * cfg.tol);
    EXPECT_LE(kkt_residual(in.X, in.Y, sol.theta_hat, 0.1), 10 * cfg.tol);
    EXPECT_EQ(sol.active_set_size, sol.theta_hat.count_nonzero());
}

TEST(Lasso, MonotoneDescent)
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto in = sparse_instance(150, 30, 3, seed);
        LassoConfig cfg;
        cfg.lambda = 0.05;
        cfg.record_objective = true;
        const auto sol = solve(in.X, in.Y, cfg);
        for (const auto& trace : sol.objective_trace)
            for (std::size_t i = 1; i < trace.size(); ++i) ASSERT_LE(trace[i], trace[i - 1] + 1e-12);
    }
}

TEST(Lasso, OrderingsAgree)
{
    const auto in = sparse_instance(250, 25, 3, 11);
    LassoConfig a, b;
    a.lambda = b.lambda = 0.08;
    b.order = LassoConfig::Order::reversed;
    const auto sa = solve(in.X, in.Y, a);
    const auto sb = solve(in.X, in.Y, b);
    EXPECT_LE(std::abs(sa.objective - sb.objective), 1e-9);
    EXPECT_LE(sa.kkt_residual, 10 * a.tol);
    EXPECT_LE(sb.kkt_residual, 10 * b.tol);
}

TEST(Lasso, ColumnSeparability)
{
    const auto in = sparse_instance(200, 12, 4, 13);
    LassoConfig cfg;
    cfg.lambda = 0.1;
    const auto joint = solve(in.X, in.Y, cfg);
    for (std::size_t k = 0; k < 4; ++k) {
        const auto single = solve(in.X, in.Y.block(0, k, 200, 1), cfg);
        for (std::size_t j = 0; j < 12; ++j) EXPECT_EQ(joint.theta_hat(j, k), single.theta_hat(j, 0));
    }
}

TEST(Lasso, NullSolutionAboveLambdaMax)
{
    const auto in = sparse_instance(100, 10, 2, 17);
    const double lambda_max = 2 * kernels::cross_serial(in.X, in.Y).max_abs();
    const DenseMatrix zero(10, 2);
    EXPECT_EQ(kkt_residual(in.X, in.Y, zero, lambda_max), 0.0);
    LassoConfig cfg;
    cfg.lambda = lambda_max * 1.0001;
    EXPECT_EQ(solve(in.X, in.Y, cfg).active_set_size, 0u);
}

TEST(Lasso, KktRespondsToPerturbation)
{
    const auto in = sparse_instance(300, 10, 1, 19);
    LassoConfig cfg;
    cfg.lambda = 0.05;
    const auto sol = solve(in.X, in.Y, cfg);
    const auto gram = kernels::gram_serial(in.X);
    std::size_t j = 0;
    while (sol.theta_hat(j, 0) == 0.0) ++j;
    DenseMatrix moved = sol.theta_hat;
    moved(j, 0) += 0.01;
    EXPECT_GE(kkt_residual(in.X, in.Y, moved, cfg.lambda), 0.01 * gram(j, j) * 2 - 1e-6);
}

TEST(Lasso, SweepBudgetFlagsNonConvergence)
{
    const auto in = sparse_instance(200, 30, 2, 23);
    LassoConfig cfg;
    cfg.lambda = 1e-4;
    cfg.max_sweeps = 2;
    const auto sol = solve(in.X, in.Y, cfg);
    EXPECT_FALSE(sol.converged);
    EXPECT_EQ(sol.sweeps, 2u);
}

TEST(Lasso, DegenerateColumn)
{
    auto prob = build_problem(Series{random_matrix(50, 3, 29)}, 1);
    prob.gram(1, 1) = 0.0;
    LassoConfig cfg;
    cfg.lambda = 0.01;
    EXPECT_THROW(solve(prob, cfg), DegenerateColumnError);
}

TEST(Lasso, InvalidConfig)
{
    const auto in = sparse_instance(20, 3, 1, 31);
    LassoConfig cfg;
    cfg.lambda = -1;
    EXPECT_THROW(solve(in.X, in.Y, cfg), ArgumentError);
    cfg.lambda = 0.1;
    EXPECT_THROW(solve(in.X, DenseMatrix(19, 1), cfg), DimensionError);
}

TEST(ErrorMetrics, Cases)
{
    const DenseMatrix star = random_matrix(5, 3, 37);
    const auto g = tslasso::testing::random_psd(5, 38);
    const auto zero = error_metrics(star, star, g);
    EXPECT_EQ(zero.l2_err, 0.0);
    EXPECT_EQ(zero.pred_err, 0.0);

    const DenseMatrix delta = random_matrix(5, 3, 39);
    const auto id = error_metrics(star + delta, star, SymmetricMatrix::identity(5));
    const double f = matmul_tn(delta, delta).frobenius_norm();
    EXPECT_NEAR(id.pred_err, f * f, 1e-10 * f * f);

    // Δ = u vᵀ gives ΔᵀΓΔ = (uᵀΓu) v vᵀ, whose squared norm is (uᵀΓu)² ||v||⁴.
    const std::vector<double> u{1, -2, 0.5, 0, 3}, v{0.5, 1, -1};
    DenseMatrix r1(5, 3);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 3; ++j) r1(i, j) = u[i] * v[j];
    const auto m = error_metrics(star + r1, star, g);
    const double quad = g.quadratic_form(u), nv2 = dot(v, v);
    EXPECT_NEAR(m.pred_err, quad * quad * nv2 * nv2, 1e-9 * quad * quad * nv2 * nv2);
    EXPECT_NEAR(m.l2_err, norm2(u) * norm2(v), 1e-12);
}

TEST(TheoreticalBounds, Substitution)
{
    EXPECT_NEAR(estimation_bound(4, 0.1, 0.5), 1.6, 1e-15);
    EXPECT_NEAR(prediction_bound(4, 0.1, 0.5), 2.56, 1e-14);
}

TEST(TheoreticalBounds, RateInT)
{
    BoundConstants c{0.5, 1.0, 0.5, 1e-14, 50, 50, 1000, 0.3};
    const double l1 = theoretical_bounds(7, c).lambda_T;
    c.T = 2000;
    const double l2 = theoretical_bounds(7, c).lambda_T;
    EXPECT_NEAR(l2 / l1, 1 / std::sqrt(2.0), 1e-12);
}

// Oracle: independent evaluation of the three-way maximum in Python for
// K_X = 1.5, lambda_min = 0.8, c_beta = 0.3, C_B = 0.5, xi = 0.5, K = 3.
TEST(TheoreticalBounds, SampleSizeThreshold)
{
    BoundConstants c{0.0, 3.0, 0.5, 0.5, 50, 50, 1e6, 0.3, 1.5, 0.8};
    const auto r = theoretical_bounds(7, c);
    EXPECT_NEAR(r.sample_threshold, 307155876.1492292, 1e-6 * 307155876.1492292);
    EXPECT_FALSE(r.sample_threshold_ok);
    EXPECT_NEAR(r.alpha, 0.4, 1e-15);
    EXPECT_NEAR(r.est_error_bound, 4 * std::sqrt(7.0) * r.lambda_T / 0.4, 1e-12);
}

TEST(TheoreticalBounds, XiOutOfRange)
{
    BoundConstants c{0.5, 1.0, 0.5, 1.0, 50, 50, 1000, 0.3};
    EXPECT_THROW(theoretical_bounds(3, c), ArgumentError);
    c.xi = 0.0;
    EXPECT_THROW(theoretical_bounds(3, c), ArgumentError);
}

TEST(TheoreticalBounds, HoldAtDeskScale)
{
    const std::size_t p = 20, s = 4, T = 2000;
    const DenseMatrix a = banded_sparse_coefficients(p, s, 0.9);
    const GaussianVar g{{a}, SymmetricMatrix::identity(p)};
    const DenseMatrix star = population_target(g, 1);
    const auto k = subgaussian_constants(g, star);
    const double lmin = min_eigen_sym(stationary_covariance(g));
    BoundConstants c{0.5 * lmin, k.K_composite, 0.5, 0.5, double(p), double(p), double(T), 0.1};
    const auto bound = theoretical_bounds(s, c);
    int violations = 0;
    for (std::uint64_t r = 0; r < 50; ++r) {
        auto prob = build_problem(simulate(g, T + 1, 900 + r), 1);
        LassoConfig cfg;
        cfg.lambda = bound.lambda_T;
        const auto sol = solve(prob, cfg);
        violations += error_metrics(sol.theta_hat, star, prob.gram).l2_err > bound.est_error_bound;
    }
    EXPECT_LE(violations, 2);
}
