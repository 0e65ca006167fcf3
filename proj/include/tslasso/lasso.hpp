#pragma once

#include <tslasso/matrix.hpp>
#include <tslasso/problem.hpp>

#include <optional>
#include <vector>

namespace tslasso {

/// Penalty and stopping rule for
///   min_Θ (1/T) ||Y - X Θ||_F^2 + lambda ||vec Θ||_1.
struct LassoConfig
{
    enum class Order { natural, reversed };

    double lambda = 0.0;
    double tol = 1e-7;          // max coefficient change over a full sweep
    std::size_t max_sweeps = 10000;
    std::optional<DenseMatrix> warm_start;
    Order order = Order::natural;
    bool record_objective = false;
};

struct LassoSolution
{
    DenseMatrix theta_hat;
    double objective = 0.0; // recomputed from X, Y
    std::size_t sweeps = 0; // max over columns
    double kkt_residual = 0.0;
    std::size_t active_set_size = 0;
    bool converged = false;
    /// Per column, objective after every sweep (only when requested).
    std::vector<std::vector<double>> objective_trace;
};

/// Coordinate descent, one independent problem per output column, columns
/// solved concurrently.
LassoSolution solve(const DenseMatrix& X, const DenseMatrix& Y, const LassoConfig& cfg);
/// Same, reusing the Gram matrix already stored in `prob`.
LassoSolution solve(const RegressionProblem& prob, const LassoConfig& cfg);
/// Serial reference; bitwise identical to solve().
LassoSolution solve_serial(const DenseMatrix& X, const DenseMatrix& Y, const LassoConfig& cfg);

double lasso_objective(const DenseMatrix& X, const DenseMatrix& Y, const DenseMatrix& theta, double lambda);

/// Largest violation of the subgradient conditions, G = (2/T) Xᵀ(XΘ - Y):
/// |G + lambda sign θ| on the support, max(|G| - lambda, 0) off it.
double kkt_residual(const DenseMatrix& X, const DenseMatrix& Y, const DenseMatrix& theta, double lambda);

struct ErrorMetrics
{
    double l2_err = 0.0;   // ||vec(Θ̂ - Θ*)||
    double pred_err = 0.0; // ||(Θ̂ - Θ*)ᵀ Γ̂ (Θ̂ - Θ*)||_F^2
};

ErrorMetrics error_metrics(const DenseMatrix& theta_hat, const DenseMatrix& theta_star, const SymmetricMatrix& gram);

struct BoundConstants
{
    double alpha = 0.0; // RE curvature; 0 means lambda_min / 2
    double K = 0.0;     // composite subgaussian constant
    double C_B = 0.5;
    double xi = 0.5;
    double p = 0.0;
    double q = 0.0;
    double T = 0.0;
    double c_beta = 0.0;
    double K_X = 0.0;        // for the RE part of the sample-size condition
    double lambda_min = 0.0; // lambda_min(Sigma_X)
};

struct BoundReport
{
    double alpha = 0.0;
    double tau = 0.0; // RE tolerance at T; 0 when K_X or lambda_min is absent
    double Q = 0.0;
    double R = 0.0;
    double lambda_T = 0.0; // 4 Q R
    double est_error_bound = 0.0;
    double pred_error_bound = 0.0;
    double sample_threshold = 0.0;
    bool sample_threshold_ok = false;
    bool curvature_ok = false; // alpha >= 32 s tau
    double prob_lower = 0.0;
    double C_B = 0.0;
};

BoundReport theoretical_bounds(std::size_t s, const BoundConstants& consts);
/// Error bounds for an explicitly chosen lambda_T.
double estimation_bound(std::size_t s, double lambda_T, double alpha);
double prediction_bound(std::size_t s, double lambda_T, double alpha);

} // namespace tslasso
