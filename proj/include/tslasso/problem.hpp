#pragma once

#include <tslasso/dgm.hpp>
#include <tslasso/matrix.hpp>

#include <optional>
#include <string>

namespace tslasso {

/**
 * Lagged regression Y = X Θ + W built from one series.
 *
 * Row t of X stacks (Z_{t+d-1}, ..., Z_t), lag 1 first, which is the same
 * ordering as the companion state. Row t of Y is Z_{t+d}.
 */
struct RegressionProblem
{
    DenseMatrix X;
    DenseMatrix Y;
    std::size_t lag = 1;
    std::optional<DenseMatrix> theta_star;
    std::optional<DenseMatrix> W;
    SymmetricMatrix gram; // XᵀX / T

    std::size_t samples() const noexcept { return X.rows(); }
    std::size_t design_dim() const noexcept { return X.cols(); }
    std::size_t outputs() const noexcept { return Y.cols(); }
};

RegressionProblem build_problem(const Series& z, std::size_t d);

/// Best linear predictor of Y_t from the d stacked lags, (p d) x q.
/// GaussianVar may use d >= its order (extra lags are zero); the other
/// variants are VAR(1)-type and the omitted-variable target needs d = 1.
DenseMatrix population_target(const ModelSpec& spec, std::size_t d);

/// W = Y - X Θ*; also stores Θ* and W in `prob`.
DenseMatrix residuals(RegressionProblem& prob, const DenseMatrix& theta_star);

struct SubgaussianConstants
{
    double K_X = 0.0;
    double K_Y = 0.0;
    double K_composite = 0.0; // sqrt(K_Y) + sqrt(K_X) (1 + |||Θ*|||)
    std::string basis;        // "exact-gaussian" or "analytic-upper"
};

/// Analytic subgaussian constants of X_t and Y_t.
///
/// Gaussian models use the largest stationary variance; the others use the
/// geometric-series bound K_E / (1 - |||A|||) with K_E the innovation norm
/// (times c b for the clipped ARCH). The ψ₂ contraction constant of the
/// linear-map lemma is taken as 1.
SubgaussianConstants subgaussian_constants(const ModelSpec& spec, const DenseMatrix& theta_star,
                                           std::size_t d = 1);

} // namespace tslasso
