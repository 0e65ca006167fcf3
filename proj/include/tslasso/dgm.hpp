#pragma once

#include <tslasso/distribution.hpp>
#include <tslasso/matrix.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tslasso {

/// Z_t = A_1 Z_{t-1} + ... + A_d Z_{t-d} + e_t,  e_t ~ N(0, noise_cov).
struct GaussianVar
{
    std::vector<DenseMatrix> coeffs;
    SymmetricMatrix noise_cov;
};

/// Z_t = A Z_{t-1} + e_t with iid coordinates e_t,i ~ innovation.
struct SubgaussianVar
{
    DenseMatrix coeff;
    DistributionSpec innovation = DistributionSpec::unit_uniform();
};

/// VAR(1) on (Z_t, Xi_t) of which only the first `retained` coordinates are
/// observed.
struct OmittedVarVar
{
    DenseMatrix full_coeff;
    std::size_t retained = 0;
    DistributionSpec innovation = DistributionSpec::unit_uniform();
};

/// Z_t = A Z_{t-1} + scale * clip(||Z_{t-1}||^exponent, clip_lo, clip_hi) * e_t.
struct ClippedArch
{
    DenseMatrix coeff;
    double scale = 1.0;
    double exponent = 0.5;
    double clip_lo = 0.5;
    double clip_hi = 1.0;
    DistributionSpec innovation = DistributionSpec::unit_uniform();
};

using ModelSpec = std::variant<GaussianVar, SubgaussianVar, OmittedVarVar, ClippedArch>;

/// Stable tag of the variant: gaussian_var, subgaussian_var, omitted_var, arch.
std::string_view model_tag(const ModelSpec& spec);
/// Dimension p of the observed series.
std::size_t observed_dim(const ModelSpec& spec);
/// Lag order implied by the model (d for GaussianVar, 1 otherwise).
std::size_t model_order(const ModelSpec& spec);

/// T x p observations; row t is Z_{t+1}.
struct Series
{
    DenseMatrix values;

    std::size_t length() const noexcept { return values.rows(); }
    std::size_t dim() const noexcept { return values.cols(); }
};

/// Block-companion matrix: top block row [A_1 ... A_d], identities on the
/// first block subdiagonal, zeros elsewhere.
DenseMatrix companion_form(const std::vector<DenseMatrix>& coeff_mats);

struct AssumptionCheck
{
    std::string name;
    bool passed = false;
    double value = 0.0;  // measured quantity (radius, eigenvalue, count, ...)
    double margin = 0.0; // signed distance to the boundary; > 0 when passed
    std::string detail;
};

struct ValidationReport
{
    std::vector<AssumptionCheck> checks;

    bool ok() const;
    const AssumptionCheck* find(std::string_view name) const;
};

/// Checks stability, noise covariance, target sparsity and ARCH ranges.
/// Never throws on an unstable model; failures are reported.
ValidationReport validate_model(const ModelSpec& spec);

/// Innovation covariance of the full (companion or unobserved-augmented)
/// state, and the state transition it drives.
struct StateDynamics
{
    DenseMatrix transition;
    SymmetricMatrix noise_cov;
};

/// Stationary covariance of the full linear state: the companion state for
/// GaussianVar (dp x dp, lag-1 block first), the (p + r) state for
/// OmittedVarVar, Z_t itself for SubgaussianVar. ClippedArch has no closed
/// form and raises UnsupportedError.
SymmetricMatrix stationary_covariance(const ModelSpec& spec);

struct OmittedPartition
{
    SymmetricMatrix sigma_z;   // Cov(Z_t), p x p
    DenseMatrix sigma_xi_z;    // Cov(Xi_t, Z_t), r x p
    SymmetricMatrix sigma_xi;  // Cov(Xi_t), r x r
};

OmittedPartition omitted_partition(const OmittedVarVar& spec);

/// Stationary covariance of the observed Z_t (top-left p x p block).
SymmetricMatrix observed_covariance(const ModelSpec& spec);

struct SimulationOptions
{
    std::size_t burn_in = 500;
    /// Starting state for the burn-in models (full state dimension). When
    /// set for GaussianVar it replaces the exact stationary draw.
    std::optional<std::vector<double>> initial_state;
    bool record_innovations = false;
};

struct SimulationTrace
{
    Series series;
    /// Row t: additive noise that produced observed row t (empty unless
    /// requested). For ClippedArch this includes the state-dependent scale.
    DenseMatrix innovations;
    /// ClippedArch only: the realized scale c * clip(||z||^m, a, b) per row.
    std::vector<double> noise_scales;
};

/**
 * Draws a length-T trajectory. Deterministic in (spec, T, seed, options).
 *
 * GaussianVar starts from an exact stationary draw of the companion state;
 * the other variants start at zero (or options.initial_state) and discard
 * options.burn_in steps.
 */
SimulationTrace simulate_traced(const ModelSpec& spec, std::size_t T, std::uint64_t seed,
                                const SimulationOptions& opts = {});

Series simulate(const ModelSpec& spec, std::size_t T, std::uint64_t seed,
                const SimulationOptions& opts = {});

/// 1-based closed interval [first, last].
struct Interval
{
    std::size_t first = 0;
    std::size_t last = 0;

    std::size_t length() const noexcept { return last - first + 1; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

struct BlockPartition
{
    std::size_t mu = 0;
    std::vector<Interval> odd;
    std::vector<Interval> even;
    std::optional<Interval> remainder;
};

/// Alternating blocks of length a_T: O_j = [2(j-1)a+1, (2j-1)a],
/// E_j = [(2j-1)a+1, 2ja], j = 1..floor(T/(2a)), remainder (2 mu a, T].
BlockPartition blocking_indices(std::size_t T, std::size_t a_T);

/**
 * p x p matrix with `s` nonzeros on the band |i - j| <= 1, rescaled so that
 * its operator norm equals `op_norm`.
 *
 * Entry k (k = 0..s-1) sits in row r_k = floor(k p / s), on the diagonal
 * for even k and one column to the right (cyclically) for odd k; signs
 * alternate + + - - ... .
 */
DenseMatrix banded_sparse_coefficients(std::size_t p, std::size_t s, double op_norm);

/**
 * (p+1) x (p+1) matrix for the omitted-variable example: the banded pattern
 * of banded_sparse_coefficients in the Z block, the hidden coordinate Xi
 * autoregressive on itself and feeding a single Z coordinate that is not
 * otherwise touched by the band. Rescaled to operator norm `op_norm`.
 */
DenseMatrix omitted_variable_coefficients(std::size_t p, std::size_t s, double op_norm);

} // namespace tslasso
