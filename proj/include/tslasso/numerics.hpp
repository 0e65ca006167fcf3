#pragma once

#include <tslasso/distribution.hpp>
#include <tslasso/matrix.hpp>

#include <cmath>
#include <cstddef>
#include <vector>

namespace tslasso {

/// Largest modulus among the eigenvalues of a square matrix.
///
/// Iterates normalized powers M^(2^k) and reads the growth rate
/// ||M^n||^(1/n); the estimate is clamped by operator_norm(M), which is
/// always an upper bound. Relative accuracy ~1e-8.
double spectral_radius(const DenseMatrix& m);

/// Largest singular value, by power iteration on MᵀM from the normalized
/// all-ones vector, with a restart from a second fixed vector.
double operator_norm(const DenseMatrix& m);

struct SymEigen
{
    std::vector<double> values; // ascending
    DenseMatrix vectors;        // column k is the eigenvector of values[k]
};

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
SymEigen jacobi_eigen(const SymmetricMatrix& s);

/// Smallest eigenvalue: Jacobi for dim <= 64, shifted power iteration above.
double min_eigen_sym(const SymmetricMatrix& s);
double max_eigen_sym(const SymmetricMatrix& s);

/// Σ solving Σ = A Σ Aᵀ + Q, by doubling: S ← S + A S Aᵀ, A ← A².
SymmetricMatrix solve_discrete_lyapunov(const DenseMatrix& a, const SymmetricMatrix& q);

inline double soft_threshold(double x, double t) noexcept
{
    const double m = std::abs(x) - t;
    return m > 0.0 ? std::copysign(m, x) : 0.0;
}

/// sup over integer p in [1, 32] of p^{-1/2} (E|U|^p)^{1/p}.
double scalar_subgaussian_norm(const DistributionSpec& dist);

inline constexpr int kSubgaussianMaxMoment = 32;

/**
 * Cholesky factor L (lower, dense) with L Lᵀ = S for positive semidefinite S.
 *
 * Pivots below `tol * max diag` are treated as zero and their column is
 * zeroed, so rank-deficient covariances (e.g. companion-form noise) factor
 * cleanly. Throws NumericError on a clearly negative pivot.
 */
DenseMatrix cholesky_psd(const SymmetricMatrix& s, double tol = 1e-14);

/// Solves S X = B for symmetric positive definite S.
DenseMatrix solve_spd(const SymmetricMatrix& s, const DenseMatrix& b);

} // namespace tslasso
