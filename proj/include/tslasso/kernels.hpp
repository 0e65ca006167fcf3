#pragma once

#include <tslasso/matrix.hpp>

namespace tslasso::kernels {

// Each entry is summed over samples in ascending order in both variants,
// so the OpenMP kernels are bitwise identical to the serial references.

/// XᵀX / rows(X).
SymmetricMatrix gram_serial(const DenseMatrix& x);
SymmetricMatrix gram_parallel(const DenseMatrix& x);

/// XᵀY / rows(X).
DenseMatrix cross_serial(const DenseMatrix& x, const DenseMatrix& y);
DenseMatrix cross_parallel(const DenseMatrix& x, const DenseMatrix& y);

} // namespace tslasso::kernels
