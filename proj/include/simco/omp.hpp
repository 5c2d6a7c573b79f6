#pragma once

#include "simco/numerics.hpp"
#include "simco/sparse.hpp"

namespace simco {

struct OmpOptions {
  Index sparsity = 0;               // exact number of atoms per column (0 = threshold mode)
  double residual_threshold = 0.0;  // stop once ||r||_2 <= threshold (threshold mode)
  Index max_atoms = 0;              // cap in threshold mode
  LsBackend backend = LsBackend::QR;
};

/// Greedy OMP: per column, pick the atom with the largest |correlation| with
/// the current residual (ties broken toward the smaller index), then re-fit
/// all selected coefficients by least squares.
SparseCoeffs omp_encode(const Dictionary& d, const Matrix& y, const OmpOptions& opt);

/// Fixed-sparsity convenience overload: exactly s atoms per column.
SparseCoeffs omp_encode(const Dictionary& d, const Matrix& y, Index s);

}  // namespace simco
