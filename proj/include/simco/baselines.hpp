#pragma once

#include "simco/sparse.hpp"

namespace simco {

struct ModResult {
  Dictionary dict;
  SparseCoeffs coeffs;
  bool gram_singular = false;  // X X^T was rank deficient, pseudo-inverse used
};

/// MOD update: D_raw = Y X^T (X X^T)^-1 (minimum-norm when singular), then
/// columns normalized with the matching row rescale of X so the product
/// D' X' equals D_raw X.
ModResult mod_update(const Dictionary& d, const Matrix& y, const SparseCoeffs& x);

struct KsvdResult {
  Dictionary dict;
  SparseCoeffs coeffs;
  int zero_blocks = 0;  // codewords whose restricted error matrix was zero
};

/// K-SVD sweep in ascending codeword order: each codeword with a nonempty row
/// is replaced by the top singular pair of its restricted error matrix; the
/// sparsity pattern is unchanged.
KsvdResult ksvd_update(const Dictionary& d, const Matrix& y, const SparseCoeffs& x);

}  // namespace simco
