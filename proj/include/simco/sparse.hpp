#pragma once

#include <vector>

#include "simco/matrix.hpp"

namespace simco {

/// Index set of allowed nonzeros in the coefficient matrix, stored
/// column-wise: cols[j] is the sorted list of active rows of column j.
struct SparsityPattern {
  Index d = 0;  // number of rows (codewords)
  Index n = 0;  // number of signals
  std::vector<std::vector<Index>> cols;

  /// Transpose incidence: entry i lists the signals whose support contains i.
  std::vector<std::vector<Index>> row_view() const;

  Index entries() const;
  void validate() const;  // indices in [0, d), strictly increasing lists
};

/// Coefficients aligned one-to-one with the pattern entries; everything
/// outside the pattern is zero by construction.
struct SparseCoeffs {
  SparsityPattern pattern;
  std::vector<std::vector<double>> values;  // values[j] parallel to pattern.cols[j]

  static SparseCoeffs zeros(SparsityPattern p);
  Matrix dense() const;  // d x n
  void validate() const;
};

struct Dictionary {
  Matrix a;  // m x d, unit l2 columns

  Index rows() const { return a.rows(); }
  Index cols() const { return a.cols(); }

  /// Checks the unit-column invariant (tolerance 1e-10).
  static Dictionary from_matrix(Matrix m);
  void validate(double tol = 1e-10) const;
};

/// ||Y - D X||_F^2.
double residual_energy(const Dictionary& d, const Matrix& y,
                       const SparseCoeffs& x);

}  // namespace simco
