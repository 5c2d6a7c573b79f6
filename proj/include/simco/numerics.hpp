#pragma once

#include "simco/matrix.hpp"

namespace simco {

enum class LsBackend { QR, CG };

/// Minimum-norm least-squares solution of min_x ||y - A x||_2.
/// QR: rank-revealing orthogonal decomposition (pseudo-inverse semantics).
/// CG: conjugate gradient on the normal equations.
Vector solve_least_squares(const Matrix& a, const Vector& y,
                           LsBackend backend = LsBackend::QR);

struct SvdResult {
  Vector singular_values;  // nonincreasing, >= 0
  Matrix left_vectors;     // orthonormal columns
  Matrix right_vectors;    // orthonormal columns
};

/// Thin SVD with singular values sorted nonincreasing.
SvdResult svd(const Matrix& a);

struct RankOnePair {
  double lambda1 = 0.0;
  Vector u;
  Vector v;
  bool is_zero = false;  // input was the zero matrix
};

/// Dominant singular triple via power iteration on the smaller Gram matrix.
/// Deterministic start vector (normalized row sums of the Gram), tolerance
/// 1e-12 on the Rayleigh quotient, capped at 1e4 iterations. Sign convention:
/// first nonzero entry of u is positive.
RankOnePair rank_one_svd(const Matrix& a);

/// All min(m, s) singular values of A, sorted nonincreasing.
Vector singular_values(const Matrix& a);

}  // namespace simco
