#pragma once

#include "simco/numerics.hpp"
#include "simco/sparse.hpp"

namespace simco {

/// Which codewords are being updated, together with the cached partial
/// residual Yr (training data minus the contribution of the frozen codewords)
/// and the frozen coefficients needed to merge results back.
struct UpdateSelection {
  std::vector<Index> index_set;  // sorted subset of [0, d)
  Matrix partial_residual;       // Yr, m x n
  SparseCoeffs baseline;         // current X; rows outside the set are kept as-is

  static UpdateSelection all(const Dictionary& d, const Matrix& y,
                             const SparseCoeffs& x);
  static UpdateSelection make(const Dictionary& d, const Matrix& y,
                              const SparseCoeffs& x, std::vector<Index> index_set);
  bool contains(Index i) const;
};

struct UpdateConfig {
  double mu = 0.0;             // regularization weight (0 = primitive)
  double t4_init = 0.1;        // initial bracket size, radians
  double g_min = 1e-5;         // early-exit threshold, relative to ||Y||_F^2
  double golden_c = 0.6180339887498949;  // (sqrt(5)-1)/2
  int part_a_max_iters = 50;
  double part_b_min_width = 1e-4;  // relative interval width
  int part_b_max_iters = 40;
  LsBackend ls_backend = LsBackend::QR;
};

struct GradientBundle {
  std::vector<Index> index_set;
  Matrix raw;        // m x |I|, column k is the raw gradient of codeword index_set[k]
  Matrix projected;  // raw minus its component along the codeword
  Vector norms;      // l2 norms of the projected columns

  double max_norm() const { return norms.size() ? norms.maxCoeff() : 0.0; }
};

/// Per-column minimum-norm LS solve against Yr over the active rows in the
/// selection; rows outside the selection keep their baseline values.
SparseCoeffs coeff_solve_primitive(const Dictionary& d, const Matrix& y,
                                   const SparsityPattern& pattern,
                                   const UpdateSelection& sel,
                                   LsBackend backend = LsBackend::QR);

/// Ridge variant: per column solves the stacked system with sqrt(mu) * I
/// appended, which is always full column rank.
SparseCoeffs coeff_solve_regularized(const Dictionary& d, const Matrix& y,
                                     const SparsityPattern& pattern,
                                     const UpdateSelection& sel, double mu,
                                     LsBackend backend = LsBackend::QR);

struct ObjectiveResult {
  double f = 0.0;
  SparseCoeffs coeffs;
};

/// f_I(D) = ||Yr - D_I X*_I||_F^2 + mu ||X*_I||_F^2 at the inner minimizer,
/// together with the minimizer itself (merged with the baseline rows).
ObjectiveResult objective(const Dictionary& d, const Matrix& y,
                          const SparsityPattern& pattern,
                          const UpdateSelection& sel, double mu);

/// Value-only fast path used inside the line search.
double objective_value(const Dictionary& d, const SparsityPattern& pattern,
                       const UpdateSelection& sel, double mu);

/// Raw gradient -2 (Y - D X*) X*_i^T per selected codeword, plus its tangent
/// projection (orthogonal to the codeword).
GradientBundle gradient(const Dictionary& d, const Matrix& y,
                        const SparsityPattern& pattern,
                        const UpdateSelection& sel, double mu);

/// Moves each selected codeword along its geodesic by arc length
/// ||g_i|| * t; columns outside the selection or with zero gradient stay put.
/// Unit norms are preserved for every t.
Dictionary geodesic_step(const Dictionary& d, const GradientBundle& bundle,
                         double t, const UpdateSelection& sel);

struct LineSearchTrace {
  double f_before = 0.0;
  double f_after = 0.0;
  double t_star = 0.0;
  double grad_max = 0.0;
  bool early_exit = false;
  bool part_a_capped = false;
  int evals = 0;
};

struct LineSearchResult {
  Dictionary dict;
  SparseCoeffs coeffs;
  LineSearchTrace trace;
};

/// One golden-section line-search iteration along the negative projected
/// gradient: bracket a minimum (Part A), shrink by the golden ratio (Part B),
/// return the best of the four bracket points. Never increases f.
LineSearchResult line_search_iteration(const Dictionary& d, const Matrix& y,
                                       const SparsityPattern& pattern,
                                       const UpdateSelection& sel,
                                       const UpdateConfig& cfg);

}  // namespace simco
