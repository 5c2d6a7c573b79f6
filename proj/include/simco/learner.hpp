#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "simco/dict_update.hpp"

namespace simco {

enum class Method { MOD, KSVD, SimCOPrimitive, SimCORegularized };

const char* method_name(Method m);
std::optional<Method> method_from_name(const std::string& s);

struct MuSchedulePoint {
  int start_iter = 0;  // first iteration (0-based) at which this mu applies
  double mu = 0.0;
};

struct LearnConfig {
  Method method = Method::SimCORegularized;
  int outer_iters = 50;
  int inner_iters = 1;  // dictionary-update iterations per outer iteration
  Index sparsity = 4;   // S, atoms per training column in the OMP stage
  std::vector<MuSchedulePoint> mu_schedule;  // regularized SimCO only
  std::uint64_t seed = 0;
  bool single_sweep = false;  // update codewords one at a time instead of all at once
  UpdateConfig update;
  bool track_kappa = true;
  double f_rel_tol = 1e-8;  // optional stop rule on relative f improvement
  bool use_stop_rule = false;
  int refine_split_iter = 0;  // phase-1 length for refine_two_step
};

struct TraceRecord {
  int iter = 0;
  double f = 0.0;       // ||Y - D X||_F^2
  double f_reg = 0.0;   // f + mu ||X||_F^2 for the mu active at this iteration
  double grad_max = 0.0;
  double kappa = 0.0;
  double ms = 0.0;
  std::string flags;
};

struct ConvergenceTrace {
  std::vector<TraceRecord> records;

  /// CSV with header `iter,f,f_reg,grad_max,kappa,ms`.
  std::string to_csv() const;
  void save_csv(const std::string& path) const;
};

/// kappa(D): worst spectral condition number over the per-sample active
/// submatrices D_{:,Omega(:,j)}. Rank-deficient submatrix -> +infinity.
double condition_number(const Dictionary& d, const SparsityPattern& pattern);

struct LearnResult {
  Dictionary dict;
  SparseCoeffs coeffs;
  ConvergenceTrace trace;
};

double mu_at(const std::vector<MuSchedulePoint>& schedule, int iter);

/// Alternate sparse coding (OMP) and dictionary update.
LearnResult learn(const Matrix& y, Index d, const LearnConfig& cfg,
                  const Dictionary* d0 = nullptr);

/// Dictionary update only: the sparsity pattern is fixed to that of x0 and no
/// sparse coding is performed (the perfect-coding experiments).
LearnResult update_only(const Matrix& y, const Dictionary& d0,
                        const SparseCoeffs& x0, const LearnConfig& cfg);

/// Regularized phase followed by a primitive (mu = 0) refinement phase,
/// split at cfg.refine_split_iter; traces are concatenated.
LearnResult refine_two_step(const Matrix& y, Index d, const LearnConfig& cfg,
                            const Dictionary* d0 = nullptr);

}  // namespace simco
