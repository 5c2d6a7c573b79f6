#include "simco/dict_update.hpp"

#include <algorithm>
#include <cmath>

namespace simco {
namespace {

// Per-column subproblem data reused across the many objective evaluations of
// one line search: active atoms I ∩ Omega(:,j) and ||Yr_{:,j}||^2.
struct Workspace {
  std::vector<std::vector<Index>> atoms;
  std::vector<double> y_sq;
  Index max_atoms = 0;
};

Workspace build_workspace(const SparsityPattern& pattern,
                          const UpdateSelection& sel) {
  Workspace ws;
  const Index n = pattern.n;
  ws.atoms.resize(static_cast<size_t>(n));
  ws.y_sq.resize(static_cast<size_t>(n));
  std::vector<char> in_set(static_cast<size_t>(pattern.d), 0);
  for (Index i : sel.index_set) in_set[static_cast<size_t>(i)] = 1;
  for (Index j = 0; j < n; ++j) {
    auto& act = ws.atoms[static_cast<size_t>(j)];
    for (Index i : pattern.cols[static_cast<size_t>(j)])
      if (in_set[static_cast<size_t>(i)]) act.push_back(i);
    ws.max_atoms = std::max(ws.max_atoms, static_cast<Index>(act.size()));
    ws.y_sq[static_cast<size_t>(j)] = sel.partial_residual.col(j).squaredNorm();
  }
  return ws;
}

// Small-system scratch buffers; capacity covers every problem in this code
// base (active sets are at most the OMP sparsity level).
struct Scratch {
  Matrix dact;   // m x kmax gathered atoms
  Matrix gram;   // kmax x kmax
  Vector rhs;    // kmax
  Vector x;      // kmax

  explicit Scratch(Index m, Index kmax)
      : dact(m, std::max<Index>(kmax, 1)),
        gram(std::max<Index>(kmax, 1), std::max<Index>(kmax, 1)),
        rhs(std::max<Index>(kmax, 1)),
        x(std::max<Index>(kmax, 1)) {}
};

// Solves the column subproblem at the gathered atoms in s.dact.leftCols(k)
// against yr_col, leaving the solution in s.x.head(k). Returns the attained
// objective value ||yr - Dact x||^2 + mu ||x||^2, using the identity
// f = ||yr||^2 - b^T x which holds at any stationary solution.
double solve_column(Scratch& s, Index k, const Vector& yr_col, double y_sq,
                    double mu) {
  auto dact = s.dact.leftCols(k);
  auto g = s.gram.topLeftCorner(k, k);
  auto b = s.rhs.head(k);
  auto x = s.x.head(k);
  g.noalias() = dact.transpose() * dact;
  b.noalias() = dact.transpose() * yr_col;
  if (mu > 0.0) g.diagonal().array() += mu;
  x = g.ldlt().solve(b);
  // Rank-deficient Gram (mu = 0 only): fall back to the minimum-norm solve.
  if (mu == 0.0) {
    double err = (g * x - b).norm();
    if (!(err <= 1e-8 * (1.0 + b.norm()))) {
      x = Matrix(dact).completeOrthogonalDecomposition().solve(yr_col);
      b.noalias() = dact.transpose() * yr_col;
    }
  }
  return y_sq - b.dot(x);
}

double eval_objective(const Matrix& dmat, const Matrix& yr, const Workspace& ws,
                      double mu, Scratch& s) {
  double f = 0.0;
  const Index n = yr.cols();
  for (Index j = 0; j < n; ++j) {
    const auto& act = ws.atoms[static_cast<size_t>(j)];
    const Index k = static_cast<Index>(act.size());
    if (k == 0) {
      f += ws.y_sq[static_cast<size_t>(j)];
      continue;
    }
    for (Index c = 0; c < k; ++c) s.dact.col(c) = dmat.col(act[static_cast<size_t>(c)]);
    f += solve_column(s, k, yr.col(j), ws.y_sq[static_cast<size_t>(j)], mu);
  }
  return f;
}

// Overwrites the selected columns of dst with the geodesic point at t.
void apply_geodesic(Matrix& dst, const Matrix& base, const GradientBundle& bundle,
                    double t) {
  for (size_t k = 0; k < bundle.index_set.size(); ++k) {
    const Index i = bundle.index_set[k];
    const double w = bundle.norms(static_cast<Index>(k));
    if (w == 0.0) {
      dst.col(i) = base.col(i);
      continue;
    }
    const double c = std::cos(w * t), sn = std::sin(w * t);
    dst.col(i) = base.col(i) * c - bundle.projected.col(static_cast<Index>(k)) * (sn / w);
  }
}

SparseCoeffs merge_solution(const SparsityPattern& pattern,
                            const UpdateSelection& sel, const Workspace& ws,
                            const Matrix& dmat, const Matrix& yr, double mu,
                            LsBackend backend) {
  SparseCoeffs out = sel.baseline;
  const Index m = dmat.rows();
  Scratch s(m, std::max<Index>(ws.max_atoms, 1));
  for (Index j = 0; j < pattern.n; ++j) {
    const auto& act = ws.atoms[static_cast<size_t>(j)];
    const Index k = static_cast<Index>(act.size());
    if (k == 0) continue;
    Vector x;
    if (backend == LsBackend::CG || mu > 0.0) {
      // Stacked LS with sqrt(mu) * I appended (exactly the ridge system).
      Matrix stacked(m + (mu > 0.0 ? k : 0), k);
      for (Index c = 0; c < k; ++c)
        stacked.col(c).head(m) = dmat.col(act[static_cast<size_t>(c)]);
      Vector ytil = Vector::Zero(stacked.rows());
      ytil.head(m) = yr.col(j);
      if (mu > 0.0)
        stacked.bottomRows(k) = std::sqrt(mu) * Matrix::Identity(k, k);
      x = solve_least_squares(stacked, ytil, backend);
    } else {
      Matrix dact(m, k);
      for (Index c = 0; c < k; ++c)
        dact.col(c) = dmat.col(act[static_cast<size_t>(c)]);
      x = solve_least_squares(dact, yr.col(j), backend);
    }
    // Scatter into the pattern slots of the selected rows.
    const auto& idx = pattern.cols[static_cast<size_t>(j)];
    auto& val = out.values[static_cast<size_t>(j)];
    Index c = 0;
    for (size_t slot = 0; slot < idx.size() && c < k; ++slot)
      if (idx[slot] == act[static_cast<size_t>(c)]) val[slot] = x(c++);
  }
  return out;
}

}  // namespace

UpdateSelection UpdateSelection::all(const Dictionary& d, const Matrix& y,
                                     const SparseCoeffs& x) {
  std::vector<Index> idx(static_cast<size_t>(d.cols()));
  for (Index i = 0; i < d.cols(); ++i) idx[static_cast<size_t>(i)] = i;
  return make(d, y, x, std::move(idx));
}

UpdateSelection UpdateSelection::make(const Dictionary& d, const Matrix& y,
                                      const SparseCoeffs& x,
                                      std::vector<Index> index_set) {
  if (d.cols() != x.pattern.d || d.rows() != y.rows() || y.cols() != x.pattern.n)
    throw contract_error("UpdateSelection: shape mismatch");
  std::sort(index_set.begin(), index_set.end());
  std::vector<char> in_set(static_cast<size_t>(d.cols()), 0);
  for (Index i : index_set) {
    if (i < 0 || i >= d.cols())
      throw contract_error("UpdateSelection: index out of range");
    in_set[static_cast<size_t>(i)] = 1;
  }
  UpdateSelection sel;
  sel.index_set = std::move(index_set);
  sel.baseline = x;
  sel.partial_residual = y;
  for (Index j = 0; j < y.cols(); ++j) {
    const auto& idx = x.pattern.cols[static_cast<size_t>(j)];
    const auto& val = x.values[static_cast<size_t>(j)];
    for (size_t k = 0; k < idx.size(); ++k)
      if (!in_set[static_cast<size_t>(idx[k])])
        sel.partial_residual.col(j) -= val[k] * d.a.col(idx[k]);
  }
  return sel;
}

bool UpdateSelection::contains(Index i) const {
  return std::binary_search(index_set.begin(), index_set.end(), i);
}

SparseCoeffs coeff_solve_primitive(const Dictionary& d, const Matrix& y,
                                   const SparsityPattern& pattern,
                                   const UpdateSelection& sel, LsBackend backend) {
  (void)y;
  Workspace ws = build_workspace(pattern, sel);
  return merge_solution(pattern, sel, ws, d.a, sel.partial_residual, 0.0, backend);
}

SparseCoeffs coeff_solve_regularized(const Dictionary& d, const Matrix& y,
                                     const SparsityPattern& pattern,
                                     const UpdateSelection& sel, double mu,
                                     LsBackend backend) {
  (void)y;
  if (!(mu > 0.0)) throw contract_error("coeff_solve_regularized: mu must be > 0");
  Workspace ws = build_workspace(pattern, sel);
  return merge_solution(pattern, sel, ws, d.a, sel.partial_residual, mu, backend);
}

ObjectiveResult objective(const Dictionary& d, const Matrix& y,
                          const SparsityPattern& pattern,
                          const UpdateSelection& sel, double mu) {
  Workspace ws = build_workspace(pattern, sel);
  Scratch s(d.rows(), std::max<Index>(ws.max_atoms, 1));
  ObjectiveResult out;
  out.f = eval_objective(d.a, sel.partial_residual, ws, mu, s);
  out.coeffs = merge_solution(pattern, sel, ws, d.a, sel.partial_residual, mu,
                              LsBackend::QR);
  (void)y;
  return out;
}

double objective_value(const Dictionary& d, const SparsityPattern& pattern,
                       const UpdateSelection& sel, double mu) {
  Workspace ws = build_workspace(pattern, sel);
  Scratch s(d.rows(), std::max<Index>(ws.max_atoms, 1));
  return eval_objective(d.a, sel.partial_residual, ws, mu, s);
}

GradientBundle gradient(const Dictionary& d, const Matrix& y,
                        const SparsityPattern& pattern,
                        const UpdateSelection& sel, double mu) {
  Workspace ws = build_workspace(pattern, sel);
  SparseCoeffs xstar = merge_solution(pattern, sel, ws, d.a, sel.partial_residual,
                                      mu, LsBackend::QR);
  // Residual R = Yr - D_I X*_I (equals Y - D X* with the frozen rows).
  Matrix r = sel.partial_residual;
  std::vector<char> in_set(static_cast<size_t>(d.cols()), 0);
  for (Index i : sel.index_set) in_set[static_cast<size_t>(i)] = 1;
  for (Index j = 0; j < pattern.n; ++j) {
    const auto& idx = pattern.cols[static_cast<size_t>(j)];
    const auto& val = xstar.values[static_cast<size_t>(j)];
    for (size_t k = 0; k < idx.size(); ++k)
      if (in_set[static_cast<size_t>(idx[k])]) r.col(j) -= val[k] * d.a.col(idx[k]);
  }

  GradientBundle b;
  b.index_set = sel.index_set;
  const Index cnt = static_cast<Index>(sel.index_set.size());
  b.raw = Matrix::Zero(d.rows(), cnt);
  std::vector<Index> slot_of(static_cast<size_t>(d.cols()), -1);
  for (Index k = 0; k < cnt; ++k)
    slot_of[static_cast<size_t>(sel.index_set[static_cast<size_t>(k)])] = k;
  for (Index j = 0; j < pattern.n; ++j) {
    const auto& idx = pattern.cols[static_cast<size_t>(j)];
    const auto& val = xstar.values[static_cast<size_t>(j)];
    for (size_t k = 0; k < idx.size(); ++k) {
      const Index slot = slot_of[static_cast<size_t>(idx[k])];
      if (slot >= 0) b.raw.col(slot) -= 2.0 * val[k] * r.col(j);
    }
  }
  b.projected = b.raw;
  b.norms.resize(cnt);
  for (Index k = 0; k < cnt; ++k) {
    const auto di = d.a.col(sel.index_set[static_cast<size_t>(k)]);
    b.projected.col(k) -= di * di.dot(b.raw.col(k));
    b.norms(k) = b.projected.col(k).norm();
  }
  (void)y;
  return b;
}

Dictionary geodesic_step(const Dictionary& d, const GradientBundle& bundle,
                         double t, const UpdateSelection& sel) {
  (void)sel;
  Dictionary out = d;
  apply_geodesic(out.a, d.a, bundle, t);
  return out;
}

LineSearchResult line_search_iteration(const Dictionary& d, const Matrix& y,
                                       const SparsityPattern& pattern,
                                       const UpdateSelection& sel,
                                       const UpdateConfig& cfg) {
  const double c = cfg.golden_c;
  Workspace ws = build_workspace(pattern, sel);
  Scratch scratch(d.rows(), std::max<Index>(ws.max_atoms, 1));
  const double mu = cfg.mu;

  LineSearchResult out;
  out.trace.f_before = eval_objective(d.a, sel.partial_residual, ws, mu, scratch);

  GradientBundle bundle = gradient(d, y, pattern, sel, mu);
  out.trace.grad_max = bundle.max_norm();
  const double gate = cfg.g_min * y.squaredNorm();
  bool any_above = false;
  for (Index k = 0; k < bundle.norms.size(); ++k)
    if (bundle.norms(k) > gate) any_above = true;
  if (!any_above) {
    out.dict = d;
    out.coeffs = sel.baseline;
    out.trace.f_after = out.trace.f_before;
    out.trace.early_exit = true;
    return out;
  }

  Matrix dt = d.a;
  auto eval = [&](double t) {
    ++out.trace.evals;
    apply_geodesic(dt, d.a, bundle, t);
    return eval_objective(dt, sel.partial_residual, ws, mu, scratch);
  };

  double t1 = 0.0, t4 = cfg.t4_init;
  double t3 = c * t4, t2 = (1.0 - c) * t4;
  double f1 = out.trace.f_before;
  double f2 = eval(t2), f3 = eval(t3), f4 = eval(t4);

  // Part A: bracket so that f1 > f2 > f3 <= f4.
  int a_iters = 0;
  for (; a_iters < cfg.part_a_max_iters; ++a_iters) {
    if (f1 <= f2) {
      t4 = t2;
      f4 = f2;
      t3 = c * t4;
      t2 = (1.0 - c) * t4;
      f3 = eval(t3);
      f2 = eval(t2);
      if (t4 < 1e-300) break;  // descent direction yields no decrease
    } else if (f2 <= f3) {
      t4 = t3;
      f4 = f3;
      t3 = t2;
      f3 = f2;
      t2 = (1.0 - c) * t4;
      f2 = eval(t2);
    } else if (f3 > f4) {
      t2 = t3;
      f2 = f3;
      t3 = t4;
      f3 = f4;
      t4 = t3 / c;
      f4 = eval(t4);
    } else {
      break;
    }
  }
  if (a_iters >= cfg.part_a_max_iters) out.trace.part_a_capped = true;

  // Part B: golden-section shrink of [t1, t4].
  for (int b_iters = 0; b_iters < cfg.part_b_max_iters; ++b_iters) {
    if (t4 - t1 <= cfg.part_b_min_width * std::max(t4, cfg.t4_init)) break;
    if (f1 > f2 && f2 > f3) {
      t1 = t2;
      f1 = f2;
      t2 = t3;
      f2 = f3;
      t3 = t1 + c * (t4 - t1);
      f3 = eval(t3);
    } else {
      t4 = t3;
      f4 = f3;
      t3 = t2;
      f3 = f2;
      t2 = t1 + (1.0 - c) * (t4 - t1);
      f2 = eval(t2);
    }
  }

  // Argmin over the bracket, smallest t on ties.
  double tstar = t1, fstar = f1;
  const double ts[3] = {t2, t3, t4};
  const double fs[3] = {f2, f3, f4};
  for (int k = 0; k < 3; ++k)
    if (fs[k] < fstar) {
      fstar = fs[k];
      tstar = ts[k];
    }
  out.trace.t_star = tstar;

  Dictionary dnew = d;
  apply_geodesic(dnew.a, d.a, bundle, tstar);
  for (Index i : sel.index_set) dnew.a.col(i).normalize();

  UpdateSelection sel_new = sel;  // Yr and the frozen rows are unchanged
  out.coeffs = merge_solution(pattern, sel_new, ws, dnew.a, sel.partial_residual,
                              mu, cfg.ls_backend);
  out.trace.f_after = eval_objective(dnew.a, sel.partial_residual, ws, mu, scratch);
  out.dict = std::move(dnew);
  return out;
}

}  // namespace simco
