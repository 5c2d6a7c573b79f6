#include "simco/baselines.hpp"

#include <cmath>

#include "simco/numerics.hpp"

namespace simco {

ModResult mod_update(const Dictionary& d, const Matrix& y, const SparseCoeffs& x) {
  if (d.rows() != y.rows() || d.cols() != x.pattern.d || y.cols() != x.pattern.n)
    throw contract_error("mod_update: shape mismatch");
  const Index dd = d.cols();
  Matrix xd = x.dense();
  Matrix gram = xd * xd.transpose();  // d x d

  ModResult out;
  Matrix rhs = xd * y.transpose();  // d x m
  Matrix draw_t;                    // d x m, D_raw^T
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(gram);
  if (cod.rank() < dd) {
    // Singular X X^T: minimum-norm solution via the rank-revealing
    // decomposition, flagged for the trace.
    out.gram_singular = true;
    draw_t = cod.solve(rhs);
  } else {
    draw_t = gram.ldlt().solve(rhs);
  }
  Matrix draw = draw_t.transpose();  // m x d

  out.coeffs = x;
  auto rows = x.pattern.row_view();
  Matrix dnew = d.a;
  for (Index i = 0; i < dd; ++i) {
    const double norm = draw.col(i).norm();
    if (norm <= 1e-14) {
      // Degenerate column: keep the previous codeword; the row is scaled by
      // the (near-zero) norm so the product D'X' still equals D_raw X.
      for (Index j : rows[static_cast<size_t>(i)]) {
        auto& idx = x.pattern.cols[static_cast<size_t>(j)];
        for (size_t k = 0; k < idx.size(); ++k)
          if (idx[k] == i) out.coeffs.values[static_cast<size_t>(j)][k] *= norm;
      }
      continue;
    }
    dnew.col(i) = draw.col(i) / norm;
    for (Index j : rows[static_cast<size_t>(i)]) {
      auto& idx = x.pattern.cols[static_cast<size_t>(j)];
      for (size_t k = 0; k < idx.size(); ++k)
        if (idx[k] == i) out.coeffs.values[static_cast<size_t>(j)][k] *= norm;
    }
  }
  out.dict = Dictionary{std::move(dnew)};
  return out;
}

KsvdResult ksvd_update(const Dictionary& d, const Matrix& y, const SparseCoeffs& x) {
  if (d.rows() != y.rows() || d.cols() != x.pattern.d || y.cols() != x.pattern.n)
    throw contract_error("ksvd_update: shape mismatch");
  KsvdResult out;
  out.dict = d;
  out.coeffs = x;
  const auto rows = x.pattern.row_view();

  // Running residual R = Y - D X, kept current as codewords change.
  Matrix r = y;
  for (Index j = 0; j < x.pattern.n; ++j) {
    const auto& idx = x.pattern.cols[static_cast<size_t>(j)];
    const auto& val = x.values[static_cast<size_t>(j)];
    for (size_t k = 0; k < idx.size(); ++k) r.col(j) -= val[k] * d.a.col(idx[k]);
  }

  auto slot_in_column = [&](Index i, Index j) {
    const auto& idx = x.pattern.cols[static_cast<size_t>(j)];
    for (size_t k = 0; k < idx.size(); ++k)
      if (idx[k] == i) return k;
    return idx.size();
  };

  for (Index i = 0; i < d.cols(); ++i) {
    const auto& support = rows[static_cast<size_t>(i)];
    if (support.empty()) continue;
    const Index cnt = static_cast<Index>(support.size());
    Matrix e(d.rows(), cnt);
    for (Index c = 0; c < cnt; ++c) {
      const Index j = support[static_cast<size_t>(c)];
      const size_t slot = slot_in_column(i, j);
      e.col(c) = r.col(j) +
                 out.coeffs.values[static_cast<size_t>(j)][slot] * out.dict.a.col(i);
    }
    RankOnePair top = rank_one_svd(e);
    if (top.is_zero) {
      ++out.zero_blocks;
      for (Index c = 0; c < cnt; ++c) {
        const Index j = support[static_cast<size_t>(c)];
        const size_t slot = slot_in_column(i, j);
        out.coeffs.values[static_cast<size_t>(j)][slot] = 0.0;
        r.col(j) = e.col(c);
      }
      continue;
    }
    out.dict.a.col(i) = top.u;
    for (Index c = 0; c < cnt; ++c) {
      const Index j = support[static_cast<size_t>(c)];
      const size_t slot = slot_in_column(i, j);
      const double coef = top.lambda1 * top.v(c);
      out.coeffs.values[static_cast<size_t>(j)][slot] = coef;
      r.col(j) = e.col(c) - coef * top.u;
    }
  }
  return out;
}

}  // namespace simco
