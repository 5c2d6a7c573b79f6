#include "simco/omp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace simco {

SparseCoeffs omp_encode(const Dictionary& d, const Matrix& y, const OmpOptions& opt) {
  d.validate();
  check_finite(y, "omp_encode");
  if (d.rows() != y.rows()) throw contract_error("omp_encode: row mismatch");
  const Index m = d.rows(), dd = d.cols(), n = y.cols();
  const bool fixed = opt.sparsity > 0;
  if (fixed && (opt.sparsity > std::min(m, dd)))
    throw contract_error("omp_encode: sparsity exceeds min(m, d)");
  const Index cap = fixed ? opt.sparsity
                          : (opt.max_atoms > 0 ? std::min(opt.max_atoms, std::min(m, dd))
                                               : std::min(m, dd));

  SparsityPattern pattern;
  pattern.d = dd;
  pattern.n = n;
  pattern.cols.resize(static_cast<size_t>(n));
  std::vector<std::vector<double>> values(static_cast<size_t>(n));

  Vector r(m), corr(dd), x;
  std::vector<Index> sel;
  std::vector<char> used(static_cast<size_t>(dd));
  Matrix dsel(m, cap);
  for (Index j = 0; j < n; ++j) {
    r = y.col(j);
    sel.clear();
    std::fill(used.begin(), used.end(), 0);
    while (static_cast<Index>(sel.size()) < cap) {
      if (!fixed && r.norm() <= opt.residual_threshold) break;
      corr.noalias() = d.a.transpose() * r;
      Index best = -1;
      double best_abs = -1.0;
      for (Index i = 0; i < dd; ++i) {
        if (used[static_cast<size_t>(i)]) continue;
        double c = std::abs(corr(i));
        if (c > best_abs) {  // strict: ties resolve to the smaller index
          best_abs = c;
          best = i;
        }
      }
      if (best < 0) break;
      if (!fixed && best_abs == 0.0) break;
      used[static_cast<size_t>(best)] = 1;
      dsel.col(static_cast<Index>(sel.size())) = d.a.col(best);
      sel.push_back(best);
      const Index k = static_cast<Index>(sel.size());
      x = solve_least_squares(dsel.leftCols(k), y.col(j), opt.backend);
      r = y.col(j) - dsel.leftCols(k) * x;
    }
    // Store sorted by atom index.
    std::vector<size_t> order(sel.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return sel[a] < sel[b]; });
    auto& idx = pattern.cols[static_cast<size_t>(j)];
    auto& val = values[static_cast<size_t>(j)];
    idx.reserve(sel.size());
    val.reserve(sel.size());
    for (size_t k : order) {
      idx.push_back(sel[k]);
      val.push_back(sel.empty() ? 0.0 : x(static_cast<Index>(k)));
    }
  }

  SparseCoeffs out;
  out.pattern = std::move(pattern);
  out.values = std::move(values);
  return out;
}

SparseCoeffs omp_encode(const Dictionary& d, const Matrix& y, Index s) {
  OmpOptions opt;
  opt.sparsity = s;
  return omp_encode(d, y, opt);
}

}  // namespace simco
