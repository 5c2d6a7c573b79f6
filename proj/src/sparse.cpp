#include "simco/sparse.hpp"

#include <cmath>

namespace simco {

std::vector<std::vector<Index>> SparsityPattern::row_view() const {
  std::vector<std::vector<Index>> rows(static_cast<size_t>(d));
  for (Index j = 0; j < n; ++j)
    for (Index i : cols[static_cast<size_t>(j)])
      rows[static_cast<size_t>(i)].push_back(j);
  return rows;
}

Index SparsityPattern::entries() const {
  Index total = 0;
  for (const auto& c : cols) total += static_cast<Index>(c.size());
  return total;
}

void SparsityPattern::validate() const {
  if (static_cast<Index>(cols.size()) != n)
    throw contract_error("SparsityPattern: column count mismatch");
  for (const auto& c : cols) {
    Index prev = -1;
    for (Index i : c) {
      if (i < 0 || i >= d)
        throw contract_error("SparsityPattern: index out of range");
      if (i <= prev)
        throw contract_error("SparsityPattern: indices not strictly increasing");
      prev = i;
    }
  }
}

SparseCoeffs SparseCoeffs::zeros(SparsityPattern p) {
  SparseCoeffs x;
  x.values.resize(p.cols.size());
  for (size_t j = 0; j < p.cols.size(); ++j)
    x.values[j].assign(p.cols[j].size(), 0.0);
  x.pattern = std::move(p);
  return x;
}

Matrix SparseCoeffs::dense() const {
  Matrix x = Matrix::Zero(pattern.d, pattern.n);
  for (Index j = 0; j < pattern.n; ++j) {
    const auto& idx = pattern.cols[static_cast<size_t>(j)];
    const auto& val = values[static_cast<size_t>(j)];
    for (size_t k = 0; k < idx.size(); ++k) x(idx[k], j) = val[k];
  }
  return x;
}

void SparseCoeffs::validate() const {
  pattern.validate();
  if (values.size() != pattern.cols.size())
    throw contract_error("SparseCoeffs: value columns mismatch");
  for (size_t j = 0; j < values.size(); ++j) {
    if (values[j].size() != pattern.cols[j].size())
      throw contract_error("SparseCoeffs: value/index length mismatch");
    for (double v : values[j])
      if (!std::isfinite(v)) throw contract_error("SparseCoeffs: non-finite value");
  }
}

Dictionary Dictionary::from_matrix(Matrix m) {
  Dictionary d{std::move(m)};
  d.validate();
  return d;
}

void Dictionary::validate(double tol) const {
  check_finite(a, "Dictionary");
  for (Index i = 0; i < a.cols(); ++i)
    if (std::abs(a.col(i).norm() - 1.0) > tol)
      throw contract_error("Dictionary: column is not unit norm");
}

double residual_energy(const Dictionary& d, const Matrix& y,
                       const SparseCoeffs& x) {
  if (d.rows() != y.rows() || d.cols() != x.pattern.d || y.cols() != x.pattern.n)
    throw contract_error("residual_energy: shape mismatch");
  double total = 0.0;
  Vector r(y.rows());
  for (Index j = 0; j < y.cols(); ++j) {
    r = y.col(j);
    const auto& idx = x.pattern.cols[static_cast<size_t>(j)];
    const auto& val = x.values[static_cast<size_t>(j)];
    for (size_t k = 0; k < idx.size(); ++k) r -= val[k] * d.a.col(idx[k]);
    total += r.squaredNorm();
  }
  return total;
}

}  // namespace simco
