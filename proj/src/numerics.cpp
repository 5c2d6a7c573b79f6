#include "simco/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace simco {
namespace {

Vector solve_cg_normal(const Matrix& a, const Vector& y) {
  // CG on A^T A x = A^T y, started at zero (the iterates stay in the row
  // space, so the limit is the minimum-norm solution).
  const Index s = a.cols();
  Vector x = Vector::Zero(s);
  Vector b = a.transpose() * y;
  Vector r = b;
  Vector p = r;
  double rs = r.squaredNorm();
  const double tol2 = 1e-28 * std::max(1.0, b.squaredNorm());
  const int max_iters = static_cast<int>(10 * s + 20);
  for (int it = 0; it < max_iters && rs > tol2; ++it) {
    Vector ap = a.transpose() * (a * p);
    double papp = p.dot(ap);
    if (papp <= 0.0) break;  // hit the null space direction
    double alpha = rs / papp;
    x += alpha * p;
    r -= alpha * ap;
    double rs_new = r.squaredNorm();
    p = r + (rs_new / rs) * p;
    rs = rs_new;
  }
  return x;
}

}  // namespace

Vector solve_least_squares(const Matrix& a, const Vector& y, LsBackend backend) {
  if (a.rows() != y.size())
    throw contract_error("solve_least_squares: dimension mismatch");
  if (a.rows() < 1 || a.cols() < 1)
    throw contract_error("solve_least_squares: empty system");
  if (backend == LsBackend::CG) return solve_cg_normal(a, y);
  return a.completeOrthogonalDecomposition().solve(y);
}

SvdResult svd(const Matrix& a) {
  check_finite(a, "svd");
  Eigen::JacobiSVD<Matrix> s(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {s.singularValues(), s.matrixU(), s.matrixV()};
}

RankOnePair rank_one_svd(const Matrix& a) {
  check_finite(a, "rank_one_svd");
  const Index m = a.rows(), n = a.cols();
  RankOnePair out;
  out.u = Vector::Zero(m);
  out.v = Vector::Zero(n);
  if (a.isZero(0.0)) {
    out.is_zero = true;
    if (m > 0) out.u(0) = 1.0;
    if (n > 0) out.v(0) = 1.0;
    return out;
  }

  // Power iteration on the smaller Gram matrix.
  const bool use_cols = n <= m;
  Matrix gram = use_cols ? Matrix(a.transpose() * a) : Matrix(a * a.transpose());
  const Index k = gram.rows();
  Vector x = gram.rowwise().sum();
  if (x.norm() <= 1e-300 * gram.norm() || x.norm() == 0.0) {
    Index imax;
    gram.diagonal().maxCoeff(&imax);
    x = Vector::Zero(k);
    x(imax) = 1.0;
  }
  x.normalize();
  double rq = x.dot(gram * x);
  for (int it = 0; it < 10000; ++it) {
    Vector gx = gram * x;
    double norm = gx.norm();
    if (norm == 0.0) break;
    x = gx / norm;
    gx = gram * x;
    rq = x.dot(gx);
    // The eigen-residual of the Gram problem bounds the singular-triple
    // residual by eps * lambda1, so this drives both below 1e-8 * lambda1.
    if ((gx - rq * x).norm() <= 1e-10 * std::abs(rq)) break;
  }
  const double lambda = std::sqrt(std::max(0.0, rq));
  out.lambda1 = lambda;
  if (use_cols) {
    out.v = x;
    out.u = a * x;
    double un = out.u.norm();
    if (un > 0.0) out.u /= un;
  } else {
    out.u = x;
    out.v = a.transpose() * x;
    double vn = out.v.norm();
    if (vn > 0.0) out.v /= vn;
  }
  // Sign convention: first nonzero entry of u positive.
  for (Index i = 0; i < m; ++i) {
    if (std::abs(out.u(i)) > 1e-12) {
      if (out.u(i) < 0.0) {
        out.u = -out.u;
        out.v = -out.v;
      }
      break;
    }
  }
  return out;
}

Vector singular_values(const Matrix& a) {
  check_finite(a, "singular_values");
  Eigen::JacobiSVD<Matrix> s(a);
  return s.singularValues();
}

}  // namespace simco
