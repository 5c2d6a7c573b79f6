#include "simco/rankone.hpp"

#include <cmath>
#include <fstream>

namespace simco {
namespace {

double theta_of(const Vector& u, const Vector& u_top) {
  double c = std::abs(u.dot(u_top));
  if (c > 1.0) c = 1.0;
  return std::acos(c);
}

}  // namespace

RankOneProblem RankOneProblem::make(Matrix a) {
  check_finite(a, "RankOneProblem");
  RankOneProblem p;
  p.decomposition = svd(a);
  p.a = std::move(a);
  const auto& sv = p.decomposition.singular_values;
  p.gap_ok = sv.size() >= 2 ? (sv(0) - sv(1)) > 1e-12 * sv(0) : sv.size() == 1;
  return p;
}

double f_rank1(const Vector& u, const Matrix& a) {
  return a.squaredNorm() - (u.transpose() * a).squaredNorm();
}

Vector grad_rank1(const Vector& u, const Matrix& a) {
  Vector bu = a * (a.transpose() * u);
  return -2.0 * (bu - u * u.dot(bu));
}

double rank1_angle(const Vector& u, const Vector& u_top) {
  return theta_of(u, u_top);
}

DescentResult descend_rank1(const Matrix& a, const Vector& u0, double step_eps,
                            int max_steps) {
  if (std::abs(u0.norm() - 1.0) > 1e-10)
    throw contract_error("descend_rank1: u0 must be unit norm");
  const Matrix b = a * a.transpose();
  const Vector u_top = svd(a).left_vectors.col(0);

  DescentResult out;
  Vector u = u0;
  out.bad_start = std::abs(M_PI_2 - theta_of(u, u_top)) <= 1e-9;

  auto fval = [&](const Vector& v) { return a.squaredNorm() - v.dot(b * v); };
  auto record = [&](double gn) {
    out.trajectory.push_back({theta_of(u, u_top), fval(u), gn});
  };

  double f = fval(u);
  for (int step = 0; step < max_steps; ++step) {
    Vector bu = b * u;
    Vector g = -2.0 * (bu - u * u.dot(bu));
    const double gn = g.norm();
    if (step == 0) record(gn);
    if (gn <= 1e-10) {
      out.converged = true;
      break;
    }
    const Vector h = -g / gn;
    const double theta_now = theta_of(u, u_top);
    double t = step_eps;
    Vector trial;
    double ft;
    bool accepted = false;
    while (t > 1e-16) {
      trial = u * std::cos(t) + h * std::sin(t);
      trial.normalize();
      ft = fval(trial);
      // The accepted step must decrease f without overshooting past the
      // minimizer (the angle must not grow).
      if (ft < f && theta_of(trial, u_top) <= theta_now + 1e-12) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;  // no descent at machine-scale steps
    u = trial;
    f = ft;
    ++out.steps;
    record((-2.0 * (b * u - u * u.dot(b * u))).norm());
  }
  if (!out.converged && !out.trajectory.empty() &&
      out.trajectory.back().grad_norm <= 1e-10)
    out.converged = true;
  out.u_final = u;
  return out;
}

DirDerivResult directional_derivative_check(const Matrix& a, const Vector& u) {
  const SvdResult dec = svd(a);
  const Vector u_top = dec.left_vectors.col(0);
  const double theta = theta_of(u, u_top);
  const double margin = 1e-12;
  if (!(theta > margin && theta < M_PI_2 - margin))
    throw contract_error("directional_derivative_check: theta outside (0, pi/2)");

  DirDerivResult out;
  const double s = u.dot(u_top) >= 0.0 ? 1.0 : -1.0;
  const double ct = std::cos(theta), st = std::sin(theta);
  out.h_theta = (s * u_top - u * ct) / st;
  out.u_perp = (u - s * u_top * ct) / st;

  // Central difference of g(u(t)) = ||u(t)^T A||^2 along the geodesic
  // toward the closest minimizer.
  auto g = [&](const Vector& v) { return (v.transpose() * a).squaredNorm(); };
  const double h = 1e-6;
  const Vector up = u * std::cos(h) + out.h_theta * std::sin(h);
  const Vector um = u * std::cos(-h) + out.h_theta * std::sin(-h);
  out.grad_g = (g(up) - g(um)) / (2.0 * h);
  out.grad_f = -out.grad_g;
  out.derivative_negative = out.grad_f < 0.0;

  // Closed-form candidates (the tail quadratic form over the residual
  // singular values); both variants reported for comparison.
  const Index m = a.rows();
  double tail = 0.0;
  if (m > 1) {
    Vector ur(m - 1);
    for (Index i = 1; i < m; ++i)
      ur(i - 1) = dec.left_vectors.col(i).dot(out.u_perp);
    for (Index i = 1; i < m; ++i) {
      const double li =
          i < dec.singular_values.size() ? dec.singular_values(i) : 0.0;
      tail += li * li * ur(i - 1) * ur(i - 1);
    }
  }
  const double l1 = dec.singular_values(0);
  out.closed_form_linear = std::sin(2.0 * theta) * (l1 - tail);
  out.closed_form_squared = std::sin(2.0 * theta) * (l1 * l1 - tail);
  return out;
}

void save_trajectory_csv(const std::string& path, const DescentResult& r) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_trajectory_csv: cannot open " + path);
  out << "step,theta,f,grad_norm\n";
  out.precision(17);
  for (size_t k = 0; k < r.trajectory.size(); ++k) {
    const auto& p = r.trajectory[k];
    out << k << ',' << p.theta << ',' << p.f << ',' << p.grad_norm << '\n';
  }
}

}  // namespace simco
