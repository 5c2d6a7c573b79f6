#pragma once

#include "simco/numerics.hpp"

namespace simco {

/// Rank-one approximation instance with its SVD cached.
struct RankOneProblem {
  Matrix a;
  SvdResult decomposition;
  bool gap_ok = false;  // lambda1 - lambda2 > 1e-12 * lambda1

  static RankOneProblem make(Matrix a);
};

/// f(u) = min_w ||A - u w^T||_F^2 = ||A||_F^2 - ||u^T A||_2^2 for unit u.
double f_rank1(const Vector& u, const Matrix& a);

/// Tangent gradient of f on the unit sphere:
/// -2 (A A^T u - u (u^T A A^T u)); orthogonal to u.
Vector grad_rank1(const Vector& u, const Matrix& a);

/// Angle to the closest global minimizer, in [0, pi/2].
double rank1_angle(const Vector& u, const Vector& u_top);

struct DescentPoint {
  double theta = 0.0;
  double f = 0.0;
  double grad_norm = 0.0;
};

struct DescentResult {
  Vector u_final;
  std::vector<DescentPoint> trajectory;
  bool bad_start = false;  // started orthogonal to the top singular vector
  bool converged = false;  // projected gradient reached 1e-10
  int steps = 0;
};

/// Geodesic gradient descent with fixed arc steps and a halving backoff when
/// a step would increase f. Stops when the projected gradient norm falls
/// below 1e-10 or after max_steps.
DescentResult descend_rank1(const Matrix& a, const Vector& u0,
                            double step_eps = 1e-3, int max_steps = 100000);

struct DirDerivResult {
  double grad_g = 0.0;  // numerically measured d/dt g(u(t)) toward the minimizer
  double grad_f = 0.0;  // = -grad_g
  bool derivative_negative = false;  // grad_f < 0
  Vector h_theta;             // unit tangent pushing u toward s * u_top
  Vector u_perp;
  double closed_form_linear = 0.0;  // sin(2 theta) (lambda1   - u_R^T diag(l^2) u_R)
  double closed_form_squared = 0.0;  // sin(2 theta) (lambda1^2 - u_R^T diag(l^2) u_R)
};

/// Differentiates g(u(t)) = ||u(t)^T A||^2 along the geodesic toward the
/// closest minimizer and reports the sign together with both closed-form
/// candidates. Requires theta strictly inside (0, pi/2).
DirDerivResult directional_derivative_check(const Matrix& a, const Vector& u);

/// CSV with header `step,theta,f,grad_norm`.
void save_trajectory_csv(const std::string& path, const DescentResult& r);

}  // namespace simco
