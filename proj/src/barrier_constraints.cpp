#include "cilqr/barrier_constraints.hpp"

#include <cmath>

namespace cilqr {

QuadraticExpansion exp_barrier(double g_val, const Vec4& gx, const Vec2& gu, const Mat4& gxx,
                               const Mat2& guu, const Mat42& gxu, const BarrierParams& p) {
  if (!(p.q1 > 0.0) || !(p.q2 > 0.0)) {
    throw std::invalid_argument("exp_barrier: q1 and q2 must be positive");
  }
  double arg = p.q2 * g_val;
  QuadraticExpansion e;
  if (arg > kBarrierExponentClamp) {
    arg = kBarrierExponentClamp;
    e.saturated = true;
  }
  const double b = p.q1 * std::exp(arg);
  const double c = p.q2 * b;  // common factor q1*q2*exp(q2 g)
  e.value = b;
  e.lx = c * gx;
  e.lu = c * gu;
  e.lxx = c * (p.q2 * gx * gx.transpose() + gxx);
  e.luu = c * (p.q2 * gu * gu.transpose() + guu);
  e.lxu = c * (p.q2 * gx * gu.transpose() + gxu);
  return e;
}

std::array<ControlConstraintRow, 4> control_bound_constraints(const Control& u,
                                                              const ControlBounds& b) {
  return {ControlConstraintRow{u.a - b.a_max, Vec2(1.0, 0.0)},
          ControlConstraintRow{b.a_min - u.a, Vec2(-1.0, 0.0)},
          ControlConstraintRow{u.r - b.r_max, Vec2(0.0, 1.0)},
          ControlConstraintRow{b.r_min - u.r, Vec2(0.0, -1.0)}};
}

double yaw_rate_limit(const FrictionEnvelope& env, double a_bar, double v) {
  if (!(v > 0.0)) {
    throw std::invalid_argument("yaw_rate_limit: v must be positive");
  }
  const double mg = env.mu_hat * env.g_const;
  const double disc = mg * mg - a_bar * a_bar;
  if (disc <= 0.0) {
    throw InfeasibleEnvelope("friction envelope exhausted by the acceleration box");
  }
  return std::sqrt(disc) / v;
}

FrictionReport friction_feasible_check(const ControlBounds& b, const FrictionEnvelope& env,
                                       double v) {
  if (!(v > 0.0)) {
    throw std::invalid_argument("friction_feasible_check: v must be positive");
  }
  const double mg = env.mu_hat * env.g_const;
  const double a_bar = std::max(std::abs(b.a_min), std::abs(b.a_max));
  FrictionReport rep;
  rep.a_max_margin = mg - b.a_max;
  rep.a_min_margin = b.a_min + mg;
  rep.r_limit = yaw_rate_limit(env, a_bar, v);  // throws when the box eats the envelope
  rep.r_max_margin = rep.r_limit - b.r_max;
  rep.r_min_margin = b.r_min + rep.r_limit;
  rep.feasible = rep.a_max_margin > 0.0 && rep.a_min_margin > 0.0 && rep.r_max_margin > 0.0 &&
                 rep.r_min_margin > 0.0;
  return rep;
}

double polynomial_value(const std::vector<double>& coeffs, double x) {
  double y = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
    y = y * x + *it;
  }
  return y;
}

double polynomial_derivative(const std::vector<double>& coeffs, double x) {
  double y = 0.0;
  for (size_t i = coeffs.size(); i-- > 1;) {
    y = y * x + static_cast<double>(i) * coeffs[i];
  }
  return y;
}

double polynomial_second_derivative(const std::vector<double>& coeffs, double x) {
  double y = 0.0;
  for (size_t i = coeffs.size(); i-- > 2;) {
    y = y * x + static_cast<double>(i) * static_cast<double>(i - 1) * coeffs[i];
  }
  return y;
}

std::array<StateConstraintRow, 2> road_boundary_constraints(const State& x,
                                                            const BoundaryPolynomials& b) {
  StateConstraintRow left;
  left.g = x.py - polynomial_value(b.left, x.px);
  left.gx = Vec4(-polynomial_derivative(b.left, x.px), 1.0, 0.0, 0.0);
  left.gxx = Mat4::Zero();
  left.gxx(0, 0) = -polynomial_second_derivative(b.left, x.px);

  StateConstraintRow right;
  right.g = polynomial_value(b.right, x.px) - x.py;
  right.gx = Vec4(polynomial_derivative(b.right, x.px), -1.0, 0.0, 0.0);
  right.gxx = Mat4::Zero();
  right.gxx(0, 0) = polynomial_second_derivative(b.right, x.px);

  return {left, right};
}

}  // namespace cilqr
