#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "cilqr/types.hpp"

namespace cilqr {

/// Exponential barrier coefficients, both strictly positive.
struct BarrierParams {
  double q1 = 100.0;  ///< scale
  double q2 = 10.0;   ///< sharpness
};

/// The barrier exponent argument is clamped here to avoid overflow on deeply
/// violating iterates; the resulting expansion carries the saturated flag.
inline constexpr double kBarrierExponentClamp = 40.0;

/// Component-wise control box.
struct ControlBounds {
  double a_min = -4.0;
  double a_max = 2.0;
  double r_min = -0.25;
  double r_max = 0.25;
};

/// Peak-friction envelope used to validate the control box.
struct FrictionEnvelope {
  double mu_hat = 0.9;
  double g_const = kGravity;
};

/// Lane boundary curves y = poly(x), coefficient order a0 + a1 x + a2 x^2 + ...
struct BoundaryPolynomials {
  std::vector<double> left;
  std::vector<double> right;
};

/// Thrown when the friction circle cannot accommodate the acceleration box, so
/// no yaw-rate budget exists.
class InfeasibleEnvelope : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Transforms a constraint g < 0 with the given derivatives into the smooth
/// penalty q1*exp(q2*g) and its exact expansion.
QuadraticExpansion exp_barrier(double g_val, const Vec4& gx, const Vec2& gu, const Mat4& gxx,
                               const Mat2& guu, const Mat42& gxu, const BarrierParams& p);

struct ControlConstraintRow {
  double g;
  Vec2 gu;
};

/// Four rows (a-a_max, a_min-a, r-r_max, r_min-r), each negative iff satisfied.
std::array<ControlConstraintRow, 4> control_bound_constraints(const Control& u,
                                                              const ControlBounds& b);

struct FrictionReport {
  bool feasible = false;
  double a_max_margin = 0.0;  ///< mu*g - a_max, positive when satisfied
  double a_min_margin = 0.0;  ///< a_min + mu*g
  double r_limit = 0.0;       ///< sqrt(mu^2 g^2 - a_bar^2) / v
  double r_max_margin = 0.0;  ///< r_limit - r_max
  double r_min_margin = 0.0;  ///< r_min + r_limit
};

/// Yaw-rate budget at speed v given the worst-case |a| the box allows.
/// Throws InfeasibleEnvelope when mu^2 g^2 <= a_bar^2.
double yaw_rate_limit(const FrictionEnvelope& env, double a_bar, double v);

/// Checks the control box against the friction envelope at speed v.
FrictionReport friction_feasible_check(const ControlBounds& b, const FrictionEnvelope& env,
                                       double v);

struct StateConstraintRow {
  double g;
  Vec4 gx;
  Mat4 gxx;
};

/// Two rows normalized to g < 0: (py - left(px)) and (right(px) - py).
std::array<StateConstraintRow, 2> road_boundary_constraints(const State& x,
                                                            const BoundaryPolynomials& b);

/// Helpers for the boundary polynomials.
double polynomial_value(const std::vector<double>& coeffs, double x);
double polynomial_derivative(const std::vector<double>& coeffs, double x);
double polynomial_second_derivative(const std::vector<double>& coeffs, double x);

}  // namespace cilqr
