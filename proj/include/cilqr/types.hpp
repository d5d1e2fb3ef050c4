#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace cilqr {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
using Mat42 = Eigen::Matrix<double, 4, 2>;
using Mat24 = Eigen::Matrix<double, 2, 4>;

inline constexpr double kGravity = 9.81;  // [m/s^2]

/// Kinematic state [px, py, v, psi].
struct State {
  double px = 0.0;   ///< position x [m]
  double py = 0.0;   ///< position y [m]
  double v = 0.0;    ///< speed [m/s]
  double psi = 0.0;  ///< yaw angle [rad], accumulates without wrapping

  Vec4 vec() const { return Vec4(px, py, v, psi); }
  Vec2 position() const { return Vec2(px, py); }
  static State from_vec(const Vec4& x) { return State{x[0], x[1], x[2], x[3]}; }
  bool finite() const {
    return std::isfinite(px) && std::isfinite(py) && std::isfinite(v) && std::isfinite(psi);
  }
};

/// Control input [a, r]: longitudinal acceleration and yaw rate.
struct Control {
  double a = 0.0;  ///< [m/s^2]
  double r = 0.0;  ///< [rad/s]

  Vec2 vec() const { return Vec2(a, r); }
  static Control from_vec(const Vec2& u) { return Control{u[0], u[1]}; }
  bool finite() const { return std::isfinite(a) && std::isfinite(r); }
};

/// State/control sequences over a horizon; states.size() == controls.size() + 1.
struct Trajectory {
  std::vector<State> states;
  std::vector<Control> controls;
  double dt = 0.0;
  /// True when states[k+1] was produced by integrating controls[k] from states[k].
  bool dynamically_consistent = false;

  int horizon() const { return static_cast<int>(controls.size()); }
};

/// Second-order expansion of a scalar stage cost about a reference point.
struct QuadraticExpansion {
  double value = 0.0;
  Vec4 lx = Vec4::Zero();
  Vec2 lu = Vec2::Zero();
  Mat4 lxx = Mat4::Zero();
  Mat2 luu = Mat2::Zero();
  Mat42 lxu = Mat42::Zero();
  /// Set when a barrier exponent hit its clamp while building this expansion.
  bool saturated = false;

  QuadraticExpansion& operator+=(const QuadraticExpansion& o) {
    value += o.value;
    lx += o.lx;
    lu += o.lu;
    lxx += o.lxx;
    luu += o.luu;
    lxu += o.lxu;
    saturated = saturated || o.saturated;
    return *this;
  }

  void symmetrize() {
    lxx = 0.5 * (lxx + lxx.transpose()).eval();
    luu = 0.5 * (luu + luu.transpose()).eval();
  }

  bool finite() const {
    return std::isfinite(value) && lx.allFinite() && lu.allFinite() && lxx.allFinite() &&
           luu.allFinite() && lxu.allFinite();
  }
};

inline QuadraticExpansion operator+(QuadraticExpansion a, const QuadraticExpansion& b) {
  a += b;
  return a;
}

/// Thrown when a solver pass produces a non-finite quantity.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, int step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_index(step) {}
  int step_index;
};

/// Thrown for malformed scenario files or violated scenario invariants.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cilqr
