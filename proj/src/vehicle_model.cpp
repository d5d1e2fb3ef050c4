#include "cilqr/vehicle_model.hpp"

#include <cmath>
#include <stdexcept>

namespace cilqr::vehicle {

State step(const State& x, const Control& u, double dt) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("step: dt must be positive");
  }
  if (!x.finite() || !u.finite()) {
    throw std::invalid_argument("step: non-finite state or control");
  }
  const double c = std::cos(x.psi);
  const double s = std::sin(x.psi);
  return State{x.px + x.v * c * dt,
               x.py + x.v * s * dt,
               x.v + u.a * dt,
               x.psi + u.r * dt};
}

Trajectory rollout(const State& x0, const std::vector<Control>& controls, double dt) {
  if (controls.empty()) {
    throw std::invalid_argument("rollout: empty control sequence");
  }
  Trajectory traj;
  traj.dt = dt;
  traj.controls = controls;
  traj.states.reserve(controls.size() + 1);
  traj.states.push_back(x0);
  for (const Control& u : controls) {
    traj.states.push_back(step(traj.states.back(), u, dt));
  }
  traj.dynamically_consistent = true;
  return traj;
}

std::pair<Mat4, Mat42> linearize(const State& x, const Control& u, double dt) {
  if (!x.finite() || !u.finite()) {
    throw std::invalid_argument("linearize: non-finite state or control");
  }
  (void)u;  // the Jacobians of the kinematic step do not depend on u
  const double c = std::cos(x.psi);
  const double s = std::sin(x.psi);
  Mat4 fx = Mat4::Identity();
  fx(0, 2) = c * dt;
  fx(0, 3) = -x.v * s * dt;
  fx(1, 2) = s * dt;
  fx(1, 3) = x.v * c * dt;
  Mat42 fu = Mat42::Zero();
  fu(2, 0) = dt;
  fu(3, 1) = dt;
  return {fx, fu};
}

}  // namespace cilqr::vehicle
