#pragma once

#include <utility>
#include <vector>

#include "cilqr/types.hpp"

namespace cilqr::vehicle {

/// One explicit-Euler step of the kinematic model. Heading terms are evaluated
/// at the current state; yaw is not wrapped.
State step(const State& x, const Control& u, double dt);

/// Integrates a control sequence from x0. The result carries the
/// dynamically-consistent flag.
Trajectory rollout(const State& x0, const std::vector<Control>& controls, double dt);

/// Analytic Jacobians (fx, fu) of step() with respect to state and control.
std::pair<Mat4, Mat42> linearize(const State& x, const Control& u, double dt);

}  // namespace cilqr::vehicle
