#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "cilqr/rng.hpp"
#include "cilqr/vehicle_model.hpp"
#include "support/finite_diff.hpp"

using namespace cilqr;
namespace ts = testsupport;

TEST_CASE("step: constant-velocity integration") {
  const State next = vehicle::step(State{0, 0, 20, 0}, Control{0, 0}, 0.25);
  CHECK(next.px == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(next.py == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(next.v == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(next.psi == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("step: position uses the current speed under acceleration") {
  const State next = vehicle::step(State{0, 0, 20, 0}, Control{2, 0}, 0.25);
  CHECK(next.px == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(next.v == doctest::Approx(20.5).epsilon(1e-12));
}

TEST_CASE("step: quarter-turn heading") {
  const double half_pi = 0.5 * std::numbers::pi;
  const State next = vehicle::step(State{0, 0, 10, half_pi}, Control{0, 0.1}, 0.25);
  CHECK(next.px == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(next.py == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(next.v == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(next.psi == doctest::Approx(half_pi + 0.025).epsilon(1e-12));
}

TEST_CASE("step: exact conservation when inputs are zero") {
  CounterRng rng(7);
  for (int i = 0; i < 50; ++i) {
    const State x{rng.uniform(-50, 50), rng.uniform(-10, 10), rng.uniform(0, 40),
                  rng.uniform(-3, 3)};
    const State a = vehicle::step(x, Control{0.0, rng.uniform(-0.25, 0.25)}, 0.25);
    CHECK(a.v == x.v);  // exact when a = 0
    const State b = vehicle::step(x, Control{rng.uniform(-4, 2), 0.0}, 0.25);
    CHECK(b.psi == x.psi);  // exact when r = 0
  }
}

TEST_CASE("step: non-finite input rejected") {
  CHECK_THROWS_AS(vehicle::step(State{0, 0, std::nan(""), 0}, Control{}, 0.25),
                  std::invalid_argument);
  CHECK_THROWS_AS(vehicle::step(State{}, Control{std::nan(""), 0}, 0.25), std::invalid_argument);
  CHECK_THROWS_AS(vehicle::step(State{}, Control{}, 0.0), std::invalid_argument);
}

TEST_CASE("rollout: straight line") {
  const Trajectory traj = vehicle::rollout(State{0, 0, 20, 0}, std::vector<Control>(20), 0.25);
  CHECK(traj.horizon() == 20);
  CHECK(traj.dynamically_consistent);
  CHECK(traj.states.back().px == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(traj.states.back().py == 0.0);
  CHECK(traj.states.back().v == 20.0);
}

TEST_CASE("rollout: zero speed is a position fixed point") {
  std::vector<Control> controls(10, Control{0.0, 0.1});
  const Trajectory traj = vehicle::rollout(State{0, 0, 0, 0}, controls, 0.25);
  for (const State& x : traj.states) {
    CHECK(x.px == 0.0);
    CHECK(x.py == 0.0);
  }
}

TEST_CASE("rollout: hand-summed acceleration profile") {
  // a = 2 for 8 steps then zero, frozen against the Euler recursion by hand
  std::vector<Control> controls(20);
  for (int k = 0; k < 8; ++k) controls[k].a = 2.0;
  const Trajectory traj = vehicle::rollout(State{0, 0, 20, 0}, controls, 0.25);
  CHECK(traj.states.back().v == doctest::Approx(24.0).epsilon(1e-12));
  CHECK(traj.states.back().px == doctest::Approx(115.5).epsilon(1e-12));
}

TEST_CASE("rollout: deterministic") {
  std::vector<Control> controls(15);
  CounterRng rng(3);
  for (auto& u : controls) u = Control{rng.uniform(-4, 2), rng.uniform(-0.25, 0.25)};
  const Trajectory a = vehicle::rollout(State{1, 2, 15, 0.1}, controls, 0.25);
  const Trajectory b = vehicle::rollout(State{1, 2, 15, 0.1}, controls, 0.25);
  for (size_t k = 0; k < a.states.size(); ++k) {
    CHECK(a.states[k].px == b.states[k].px);
    CHECK(a.states[k].py == b.states[k].py);
    CHECK(a.states[k].v == b.states[k].v);
    CHECK(a.states[k].psi == b.states[k].psi);
  }
}

TEST_CASE("rollout: empty controls rejected") {
  CHECK_THROWS_AS(vehicle::rollout(State{}, {}, 0.25), std::invalid_argument);
}

TEST_CASE("linearize: analytic entries at psi = 0") {
  auto [fx, fu] = vehicle::linearize(State{0, 0, 20, 0}, Control{}, 0.25);
  CHECK(fx(0, 2) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(fx(1, 3) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(fx(0, 3) == 0.0);
  CHECK(fu(2, 0) == 0.25);
  CHECK(fu(3, 1) == 0.25);
  CHECK(fu(0, 0) == 0.0);
  CHECK(fu(1, 1) == 0.0);
}

TEST_CASE("linearize: matches central finite differences of step") {
  CounterRng rng(11);
  const double dt = 0.25;
  for (int i = 0; i < 100; ++i) {
    const State x{rng.uniform(-100, 100), rng.uniform(-20, 20), rng.uniform(-40, 40),
                  rng.uniform(-std::numbers::pi, std::numbers::pi)};
    const Control u{rng.uniform(-4, 2), rng.uniform(-0.25, 0.25)};
    auto [fx, fu] = vehicle::linearize(x, u, dt);

    const Mat4 fx_fd = ts::fd_jac_x(
        [&](const Vec4& q) { return vehicle::step(State::from_vec(q), u, dt).vec(); }, x.vec(),
        1e-5);
    const Mat42 fu_fd = ts::fd_jac_u(
        [&](const Vec2& q) { return vehicle::step(x, Control::from_vec(q), dt).vec(); }, u.vec(),
        1e-5);
    CHECK(ts::rel_error(fx, fx_fd) < 1e-6);
    CHECK(ts::rel_error(fu, fu_fd) < 1e-6);
  }
}
