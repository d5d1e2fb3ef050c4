#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cilqr/cost_model.hpp"
#include "cilqr/planner.hpp"
#include "cilqr/rng.hpp"
#include "cilqr/solver.hpp"
#include "cilqr/vehicle_model.hpp"

using namespace cilqr;

namespace {

// Quadratic tracking problem toward a fixed state, no barriers. Convex in the
// near-linear regime (small psi, v near the target).
class QuadraticProblem : public CostFunction {
 public:
  QuadraticProblem(State target, Vec4 state_w, Vec2 control_w)
      : target_(target), state_w_(state_w), control_w_(control_w) {}

  ProblemExpansion evaluate(const Trajectory& traj, const Trajectory& ref) const override {
    (void)ref;
    ProblemExpansion out;
    const int T = traj.horizon();
    out.stage.reserve(T);
    for (int k = 0; k < T; ++k) {
      QuadraticExpansion e;
      const Vec4 dx = traj.states[k].vec() - target_.vec();
      const Vec2 u = traj.controls[k].vec();
      e.value = 0.5 * dx.dot(state_w_.cwiseProduct(dx)) + 0.5 * u.dot(control_w_.cwiseProduct(u));
      e.lx = state_w_.cwiseProduct(dx);
      e.lu = control_w_.cwiseProduct(u);
      e.lxx = state_w_.asDiagonal();
      e.luu = control_w_.asDiagonal();
      out.stage.push_back(e);
      out.total_cost += e.value;
    }
    const Vec4 dxT = traj.states[T].vec() - target_.vec();
    out.terminal.value = 0.5 * dxT.dot(state_w_.cwiseProduct(dxT));
    out.terminal.lx = state_w_.cwiseProduct(dxT);
    out.terminal.lxx = state_w_.asDiagonal();
    out.total_cost += out.terminal.value;
    return out;
  }

 private:
  State target_;
  Vec4 state_w_;
  Vec2 control_w_;
};

class ZeroProblem : public CostFunction {
 public:
  ProblemExpansion evaluate(const Trajectory& traj, const Trajectory&) const override {
    ProblemExpansion out;
    out.stage.assign(traj.horizon(), QuadraticExpansion{});
    return out;
  }
};

}  // namespace

TEST_CASE("regularized_inverse: identity") {
  const Mat2 inv = regularized_inverse(Mat2::Identity(), 1.0);
  CHECK((inv - 0.5 * Mat2::Identity()).norm() < 1e-14);
}

TEST_CASE("regularized_inverse: clamps negative eigenvalues") {
  Mat2 puu;
  puu << 2.0, 0.0, 0.0, -3.0;
  const Mat2 inv = regularized_inverse(puu, 1.0);
  CHECK(inv(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(inv(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(inv(0, 1)) < 1e-14);
}

TEST_CASE("regularized_inverse: converges to the true inverse for PD input") {
  CounterRng rng(51);
  for (int i = 0; i < 100; ++i) {
    Mat2 m;
    const double a = rng.uniform(0.5, 3.0);
    const double b = rng.uniform(0.5, 3.0);
    const double c = rng.uniform(-0.4, 0.4) * std::sqrt(a * b);
    m << a, c, c, b;
    const Mat2 inv = regularized_inverse(m, 1e-9);
    CHECK((inv - m.inverse()).norm() < 1e-6);
    // result symmetric PD for arbitrary symmetric input
    Mat2 indef;
    indef << rng.uniform(-2, 2), rng.uniform(-1, 1), 0.0, rng.uniform(-2, 2);
    indef(1, 0) = indef(0, 1);
    const Mat2 reg = regularized_inverse(indef, rng.uniform(0.1, 2.0));
    CHECK((reg - reg.transpose()).norm() < 1e-12);
    CHECK(Eigen::SelfAdjointEigenSolver<Mat2>(reg).eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("backward_pass: all-zero expansions give zero gains") {
  const Trajectory traj = vehicle::rollout(State{0, 0, 10, 0}, std::vector<Control>(5), 0.25);
  const ZeroProblem zero;
  const StageData data = make_stage_data(traj, traj, zero);
  const BackwardResult back = backward_pass(data, 1.0);
  for (const Vec2& h : back.gains.feedforward) CHECK(h.norm() == 0.0);
  for (const Mat24& g : back.gains.feedback) CHECK(g.norm() == 0.0);
  CHECK(back.predicted_reduction == 0.0);
}

TEST_CASE("backward_pass: one-step case matches the closed-form LQ control") {
  // single step: minimize l(u) + V(f(x0, u)) for quadratic pieces
  const State x0{0, 0, 15, 0};
  const Trajectory traj = vehicle::rollout(x0, std::vector<Control>(1), 0.25);
  const Vec4 state_w(3.0, 2.0, 5.0, 4.0);
  const Vec2 control_w(2.0, 1.5);
  const State target{1.0, -0.5, 14.0, 0.05};
  const QuadraticProblem problem(target, state_w, control_w);
  const StageData data = make_stage_data(traj, traj, problem);
  const BackwardResult back = backward_pass(data, 1e-9);

  auto [fx, fu] = vehicle::linearize(traj.states[0], traj.controls[0], 0.25);
  const Mat4 Vxx = Mat4(state_w.asDiagonal());
  const Vec4 Vx = state_w.cwiseProduct(traj.states[1].vec() - target.vec());
  const Mat2 puu = Mat2(control_w.asDiagonal()) + fu.transpose() * Vxx * fu;
  const Vec2 pu = fu.transpose() * Vx;  // lu = 0 at u = 0
  const Vec2 h_closed = -puu.inverse() * pu;
  CHECK((back.gains.feedforward[0] - h_closed).norm() < 1e-8);
}

TEST_CASE("backward_pass: value Hessian symmetric for random inputs") {
  CounterRng rng(52);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Control> controls(8);
    for (auto& u : controls) u = Control{rng.uniform(-2, 2), rng.uniform(-0.2, 0.2)};
    const Trajectory traj = vehicle::rollout(State{0, 0, rng.uniform(5, 25), 0}, controls, 0.25);
    const QuadraticProblem problem(State{rng.uniform(-5, 5), rng.uniform(-2, 2), 20, 0},
                                   Vec4(1, 1, 2, 3), Vec2(1, 2));
    const StageData data = make_stage_data(traj, traj, problem);
    // symmetry is asserted inside the recursion; a finite result suffices here
    const BackwardResult back = backward_pass(data, 0.5);
    for (const Vec2& h : back.gains.feedforward) CHECK(h.allFinite());
  }
}

TEST_CASE("forward_pass: zero gains reproduce the previous trajectory") {
  const QuadraticProblem problem(State{0, 0, 20, 0}, Vec4(1, 1, 1, 1), Vec2(1, 1));
  std::vector<Control> controls(10);
  CounterRng rng(53);
  for (auto& u : controls) u = Control{rng.uniform(-1, 1), rng.uniform(-0.1, 0.1)};
  const Trajectory prev = vehicle::rollout(State{0, 0, 18, 0.02}, controls, 0.25);
  GainSchedule zero;
  zero.feedforward.assign(10, Vec2::Zero());
  zero.feedback.assign(10, Mat24::Zero());
  const ForwardResult fwd = forward_pass(prev, zero, problem);
  const StageData prev_data = make_stage_data(prev, prev, problem);
  CHECK(std::abs(fwd.data.expansion.total_cost - prev_data.expansion.total_cost) < 1e-12);
  for (size_t k = 0; k < prev.states.size(); ++k) {
    CHECK(fwd.trajectory.states[k].px == prev.states[k].px);
    CHECK(fwd.trajectory.states[k].py == prev.states[k].py);
  }
}

TEST_CASE("forward_pass: feedforward perturbation matches the linear prediction to first order") {
  const QuadraticProblem problem(State{0, 0, 20, 0}, Vec4(1, 1, 1, 1), Vec2(1, 1));
  const int T = 20;
  const Trajectory prev = vehicle::rollout(State{0, 0, 20, 0}, std::vector<Control>(T), 0.25);

  const double h = 1e-4;
  GainSchedule gains;
  gains.feedforward.assign(T, Vec2(h, h * 0.05));
  gains.feedback.assign(T, Mat24::Zero());
  const ForwardResult fwd = forward_pass(prev, gains, problem);

  // linear prediction through the frozen Jacobians
  Vec4 dx = Vec4::Zero();
  double err = 0.0;
  double scale = 0.0;
  for (int k = 0; k < T; ++k) {
    auto [fx, fu] = vehicle::linearize(prev.states[k], prev.controls[k], 0.25);
    dx = fx * dx + fu * Vec2(h, h * 0.05);
    const Vec4 actual = fwd.trajectory.states[k + 1].vec() - prev.states[k + 1].vec();
    err = std::max(err, (actual - dx).norm());
    scale = std::max(scale, dx.norm());
  }
  CHECK(err < 1e-2 * scale);
}

TEST_CASE("forward_pass: returned cost equals an independent re-evaluation") {
  const QuadraticProblem problem(State{5, 1, 19, 0}, Vec4(2, 2, 1, 1), Vec2(1, 1));
  const Trajectory prev = vehicle::rollout(State{0, 0, 20, 0}, std::vector<Control>(12), 0.25);
  GainSchedule gains;
  gains.feedforward.assign(12, Vec2(0.05, 0.002));
  gains.feedback.assign(12, Mat24::Zero());
  const ForwardResult fwd = forward_pass(prev, gains, problem);
  const double recheck = problem.evaluate(fwd.trajectory, prev).total_cost;
  CHECK(fwd.data.expansion.total_cost == doctest::Approx(recheck).epsilon(1e-12));
}

TEST_CASE("solve: equilibrium start stays put") {
  // start exactly at the cost minimum: near-zero controls, immediate stop
  const State eq{0, 0, 20, 0};
  const QuadraticProblem problem(eq, Vec4(0, 0, 10, 10), Vec2(1, 1));
  SolverConfig cfg;
  cfg.horizon_steps = 20;
  const SolveResult res = solve(problem, eq, std::vector<Control>(20), cfg);
  CHECK(res.iterations <= 2);
  CHECK(res.status == SolveStatus::Converged);
  double umax = 0.0;
  for (const Control& u : res.trajectory.controls) {
    umax = std::max({umax, std::abs(u.a), std::abs(u.r)});
  }
  CHECK(umax < 1e-3);
}

TEST_CASE("solve: empty-road planning problem converges immediately on the centerline") {
  Scenario s;  // defaults: no traffic, straight three-lane road
  validate_scenario(s);
  const ReferenceLine line = build_reference_line(s);
  const PlanningProblem problem(s, line, {}, 0);
  const SolverConfig cfg = s.solver.ilqr;
  const SolveResult res =
      solve(problem, s.ev.initial_state(), std::vector<Control>(cfg.horizon_steps), cfg);
  CHECK(res.iterations <= 2);
  double umax = 0.0;
  for (const Control& u : res.trajectory.controls) {
    umax = std::max({umax, std::abs(u.a), std::abs(u.r)});
  }
  CHECK(umax < 1e-3);
}

TEST_CASE("solve: accepted costs strictly decrease and the quadratic problem converges") {
  const State target{0, 2.0, 20, 0};  // lateral offset target
  const QuadraticProblem problem(target, Vec4(0.0, 5.0, 2.0, 2.0), Vec2(0.1, 0.1));
  SolverConfig cfg;
  cfg.horizon_steps = 20;
  cfg.max_iters = 30;
  cfg.convergence_tol = 1e-8;
  const SolveResult res = solve(problem, State{0, 0, 20, 0}, std::vector<Control>(20), cfg);
  for (size_t i = 1; i < res.cost_log.size(); ++i) {
    CHECK(res.cost_log[i] < res.cost_log[i - 1]);
  }
  CHECK(res.cost_log.size() > 2);
  CHECK(res.cost < res.cost_log.front());
}

TEST_CASE("solve: predicted reduction shrinks near the optimum of a convex problem") {
  const State target{0, 1.0, 20, 0};
  const QuadraticProblem problem(target, Vec4(0.0, 4.0, 1.0, 1.0), Vec2(0.5, 0.5));
  SolverConfig cfg;
  cfg.horizon_steps = 15;
  cfg.max_iters = 10;
  cfg.convergence_tol = 1e-12;  // keep iterating; watch the model's own signal
  const SolveResult res = solve(problem, State{0, 0, 20, 0}, std::vector<Control>(15), cfg);
  const StageData data = make_stage_data(res.trajectory, res.trajectory, problem);
  const BackwardResult back = backward_pass(data, 1e-9);
  CHECK(back.predicted_reduction < 1e-6);
}

TEST_CASE("solve: deterministic") {
  const QuadraticProblem problem(State{3, 1, 18, 0}, Vec4(1, 3, 2, 2), Vec2(0.5, 0.5));
  SolverConfig cfg;
  cfg.horizon_steps = 12;
  const SolveResult a = solve(problem, State{0, 0, 20, 0}, std::vector<Control>(12), cfg);
  const SolveResult b = solve(problem, State{0, 0, 20, 0}, std::vector<Control>(12), cfg);
  CHECK(a.cost == b.cost);
  CHECK(a.iterations == b.iterations);
  for (size_t k = 0; k < a.trajectory.controls.size(); ++k) {
    CHECK(a.trajectory.controls[k].a == b.trajectory.controls[k].a);
    CHECK(a.trajectory.controls[k].r == b.trajectory.controls[k].r);
  }
}

TEST_CASE("solve: mismatched warm start is rejected") {
  const QuadraticProblem problem(State{}, Vec4::Ones(), Vec2::Ones());
  SolverConfig cfg;
  cfg.horizon_steps = 10;
  CHECK_THROWS_AS(solve(problem, State{}, std::vector<Control>(5), cfg), std::invalid_argument);
}
