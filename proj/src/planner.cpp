#include "cilqr/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "cilqr/collision_geometry.hpp"
#include "cilqr/rng.hpp"
#include "cilqr/vehicle_model.hpp"

namespace cilqr {

namespace {

constexpr double kTtcBrakeThreshold = 3.0;  // [s]
constexpr double kBrakeRampRate = 8.0;      // [m/s^3]
constexpr double kMidWindowHalfWidth = 0.75;  // [s]

uint64_t mix3(uint64_t a, uint64_t b, uint64_t c) {
  return CounterRng::mix(a ^ CounterRng::mix(b ^ CounterRng::mix(c)));
}

}  // namespace

ReferenceLine build_reference_line(const Scenario& scenario) {
  const double horizon =
      scenario.solver.ilqr.dt * static_cast<double>(scenario.solver.ilqr.horizon_steps);
  const double reach = scenario.ev.long_offset +
                       std::max(scenario.ev.speed, scenario.solver.v_ref) *
                           (scenario.sim.duration + horizon) +
                       100.0;
  const double lane_y = scenario.ev.lat_offset;
  return ReferenceLine({Vec2(scenario.ev.long_offset - 100.0, lane_y), Vec2(reach, lane_y)},
                       scenario.solver.v_ref);
}

PlanningProblem::PlanningProblem(const Scenario& scenario, const ReferenceLine& line,
                                 std::vector<std::vector<TvPredictionPoint>> predictions,
                                 uint64_t mc_stream_base)
    : scenario_(scenario),
      line_(line),
      predictions_(std::move(predictions)),
      mc_stream_base_(mc_stream_base) {
  boundary_.left = {scenario.lanes.left_edge()};
  boundary_.right = {scenario.lanes.right_edge()};
  terminal_target_ = TerminalTarget{0.0, scenario.solver.v_ref};
}

std::vector<QuadraticExpansion> PlanningProblem::obstacle_terms(const State& x, int k) const {
  const SolverSettings& cfg = scenario_.solver;
  std::vector<QuadraticExpansion> terms;
  terms.reserve(predictions_.size());
  for (size_t j = 0; j < predictions_.size(); ++j) {
    const TvPredictionPoint& pred = predictions_[j][k];
    const TVSpec& tv = scenario_.tvs[j];
    const OrientedRectangle ego{Vec2::Zero(), x.psi, scenario_.ev.length, scenario_.ev.width};
    const OrientedRectangle tv_rect{pred.position, pred.heading, tv.length, tv.width};
    const ConvexPolygon poly = minkowski_sum(ego, tv_rect);

    switch (scenario_.mode) {
      case PlanningMode::Mdr: {
        const MdrConstraint c = mdr_constraint(x, poly, cfg.d_min);
        terms.push_back(
            exp_barrier(c.g, c.gx, Vec2::Zero(), c.gxx, Mat2::Zero(), Mat42::Zero(), cfg.barrier));
        break;
      }
      case PlanningMode::Mrr: {
        terms.push_back(expected_barrier(x, poly, pred.gaussian, cfg.barrier, cfg.d_min));
        break;
      }
      case PlanningMode::MrrSlow: {
        const ZoneResult zr = closest_vertex(poly, x.position());
        ConeRegion cone = interior_cone_at_vertex(zr);
        cone.apex -= pred.gaussian.mean;  // vertex-relative displacement frame
        RiskParams rp = cfg.risk;
        rp.seed = scenario_.sim.seed;
        rp.stream = mix3(mc_stream_base_, static_cast<uint64_t>(k), static_cast<uint64_t>(j));
        const ConeProbabilityDerivatives cp =
            cone_probability_with_derivatives(x, cone, pred.gaussian, rp);
        terms.push_back(exp_barrier(cp.prob.p - rp.p_max, cp.grad, Vec2::Zero(), cp.hess,
                                    Mat2::Zero(), Mat42::Zero(), cfg.barrier));
        break;
      }
    }
  }
  return terms;
}

ProblemExpansion PlanningProblem::evaluate(const Trajectory& traj, const Trajectory& ref) const {
  const SolverSettings& cfg = scenario_.solver;
  const int T = traj.horizon();
  ProblemExpansion out;
  out.stage.reserve(T);

  for (int k = 0; k < T; ++k) {
    const State& x = traj.states[k];
    const Control& u = traj.controls[k];

    std::vector<QuadraticExpansion> barriers = obstacle_terms(x, k);
    for (const auto& row : control_bound_constraints(u, cfg.bounds)) {
      barriers.push_back(exp_barrier(row.g, Vec4::Zero(), row.gu, Mat4::Zero(), Mat2::Zero(),
                                     Mat42::Zero(), cfg.barrier));
    }
    for (const auto& row : road_boundary_constraints(x, boundary_)) {
      barriers.push_back(exp_barrier(row.g, row.gx, Vec2::Zero(), row.gxx, Mat2::Zero(),
                                     Mat42::Zero(), cfg.barrier));
    }

    out.stage.push_back(
        total_stage_cost(x, u, ref.states[k], line_, cfg.weights, barriers));
    out.total_cost += out.stage.back().value;
  }

  out.terminal = terminal_cost(traj.states[T], terminal_target_, cfg.weights);
  out.total_cost += out.terminal.value;
  return out;
}

bool rectangles_intersect(const OrientedRectangle& a, const OrientedRectangle& b) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  const Vec2 axes[4] = {Vec2(std::cos(a.heading), std::sin(a.heading)),
                        Vec2(-std::sin(a.heading), std::cos(a.heading)),
                        Vec2(std::cos(b.heading), std::sin(b.heading)),
                        Vec2(-std::sin(b.heading), std::cos(b.heading))};
  for (const Vec2& axis : axes) {
    double amin = 1e300, amax = -1e300, bmin = 1e300, bmax = -1e300;
    for (const Vec2& c : ca) {
      const double p = c.dot(axis);
      amin = std::min(amin, p);
      amax = std::max(amax, p);
    }
    for (const Vec2& c : cb) {
      const double p = c.dot(axis);
      bmin = std::min(bmin, p);
      bmax = std::max(bmax, p);
    }
    if (amax <= bmin || bmax <= amin) {
      return false;  // separating axis found
    }
  }
  return true;
}

namespace {

struct SimLog {
  RunResult result;
  const Scenario* scenario = nullptr;

  void record_state(const State& x, double t, bool with_noise) {
    std::vector<double> clear_row;
    std::vector<bool> overlap_row;
    for (size_t j = 0; j < scenario->tvs.size(); ++j) {
      const TVSpec& tv = scenario->tvs[j];
      TvPose pose = tv_pose_at(tv, scenario->lanes, t);
      if (with_noise && t > 0.0) {
        // realized TV position scatters around the predicted mean
        const uint64_t stream =
            mix3(0x7661ULL, static_cast<uint64_t>(std::llround(t * 1e6)), j);
        CounterRng rng(scenario->sim.seed, stream);
        Eigen::LLT<Mat2> llt(tv.covariance.at(0, scenario->solver.ilqr.dt));
        pose.position += Mat2(llt.matrixL()) * rng.gaussian_pair();
      }
      const OrientedRectangle ego{x.position(), x.psi, scenario->ev.length, scenario->ev.width};
      const OrientedRectangle tv_rect{pose.position, pose.heading, tv.length, tv.width};
      const ConvexPolygon poly = minkowski_sum(ego, tv_rect);
      clear_row.push_back(signed_distance(poly, x.position()).d);
      overlap_row.push_back(rectangles_intersect(ego, tv_rect));
    }
    result.clearances.push_back(std::move(clear_row));
    result.overlap_flags.push_back(std::move(overlap_row));
  }

  void finalize() {
    Metrics& m = result.metrics;
    const Trajectory& exec = result.executed;
    const double dt = exec.dt;
    m.executed_steps = exec.horizon();

    m.min_clearance = std::numeric_limits<double>::infinity();
    for (const auto& row : result.clearances) {
      for (double d : row) m.min_clearance = std::min(m.min_clearance, d);
    }
    if (result.clearances.empty() || result.clearances.front().empty()) {
      m.min_clearance = std::numeric_limits<double>::infinity();
    }
    m.collision = m.min_clearance < 0.0;

    // midpoint window of the first lane-changing TV; whole run otherwise
    double w_lo = 0.0, w_hi = std::numeric_limits<double>::infinity();
    for (const TVSpec& tv : scenario->tvs) {
      if (tv.lane_change) {
        const double mid = tv.lane_change->start_time + 0.5 * tv.lane_change->duration;
        w_lo = mid - kMidWindowHalfWidth;
        w_hi = mid + kMidWindowHalfWidth;
        break;
      }
    }
    m.min_clearance_midwindow = std::numeric_limits<double>::infinity();
    for (size_t n = 0; n < result.clearances.size(); ++n) {
      const double t = static_cast<double>(n) * dt;
      if (t < w_lo || t > w_hi) continue;
      for (double d : result.clearances[n]) {
        m.min_clearance_midwindow = std::min(m.min_clearance_midwindow, d);
      }
    }

    double accel_sum = 0.0;
    double jerk_sum = 0.0;
    for (size_t k = 0; k < exec.controls.size(); ++k) {
      accel_sum += std::abs(exec.controls[k].a);
      if (k > 0) jerk_sum += std::abs(exec.controls[k].a - exec.controls[k - 1].a) / dt;
    }
    const double n_ctrl = std::max<size_t>(exec.controls.size(), 1);
    m.avg_abs_accel = accel_sum / static_cast<double>(n_ctrl);
    m.avg_abs_jerk =
        exec.controls.size() > 1 ? jerk_sum / static_cast<double>(exec.controls.size() - 1) : 0.0;

    m.max_lateral_offset = 0.0;
    for (const State& x : exec.states) {
      m.max_lateral_offset =
          std::max(m.max_lateral_offset, std::abs(x.py - scenario->ev.lat_offset));
      if (x.v < -1e-6) m.negative_speed = true;
    }
  }
};

}  // namespace

RunResult run(const Scenario& scenario) {
  validate_scenario(scenario);
  const SolverConfig& cfg = scenario.solver.ilqr;
  const double dt = cfg.dt;
  const int T = cfg.horizon_steps;
  const int exec_per_cycle = static_cast<int>(std::lround(scenario.sim.replan_period / dt));
  const int total_steps = static_cast<int>(std::lround(scenario.sim.duration / dt));
  const bool noisy_tv = scenario.mode != PlanningMode::Mdr;

  const ReferenceLine line = build_reference_line(scenario);

  SimLog log;
  log.scenario = &scenario;
  log.result.executed.dt = dt;
  log.result.executed.states.push_back(scenario.ev.initial_state());
  log.result.executed.dynamically_consistent = true;
  log.record_state(log.result.executed.states[0], 0.0, noisy_tv);

  std::vector<Control> warm(T, Control{});
  bool have_warm = false;

  int steps_done = 0;
  int cycle = 0;
  while (steps_done < total_steps) {
    const double t0 = static_cast<double>(steps_done) * dt;
    std::vector<std::vector<TvPredictionPoint>> predictions;
    predictions.reserve(scenario.tvs.size());
    for (const TVSpec& tv : scenario.tvs) {
      predictions.push_back(predict_tv_trajectory(tv, scenario.lanes, t0, T, dt));
    }
    const PlanningProblem problem(scenario, line, std::move(predictions),
                                  mix3(scenario.sim.seed, 0x706C616EULL, cycle));

    std::vector<Control> u0(T, Control{});
    if (have_warm) u0 = warm;

    const State x_now = log.result.executed.states.back();
    const auto t_start = std::chrono::steady_clock::now();
    bool cycle_failed = false;
    SolveResult sol;
    try {
      sol = solve(problem, x_now, u0, cfg);
      for (const State& x : sol.trajectory.states) {
        if (!x.finite()) cycle_failed = true;
      }
      if (!std::isfinite(sol.cost)) cycle_failed = true;
    } catch (const std::exception&) {
      cycle_failed = true;
    }
    const auto t_end = std::chrono::steady_clock::now();
    log.result.metrics.cycle_solve_ms.push_back(
        std::chrono::duration<double, std::milli>(t_end - t_start).count());

    std::vector<Control> cycle_controls;
    if (!cycle_failed) {
      log.result.plans.push_back(CyclePlan{t0, sol.trajectory});
      log.result.cycle_cost_logs.push_back(sol.cost_log);
      log.result.cycle_status.push_back(sol.status);
      cycle_controls.assign(sol.trajectory.controls.begin(), sol.trajectory.controls.end());
      // shift for the next warm start, repeating the tail control
      warm.assign(cycle_controls.begin() + std::min(exec_per_cycle, T), cycle_controls.end());
      while (static_cast<int>(warm.size()) < T) {
        warm.push_back(cycle_controls.back());
      }
      have_warm = true;
    } else {
      // emergency fallback: straight-line maximum braking for this cycle
      log.result.metrics.degraded = true;
      cycle_controls.assign(T, Control{scenario.solver.bounds.a_min, 0.0});
      Trajectory fallback = vehicle::rollout(x_now, cycle_controls, dt);
      log.result.plans.push_back(CyclePlan{t0, fallback});
      log.result.cycle_cost_logs.push_back({});
      log.result.cycle_status.push_back(SolveStatus::DampingCeiling);
      have_warm = false;
    }

    for (int i = 0; i < exec_per_cycle && steps_done < total_steps; ++i, ++steps_done) {
      Control u = cycle_controls[i];
      if (cycle_failed && log.result.executed.states.back().v + u.a * dt < 0.0) {
        u.a = -log.result.executed.states.back().v / dt;  // the fallback brakes to a stop
      }
      const State next = vehicle::step(log.result.executed.states.back(), u, dt);
      log.result.executed.controls.push_back(u);
      log.result.executed.states.push_back(next);
      log.record_state(next, static_cast<double>(steps_done + 1) * dt, noisy_tv);
    }
    ++cycle;
  }

  log.finalize();
  return log.result;
}

RunResult run_braking_baseline(const Scenario& scenario) {
  validate_scenario(scenario);
  const double dt = scenario.solver.ilqr.dt;
  const int total_steps = static_cast<int>(std::lround(scenario.sim.duration / dt));
  const bool noisy_tv = scenario.mode != PlanningMode::Mdr;

  SimLog log;
  log.scenario = &scenario;
  log.result.executed.dt = dt;
  log.result.executed.states.push_back(scenario.ev.initial_state());
  log.result.executed.dynamically_consistent = true;
  log.record_state(log.result.executed.states[0], 0.0, noisy_tv);

  double a_cmd_state = 0.0;
  for (int n = 0; n < total_steps; ++n) {
    const double t = static_cast<double>(n) * dt;
    const State& x = log.result.executed.states.back();

    // minimum time-to-collision over traffic ahead that overlaps our corridor
    double min_ttc = std::numeric_limits<double>::infinity();
    for (const TVSpec& tv : scenario.tvs) {
      const TvPose pose = tv_pose_at(tv, scenario.lanes, t);
      const bool in_path =
          std::abs(pose.position.y() - x.py) < 0.5 * (tv.width + scenario.ev.width);
      if (!in_path) continue;
      const double gap =
          pose.position.x() - x.px - 0.5 * (tv.length + scenario.ev.length);
      const double closing = x.v - tv.speed;
      if (pose.position.x() < x.px) continue;  // behind us
      if (gap <= 0.0) {
        min_ttc = 0.0;
      } else if (closing > 0.0) {
        min_ttc = std::min(min_ttc, gap / closing);
      }
    }

    const double a_target = min_ttc < kTtcBrakeThreshold ? scenario.solver.bounds.a_min : 0.0;
    const double max_delta = kBrakeRampRate * dt;
    a_cmd_state += std::clamp(a_target - a_cmd_state, -max_delta, max_delta);
    double a = a_cmd_state;
    if (x.v + a * dt < 0.0) {
      a = -x.v / dt;  // stop, do not reverse
    }

    const Control u{a, 0.0};
    const State next = vehicle::step(x, u, dt);
    log.result.executed.controls.push_back(u);
    log.result.executed.states.push_back(next);
    log.record_state(next, static_cast<double>(n + 1) * dt, noisy_tv);
  }

  log.finalize();
  return log.result;
}

}  // namespace cilqr
