#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cilqr/scenario.hpp"
#include "cilqr/solver.hpp"

namespace cilqr {

/// Assembled cost side of one planning cycle: tracking/adjusting/control costs
/// plus barrier terms for control bounds, road boundaries, and the per-step
/// obstacle constraints of the active mode. Collision polygons are rebuilt
/// from the evaluated trajectory's own headings and treated as constants of
/// the expansion.
class PlanningProblem : public CostFunction {
 public:
  PlanningProblem(const Scenario& scenario, const ReferenceLine& line,
                  std::vector<std::vector<TvPredictionPoint>> predictions, uint64_t mc_stream_base);

  ProblemExpansion evaluate(const Trajectory& traj, const Trajectory& ref) const override;

  /// Obstacle barrier terms for one step (exposed for derivative validation).
  std::vector<QuadraticExpansion> obstacle_terms(const State& x, int k) const;

 private:
  const Scenario& scenario_;
  const ReferenceLine& line_;
  std::vector<std::vector<TvPredictionPoint>> predictions_;  // [tv][step]
  BoundaryPolynomials boundary_;
  TerminalTarget terminal_target_;
  uint64_t mc_stream_base_;
};

/// Executed-run quality measures.
struct Metrics {
  double min_clearance = 0.0;            ///< signed polygon distance minimum [m]
  double min_clearance_midwindow = 0.0;  ///< same, restricted to the cut-in midpoint window
  bool collision = false;                ///< min_clearance < 0
  double avg_abs_accel = 0.0;            ///< [m/s^2]
  double avg_abs_jerk = 0.0;             ///< [m/s^3], first differences of executed acceleration
  double max_lateral_offset = 0.0;       ///< [m] from the initial lane centerline
  bool degraded = false;                 ///< a cycle fell back to emergency braking
  bool negative_speed = false;           ///< executed speed dropped below -1e-6
  int executed_steps = 0;
  std::vector<double> cycle_solve_ms;    ///< wall time per cycle (excluded from metrics files)
};

struct CyclePlan {
  double t0 = 0.0;
  Trajectory plan;
};

struct RunResult {
  Trajectory executed;
  std::vector<CyclePlan> plans;
  /// Signed clearance per executed state per TV.
  std::vector<std::vector<double>> clearances;
  /// Independent rectangle-overlap check per executed state per TV.
  std::vector<std::vector<bool>> overlap_flags;
  std::vector<std::vector<double>> cycle_cost_logs;
  std::vector<SolveStatus> cycle_status;
  Metrics metrics;
};

/// Receding-horizon execution of the scenario under the iLQR planner.
RunResult run(const Scenario& scenario);

/// Same simulation loop driven by the braking-only baseline: constant heading,
/// jerk-limited ramp toward a_min once time-to-collision drops below 3 s.
RunResult run_braking_baseline(const Scenario& scenario);

/// Separating-axis overlap test for two oriented rectangles (strict overlap).
bool rectangles_intersect(const OrientedRectangle& a, const OrientedRectangle& b);

/// Centerline of the ego's initial lane, long enough for every planning
/// horizon the simulation can reach.
ReferenceLine build_reference_line(const Scenario& scenario);

}  // namespace cilqr
