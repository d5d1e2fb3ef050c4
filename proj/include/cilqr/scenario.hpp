#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cilqr/barrier_constraints.hpp"
#include "cilqr/cost_model.hpp"
#include "cilqr/solver.hpp"
#include "cilqr/uncertainty_risk.hpp"

namespace cilqr {

enum class PlanningMode { Mdr, Mrr, MrrSlow };

std::string to_string(PlanningMode mode);
PlanningMode planning_mode_from_string(const std::string& name);

/// Per-step TV position covariance: sigma0 * I, optionally growing linearly
/// with prediction time. Growth is an extension beyond the uniform default and
/// is flagged in output metadata.
struct CovarianceSchedule {
  double sigma0 = 0.25;  ///< [m^2]
  double growth = 0.0;   ///< [m^2 per second of prediction depth]

  Mat2 at(int k, double dt) const {
    return (sigma0 + growth * static_cast<double>(k) * dt) * Mat2::Identity();
  }
};

struct LaneChange {
  int target_lane = 1;
  double start_time = 0.5;  ///< [s], absolute simulation time
  double duration = 2.0;    ///< [s]
};

struct TVSpec {
  double speed = 10.0;
  double lat_offset = 0.0;   ///< initial lateral position [m]
  double long_offset = 0.0;  ///< initial longitudinal position relative to the ego [m]
  double length = 5.0;
  double width = 2.0;
  std::optional<LaneChange> lane_change;  ///< empty = lane keeping
  CovarianceSchedule covariance;
};

struct LaneLayout {
  int count = 3;
  double width = 4.0;

  /// Lane centers are symmetric about y = 0; index 0 is the rightmost lane.
  double center_of(int lane) const {
    return (static_cast<double>(lane) - 0.5 * static_cast<double>(count - 1)) * width;
  }
  double left_edge() const { return 0.5 * static_cast<double>(count) * width; }
  double right_edge() const { return -left_edge(); }
};

struct EvSpec {
  double speed = 20.0;
  double length = 5.0;
  double width = 2.0;
  double lat_offset = 0.0;
  double long_offset = 0.0;

  State initial_state() const { return State{long_offset, lat_offset, speed, 0.0}; }
};

struct SimConfig {
  double duration = 8.0;        ///< [s]
  double replan_period = 0.25;  ///< [s], integer multiple of dt
  uint64_t seed = 1;
};

struct SolverSettings {
  SolverConfig ilqr;
  CostWeights weights;
  BarrierParams barrier;
  ControlBounds bounds;
  RiskParams risk;
  double d_min = 1.0;
  double mu_hat = 0.9;
  double v_ref = 20.0;
};

struct Scenario {
  std::string name = "scenario";
  PlanningMode mode = PlanningMode::Mdr;
  EvSpec ev;
  LaneLayout lanes;
  std::vector<TVSpec> tvs;
  SolverSettings solver;
  SimConfig sim;
  /// Field paths that were filled from defaults during loading.
  std::vector<std::string> defaults_applied;
};

/// Parses and validates a scenario file. Missing fields take the documented
/// defaults and are recorded in defaults_applied; violated invariants raise
/// ConfigError naming the invariant.
Scenario load_scenario(const std::string& path);

/// Validates cross-field invariants (replan multiple of dt, no initial
/// overlap, friction envelope at the maximum expected speed, ...).
void validate_scenario(const Scenario& s);

/// Analytic TV pose at absolute time t: constant-speed longitudinal motion,
/// lateral cubic ease during a lane change with zero lateral rate at both ends.
struct TvPose {
  Vec2 position;
  double heading;
};
TvPose tv_pose_at(const TVSpec& tv, const LaneLayout& lanes, double t);

struct TvPredictionPoint {
  Vec2 position;
  double heading;
  GaussianPosition gaussian;
};

/// Predicted TV poses for steps k = 0..horizon from planning time t0, with the
/// scheduled per-step covariance attached.
std::vector<TvPredictionPoint> predict_tv_trajectory(const TVSpec& tv, const LaneLayout& lanes,
                                                     double t0, int horizon_steps, double dt);

/// Distance below which straight-line braking from v_ev cannot avoid reaching
/// a slower leader: (v_ev - v_tv)^2 / (2|a_min|) + (l_ev + l_tv)/2.
double infeasible_braking_distance(double v_ev, double v_tv, double a_min, double l_ev,
                                   double l_tv);

}  // namespace cilqr
