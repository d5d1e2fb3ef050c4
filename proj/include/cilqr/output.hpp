#pragma once

#include <string>
#include <vector>

#include "cilqr/planner.hpp"

namespace cilqr {

/// Formats a double with 17 significant digits (exact round trip).
std::string fmt17(double v);

/// Writes trajectory.csv, metrics.json, and timing.json under out_dir; the
/// per-cycle plans go to plans.csv when requested. Wall-clock timings live
/// only in timing.json so the other files are bitwise-reproducible for a
/// given scenario and seed.
void emit_outputs(const RunResult& result, const Scenario& scenario, const std::string& out_dir,
                  bool include_plans);

struct ParsedTrajectory {
  Trajectory trajectory;
  std::vector<std::vector<double>> clearances;
};

/// Re-reads a trajectory table written by emit_outputs.
ParsedTrajectory read_trajectory_table(const std::string& path);

/// The effective scenario (post-defaults, post-overrides) as a JSON string.
std::string effective_config_json(const Scenario& scenario);

}  // namespace cilqr
