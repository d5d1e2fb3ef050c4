#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cilqr/planner.hpp"

namespace cilqr {

/// One randomized cut-in case with both controllers' executed metrics.
struct CampaignCase {
  int index = 0;
  uint64_t seed = 0;
  double gap = 0.0;
  double tv_speed = 0.0;
  double cutin_start = 0.0;
  double cutin_duration = 0.0;
  double infeasible_threshold = 0.0;
  bool failed = false;  ///< the run raised an error; excluded from aggregates
  Metrics ilqr;
  Metrics braking;
};

struct CampaignResult {
  std::vector<CampaignCase> cases;
  int ilqr_accidents = 0;
  int braking_accidents = 0;
  int sub_threshold_cases = 0;
  int braking_accidents_sub_threshold = 0;
  double ilqr_avg_abs_accel = 0.0;  ///< mean over non-failed cases
  double braking_avg_abs_accel = 0.0;
  double ilqr_avg_abs_jerk = 0.0;
  double braking_avg_abs_jerk = 0.0;
};

/// Runs n_cases randomized cut-in scenarios derived from the template (cut-in
/// start U[0.5,2.0] s, duration U[1.5,3.0] s, TV speed U[8,14] m/s, gap
/// U[12,25] m) under the planner and the braking-only baseline. Cases run
/// concurrently; results are deterministic in (template, n_cases, seed).
CampaignResult batch_campaign(const Scenario& template_scenario, int n_cases, uint64_t seed);

/// Writes campaign.csv, campaign_summary.json, and timing.json under out_dir.
void emit_campaign(const CampaignResult& result, const std::string& out_dir);

}  // namespace cilqr
