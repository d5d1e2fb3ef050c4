#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "cilqr/campaign.hpp"
#include "cilqr/output.hpp"
#include "cilqr/planner.hpp"
#include "cilqr/scenario.hpp"

namespace {

// exit codes: 0 success, 1 collision, 2 configuration error, 3 numerical
// failure after fallback
constexpr int kExitOk = 0;
constexpr int kExitCollision = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct PlanOptions {
  std::string scenario_path;
  std::string out_dir;
  std::string mode;
  std::optional<uint64_t> seed;
  std::optional<double> replan_period;
  std::optional<double> horizon;
  std::optional<double> dt;
  bool include_plans = false;
};

int run_plan(const PlanOptions& opt) {
  cilqr::Scenario scenario = cilqr::load_scenario(opt.scenario_path);
  if (!opt.mode.empty()) {
    scenario.mode = cilqr::planning_mode_from_string(opt.mode);
  }
  if (opt.seed) scenario.sim.seed = *opt.seed;
  if (opt.replan_period) scenario.sim.replan_period = *opt.replan_period;
  if (opt.dt) scenario.solver.ilqr.dt = *opt.dt;
  if (opt.horizon) {
    scenario.solver.ilqr.horizon_steps =
        static_cast<int>(std::lround(*opt.horizon / scenario.solver.ilqr.dt));
  }
  cilqr::validate_scenario(scenario);

  const cilqr::RunResult result = cilqr::run(scenario);
  cilqr::emit_outputs(result, scenario, opt.out_dir, opt.include_plans);

  const cilqr::Metrics& m = result.metrics;
  std::printf("scenario: %s (mode %s)\n", scenario.name.c_str(),
              cilqr::to_string(scenario.mode).c_str());
  std::printf("  executed steps:     %d\n", m.executed_steps);
  std::printf("  min clearance:      %s m\n", cilqr::fmt17(m.min_clearance).c_str());
  std::printf("  collision:          %s\n", m.collision ? "yes" : "no");
  std::printf("  avg |accel|:        %s m/s^2\n", cilqr::fmt17(m.avg_abs_accel).c_str());
  std::printf("  avg |jerk|:         %s m/s^3\n", cilqr::fmt17(m.avg_abs_jerk).c_str());
  std::printf("  max lateral offset: %s m\n", cilqr::fmt17(m.max_lateral_offset).c_str());
  std::printf("  outputs in:         %s\n", opt.out_dir.c_str());

  if (m.collision) return kExitCollision;
  if (m.degraded || m.negative_speed) return kExitNumerical;
  return kExitOk;
}

int run_campaign(const std::string& template_path, int cases, uint64_t seed,
                 const std::string& out_dir) {
  const cilqr::Scenario tmpl = cilqr::load_scenario(template_path);
  const cilqr::CampaignResult result = cilqr::batch_campaign(tmpl, cases, seed);
  cilqr::emit_campaign(result, out_dir);
  std::printf("campaign: %d cases (seed %llu)\n", cases, static_cast<unsigned long long>(seed));
  std::printf("  planner accidents:  %d\n", result.ilqr_accidents);
  std::printf("  braking accidents:  %d (%d on sub-threshold gaps of %d)\n",
              result.braking_accidents, result.braking_accidents_sub_threshold,
              result.sub_threshold_cases);
  std::printf("  avg |accel|: planner %s vs braking %s m/s^2\n",
              cilqr::fmt17(result.ilqr_avg_abs_accel).c_str(),
              cilqr::fmt17(result.braking_avg_abs_accel).c_str());
  std::printf("  avg |jerk|:  planner %s vs braking %s m/s^3\n",
              cilqr::fmt17(result.ilqr_avg_abs_jerk).c_str(),
              cilqr::fmt17(result.braking_avg_abs_jerk).c_str());
  std::printf("  outputs in:  %s\n", out_dir.c_str());
  return result.ilqr_accidents > 0 ? kExitCollision : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained iLQR collision-avoidance planner"};
  app.require_subcommand(1);

  PlanOptions plan_opt;
  CLI::App* plan = app.add_subcommand("plan", "Run one scenario under the planner");
  plan->add_option("--scenario", plan_opt.scenario_path, "Scenario file (JSON)")->required();
  plan->add_option("--out", plan_opt.out_dir, "Output directory")->required();
  plan->add_option("--mode", plan_opt.mode, "Override the scenario mode (mdr|mrr|mrr-slow)");
  plan->add_option("--seed", plan_opt.seed, "Override the simulation seed");
  plan->add_option("--replan-period", plan_opt.replan_period, "Replan period [s]");
  plan->add_option("--horizon", plan_opt.horizon, "Planning horizon [s]");
  plan->add_option("--dt", plan_opt.dt, "Integration step [s]");
  plan->add_flag("--plans", plan_opt.include_plans, "Also write per-cycle planned trajectories");

  std::string tmpl_path, campaign_out;
  int n_cases = 20;
  uint64_t campaign_seed = 1;
  CLI::App* campaign =
      app.add_subcommand("campaign", "Randomized cut-in campaign, planner vs braking-only");
  campaign->add_option("--template", tmpl_path, "Template scenario file")->required();
  campaign->add_option("--cases", n_cases, "Number of cases")->required();
  campaign->add_option("--seed", campaign_seed, "Campaign seed")->required();
  campaign->add_option("--out", campaign_out, "Output directory")->required();

  double v_ev = 0.0, v_tv = 0.0, a_min = 0.0, l_ev = 0.0, l_tv = 0.0;
  CLI::App* braking =
      app.add_subcommand("check-braking", "Minimum gap below which braking alone cannot avoid "
                                          "reaching a slower leader");
  braking->add_option("--v-ev,v_ev", v_ev, "Ego speed [m/s]")->required();
  braking->add_option("--v-tv,v_tv", v_tv, "Leader speed [m/s]")->required();
  braking->add_option("--a-min,a_min", a_min, "Minimum acceleration [m/s^2], negative")->required();
  braking->add_option("--l-ev,l_ev", l_ev, "Ego length [m]")->required();
  braking->add_option("--l-tv,l_tv", l_tv, "Leader length [m]")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (plan->parsed()) {
      return run_plan(plan_opt);
    }
    if (campaign->parsed()) {
      return run_campaign(tmpl_path, n_cases, campaign_seed, campaign_out);
    }
    if (braking->parsed()) {
      std::printf("%s\n",
                  cilqr::fmt17(cilqr::infeasible_braking_distance(v_ev, v_tv, a_min, l_ev, l_tv))
                      .c_str());
      return kExitOk;
    }
  } catch (const cilqr::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}
