#include "cilqr/campaign.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include "json.hpp"

#include "cilqr/output.hpp"
#include "cilqr/rng.hpp"

namespace cilqr {

using nlohmann::json;

namespace {

Scenario make_case_scenario(const Scenario& tmpl, CampaignCase& c) {
  Scenario s = tmpl;
  s.name = tmpl.name + "_case" + std::to_string(c.index);
  s.sim.seed = c.seed;
  TVSpec& tv = s.tvs.front();
  tv.speed = c.tv_speed;
  tv.long_offset = c.gap;
  if (!tv.lane_change) {
    tv.lane_change = LaneChange{};
  }
  tv.lane_change->start_time = c.cutin_start;
  tv.lane_change->duration = c.cutin_duration;
  return s;
}

}  // namespace

CampaignResult batch_campaign(const Scenario& template_scenario, int n_cases, uint64_t seed) {
  if (n_cases < 1) {
    throw std::invalid_argument("batch_campaign: n_cases must be at least 1");
  }
  if (template_scenario.tvs.empty()) {
    throw ConfigError("campaign template needs at least one traffic vehicle");
  }

  CampaignResult result;
  result.cases.resize(n_cases);
  for (int i = 0; i < n_cases; ++i) {
    CampaignCase& c = result.cases[i];
    c.index = i;
    CounterRng rng(seed, static_cast<uint64_t>(i));
    c.cutin_start = rng.uniform(0.5, 2.0);
    c.cutin_duration = rng.uniform(1.5, 3.0);
    c.tv_speed = rng.uniform(8.0, 14.0);
    c.gap = rng.uniform(12.0, 25.0);
    c.seed = CounterRng::mix(seed ^ CounterRng::mix(static_cast<uint64_t>(i) + 1));
    c.infeasible_threshold = infeasible_braking_distance(
        template_scenario.ev.speed, c.tv_speed, template_scenario.solver.bounds.a_min,
        template_scenario.ev.length, template_scenario.tvs.front().length);
  }

  std::atomic<int> next{0};
  const auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_cases) return;
      CampaignCase& c = result.cases[i];
      try {
        const Scenario s = make_case_scenario(template_scenario, c);
        c.ilqr = run(s).metrics;
        c.braking = run_braking_baseline(s).metrics;
      } catch (const std::exception&) {
        c.failed = true;
      }
    }
  };
  const unsigned n_threads =
      std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                         static_cast<unsigned>(n_cases));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  int n_ok = 0;
  for (const CampaignCase& c : result.cases) {
    if (c.failed) continue;
    ++n_ok;
    if (c.ilqr.collision) ++result.ilqr_accidents;
    if (c.braking.collision) ++result.braking_accidents;
    if (c.gap < c.infeasible_threshold) {
      ++result.sub_threshold_cases;
      if (c.braking.collision) ++result.braking_accidents_sub_threshold;
    }
    result.ilqr_avg_abs_accel += c.ilqr.avg_abs_accel;
    result.braking_avg_abs_accel += c.braking.avg_abs_accel;
    result.ilqr_avg_abs_jerk += c.ilqr.avg_abs_jerk;
    result.braking_avg_abs_jerk += c.braking.avg_abs_jerk;
  }
  if (n_ok > 0) {
    result.ilqr_avg_abs_accel /= n_ok;
    result.braking_avg_abs_accel /= n_ok;
    result.ilqr_avg_abs_jerk /= n_ok;
    result.braking_avg_abs_jerk /= n_ok;
  }
  return result;
}

void emit_campaign(const CampaignResult& result, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory '" + out_dir + "': " + ec.message());
  }

  {
    std::ofstream out(dir / "campaign.csv");
    if (!out) throw std::runtime_error("cannot write campaign.csv");
    out << "# schema_version 1\n";
    out << "case,seed,gap,tv_speed,cutin_start,cutin_duration,infeasible_threshold,failed,"
           "ilqr_min_clearance,ilqr_collision,ilqr_avg_abs_accel,ilqr_avg_abs_jerk,"
           "ilqr_max_lateral_offset,ilqr_degraded,"
           "brake_min_clearance,brake_collision,brake_avg_abs_accel,brake_avg_abs_jerk\n";
    for (const CampaignCase& c : result.cases) {
      out << c.index << ',' << c.seed << ',' << fmt17(c.gap) << ',' << fmt17(c.tv_speed) << ','
          << fmt17(c.cutin_start) << ',' << fmt17(c.cutin_duration) << ','
          << fmt17(c.infeasible_threshold) << ',' << (c.failed ? 1 : 0) << ','
          << fmt17(c.ilqr.min_clearance) << ',' << (c.ilqr.collision ? 1 : 0) << ','
          << fmt17(c.ilqr.avg_abs_accel) << ',' << fmt17(c.ilqr.avg_abs_jerk) << ','
          << fmt17(c.ilqr.max_lateral_offset) << ',' << (c.ilqr.degraded ? 1 : 0) << ','
          << fmt17(c.braking.min_clearance) << ',' << (c.braking.collision ? 1 : 0) << ','
          << fmt17(c.braking.avg_abs_accel) << ',' << fmt17(c.braking.avg_abs_jerk) << "\n";
    }
  }

  json summary{{"schema_version", 1},
               {"cases", static_cast<int>(result.cases.size())},
               {"ilqr_accidents", result.ilqr_accidents},
               {"braking_accidents", result.braking_accidents},
               {"sub_threshold_cases", result.sub_threshold_cases},
               {"braking_accidents_sub_threshold", result.braking_accidents_sub_threshold},
               {"ilqr_avg_abs_accel", result.ilqr_avg_abs_accel},
               {"braking_avg_abs_accel", result.braking_avg_abs_accel},
               {"ilqr_avg_abs_jerk", result.ilqr_avg_abs_jerk},
               {"braking_avg_abs_jerk", result.braking_avg_abs_jerk}};
  std::ofstream out(dir / "campaign_summary.json");
  if (!out) throw std::runtime_error("cannot write campaign_summary.json");
  out << summary.dump(2) << "\n";

  json timing{{"schema_version", 1}, {"cycle_solve_ms_per_case", json::array()}};
  for (const CampaignCase& c : result.cases) {
    timing["cycle_solve_ms_per_case"].push_back(c.ilqr.cycle_solve_ms);
  }
  std::ofstream tout(dir / "timing.json");
  if (!tout) throw std::runtime_error("cannot write timing.json");
  tout << timing.dump(2) << "\n";
}

}  // namespace cilqr
