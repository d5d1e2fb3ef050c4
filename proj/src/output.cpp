#include "cilqr/output.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace cilqr {

using nlohmann::json;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write '" + path.string() + "'");
  }
  return out;
}

void write_trajectory_table(const std::filesystem::path& path, const Trajectory& traj,
                            const std::vector<std::vector<double>>& clearances) {
  std::ofstream out = open_for_write(path);
  out << "# schema_version 1\n";
  const size_t n_tv = clearances.empty() ? 0 : clearances.front().size();
  out << "t,px,py,v,psi,a,r";
  for (size_t j = 0; j < n_tv; ++j) {
    out << ",clearance_tv" << (j + 1);
  }
  out << "\n";
  for (size_t k = 0; k < traj.states.size(); ++k) {
    const State& x = traj.states[k];
    out << fmt17(static_cast<double>(k) * traj.dt) << ',' << fmt17(x.px) << ',' << fmt17(x.py)
        << ',' << fmt17(x.v) << ',' << fmt17(x.psi);
    if (k < traj.controls.size()) {
      out << ',' << fmt17(traj.controls[k].a) << ',' << fmt17(traj.controls[k].r);
    } else {
      out << ",,";
    }
    if (k < clearances.size()) {
      for (double d : clearances[k]) {
        out << ',' << fmt17(d);
      }
    }
    out << "\n";
  }
}

json scenario_to_json(const Scenario& s) {
  json tvs = json::array();
  for (const TVSpec& tv : s.tvs) {
    json jt{{"speed", tv.speed},
            {"lat_offset", tv.lat_offset},
            {"long_offset", tv.long_offset},
            {"length", tv.length},
            {"width", tv.width},
            {"covariance", {{"sigma0", tv.covariance.sigma0}, {"growth", tv.covariance.growth}}}};
    if (tv.lane_change) {
      jt["behavior"] = {{"type", "lane_change"},
                        {"target_lane", tv.lane_change->target_lane},
                        {"start_time", tv.lane_change->start_time},
                        {"duration", tv.lane_change->duration}};
    } else {
      jt["behavior"] = {{"type", "lane_keep"}};
    }
    tvs.push_back(jt);
  }
  return json{
      {"name", s.name},
      {"mode", to_string(s.mode)},
      {"ev",
       {{"speed", s.ev.speed},
        {"length", s.ev.length},
        {"width", s.ev.width},
        {"lat_offset", s.ev.lat_offset},
        {"long_offset", s.ev.long_offset}}},
      {"lanes", {{"count", s.lanes.count}, {"width", s.lanes.width}}},
      {"tvs", tvs},
      {"solver",
       {{"horizon_seconds", s.solver.ilqr.dt * s.solver.ilqr.horizon_steps},
        {"dt", s.solver.ilqr.dt},
        {"max_iterations", s.solver.ilqr.max_iters},
        {"lambda0", s.solver.ilqr.lambda0},
        {"lambda_max", s.solver.ilqr.lambda_max},
        {"scale", s.solver.ilqr.scale_s},
        {"convergence_tol", s.solver.ilqr.convergence_tol},
        {"v_ref", s.solver.v_ref},
        {"d_min", s.solver.d_min},
        {"mu_hat", s.solver.mu_hat},
        {"weights",
         {{"w_a", s.solver.weights.w_a},
          {"w_r", s.solver.weights.w_r},
          {"w_px", s.solver.weights.w_px},
          {"w_py", s.solver.weights.w_py},
          {"w_v", s.solver.weights.w_v},
          {"w_psi", s.solver.weights.w_psi},
          {"w_pref", s.solver.weights.w_pref},
          {"w_vref", s.solver.weights.w_vref},
          {"w_psif", s.solver.weights.w_psif},
          {"w_vf", s.solver.weights.w_vf}}},
        {"barrier", {{"q1", s.solver.barrier.q1}, {"q2", s.solver.barrier.q2}}},
        {"bounds",
         {{"a_min", s.solver.bounds.a_min},
          {"a_max", s.solver.bounds.a_max},
          {"r_min", s.solver.bounds.r_min},
          {"r_max", s.solver.bounds.r_max}}},
        {"risk", {{"p_max", s.solver.risk.p_max}, {"mc_samples", s.solver.risk.mc_samples}}}}},
      {"sim",
       {{"duration", s.sim.duration},
        {"replan_period", s.sim.replan_period},
        {"seed", s.sim.seed}}}};
}

}  // namespace

std::string effective_config_json(const Scenario& scenario) {
  return scenario_to_json(scenario).dump(2);
}

void emit_outputs(const RunResult& result, const Scenario& scenario, const std::string& out_dir,
                  bool include_plans) {
  namespace fs = std::filesystem;
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory '" + out_dir + "': " + ec.message());
  }

  write_trajectory_table(dir / "trajectory.csv", result.executed, result.clearances);

  const Metrics& m = result.metrics;
  json metrics_doc{
      {"schema_version", 1},
      {"scenario_name", scenario.name},
      {"mode", to_string(scenario.mode)},
      {"metrics",
       {{"min_clearance", m.min_clearance},
        {"min_clearance_midwindow", m.min_clearance_midwindow},
        {"collision", m.collision},
        {"avg_abs_accel", m.avg_abs_accel},
        {"avg_abs_jerk", m.avg_abs_jerk},
        {"max_lateral_offset", m.max_lateral_offset},
        {"degraded", m.degraded},
        {"negative_speed", m.negative_speed},
        {"executed_steps", m.executed_steps}}},
      {"effective_config", scenario_to_json(scenario)},
      {"defaults_applied", scenario.defaults_applied},
      {"metadata",
       {{"mu_hat", scenario.solver.mu_hat},
        {"covariance_growth_nonpaper",
         [&] {
           for (const TVSpec& tv : scenario.tvs) {
             if (tv.covariance.growth != 0.0) return true;
           }
           return false;
         }()}}}};
  open_for_write(dir / "metrics.json") << metrics_doc.dump(2) << "\n";

  json timing{{"schema_version", 1}, {"cycle_solve_ms", m.cycle_solve_ms}};
  open_for_write(dir / "timing.json") << timing.dump(2) << "\n";

  if (include_plans) {
    std::ofstream out = open_for_write(dir / "plans.csv");
    out << "# schema_version 1\n";
    out << "cycle_t0,k,px,py,v,psi,a,r\n";
    for (const CyclePlan& cp : result.plans) {
      for (size_t k = 0; k < cp.plan.states.size(); ++k) {
        const State& x = cp.plan.states[k];
        out << fmt17(cp.t0) << ',' << k << ',' << fmt17(x.px) << ',' << fmt17(x.py) << ','
            << fmt17(x.v) << ',' << fmt17(x.psi);
        if (k < cp.plan.controls.size()) {
          out << ',' << fmt17(cp.plan.controls[k].a) << ',' << fmt17(cp.plan.controls[k].r);
        } else {
          out << ",,";
        }
        out << "\n";
      }
    }
  }
}

ParsedTrajectory read_trajectory_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read '" + path + "'");
  }
  ParsedTrajectory parsed;
  std::string linebuf;
  bool header_seen = false;
  double prev_t = 0.0;
  bool have_prev_t = false;
  while (std::getline(in, linebuf)) {
    if (linebuf.empty() || linebuf[0] == '#') continue;
    if (!header_seen) {  // column header
      header_seen = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(linebuf);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    while (cells.size() < 7) cells.push_back("");

    const double t = std::stod(cells[0]);
    State x{std::stod(cells[1]), std::stod(cells[2]), std::stod(cells[3]), std::stod(cells[4])};
    parsed.trajectory.states.push_back(x);
    if (!cells[5].empty()) {
      parsed.trajectory.controls.push_back(Control{std::stod(cells[5]), std::stod(cells[6])});
    }
    std::vector<double> clear_row;
    for (size_t i = 7; i < cells.size(); ++i) {
      if (!cells[i].empty()) clear_row.push_back(std::stod(cells[i]));
    }
    parsed.clearances.push_back(std::move(clear_row));
    if (have_prev_t && parsed.trajectory.dt == 0.0) {
      parsed.trajectory.dt = t - prev_t;
    }
    prev_t = t;
    have_prev_t = true;
  }
  return parsed;
}

}  // namespace cilqr
