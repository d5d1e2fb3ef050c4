#include "cilqr/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "cilqr/collision_geometry.hpp"

namespace cilqr {

using nlohmann::json;

std::string to_string(PlanningMode mode) {
  switch (mode) {
    case PlanningMode::Mdr: return "mdr";
    case PlanningMode::Mrr: return "mrr";
    case PlanningMode::MrrSlow: return "mrr-slow";
  }
  return "mdr";
}

PlanningMode planning_mode_from_string(const std::string& name) {
  if (name == "mdr") return PlanningMode::Mdr;
  if (name == "mrr") return PlanningMode::Mrr;
  if (name == "mrr-slow" || name == "mrr_slow") return PlanningMode::MrrSlow;
  throw ConfigError("unknown mode '" + name + "' (expected mdr, mrr, or mrr-slow)");
}

namespace {

class Loader {
 public:
  explicit Loader(std::vector<std::string>& defaults) : defaults_(defaults) {}

  template <typename T>
  T get(const json& j, const std::string& path, const std::string& key, T fallback) {
    if (j.contains(key)) {
      try {
        return j.at(key).get<T>();
      } catch (const json::exception& e) {
        throw ConfigError("field '" + join(path, key) + "': " + e.what());
      }
    }
    defaults_.push_back(join(path, key));
    return fallback;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  std::vector<std::string>& defaults_;
};

TVSpec parse_tv(Loader& ld, const json& j, const std::string& path) {
  TVSpec tv;
  if (!j.contains("speed") || !j.contains("lat_offset") || !j.contains("long_offset")) {
    throw ConfigError("field '" + path + "': speed, lat_offset, and long_offset are required");
  }
  tv.speed = j.at("speed").get<double>();
  tv.lat_offset = j.at("lat_offset").get<double>();
  tv.long_offset = j.at("long_offset").get<double>();
  tv.length = ld.get(j, path, "length", 5.0);
  tv.width = ld.get(j, path, "width", 2.0);
  if (j.contains("behavior")) {
    const json& b = j.at("behavior");
    const std::string type = b.value("type", "lane_keep");
    if (type == "lane_change") {
      LaneChange lc;
      lc.target_lane = b.value("target_lane", 1);
      lc.start_time = b.value("start_time", 0.5);
      lc.duration = b.value("duration", 2.0);
      tv.lane_change = lc;
    } else if (type != "lane_keep") {
      throw ConfigError("field '" + path + ".behavior.type': unknown behavior '" + type + "'");
    }
  } else {
    ld.get(j, path, "behavior", std::string("lane_keep"));
  }
  if (j.contains("covariance")) {
    const json& c = j.at("covariance");
    tv.covariance.sigma0 = c.value("sigma0", 0.25);
    tv.covariance.growth = c.value("growth", 0.0);
  } else {
    ld.get(j, path, "covariance.sigma0", 0.25);
  }
  return tv;
}

Scenario parse_scenario(const json& j) {
  Scenario s;
  Loader ld(s.defaults_applied);

  s.name = ld.get(j, "", "name", std::string("scenario"));
  s.mode = planning_mode_from_string(ld.get(j, "", "mode", std::string("mdr")));

  const json ev = j.value("ev", json::object());
  s.ev.speed = ld.get(ev, "ev", "speed", 20.0);
  s.ev.length = ld.get(ev, "ev", "length", 5.0);
  s.ev.width = ld.get(ev, "ev", "width", 2.0);
  s.ev.lat_offset = ld.get(ev, "ev", "lat_offset", 0.0);
  s.ev.long_offset = ld.get(ev, "ev", "long_offset", 0.0);

  const json lanes = j.value("lanes", json::object());
  s.lanes.count = ld.get(lanes, "lanes", "count", 3);
  s.lanes.width = ld.get(lanes, "lanes", "width", 4.0);

  if (j.contains("tvs")) {
    const json& tvs = j.at("tvs");
    if (!tvs.is_array()) {
      throw ConfigError("field 'tvs': expected an array");
    }
    for (size_t i = 0; i < tvs.size(); ++i) {
      s.tvs.push_back(parse_tv(ld, tvs[i], "tvs[" + std::to_string(i) + "]"));
    }
  }

  const json sol = j.value("solver", json::object());
  const double horizon_seconds = ld.get(sol, "solver", "horizon_seconds", 5.0);
  s.solver.ilqr.dt = ld.get(sol, "solver", "dt", 0.25);
  s.solver.ilqr.horizon_steps =
      static_cast<int>(std::lround(horizon_seconds / s.solver.ilqr.dt));
  s.solver.ilqr.max_iters = ld.get(sol, "solver", "max_iterations", 20);
  s.solver.ilqr.lambda0 = ld.get(sol, "solver", "lambda0", 1.0);
  s.solver.ilqr.lambda_max = ld.get(sol, "solver", "lambda_max", 1e10);
  s.solver.ilqr.scale_s = ld.get(sol, "solver", "scale", 500.0);
  s.solver.ilqr.convergence_tol = ld.get(sol, "solver", "convergence_tol", 1e-4);
  s.solver.v_ref = ld.get(sol, "solver", "v_ref", 20.0);
  s.solver.d_min = ld.get(sol, "solver", "d_min", 1.0);
  s.solver.mu_hat = ld.get(sol, "solver", "mu_hat", 0.9);

  const json w = sol.value("weights", json::object());
  s.solver.weights.w_a = ld.get(w, "solver.weights", "w_a", 1e3);
  s.solver.weights.w_r = ld.get(w, "solver.weights", "w_r", 1e5);
  s.solver.weights.w_px = ld.get(w, "solver.weights", "w_px", 1.0);
  s.solver.weights.w_py = ld.get(w, "solver.weights", "w_py", 1.0);
  s.solver.weights.w_v = ld.get(w, "solver.weights", "w_v", 1e4);
  s.solver.weights.w_psi = ld.get(w, "solver.weights", "w_psi", 1e4);
  s.solver.weights.w_pref = ld.get(w, "solver.weights", "w_pref", 1e5);
  s.solver.weights.w_vref = ld.get(w, "solver.weights", "w_vref", 1e3);
  s.solver.weights.w_psif = ld.get(w, "solver.weights", "w_psif", 1e4);
  s.solver.weights.w_vf = ld.get(w, "solver.weights", "w_vf", 1e3);

  const json bar = sol.value("barrier", json::object());
  s.solver.barrier.q1 = ld.get(bar, "solver.barrier", "q1", 100.0);
  s.solver.barrier.q2 = ld.get(bar, "solver.barrier", "q2", 10.0);

  const json bounds = sol.value("bounds", json::object());
  s.solver.bounds.a_min = ld.get(bounds, "solver.bounds", "a_min", -4.0);
  s.solver.bounds.a_max = ld.get(bounds, "solver.bounds", "a_max", 2.0);
  s.solver.bounds.r_min = ld.get(bounds, "solver.bounds", "r_min", -0.25);
  s.solver.bounds.r_max = ld.get(bounds, "solver.bounds", "r_max", 0.25);

  const json risk = sol.value("risk", json::object());
  s.solver.risk.p_max = ld.get(risk, "solver.risk", "p_max", 0.1);
  s.solver.risk.mc_samples = ld.get(risk, "solver.risk", "mc_samples", 10000);

  const json sim = j.value("sim", json::object());
  s.sim.duration = ld.get(sim, "sim", "duration", 8.0);
  s.sim.replan_period = ld.get(sim, "sim", "replan_period", 0.25);
  s.sim.seed = ld.get(sim, "sim", "seed", static_cast<uint64_t>(1));

  return s;
}

}  // namespace

void validate_scenario(const Scenario& s) {
  const auto fail = [](const std::string& invariant) {
    throw ConfigError("scenario invariant violated: " + invariant);
  };

  if (!(s.solver.ilqr.dt > 0.0)) fail("dt > 0");
  if (s.solver.ilqr.horizon_steps < 1) fail("horizon_steps >= 1");
  if (s.solver.ilqr.max_iters < 1) fail("max_iterations >= 1");
  if (!(s.solver.ilqr.lambda0 > 0.0)) fail("lambda0 > 0");
  if (!(s.solver.ilqr.scale_s > 1.0)) fail("scale > 1");
  if (!(s.solver.ilqr.lambda_max > s.solver.ilqr.lambda0)) fail("lambda_max > lambda0");
  if (!(s.solver.barrier.q1 > 0.0 && s.solver.barrier.q2 > 0.0)) fail("q1 > 0 and q2 > 0");
  if (!(s.solver.bounds.a_min < s.solver.bounds.a_max)) fail("a_min < a_max");
  if (!(s.solver.bounds.r_min < s.solver.bounds.r_max)) fail("r_min < r_max");
  if (!(s.solver.risk.p_max > 0.0 && s.solver.risk.p_max < 1.0)) fail("0 < p_max < 1");
  if (s.solver.risk.mc_samples < 1000) fail("mc_samples >= 1000");
  if (!(s.solver.mu_hat > 0.0 && s.solver.mu_hat <= 1.2)) fail("0 < mu_hat <= 1.2");
  if (!(s.solver.v_ref > 0.0)) fail("v_ref > 0");
  if (!(s.solver.d_min > 0.0)) fail("d_min > 0");
  if (s.lanes.count < 1) fail("lane count >= 1");
  if (!(s.lanes.width > 0.0)) fail("lane width > 0");
  if (!(s.sim.duration > 0.0)) fail("sim duration > 0");

  const double ratio = s.sim.replan_period / s.solver.ilqr.dt;
  if (!(s.sim.replan_period > 0.0) || std::abs(ratio - std::lround(ratio)) > 1e-9) {
    fail("replan period is an integer multiple of dt");
  }

  const CostWeights& w = s.solver.weights;
  for (double wi : {w.w_a, w.w_r, w.w_px, w.w_py, w.w_v, w.w_psi, w.w_pref, w.w_vref, w.w_psif,
                    w.w_vf}) {
    if (wi < 0.0) fail("cost weights are nonnegative");
  }

  for (size_t i = 0; i < s.tvs.size(); ++i) {
    const TVSpec& tv = s.tvs[i];
    if (tv.speed < 0.0) fail("TV speed >= 0");
    if (!(tv.length > 0.0 && tv.width > 0.0)) fail("TV dimensions positive");
    if (tv.lane_change && !(tv.lane_change->duration > 0.0)) fail("lane-change duration > 0");
    if (tv.lane_change &&
        (tv.lane_change->target_lane < 0 || tv.lane_change->target_lane >= s.lanes.count)) {
      fail("lane-change target lane exists");
    }
    if (!(tv.covariance.sigma0 > 0.0)) fail("covariance sigma0 > 0");

    const OrientedRectangle ego{Vec2(s.ev.long_offset, s.ev.lat_offset), 0.0, s.ev.length,
                                s.ev.width};
    const OrientedRectangle tv_rect{Vec2(tv.long_offset, tv.lat_offset), 0.0, tv.length, tv.width};
    const ConvexPolygon poly = minkowski_sum(ego, tv_rect);
    if (signed_distance(poly, ego.center).d <= 0.0) {
      fail("all TVs initially collision-free with the EV (tvs[" + std::to_string(i) + "])");
    }
  }

  // the fixed yaw-rate box must fit the friction circle at the fastest speed
  // the scenario is expected to reach
  const double v_check = std::max(s.ev.speed, s.solver.v_ref);
  const FrictionEnvelope env{s.solver.mu_hat, kGravity};
  try {
    const FrictionReport rep = friction_feasible_check(s.solver.bounds, env, v_check);
    if (!rep.feasible) fail("control bounds fit the friction envelope");
  } catch (const InfeasibleEnvelope&) {
    fail("control bounds fit the friction envelope");
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open scenario file '" + path + "'");
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("parse error in '" + path + "': " + e.what());
  }
  Scenario s = parse_scenario(j);
  validate_scenario(s);
  return s;
}

TvPose tv_pose_at(const TVSpec& tv, const LaneLayout& lanes, double t) {
  TvPose pose;
  pose.position.x() = tv.long_offset + tv.speed * t;
  pose.position.y() = tv.lat_offset;
  pose.heading = 0.0;
  if (tv.lane_change) {
    const LaneChange& lc = *tv.lane_change;
    const double target = lanes.center_of(lc.target_lane);
    const double dy = target - tv.lat_offset;
    if (t >= lc.start_time + lc.duration) {
      pose.position.y() = target;
    } else if (t > lc.start_time) {
      const double sfrac = (t - lc.start_time) / lc.duration;
      const double ease = sfrac * sfrac * (3.0 - 2.0 * sfrac);
      pose.position.y() = tv.lat_offset + dy * ease;
      const double lateral_rate = dy * 6.0 * sfrac * (1.0 - sfrac) / lc.duration;
      pose.heading = std::atan2(lateral_rate, tv.speed);
    }
  }
  return pose;
}

std::vector<TvPredictionPoint> predict_tv_trajectory(const TVSpec& tv, const LaneLayout& lanes,
                                                     double t0, int horizon_steps, double dt) {
  std::vector<TvPredictionPoint> pred;
  pred.reserve(horizon_steps + 1);
  for (int k = 0; k <= horizon_steps; ++k) {
    const TvPose pose = tv_pose_at(tv, lanes, t0 + k * dt);
    TvPredictionPoint p;
    p.position = pose.position;
    p.heading = pose.heading;
    p.gaussian.mean = pose.position;
    p.gaussian.cov = tv.covariance.at(k, dt);
    pred.push_back(p);
  }
  return pred;
}

double infeasible_braking_distance(double v_ev, double v_tv, double a_min, double l_ev,
                                   double l_tv) {
  if (!(a_min < 0.0)) {
    throw std::invalid_argument("infeasible_braking_distance: a_min must be negative");
  }
  if (v_ev < v_tv) {
    throw std::invalid_argument("infeasible_braking_distance: requires v_ev >= v_tv");
  }
  const double dv = v_ev - v_tv;
  return dv * dv / (2.0 * std::abs(a_min)) + 0.5 * (l_ev + l_tv);
}

}  // namespace cilqr
