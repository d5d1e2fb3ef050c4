#include "cilqr/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cilqr/vehicle_model.hpp"

namespace cilqr {

Mat2 regularized_inverse(const Mat2& puu, double lambda) {
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("regularized_inverse: lambda must be positive");
  }
  Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (puu + puu.transpose()));
  const Vec2 clamped = es.eigenvalues().cwiseMax(0.0);
  const Vec2 inv = (clamped.array() + lambda).inverse();
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

StageData make_stage_data(const Trajectory& traj, const Trajectory& ref, const CostFunction& cost) {
  StageData data;
  data.expansion = cost.evaluate(traj, ref);
  const int T = traj.horizon();
  if (static_cast<int>(data.expansion.stage.size()) != T) {
    throw std::invalid_argument("make_stage_data: expansion count does not match horizon");
  }
  data.fx.reserve(T);
  data.fu.reserve(T);
  for (int k = 0; k < T; ++k) {
    auto [fx, fu] = vehicle::linearize(traj.states[k], traj.controls[k], traj.dt);
    data.fx.push_back(fx);
    data.fu.push_back(fu);
  }
  return data;
}

BackwardResult backward_pass(const StageData& data, double lambda) {
  const int T = static_cast<int>(data.expansion.stage.size());
  BackwardResult out;
  out.gains.feedforward.assign(T, Vec2::Zero());
  out.gains.feedback.assign(T, Mat24::Zero());

  Vec4 Vx = data.expansion.terminal.lx;
  Mat4 Vxx = 0.5 * (data.expansion.terminal.lxx + data.expansion.terminal.lxx.transpose());

  for (int k = T - 1; k >= 0; --k) {
    const QuadraticExpansion& e = data.expansion.stage[k];
    const Mat4& fx = data.fx[k];
    const Mat42& fu = data.fu[k];

    const Vec4 Px = e.lx + fx.transpose() * Vx;
    const Vec2 Pu = e.lu + fu.transpose() * Vx;
    const Mat4 Pxx = e.lxx + fx.transpose() * Vxx * fx;
    const Mat2 Puu = e.luu + fu.transpose() * Vxx * fu;
    const Mat42 Pxu = e.lxu + fx.transpose() * Vxx * fu;

    if (!Px.allFinite() || !Pu.allFinite() || !Pxx.allFinite() || !Puu.allFinite() ||
        !Pxu.allFinite()) {
      throw NumericalFailure("backward_pass: non-finite expansion", k);
    }

    const Mat2 Puu_inv = regularized_inverse(Puu, lambda);
    const Vec2 H = -Puu_inv * Pu;
    const Mat24 G = -Puu_inv * Pxu.transpose();
    out.gains.feedforward[k] = H;
    out.gains.feedback[k] = G;

    // value recursion with the same damped inverse as the gains
    Vx = Px - Pxu * Puu_inv * Pu;
    Vxx = Pxx - Pxu * Puu_inv * Pxu.transpose();
    Vxx = 0.5 * (Vxx + Vxx.transpose()).eval();
    // The damped Schur complement cannot drop below the stage curvature in
    // exact arithmetic, but at barrier scales ~1e17 the subtraction above
    // cancels catastrophically and can seed spurious negative eigenvalues
    // that the damped inverse then amplifies through the recursion. Project
    // back onto the PSD cone to clip that noise.
    Eigen::SelfAdjointEigenSolver<Mat4> es(Vxx);
    if (es.eigenvalues().minCoeff() < 0.0) {
      Vxx = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
            es.eigenvectors().transpose();
    }

    out.predicted_reduction += -H.dot(Pu) - 0.5 * H.dot(Puu * H);
  }
  return out;
}

ForwardResult forward_pass(const Trajectory& prev, const GainSchedule& gains,
                           const CostFunction& cost, double alpha) {
  const int T = prev.horizon();
  if (static_cast<int>(gains.feedforward.size()) != T ||
      static_cast<int>(gains.feedback.size()) != T) {
    throw std::invalid_argument("forward_pass: gain schedule does not match horizon");
  }
  ForwardResult out;
  out.trajectory.dt = prev.dt;
  out.trajectory.states.reserve(T + 1);
  out.trajectory.controls.reserve(T);
  out.trajectory.states.push_back(prev.states[0]);
  for (int k = 0; k < T; ++k) {
    const Vec4 dx = out.trajectory.states[k].vec() - prev.states[k].vec();
    const Vec2 u =
        prev.controls[k].vec() + alpha * gains.feedforward[k] + gains.feedback[k] * dx;
    const Control uk = Control::from_vec(u);
    if (!uk.finite()) {
      throw NumericalFailure("forward_pass: non-finite control", k);
    }
    const State next = vehicle::step(out.trajectory.states[k], uk, prev.dt);
    if (!next.finite()) {
      throw NumericalFailure("forward_pass: non-finite state", k);
    }
    out.trajectory.controls.push_back(uk);
    out.trajectory.states.push_back(next);
  }
  out.trajectory.dynamically_consistent = true;
  out.data = make_stage_data(out.trajectory, prev, cost);
  if (!std::isfinite(out.data.expansion.total_cost)) {
    throw NumericalFailure("forward_pass: non-finite cost", T);
  }
  return out;
}

SolveResult solve(const CostFunction& cost, const State& x0, const std::vector<Control>& u0,
                  const SolverConfig& cfg) {
  if (static_cast<int>(u0.size()) != cfg.horizon_steps) {
    throw std::invalid_argument("solve: initial control sequence does not match the horizon");
  }

  Trajectory current = vehicle::rollout(x0, u0, cfg.dt);
  StageData data = make_stage_data(current, current, cost);
  double J = data.expansion.total_cost;

  SolveResult result;
  result.cost_log.push_back(J);
  result.status = SolveStatus::IterationLimit;

  double lambda = cfg.lambda0;
  int iter = 0;
  for (; iter < cfg.max_iters; ++iter) {
    // One backward pass per iteration; the feedforward is backtracked because
    // the quadratic model extrapolates poorly across steep barrier walls and
    // the damping ceiling alone cannot bound the step there.
    bool trial_ok = false;
    double J_trial = 0.0;
    ForwardResult trial;
    try {
      const BackwardResult back = backward_pass(data, lambda);
      for (double alpha = 1.0; alpha >= 1.0 / 64.0; alpha *= 0.5) {
        try {
          trial = forward_pass(current, back.gains, cost, alpha);
        } catch (const NumericalFailure&) {
          continue;
        }
        trial_ok = true;
        J_trial = trial.data.expansion.total_cost;
        if (J_trial < J) break;
      }
    } catch (const NumericalFailure&) {
      trial_ok = false;
    }

    if (trial_ok && J_trial < J) {
      const double rel_decrease = (J - J_trial) / std::max(J, 1.0);
      lambda = std::max(lambda / cfg.scale_s, 1e-12);
      current = std::move(trial.trajectory);
      data = std::move(trial.data);
      J = J_trial;
      result.cost_log.push_back(J);
      if (rel_decrease < cfg.convergence_tol) {
        result.status = SolveStatus::Converged;
        ++iter;
        break;
      }
    } else if (trial_ok && J_trial - J <= 1e-12 * std::max(J, 1.0)) {
      // stalled at the optimum: the trial neither improves nor worsens the
      // cost beyond rounding noise, so no damping level can make progress
      result.status = SolveStatus::Converged;
      ++iter;
      break;
    } else {
      // Climb the damping ladder but try the ceiling itself before giving
      // up; multiplying straight past lambda_max would skip the whole band
      // (lambda_max / s, lambda_max] where deep-barrier steps become tame.
      if (lambda >= cfg.lambda_max) {
        result.status = SolveStatus::DampingCeiling;
        ++iter;
        break;
      }
      lambda = std::min(lambda * cfg.scale_s, cfg.lambda_max);
    }
  }

  result.iterations = iter;
  result.trajectory = std::move(current);
  // self-anchored cost so the result is re-derivable from the trajectory alone
  result.cost = cost.evaluate(result.trajectory, result.trajectory).total_cost;
  return result;
}

}  // namespace cilqr
