#pragma once

#include <vector>

#include "cilqr/types.hpp"

namespace cilqr {

struct SolverConfig {
  double lambda0 = 1.0;         ///< initial damping
  double lambda_max = 1e10;     ///< damping ceiling, loop breaks above it
  double scale_s = 500.0;       ///< damping multiplier (> 1)
  int max_iters = 20;
  double convergence_tol = 1e-4;  ///< relative cost-decrease threshold on accepted steps
  int horizon_steps = 20;
  double dt = 0.25;
};

struct ValueExpansion {
  Vec4 Vx = Vec4::Zero();
  Mat4 Vxx = Mat4::Zero();
};

/// Per-step feedforward and feedback terms of the control update.
struct GainSchedule {
  std::vector<Vec2> feedforward;  // H_k
  std::vector<Mat24> feedback;    // G_k
};

enum class SolveStatus { Converged, DampingCeiling, IterationLimit };

struct SolveResult {
  Trajectory trajectory;
  /// Total cost of the returned trajectory with the adjusting term anchored on
  /// itself (re-derivable from the trajectory alone).
  double cost = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::IterationLimit;
  /// Accepted-cost sequence as bookkept by the outer loop, starting with the
  /// initial pass; strictly decreasing by the acceptance rule.
  std::vector<double> cost_log;
};

/// Per-step cost expansions plus terminal expansion and total cost.
struct ProblemExpansion {
  std::vector<QuadraticExpansion> stage;  // horizon entries
  QuadraticExpansion terminal;
  double total_cost = 0.0;
};

/// Cost side of a planning problem. `ref` is the trajectory the evaluation is
/// anchored on (adjusting cost, frozen obstacle geometry); for a self-anchored
/// evaluation pass the trajectory itself.
class CostFunction {
 public:
  virtual ~CostFunction() = default;
  virtual ProblemExpansion evaluate(const Trajectory& traj, const Trajectory& ref) const = 0;
};

/// Everything the backward pass consumes, computed on one trajectory.
struct StageData {
  ProblemExpansion expansion;
  std::vector<Mat4> fx;
  std::vector<Mat42> fu;
};

/// Eigendecomposes a symmetric 2x2, clamps negative eigenvalues to zero, and
/// inverts with damping lambda > 0 added on the diagonal of the spectrum.
Mat2 regularized_inverse(const Mat2& puu, double lambda);

StageData make_stage_data(const Trajectory& traj, const Trajectory& ref, const CostFunction& cost);

struct BackwardResult {
  GainSchedule gains;
  double predicted_reduction = 0.0;
};

/// Riccati sweep with the damped inverse used for both the gains and the
/// value-function recursion. Throws NumericalFailure on non-finite data.
BackwardResult backward_pass(const StageData& data, double lambda);

struct ForwardResult {
  Trajectory trajectory;
  StageData data;
};

/// Rolls the gains out from prev's initial state, re-evaluating costs and
/// derivatives on the produced trajectory (anchored on prev). alpha scales
/// the feedforward term only.
ForwardResult forward_pass(const Trajectory& prev, const GainSchedule& gains,
                           const CostFunction& cost, double alpha = 1.0);

/// Damped accept/reject outer loop. A numerical failure in an inner pass is
/// treated as a rejected step, never a crash.
SolveResult solve(const CostFunction& cost, const State& x0, const std::vector<Control>& u0,
                  const SolverConfig& cfg);

}  // namespace cilqr
