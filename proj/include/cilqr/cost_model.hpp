#pragma once

#include <span>
#include <vector>

#include "cilqr/types.hpp"

namespace cilqr {

/// Nonnegative weights for the stage and terminal cost terms.
struct CostWeights {
  double w_a = 1e3;     ///< control: acceleration
  double w_r = 1e5;     ///< control: yaw rate
  double w_px = 1.0;    ///< adjusting: position x
  double w_py = 1.0;    ///< adjusting: position y
  double w_v = 1e4;     ///< adjusting: speed
  double w_psi = 1e4;   ///< adjusting: yaw
  double w_pref = 1e5;  ///< tracking: position
  double w_vref = 1e3;  ///< tracking: speed
  double w_psif = 1e4;  ///< terminal: yaw
  double w_vf = 1e3;    ///< terminal: speed
};

/// Planar polyline with a speed profile. A polynomial lane description is
/// densified to a polyline at construction so projection has one code path.
class ReferenceLine {
 public:
  /// Constant desired speed along the whole line.
  ReferenceLine(std::vector<Vec2> vertices, double v_ref);
  /// Per-vertex desired speed, interpolated linearly along each segment.
  ReferenceLine(std::vector<Vec2> vertices, std::vector<double> v_ref_per_vertex);

  /// Densifies y = sum_k c_k x^k over [x0, x1] to segments of roughly `spacing`
  /// arc length.
  static ReferenceLine from_polynomial(const std::vector<double>& coeffs, double x0, double x1,
                                       double v_ref, double spacing = 0.5);

  struct Projection {
    Vec2 point;      ///< globally nearest point on the line
    double v_ref;    ///< desired speed at that point
    double station;  ///< arc length from the line start
  };

  /// Globally nearest point; exact ties resolve to the smallest station.
  Projection project(const Vec2& p) const;

  const std::vector<Vec2>& vertices() const { return vertices_; }

 private:
  std::vector<Vec2> vertices_;
  std::vector<double> v_ref_;     // per vertex
  std::vector<double> stations_;  // cumulative arc length per vertex
};

/// Desired terminal yaw and speed.
struct TerminalTarget {
  double psi_f = 0.0;
  double v_f = 0.0;
};

QuadraticExpansion control_cost(const Control& u, const CostWeights& w);

QuadraticExpansion adjusting_cost(const State& x, const State& x_hat, const CostWeights& w);

/// Tracking toward the nearest reference point. The projected point is held
/// fixed while differentiating; it is refreshed on every evaluation.
QuadraticExpansion tracking_cost(const State& x, const ReferenceLine& line, const CostWeights& w);

QuadraticExpansion terminal_cost(const State& xT, const TerminalTarget& target,
                                 const CostWeights& w);

/// Sum of control, adjusting, tracking, and the supplied barrier expansions,
/// with symmetrized Hessian blocks.
QuadraticExpansion total_stage_cost(const State& x, const Control& u, const State& x_hat,
                                    const ReferenceLine& line, const CostWeights& w,
                                    std::span<const QuadraticExpansion> barrier_terms);

}  // namespace cilqr
