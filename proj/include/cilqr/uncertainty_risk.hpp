#pragma once

#include <array>
#include <cstdint>

#include "cilqr/barrier_constraints.hpp"
#include "cilqr/collision_geometry.hpp"
#include "cilqr/types.hpp"

namespace cilqr {

/// Planar Gaussian for a traffic-vehicle centroid at one prediction step.
struct GaussianPosition {
  Vec2 mean = Vec2::Zero();
  Mat2 cov = Mat2::Identity();
};

/// Wedge region used for the collision-probability integral. The interior is
/// swept counterclockwise from dir1 to dir2; antiparallel directions give a
/// half plane.
struct ConeRegion {
  Vec2 apex = Vec2::Zero();
  Vec2 dir1 = Vec2::UnitX();
  Vec2 dir2 = Vec2::UnitY();
  bool full_plane = false;

  bool contains(const Vec2& p) const {
    if (full_plane) return true;
    const Vec2 v = p - apex;
    const double c1 = dir1.x() * v.y() - dir1.y() * v.x();
    const double c2 = v.x() * dir2.y() - v.y() * dir2.x();
    return c1 >= 0.0 && c2 >= 0.0;
  }

  static ConeRegion full() {
    ConeRegion c;
    c.full_plane = true;
    return c;
  }
};

/// Wedge at the closest polygon vertex that contains the polygon, i.e. the
/// interior angle of the vertex.
ConeRegion interior_cone_at_vertex(const ZoneResult& zr);

/// Five symmetric sigma points reproducing a planar Gaussian's first two
/// moments exactly.
struct SigmaPointSet {
  std::array<Vec2, 5> points;
  std::array<double, 5> weights_mean;
  std::array<double, 5> weights_cov;
};

/// Unscented-transform points with alpha=1, beta=2, kappa=1 (spread sqrt(3)),
/// using the symmetric matrix square root of the covariance.
SigmaPointSet sigma_points(const GaussianPosition& gp);

struct RiskParams {
  double p_max = 0.1;        ///< maximum allowed collision probability
  int mc_samples = 1000000;  ///< Monte Carlo sample count (>= 1000)
  uint64_t seed = 0;
  uint64_t stream = 0;       ///< substream id for concurrent estimators
};

struct ProbabilityEstimate {
  double p = 0.0;
  double std_error = 0.0;  ///< binomial standard error
};

/// Monte Carlo estimate of the probability that the vertex-relative ego
/// displacement lands in the cone. Samples are drawn from
/// N(position(x) - mean, cov) with the given seed.
ProbabilityEstimate cone_collision_probability(const State& x, const ConeRegion& cone,
                                               const GaussianPosition& gp, const RiskParams& rp);

/// Probability derivatives with respect to the state, estimated on the same
/// sample set as the probability (common random numbers).
Vec4 cone_probability_gradient(const State& x, const ConeRegion& cone, const GaussianPosition& gp,
                               const RiskParams& rp);
Mat4 cone_probability_hessian(const State& x, const ConeRegion& cone, const GaussianPosition& gp,
                              const RiskParams& rp);

struct ConeProbabilityDerivatives {
  ProbabilityEstimate prob;
  Vec4 grad = Vec4::Zero();
  Mat4 hess = Mat4::Zero();
};

/// Single-pass estimate of probability, gradient, and Hessian.
ConeProbabilityDerivatives cone_probability_with_derivatives(const State& x, const ConeRegion& cone,
                                                             const GaussianPosition& gp,
                                                             const RiskParams& rp);

/// True iff the probability satisfies the risk bound strictly.
bool mrr_probability_check(double prob, const RiskParams& rp);

struct ExpectedBarrierResult {
  QuadraticExpansion expansion;  ///< position Hessian projected to PSD
  Mat2 raw_position_hessian;     ///< pre-projection block, kept for validation
};

/// Sigma-point quadrature of the barrier of the zone distance under TV
/// position uncertainty. The closest vertex and its edge normals are anchored
/// at the mean displacement and held fixed across the sigma points; gradient
/// and Hessian are the exact derivatives of the quadrature value under that
/// anchoring.
ExpectedBarrierResult expected_barrier_detail(const State& x, const ConvexPolygon& poly,
                                              const GaussianPosition& gp, const BarrierParams& bp,
                                              double d_min);

QuadraticExpansion expected_barrier(const State& x, const ConvexPolygon& poly,
                                    const GaussianPosition& gp, const BarrierParams& bp,
                                    double d_min);

}  // namespace cilqr
