#include "cilqr/uncertainty_risk.hpp"

#include <cmath>
#include <stdexcept>

#include "cilqr/rng.hpp"

namespace cilqr {

namespace {

Mat2 cholesky_or_throw(const Mat2& cov) {
  Eigen::LLT<Mat2> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("covariance must be symmetric positive-definite");
  }
  return llt.matrixL();
}

void validate_risk_params(const RiskParams& rp) {
  if (!(rp.p_max > 0.0 && rp.p_max < 1.0)) {
    throw std::invalid_argument("RiskParams: p_max must lie in (0, 1)");
  }
  if (rp.mc_samples < 1000) {
    throw std::invalid_argument("RiskParams: mc_samples must be at least 1000");
  }
}

}  // namespace

ConeRegion interior_cone_at_vertex(const ZoneResult& zr) {
  // Rays from the vertex along its two edges; ordered so the sweep from dir1
  // to dir2 is counterclockwise and covers the polygon side.
  ConeRegion cone;
  cone.apex = zr.closest_vertex;
  const Vec2 toward_prev = -zr.edge_in;
  const Vec2 toward_next = zr.edge_out;
  const double cr = toward_next.x() * toward_prev.y() - toward_next.y() * toward_prev.x();
  if (cr >= 0.0) {
    cone.dir1 = toward_next;
    cone.dir2 = toward_prev;
  } else {
    cone.dir1 = toward_prev;
    cone.dir2 = toward_next;
  }
  return cone;
}

SigmaPointSet sigma_points(const GaussianPosition& gp) {
  Eigen::SelfAdjointEigenSolver<Mat2> es(gp.cov);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0) {
    throw std::invalid_argument("sigma_points: covariance must be positive-definite");
  }
  const Mat2 sqrt_cov =
      es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();

  // alpha = 1, beta = 2, kappa = 1 for n = 2: lambda = 1, spread sqrt(n+lambda) = sqrt(3)
  constexpr double n = 2.0;
  constexpr double lambda = 1.0;
  const double spread = std::sqrt(n + lambda);

  SigmaPointSet s;
  s.points[0] = gp.mean;
  s.points[1] = gp.mean + spread * sqrt_cov.col(0);
  s.points[2] = gp.mean - spread * sqrt_cov.col(0);
  s.points[3] = gp.mean + spread * sqrt_cov.col(1);
  s.points[4] = gp.mean - spread * sqrt_cov.col(1);

  const double w0 = lambda / (n + lambda);
  const double wi = 0.5 / (n + lambda);
  s.weights_mean = {w0, wi, wi, wi, wi};
  s.weights_cov = {w0 + 2.0, wi, wi, wi, wi};  // w0 + (1 - alpha^2 + beta)
  return s;
}

ConeProbabilityDerivatives cone_probability_with_derivatives(const State& x, const ConeRegion& cone,
                                                             const GaussianPosition& gp,
                                                             const RiskParams& rp) {
  validate_risk_params(rp);
  ConeProbabilityDerivatives out;
  if (cone.full_plane) {
    // constant function of the state
    out.prob = {1.0, 0.0};
    return out;
  }
  const Mat2 chol = cholesky_or_throw(gp.cov);
  const Mat2 cov_inv = gp.cov.inverse();
  const Vec2 mean = x.position() - gp.mean;

  CounterRng rng(rp.seed, rp.stream);
  const int n = rp.mc_samples;
  long hits = 0;
  Vec2 grad2 = Vec2::Zero();
  Mat2 hess2 = Mat2::Zero();
  for (int i = 0; i < n; ++i) {
    const Vec2 z = rng.gaussian_pair();
    const Vec2 xi = mean + chol * z;
    if (cone.contains(xi)) {
      ++hits;
      const Vec2 w = cov_inv * (xi - mean);
      grad2 += w;
      hess2 += w * w.transpose() - cov_inv;
    }
  }
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  out.prob.p = p;
  out.prob.std_error = std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n));
  out.grad.head<2>() = grad2 / static_cast<double>(n);
  Mat2 h = hess2 / static_cast<double>(n);
  h = 0.5 * (h + h.transpose()).eval();
  out.hess.topLeftCorner<2, 2>() = h;
  return out;
}

ProbabilityEstimate cone_collision_probability(const State& x, const ConeRegion& cone,
                                               const GaussianPosition& gp, const RiskParams& rp) {
  validate_risk_params(rp);
  if (cone.full_plane) {
    return {1.0, 0.0};
  }
  const Mat2 chol = cholesky_or_throw(gp.cov);
  const Vec2 mean = x.position() - gp.mean;
  CounterRng rng(rp.seed, rp.stream);
  const int n = rp.mc_samples;
  long hits = 0;
  for (int i = 0; i < n; ++i) {
    const Vec2 z = rng.gaussian_pair();
    if (cone.contains(mean + chol * z)) {
      ++hits;
    }
  }
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  return {p, std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n))};
}

Vec4 cone_probability_gradient(const State& x, const ConeRegion& cone, const GaussianPosition& gp,
                               const RiskParams& rp) {
  return cone_probability_with_derivatives(x, cone, gp, rp).grad;
}

Mat4 cone_probability_hessian(const State& x, const ConeRegion& cone, const GaussianPosition& gp,
                              const RiskParams& rp) {
  return cone_probability_with_derivatives(x, cone, gp, rp).hess;
}

bool mrr_probability_check(double prob, const RiskParams& rp) {
  if (!(prob >= 0.0 && prob <= 1.0)) {
    throw std::invalid_argument("mrr_probability_check: probability outside [0, 1]");
  }
  return prob < rp.p_max;
}

ExpectedBarrierResult expected_barrier_detail(const State& x, const ConvexPolygon& poly,
                                              const GaussianPosition& gp, const BarrierParams& bp,
                                              double d_min) {
  // The polygon sits at the TV mean, so the mean displacement maps to the ego
  // position in world coordinates; sigma points translate along with it.
  const ZoneResult anchor = closest_vertex(poly, x.position());
  const SigmaPointSet sp = sigma_points(GaussianPosition{x.position(), gp.cov});

  double value = 0.0;
  Vec2 grad = Vec2::Zero();
  Mat2 hess = Mat2::Zero();
  bool saturated = false;
  for (int i = 0; i < 5; ++i) {
    const ZoneEval ze = zone_distance(anchor, sp.points[i]);
    double arg = bp.q2 * (d_min - ze.d);
    if (arg > kBarrierExponentClamp) {
      arg = kBarrierExponentClamp;
      saturated = true;
    }
    const double b = bp.q1 * std::exp(arg);
    const double w = sp.weights_mean[i];
    value += w * b;
    grad += w * (-bp.q2 * b) * ze.grad;
    hess += w * (bp.q2 * b) * (bp.q2 * ze.grad * ze.grad.transpose() - ze.hess);
  }
  hess = 0.5 * (hess + hess.transpose()).eval();

  ExpectedBarrierResult out;
  out.raw_position_hessian = hess;
  out.expansion.value = value;
  out.expansion.lx.head<2>() = grad;
  out.expansion.saturated = saturated;

  // project the position block to PSD by clamping negative eigenvalues
  Eigen::SelfAdjointEigenSolver<Mat2> es(hess);
  const Vec2 clamped = es.eigenvalues().cwiseMax(0.0);
  out.expansion.lxx.topLeftCorner<2, 2>() =
      es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().transpose();
  return out;
}

QuadraticExpansion expected_barrier(const State& x, const ConvexPolygon& poly,
                                    const GaussianPosition& gp, const BarrierParams& bp,
                                    double d_min) {
  return expected_barrier_detail(x, poly, gp, bp, d_min).expansion;
}

}  // namespace cilqr
