#include "cilqr/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cilqr {

namespace {

std::vector<double> cumulative_stations(const std::vector<Vec2>& vertices) {
  std::vector<double> stations(vertices.size(), 0.0);
  for (size_t i = 1; i < vertices.size(); ++i) {
    stations[i] = stations[i - 1] + (vertices[i] - vertices[i - 1]).norm();
  }
  return stations;
}

void validate_vertices(const std::vector<Vec2>& vertices) {
  if (vertices.size() < 2) {
    throw std::invalid_argument("ReferenceLine: needs at least two vertices");
  }
  for (size_t i = 1; i < vertices.size(); ++i) {
    if ((vertices[i] - vertices[i - 1]).norm() <= 0.0) {
      throw std::invalid_argument("ReferenceLine: degenerate segment");
    }
  }
}

double poly_eval(const std::vector<double>& coeffs, double x) {
  double y = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
    y = y * x + *it;
  }
  return y;
}

double poly_deriv(const std::vector<double>& coeffs, double x) {
  double y = 0.0;
  for (size_t i = coeffs.size(); i-- > 1;) {
    y = y * x + static_cast<double>(i) * coeffs[i];
  }
  return y;
}

}  // namespace

ReferenceLine::ReferenceLine(std::vector<Vec2> vertices, double v_ref)
    : vertices_(std::move(vertices)) {
  validate_vertices(vertices_);
  if (!(v_ref > 0.0)) {
    throw std::invalid_argument("ReferenceLine: v_ref must be positive");
  }
  v_ref_.assign(vertices_.size(), v_ref);
  stations_ = cumulative_stations(vertices_);
}

ReferenceLine::ReferenceLine(std::vector<Vec2> vertices, std::vector<double> v_ref_per_vertex)
    : vertices_(std::move(vertices)), v_ref_(std::move(v_ref_per_vertex)) {
  validate_vertices(vertices_);
  if (v_ref_.size() != vertices_.size()) {
    throw std::invalid_argument("ReferenceLine: speed profile size mismatch");
  }
  for (double v : v_ref_) {
    if (!(v > 0.0)) throw std::invalid_argument("ReferenceLine: v_ref must be positive");
  }
  stations_ = cumulative_stations(vertices_);
}

ReferenceLine ReferenceLine::from_polynomial(const std::vector<double>& coeffs, double x0,
                                             double x1, double v_ref, double spacing) {
  if (coeffs.empty() || !(x1 > x0) || !(spacing > 0.0)) {
    throw std::invalid_argument("ReferenceLine: bad polynomial description");
  }
  std::vector<Vec2> vertices;
  double x = x0;
  vertices.emplace_back(x, poly_eval(coeffs, x));
  while (x < x1) {
    const double slope = poly_deriv(coeffs, x);
    const double dx = spacing / std::sqrt(1.0 + slope * slope);
    x = std::min(x + dx, x1);
    vertices.emplace_back(x, poly_eval(coeffs, x));
  }
  return ReferenceLine(std::move(vertices), v_ref);
}

ReferenceLine::Projection ReferenceLine::project(const Vec2& p) const {
  Projection best;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i + 1 < vertices_.size(); ++i) {
    const Vec2 a = vertices_[i];
    const Vec2 b = vertices_[i + 1];
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    const Vec2 cand = a + t * ab;
    const double d2 = (p - cand).squaredNorm();
    // strict < keeps the earliest (smallest-station) point on exact ties
    if (d2 < best_d2) {
      best_d2 = d2;
      best.point = cand;
      best.v_ref = v_ref_[i] + t * (v_ref_[i + 1] - v_ref_[i]);
      best.station = stations_[i] + t * std::sqrt(len2);
    }
  }
  return best;
}

QuadraticExpansion control_cost(const Control& u, const CostWeights& w) {
  QuadraticExpansion e;
  e.value = 0.5 * (w.w_a * u.a * u.a + w.w_r * u.r * u.r);
  e.lu = Vec2(w.w_a * u.a, w.w_r * u.r);
  e.luu = Vec2(w.w_a, w.w_r).asDiagonal();
  return e;
}

QuadraticExpansion adjusting_cost(const State& x, const State& x_hat, const CostWeights& w) {
  const Vec4 weights(w.w_px, w.w_py, w.w_v, w.w_psi);
  const Vec4 diff = x.vec() - x_hat.vec();
  QuadraticExpansion e;
  e.value = 0.5 * diff.dot(weights.cwiseProduct(diff));
  e.lx = weights.cwiseProduct(diff);
  e.lxx = weights.asDiagonal();
  return e;
}

QuadraticExpansion tracking_cost(const State& x, const ReferenceLine& line, const CostWeights& w) {
  const auto proj = line.project(x.position());
  // selector picks (px, py, v); the reference point is a constant of the expansion
  const Eigen::Vector3d diff(x.px - proj.point.x(), x.py - proj.point.y(), x.v - proj.v_ref);
  const Eigen::Vector3d weights(w.w_pref, w.w_pref, w.w_vref);
  QuadraticExpansion e;
  e.value = 0.5 * diff.dot(weights.cwiseProduct(diff));
  e.lx.head<3>() = weights.cwiseProduct(diff);
  e.lxx.topLeftCorner<3, 3>() = weights.asDiagonal();
  return e;
}

QuadraticExpansion terminal_cost(const State& xT, const TerminalTarget& target,
                                 const CostWeights& w) {
  // selector picks (v, psi); weights follow the (psi, v) target pairing
  const double dv = xT.v - target.v_f;
  const double dpsi = xT.psi - target.psi_f;
  QuadraticExpansion e;
  e.value = 0.5 * (w.w_vf * dv * dv + w.w_psif * dpsi * dpsi);
  e.lx[2] = w.w_vf * dv;
  e.lx[3] = w.w_psif * dpsi;
  e.lxx(2, 2) = w.w_vf;
  e.lxx(3, 3) = w.w_psif;
  return e;
}

QuadraticExpansion total_stage_cost(const State& x, const Control& u, const State& x_hat,
                                    const ReferenceLine& line, const CostWeights& w,
                                    std::span<const QuadraticExpansion> barrier_terms) {
  QuadraticExpansion e = control_cost(u, w);
  e += adjusting_cost(x, x_hat, w);
  e += tracking_cost(x, line, w);
  for (const auto& b : barrier_terms) {
    e += b;
  }
  e.symmetrize();
  return e;
}

}  // namespace cilqr
