#include "cilqr/collision_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cilqr {

namespace {

constexpr double kCollinearTolerance = 1e-9;  // [m^2]

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Outward normal of a CCW edge direction: rotate by -90 degrees.
Vec2 outward_normal(const Vec2& dir) { return Vec2(dir.y(), -dir.x()); }

}  // namespace

std::array<Vec2, 4> OrientedRectangle::corners() const {
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  const double hl = 0.5 * length;
  const double hw = 0.5 * width;
  const auto place = [&](double lx, double ly) {
    return Vec2(center.x() + c * lx - s * ly, center.y() + s * lx + c * ly);
  };
  return {place(-hl, -hw), place(hl, -hw), place(hl, hw), place(-hl, hw)};
}

ConvexPolygon::ConvexPolygon(std::vector<Vec2> ccw_vertices) : vertices_(std::move(ccw_vertices)) {
  const int n = static_cast<int>(vertices_.size());
  if (n < 3) {
    throw std::invalid_argument("ConvexPolygon: needs at least three vertices");
  }
  for (int i = 0; i < n; ++i) {
    const Vec2& a = vertices_[i];
    const Vec2& b = vertices_[(i + 1) % n];
    const Vec2& c = vertices_[(i + 2) % n];
    if (cross2(b - a, c - b) <= 0.0) {
      throw std::invalid_argument("ConvexPolygon: vertices not strictly convex CCW");
    }
  }
}

Vec2 ConvexPolygon::centroid() const {
  Vec2 sum = Vec2::Zero();
  for (const Vec2& v : vertices_) sum += v;
  return sum / static_cast<double>(vertices_.size());
}

ConvexPolygon ConvexPolygon::hull_of(std::span<const Vec2> points) {
  std::vector<Vec2> pts(points.begin(), points.end());
  if (pts.size() < 3) {
    throw std::invalid_argument("hull_of: needs at least three points");
  }
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec2& a, const Vec2& b) { return a == b; }),
            pts.end());

  // Monotone chain; popping at the collinear tolerance merges flat vertices.
  const auto build = [&](auto begin, auto end) {
    std::vector<Vec2> chain;
    for (auto it = begin; it != end; ++it) {
      while (chain.size() >= 2 &&
             cross2(chain[chain.size() - 1] - chain[chain.size() - 2],
                    *it - chain[chain.size() - 1]) <= kCollinearTolerance) {
        chain.pop_back();
      }
      chain.push_back(*it);
    }
    return chain;
  };
  std::vector<Vec2> lower = build(pts.begin(), pts.end());
  std::vector<Vec2> upper = build(pts.rbegin(), pts.rend());
  lower.pop_back();
  upper.pop_back();
  lower.insert(lower.end(), upper.begin(), upper.end());
  return ConvexPolygon(std::move(lower));
}

ConvexPolygon minkowski_sum(const OrientedRectangle& ego, const OrientedRectangle& tv) {
  const auto ego_corners = ego.corners();
  const auto tv_corners = tv.corners();
  std::array<Vec2, 16> sums;
  int k = 0;
  for (const Vec2& pe : ego_corners) {
    for (const Vec2& pt : tv_corners) {
      sums[k++] = pe + pt - ego.center;
    }
  }
  return ConvexPolygon::hull_of(sums);
}

ZoneResult closest_vertex(const ConvexPolygon& poly, const Vec2& p) {
  const auto& vs = poly.vertices();
  const int n = poly.size();
  int best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double d2 = (p - vs[i]).squaredNorm();
    if (d2 < best_d2) {  // strict keeps the lowest index on ties
      best_d2 = d2;
      best = i;
    }
  }
  ZoneResult zr;
  zr.vertex_index = best;
  zr.closest_vertex = vs[best];
  const Vec2& prev = vs[(best + n - 1) % n];
  const Vec2& next = vs[(best + 1) % n];
  zr.edge_in = (vs[best] - prev).normalized();
  zr.edge_out = (next - vs[best]).normalized();
  zr.tau1 = outward_normal(zr.edge_in);
  zr.tau2 = outward_normal(zr.edge_out);
  return zr;
}

namespace {

// Shared branch selection. The exterior cone is the set of directions with
// nonnegative coordinates in the (tau1, tau2) basis, equivalently
// r.edge_in >= 0 and r.edge_out <= 0; that choice keeps the distance
// continuous across every branch boundary.
Zone select_zone(const ZoneResult& zr, const Vec2& p) {
  const Vec2 r = p - zr.closest_vertex;
  const double along_in = r.dot(zr.edge_in);
  const double along_out = r.dot(zr.edge_out);
  if (along_in >= 0.0 && along_out <= 0.0) {
    return Zone::Cone;
  }
  const double s1 = r.dot(zr.tau1);
  const double s2 = r.dot(zr.tau2);
  if (s1 >= 0.0 && s2 >= 0.0) {
    // outside both edge lines but not in the cone: the nearer edge strip wins
    return along_in < 0.0 ? Zone::I : Zone::II;
  }
  if (s1 >= 0.0) return Zone::I;
  if (s2 >= 0.0) return Zone::II;
  // interior: split by the angle bisector, which is the locus of equal depth
  return s1 > s2 ? Zone::IV : Zone::III;
}

}  // namespace

Zone classify_zone(const ZoneResult& zr, const Vec2& p) { return select_zone(zr, p); }

ZoneEval zone_distance(const ZoneResult& zr, const Vec2& p) {
  const Vec2 r = p - zr.closest_vertex;
  ZoneEval e;
  e.zone = select_zone(zr, p);
  switch (e.zone) {
    case Zone::I:
    case Zone::IV:
      e.d = r.dot(zr.tau1);
      e.grad = zr.tau1;
      break;
    case Zone::II:
    case Zone::III:
      e.d = r.dot(zr.tau2);
      e.grad = zr.tau2;
      break;
    case Zone::Cone: {
      const double rn = r.norm();
      e.d = rn;
      if (rn > 0.0) {
        const Vec2 u = r / rn;
        e.grad = u;
        e.hess = (Mat2::Identity() - u * u.transpose()) / rn;
      } else {
        // apex: pick the interior-angle bisector direction
        e.grad = -(zr.tau1 + zr.tau2).normalized();
      }
      break;
    }
  }
  return e;
}

SignedDistance signed_distance(const ConvexPolygon& poly, const Vec2& p) {
  const ZoneResult zr = closest_vertex(poly, p);
  const ZoneEval e = zone_distance(zr, p);
  return SignedDistance{e.d, e.grad, e.zone};
}

MdrConstraint mdr_constraint(const State& x, const ConvexPolygon& poly, double d_min) {
  const ZoneResult zr = closest_vertex(poly, x.position());
  const ZoneEval e = zone_distance(zr, x.position());
  MdrConstraint c;
  c.g = d_min - e.d;
  c.gx.head<2>() = -e.grad;
  c.gxx.topLeftCorner<2, 2>() = -e.hess;
  return c;
}

}  // namespace cilqr
