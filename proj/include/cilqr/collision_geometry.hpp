#pragma once

#include <array>
#include <span>
#include <vector>

#include "cilqr/types.hpp"

namespace cilqr {

/// Axis-aligned body box placed by center and heading.
struct OrientedRectangle {
  Vec2 center = Vec2::Zero();
  double heading = 0.0;
  double length = 5.0;  ///< extent along the heading axis [m]
  double width = 2.0;   ///< extent across [m]

  /// Corners in counterclockwise order starting at the rear-right one.
  std::array<Vec2, 4> corners() const;
};

/// Strictly convex polygon, counterclockwise vertices, collinear-free.
class ConvexPolygon {
 public:
  explicit ConvexPolygon(std::vector<Vec2> ccw_vertices);

  /// Convex hull of a point cloud with near-collinear vertices merged
  /// (cross-product tolerance 1e-9 m^2).
  static ConvexPolygon hull_of(std::span<const Vec2> points);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  int size() const { return static_cast<int>(vertices_.size()); }
  Vec2 centroid() const;

 private:
  std::vector<Vec2> vertices_;
};

/// Collision polygon for one traffic vehicle: the set traced by the ego
/// centroid while the two bodies touch, centered on the TV centroid. Built as
/// the hull of the 16 pairwise corner sums shifted by the ego centroid.
ConvexPolygon minkowski_sum(const OrientedRectangle& ego, const OrientedRectangle& tv);

enum class Zone { I, II, III, IV, Cone };

/// Closest polygon vertex to a query point plus its incident-edge frame.
struct ZoneResult {
  int vertex_index = 0;
  Vec2 closest_vertex = Vec2::Zero();
  Vec2 tau1 = Vec2::Zero();     ///< outward unit normal of the edge preceding the vertex (CCW)
  Vec2 tau2 = Vec2::Zero();     ///< outward unit normal of the edge following the vertex
  Vec2 edge_in = Vec2::Zero();  ///< unit direction of the preceding edge, pointing at the vertex
  Vec2 edge_out = Vec2::Zero(); ///< unit direction of the following edge, leaving the vertex
};

/// Minimum-distance vertex; exact ties resolve to the lowest CCW index.
ZoneResult closest_vertex(const ConvexPolygon& poly, const Vec2& p);

/// Region of the plane around the closest vertex that selects the distance
/// branch. Boundary points follow the precedence Cone > I > II > III > IV.
Zone classify_zone(const ZoneResult& zr, const Vec2& p);

/// Branch evaluation for a fixed vertex frame. The distance is the edge-normal
/// component in zones I/IV (tau1) and II/III (tau2), the radial distance in
/// the exterior cone, and is negative inside the polygon (penetration depth).
struct ZoneEval {
  double d = 0.0;
  Vec2 grad = Vec2::Zero();  ///< d(d)/dp, unit norm wherever defined
  Mat2 hess = Mat2::Zero();  ///< zero on linear branches, radial curvature in the cone
  Zone zone = Zone::Cone;
};

ZoneEval zone_distance(const ZoneResult& zr, const Vec2& p);

struct SignedDistance {
  double d = 0.0;
  Vec2 grad = Vec2::Zero();
  Zone zone = Zone::Cone;
};

/// Signed distance from p to the polygon: positive outside, negative inside.
SignedDistance signed_distance(const ConvexPolygon& poly, const Vec2& p);

struct MdrConstraint {
  double g = 0.0;
  Vec4 gx = Vec4::Zero();
  Mat4 gxx = Mat4::Zero();
};

/// Minimum-distance constraint d_min - d < 0 with derivatives taken through
/// the position components only (the polygon is data, not a decision variable).
MdrConstraint mdr_constraint(const State& x, const ConvexPolygon& poly, double d_min);

}  // namespace cilqr
