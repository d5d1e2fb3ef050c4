#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cilqr/barrier_constraints.hpp"
#include "cilqr/rng.hpp"
#include "support/finite_diff.hpp"

using namespace cilqr;
namespace ts = testsupport;

namespace {

// Random smooth constraint g(x, u) = quadratic form, used to exercise every
// derivative slot of the barrier transform.
struct SmoothConstraint {
  double g0;
  Vec4 ax;
  Vec2 au;
  Mat4 qxx;
  Mat2 quu;
  Mat42 qxu;

  static SmoothConstraint random(CounterRng& rng) {
    SmoothConstraint c;
    c.g0 = rng.uniform(-2.0, 0.5);
    for (int i = 0; i < 4; ++i) c.ax[i] = rng.uniform(-1, 1);
    for (int i = 0; i < 2; ++i) c.au[i] = rng.uniform(-1, 1);
    Mat4 m;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) m(i, j) = rng.uniform(-0.2, 0.2);
    c.qxx = 0.5 * (m + m.transpose());
    Mat2 m2;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) m2(i, j) = rng.uniform(-0.2, 0.2);
    c.quu = 0.5 * (m2 + m2.transpose());
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 2; ++j) c.qxu(i, j) = rng.uniform(-0.2, 0.2);
    return c;
  }

  double value(const Vec4& x, const Vec2& u) const {
    return g0 + ax.dot(x) + au.dot(u) + 0.5 * x.dot(qxx * x) + 0.5 * u.dot(quu * u) +
           x.dot(qxu * u);
  }
  Vec4 gx(const Vec4& x, const Vec2& u) const { return ax + qxx * x + qxu * u; }
  Vec2 gu(const Vec4& x, const Vec2& u) const { return au + quu * u + qxu.transpose() * x; }
};

}  // namespace

TEST_CASE("exp_barrier: value and gradient at g = 0") {
  BarrierParams p{100.0, 10.0};
  const Vec4 gx(0.3, -0.4, 0.1, 0.0);
  const auto e = exp_barrier(0.0, gx, Vec2::Zero(), Mat4::Zero(), Mat2::Zero(), Mat42::Zero(), p);
  CHECK(e.value == doctest::Approx(100.0).epsilon(1e-14));
  CHECK(ts::rel_error(Vec4(e.lx), Vec4(100.0 * p.q2 * gx)) < 1e-14);
  CHECK_FALSE(e.saturated);
}

TEST_CASE("exp_barrier: linear constraint gives a rank-1 PSD Hessian") {
  BarrierParams p{50.0, 4.0};
  CounterRng rng(21);
  for (int i = 0; i < 50; ++i) {
    Vec4 gx;
    for (int k = 0; k < 4; ++k) gx[k] = rng.uniform(-1, 1);
    const double g = rng.uniform(-2, 0.5);
    const auto e =
        exp_barrier(g, gx, Vec2::Zero(), Mat4::Zero(), Mat2::Zero(), Mat42::Zero(), p);
    const Mat4 expected = p.q1 * p.q2 * p.q2 * std::exp(p.q2 * g) * gx * gx.transpose();
    CHECK(ts::rel_error(e.lxx, expected) < 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat4> es(e.lxx);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    // rank <= 1: second-largest eigenvalue vanishes
    CHECK(std::abs(es.eigenvalues()[2]) < 1e-8 * std::max(1.0, es.eigenvalues()[3]));
  }
}

TEST_CASE("exp_barrier: derivatives match finite differences for smooth g") {
  BarrierParams p{100.0, 10.0};
  CounterRng rng(22);
  for (int i = 0; i < 100; ++i) {
    const auto c = SmoothConstraint::random(rng);
    Vec4 x;
    Vec2 u;
    for (int k = 0; k < 4; ++k) x[k] = rng.uniform(-1, 1);
    for (int k = 0; k < 2; ++k) u[k] = rng.uniform(-1, 1);

    const auto eval = [&](const Vec4& xx, const Vec2& uu) {
      return exp_barrier(c.value(xx, uu), c.gx(xx, uu), c.gu(xx, uu), c.qxx, c.quu, c.qxu, p);
    };
    const auto e = eval(x, u);

    const Vec4 lx_fd = ts::fd_grad_x([&](const Vec4& q) { return eval(q, u).value; }, x);
    const Vec2 lu_fd = ts::fd_grad_u([&](const Vec2& q) { return eval(x, q).value; }, u);
    const Mat4 lxx_fd = ts::fd_hess_xx([&](const Vec4& q) { return Vec4(eval(q, u).lx); }, x);
    const Mat2 luu_fd = ts::fd_hess_uu([&](const Vec2& q) { return Vec2(eval(x, q).lu); }, u);
    const Mat42 lxu_fd = ts::fd_hess_xu([&](const Vec2& q) { return Vec4(eval(x, q).lx); }, u);

    CHECK(ts::rel_error(Vec4(e.lx), lx_fd) < 1e-5);
    CHECK(ts::rel_error(Vec2(e.lu), lu_fd) < 1e-5);
    CHECK(ts::rel_error(Mat4(e.lxx), lxx_fd) < 1e-5);
    CHECK(ts::rel_error(Mat2(e.luu), luu_fd) < 1e-5);
    CHECK(ts::rel_error(Mat42(e.lxu), lxu_fd) < 1e-5);
  }
}

TEST_CASE("exp_barrier: positive and strictly increasing below the clamp") {
  BarrierParams p{100.0, 10.0};
  double prev = 0.0;
  for (double g = -5.0; g < 3.9; g += 0.1) {
    const auto e =
        exp_barrier(g, Vec4::Zero(), Vec2::Zero(), Mat4::Zero(), Mat2::Zero(), Mat42::Zero(), p);
    CHECK(e.value > 0.0);
    CHECK(e.value > prev);
    prev = e.value;
  }
}

TEST_CASE("exp_barrier: exponent clamp flags saturation") {
  BarrierParams p{100.0, 10.0};
  const auto e = exp_barrier(4.1, Vec4::Ones(), Vec2::Zero(), Mat4::Zero(), Mat2::Zero(),
                             Mat42::Zero(), p);
  CHECK(e.saturated);
  CHECK(e.value == doctest::Approx(100.0 * std::exp(40.0)).epsilon(1e-12));
}

TEST_CASE("control_bound_constraints: active boundary and the default box") {
  ControlBounds b;  // a in [-4, 2], r in [-0.25, 0.25]
  const auto active = control_bound_constraints(Control{2.0, 0.0}, b);
  CHECK(active[0].g == 0.0);

  const auto rows = control_bound_constraints(Control{0, 0}, b);
  CHECK(rows[0].g == doctest::Approx(-2.0));
  CHECK(rows[1].g == doctest::Approx(-4.0));
  CHECK(rows[2].g == doctest::Approx(-0.25));
  CHECK(rows[3].g == doctest::Approx(-0.25));
  CHECK(rows[0].gu == Vec2(1, 0));
  CHECK(rows[1].gu == Vec2(-1, 0));
  CHECK(rows[2].gu == Vec2(0, 1));
  CHECK(rows[3].gu == Vec2(0, -1));
}

TEST_CASE("control_bound_constraints: all rows negative iff strictly inside") {
  ControlBounds b;
  CounterRng rng(23);
  for (int i = 0; i < 200; ++i) {
    const Control u{rng.uniform(-6, 4), rng.uniform(-0.5, 0.5)};
    const auto rows = control_bound_constraints(u, b);
    const bool all_negative = rows[0].g < 0 && rows[1].g < 0 && rows[2].g < 0 && rows[3].g < 0;
    const bool inside = u.a > b.a_min && u.a < b.a_max && u.r > b.r_min && u.r < b.r_max;
    CHECK(all_negative == inside);
  }
}

TEST_CASE("friction_feasible_check: default box on dry asphalt") {
  const auto rep = friction_feasible_check(ControlBounds{}, FrictionEnvelope{0.9, kGravity}, 20.0);
  CHECK(rep.feasible);
  const double expected = std::sqrt(0.9 * 9.81 * 0.9 * 9.81 - 16.0) / 20.0;
  CHECK(rep.r_limit == doctest::Approx(expected).epsilon(1e-12));
  CHECK(rep.r_limit > 0.25);
}

TEST_CASE("friction_feasible_check: low friction cannot cover hard braking") {
  // mu*g = 2.943 < |a_min| = 4, the envelope has no yaw-rate budget at all
  CHECK_THROWS_AS(friction_feasible_check(ControlBounds{}, FrictionEnvelope{0.3, kGravity}, 20.0),
                  InfeasibleEnvelope);
}

TEST_CASE("yaw_rate_limit: degenerate acceleration budget") {
  const double limit = yaw_rate_limit(FrictionEnvelope{0.5, kGravity}, 0.0, 10.0);
  CHECK(limit == doctest::Approx(0.5 * kGravity / 10.0).epsilon(1e-12));
}

TEST_CASE("friction_feasible_check: monotone in the friction coefficient") {
  CounterRng rng(24);
  for (int i = 0; i < 100; ++i) {
    ControlBounds b;
    b.a_min = rng.uniform(-4, -1);
    b.a_max = rng.uniform(0.5, 2.5);
    b.r_min = rng.uniform(-0.4, -0.05);
    b.r_max = rng.uniform(0.05, 0.4);
    const double v = rng.uniform(5, 30);
    const double mu_low = rng.uniform(0.3, 0.9);
    const double mu_high = mu_low + rng.uniform(0.0, 1.2 - mu_low);
    bool low_feasible = false;
    try {
      low_feasible = friction_feasible_check(b, FrictionEnvelope{mu_low, kGravity}, v).feasible;
    } catch (const InfeasibleEnvelope&) {
      low_feasible = false;
    }
    if (low_feasible) {
      // enlarging mu never turns feasible into infeasible
      const auto rep = friction_feasible_check(b, FrictionEnvelope{mu_high, kGravity}, v);
      CHECK(rep.feasible);
    }
  }
}

TEST_CASE("road_boundary_constraints: constant lanes") {
  BoundaryPolynomials b;
  b.left = {6.0};
  b.right = {-2.0};
  const auto rows = road_boundary_constraints(State{0, 0, 20, 0}, b);
  CHECK(rows[0].g == doctest::Approx(-6.0));
  CHECK(rows[1].g == doctest::Approx(-2.0));
}

TEST_CASE("road_boundary_constraints: on the left boundary curve") {
  BoundaryPolynomials b;
  b.left = {1.0, 0.5};  // y = 1 + 0.5 x
  b.right = {-6.0};
  const auto rows = road_boundary_constraints(State{2, 2, 10, 0}, b);
  CHECK(rows[0].g == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("road_boundary_constraints: quadratic boundary derivative check") {
  BoundaryPolynomials b;
  b.left = {4.0, 0.05, 0.01};
  b.right = {-4.0, -0.02, -0.005};
  CounterRng rng(25);
  for (int i = 0; i < 100; ++i) {
    const State x{rng.uniform(-20, 20), rng.uniform(-6, 6), rng.uniform(0, 30),
                  rng.uniform(-1, 1)};
    const auto rows = road_boundary_constraints(x, b);
    for (int r = 0; r < 2; ++r) {
      const Vec4 gx_fd = ts::fd_grad_x(
          [&](const Vec4& q) {
            return road_boundary_constraints(State::from_vec(q), b)[r].g;
          },
          x.vec());
      const Mat4 gxx_fd = ts::fd_hess_xx(
          [&](const Vec4& q) {
            return Vec4(road_boundary_constraints(State::from_vec(q), b)[r].gx);
          },
          x.vec());
      CHECK(ts::rel_error(Vec4(rows[r].gx), gx_fd) < 1e-6);
      CHECK(ts::rel_error(Mat4(rows[r].gxx), gxx_fd) < 1e-6);
    }
  }
}
