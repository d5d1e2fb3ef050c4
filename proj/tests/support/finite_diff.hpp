#pragma once

#include <functional>

#include "cilqr/types.hpp"

// Central finite differences used as independent oracles for every analytic
// derivative in the library.
namespace testsupport {

using cilqr::Mat2;
using cilqr::Mat4;
using cilqr::Mat42;
using cilqr::Vec2;
using cilqr::Vec4;

inline Vec4 fd_grad_x(const std::function<double(const Vec4&)>& f, const Vec4& x,
                      double h = 1e-6) {
  Vec4 g;
  for (int i = 0; i < 4; ++i) {
    Vec4 xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

inline Vec2 fd_grad_u(const std::function<double(const Vec2&)>& f, const Vec2& u,
                      double h = 1e-6) {
  Vec2 g;
  for (int i = 0; i < 2; ++i) {
    Vec2 up = u, um = u;
    up[i] += h;
    um[i] -= h;
    g[i] = (f(up) - f(um)) / (2.0 * h);
  }
  return g;
}

inline Mat4 fd_jac_x(const std::function<Vec4(const Vec4&)>& f, const Vec4& x, double h = 1e-5) {
  Mat4 j;
  for (int i = 0; i < 4; ++i) {
    Vec4 xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    j.col(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return j;
}

inline Mat42 fd_jac_u(const std::function<Vec4(const Vec2&)>& f, const Vec2& u, double h = 1e-5) {
  Mat42 j;
  for (int i = 0; i < 2; ++i) {
    Vec2 up = u, um = u;
    up[i] += h;
    um[i] -= h;
    j.col(i) = (f(up) - f(um)) / (2.0 * h);
  }
  return j;
}

// Hessian blocks are differenced from the analytic gradients, which keeps the
// truncation error second order in h.
inline Mat4 fd_hess_xx(const std::function<Vec4(const Vec4&)>& grad, const Vec4& x,
                       double h = 1e-6) {
  return fd_jac_x([&](const Vec4& q) { return grad(q); }, x, h);
}

inline Mat2 fd_hess_uu(const std::function<Vec2(const Vec2&)>& grad, const Vec2& u,
                       double h = 1e-6) {
  Mat2 j;
  for (int i = 0; i < 2; ++i) {
    Vec2 up = u, um = u;
    up[i] += h;
    um[i] -= h;
    j.col(i) = (grad(up) - grad(um)) / (2.0 * h);
  }
  return j;
}

inline Mat42 fd_hess_xu(const std::function<Vec4(const Vec2&)>& grad_x_of_u, const Vec2& u,
                        double h = 1e-6) {
  Mat42 j;
  for (int i = 0; i < 2; ++i) {
    Vec2 up = u, um = u;
    up[i] += h;
    um[i] -= h;
    j.col(i) = (grad_x_of_u(up) - grad_x_of_u(um)) / (2.0 * h);
  }
  return j;
}

/// Relative error with a unit floor so near-zero quantities compare absolutely.
template <typename A, typename B>
double rel_error(const A& analytic, const B& reference) {
  const double scale = std::max({1.0, double(analytic.norm()), double(reference.norm())});
  return (analytic - reference).norm() / scale;
}

inline double rel_error_scalar(double analytic, double reference) {
  const double scale = std::max({1.0, std::abs(analytic), std::abs(reference)});
  return std::abs(analytic - reference) / scale;
}

}  // namespace testsupport
