#pragma once

#include <algorithm>
#include <cmath>

namespace loghold {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend constexpr Vec2 operator*(double s, const Vec2& a) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator*(const Vec2& a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

inline double norm(const Vec2& v) { return std::hypot(v.x, v.y); }
inline double distance(const Vec2& a, const Vec2& b) { return norm(a - b); }

/// Velocity gradient, row i = component u_i, column j = derivative along x_j.
struct Mat2 {
  double a11 = 0.0, a12 = 0.0;
  double a21 = 0.0, a22 = 0.0;

  double trace() const { return a11 + a22; }
  friend constexpr Mat2 operator+(const Mat2& a, const Mat2& b) {
    return {a.a11 + b.a11, a.a12 + b.a12, a.a21 + b.a21, a.a22 + b.a22};
  }
  friend constexpr Mat2 operator*(double s, const Mat2& a) {
    return {s * a.a11, s * a.a12, s * a.a21, s * a.a22};
  }
};

/// Largest singular value (operator 2-norm).
inline double sigma_max(const Mat2& m) {
  // Singular values of a 2x2 matrix from the half-sum/half-difference split.
  const double e = 0.5 * (m.a11 + m.a22);
  const double f = 0.5 * (m.a11 - m.a22);
  const double g = 0.5 * (m.a21 + m.a12);
  const double h = 0.5 * (m.a21 - m.a12);
  return std::hypot(e, h) + std::hypot(f, g);
}

/// C-infinity transition: 1 for rho <= inner, 0 for rho >= outer.
inline double smooth_step(double rho, double inner, double outer) {
  if (rho <= inner) return 1.0;
  if (rho >= outer) return 0.0;
  const double s = (rho - inner) / (outer - inner);
  const double e0 = std::exp(-1.0 / s);
  const double e1 = std::exp(-1.0 / (1.0 - s));
  return e1 / (e0 + e1);
}

}  // namespace loghold
