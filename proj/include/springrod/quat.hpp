#pragma once

#include <cmath>

#include "springrod/vec3.hpp"

namespace springrod {

/// Unit quaternion holding a world-from-body rotation. Construction does not
/// normalize; every integration step renormalizes, so stored values stay
/// unit-norm to 1e-12.
struct Quat {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Hamilton product: applies b first, then a.
inline Quat operator*(const Quat& a, const Quat& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

inline Quat conjugate(const Quat& q) { return {q.w, -q.x, -q.y, -q.z}; }

inline double dot(const Quat& a, const Quat& b) {
  return a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
}

inline double norm(const Quat& q) { return std::sqrt(dot(q, q)); }

inline Quat normalized(const Quat& q) {
  const double n = norm(q);
  return {q.w / n, q.x / n, q.y / n, q.z / n};
}

inline bool is_finite(const Quat& q) {
  return std::isfinite(q.w) && std::isfinite(q.x) && std::isfinite(q.y) &&
         std::isfinite(q.z);
}

/// Quaternion with zero scalar part, used in the angular velocity update.
inline Quat pure_quat(const Vec3& v) { return {0.0, v.x, v.y, v.z}; }

inline Quat from_axis_angle(const Vec3& axis, double angle) {
  const double n = norm(axis);
  if (n == 0.0) return {};
  const double half = 0.5 * angle;
  const double s = std::sin(half) / n;
  return {std::cos(half), s * axis.x, s * axis.y, s * axis.z};
}

/// Rotates v by q (q assumed unit-norm). Equivalent to R(q)·v.
inline Vec3 rotate(const Quat& q, const Vec3& v) {
  const Vec3 qv{q.x, q.y, q.z};
  const Vec3 t = 2.0 * cross(qv, v);
  return v + q.w * t + cross(qv, t);
}

}  // namespace springrod
