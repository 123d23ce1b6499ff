#pragma once

// Fourth-order Runge-Kutta-Munthe-Kaas stepping on the unit sphere.
//
// The ODE dn/dr = m(r, n) with m orthogonal to n is written as the action of
// so(3): dn/dr = omega x n with omega = n x m.  Every stage and the final
// update move n by an exact rotation, so |n| = 1 is preserved up to roundoff.

#include "bloch/types.hpp"

#include <cmath>
#include <optional>

namespace bloch {

/// exp([omega]_x) n by Rodrigues' formula.
inline Vec3 rotate(const Vec3& omega, const Vec3& n) {
  const double theta = omega.norm();
  if (theta < 1e-300) return n;
  const Vec3 k = omega / theta;
  const double c = std::cos(theta), s = std::sin(theta);
  return c * n + s * k.cross(n) + (1.0 - c) * k.dot(n) * k;
}

/// Angular velocity generating the tangent vector m at n.
inline Vec3 angular_velocity(const Vec3& n, const Vec3& m) { return n.cross(m); }

/// One RKMK4 step of size h (h may be negative).  `tangent(r, n)` returns the
/// tangent field m or std::nullopt where it is undefined; the step then fails.
template <class TangentField>
std::optional<Vec3> rkmk4_step(TangentField&& tangent, double r, const Vec3& n, double h) {
  auto omega = [&](double rr, const Vec3& nn) -> std::optional<Vec3> {
    std::optional<Vec3> m = tangent(rr, nn);
    if (!m || !m->allFinite()) return std::nullopt;
    return angular_velocity(nn, *m);
  };

  const auto w1 = omega(r, n);
  if (!w1) return std::nullopt;
  const Vec3 k1 = h * *w1;

  const auto w2 = omega(r + 0.5 * h, rotate(0.5 * k1, n));
  if (!w2) return std::nullopt;
  const Vec3 k2 = h * *w2;

  // Truncated dexp^{-1} correction: the bracket in so(3) is the cross product.
  const auto w3 = omega(r + 0.5 * h, rotate(0.5 * k2 - k1.cross(k2) / 8.0, n));
  if (!w3) return std::nullopt;
  const Vec3 k3 = h * *w3;

  const auto w4 = omega(r + h, rotate(k3, n));
  if (!w4) return std::nullopt;
  const Vec3 k4 = h * *w4;

  const Vec3 v = (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0 - k1.cross(k4) / 12.0;
  const Vec3 out = rotate(v, n);
  if (!out.allFinite()) return std::nullopt;
  return out;
}

}  // namespace bloch
