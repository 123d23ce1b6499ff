#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace bloch {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec3c = Eigen::Vector3cd;
using Mat2c = Eigen::Matrix2cd;
using Complex = std::complex<double>;

/// Raised when a numerical routine cannot produce a trustworthy result
/// (root finder failure, non-finite intermediate, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Component of v orthogonal to the unit vector u.
inline Vec3 perp(const Vec3& v, const Vec3& u) { return v - v.dot(u) * u; }

/// Orthonormal basis (columns) of the plane orthogonal to the unit vector u.
inline Eigen::Matrix<double, 3, 2> tangent_basis(const Vec3& u) {
  // Pick the coordinate axis least aligned with u.
  Eigen::Index k;
  u.cwiseAbs().minCoeff(&k);
  Vec3 axis = Vec3::Unit(k);
  Vec3 t1 = perp(axis, u).normalized();
  Vec3 t2 = u.cross(t1);
  Eigen::Matrix<double, 3, 2> p;
  p.col(0) = t1;
  p.col(1) = t2;
  return p;
}

/// Angle between two unit vectors, accurate for small angles.
inline double angle_between(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

}  // namespace bloch
