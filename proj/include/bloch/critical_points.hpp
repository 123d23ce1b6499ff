#pragma once

// Ground-truth enumeration of the critical points of f_r on the unit sphere.
//
// A direction n_hat is critical for f_r when b + 2 r A n_hat = 2 nu n_hat.
// In the eigenbasis of A this gives n_hat_j = b_j / (2 (nu - r a_j)); the
// unit-norm constraint then yields the degree-six polynomial
//
//   sum_j b_j^2 prod_{k != j} (nu - r a_k)^2 - 4 prod_j (nu - r a_j)^2 = 0.
//
// Eigen-directions with vanishing drift component drop out of the polynomial
// (its degree falls to four or two) and contribute the affine critical sets
// described by special_case_critical_sets().

#include "bloch/system_model.hpp"

#include <string_view>
#include <vector>

namespace bloch {

enum class PointClass { Max, Min, Saddle };
std::string_view to_string(PointClass c);

struct CriticalPoint {
  double r = 0.0;
  Vec3 n_hat = Vec3::UnitX();
  /// Lagrange multiplier: b + 2 r A n_hat = 2 nu n_hat.
  double nu = 0.0;
  PointClass classification = PointClass::Saddle;
  /// |(b + 2 r A n_hat)_perp|
  double residual = 0.0;
  double f = 0.0;
};

/// Point where a branch of critical points is tangent to a concentric sphere
/// (the feedback denominator n_hat^T Lambda^{-1} n_hat vanishes there).
struct TangencyPoint {
  double mu = 0.0;
  /// Bloch vector, n_j = b_j / (2 (mu - a_j)) in the eigenbasis.
  Vec3 n = Vec3::Zero();
  bool inside_ball = false;
  /// |sum_j b_j^2 / (8 (a_j - mu)^3)| relative to the sum of magnitudes.
  double condition_residual = 0.0;
  double radius() const { return n.norm(); }
};

/// |(b + 2 r A n_hat)_perp|, the criticality defect.
double criticality_residual(const LindbladSystem& sys, double r, const Vec3& n_hat);

/// Gradient of f_r at n_hat (ambient form b + 2 r A n_hat).
Vec3 ambient_gradient(const LindbladSystem& sys, double r, const Vec3& n_hat);

/// Riemannian Hessian of f_r on the tangent plane at n_hat:
/// 2 r P^T A P - C I, with C = n_hat . (b + 2 r A n_hat).
Eigen::Matrix2d projected_hessian(const LindbladSystem& sys, double r, const Vec3& n_hat);

PointClass classify_critical(const LindbladSystem& sys, double r, const Vec3& n_hat);

/// Isolated critical points on the sphere of radius r in (0, 1], sorted by
/// decreasing f.  Circles and spheres of critical points (plane and
/// triple-eigenvalue cases) are only reported by special_case_critical_sets.
std::vector<CriticalPoint> critical_points_at(const LindbladSystem& sys, double r);

/// Real roots of the tangency polynomial
///   sum_j b_j^2 prod_{k != j} (a_k - mu)^3 = 0
/// over the eigen-directions with nonzero drift.
std::vector<TangencyPoint> tangency_points(const LindbladSystem& sys);

enum class SpecialSetKind { AllSphere, Plane, Line, MainAxis };
std::string_view to_string(SpecialSetKind k);

/// Affine set of critical Bloch vectors, offset + span(free_directions),
/// and its intersection with the sphere of radius r.
struct SpecialCriticalSet {
  SpecialSetKind kind = SpecialSetKind::Line;
  /// Eigen indices that are free along the set.
  std::vector<int> free_axes;
  std::vector<Vec3> free_directions;
  /// Point of the set closest to the origin (world frame, Bloch vector).
  Vec3 offset = Vec3::Zero();
  double closest_radius() const { return offset.norm(); }

  double r = 0.0;
  /// Line / main-axis: intersection directions n_hat (0, 1 or 2 of them).
  std::vector<Vec3> points;
  /// Plane: intersection is the circle offset + circle_radius * S^1 in the
  /// plane; zero when empty or tangent.
  double circle_radius = 0.0;
  bool intersects = false;
};

std::vector<SpecialCriticalSet> special_case_critical_sets(const LindbladSystem& sys, double r);

}  // namespace bloch
