#pragma once

// Parameterization of a two-level Markovian open system by the pair (A, b):
// A is the real symmetric positive semi-definite dissipation matrix and b the
// drift of the Bloch vector at the completely mixed state.
//
// All degenerate-case logic (coincident eigenvalues, vanishing drift
// components) runs in the eigenbasis of A.  Eigenvalues are ordered
// a_1 >= a_2 >= a_3.  Inside a group of coincident eigenvalues the basis is
// rotated so that b projects onto the first vector of the group only; every
// other vector of the group then carries a zero drift component.

#include "bloch/types.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace bloch {

/// Traceless jump operators L_m = sum_j l_{m,j} sigma_j, stored as their
/// Pauli coefficient vectors (units: sqrt(rate)).
struct LindbladOperatorSet {
  std::vector<Vec3c> operators;
};

/// Eigenvalue groups and vanishing-drift flags derived from (A, b).
struct DegeneracyPattern {
  /// Group id per eigen index; indices sharing an id have equal eigenvalues.
  std::array<int, 3> group{0, 1, 2};
  int group_count = 3;
  /// b component along eigenvector j is zero within threshold.
  std::array<bool, 3> b_zero{false, false, false};

  bool same_group(int i, int j) const { return group[i] == group[j]; }
  int group_size(int g) const;
  /// True when every index of group g has a vanishing drift component.
  bool group_drift_free(int g) const;
};

class LindbladSystem {
 public:
  /// General symmetric A (symmetrized on construction) and drift b.
  LindbladSystem(const Mat3& a, const Vec3& b);
  /// A given in its own eigenbasis: A = diag(a_diag).
  static LindbladSystem from_diagonal(const Vec3& a_diag, const Vec3& b);

  const Mat3& A() const { return a_; }
  const Vec3& b() const { return b_; }
  double trace() const { return a_.trace(); }

  /// a_1 >= a_2 >= a_3.
  const Vec3& eigenvalues() const { return eigenvalues_; }
  /// Orthonormal eigenvectors as columns, matching eigenvalues().
  const Mat3& eigenvectors() const { return eigenvectors_; }
  /// b expressed in the eigenbasis.
  const Vec3& b_eigen() const { return b_eigen_; }
  const DegeneracyPattern& pattern() const { return pattern_; }

  Vec3 to_eigen(const Vec3& world) const { return eigenvectors_.transpose() * world; }
  Vec3 to_world(const Vec3& eigen) const { return eigenvectors_ * eigen; }

  /// Characteristic rate of the system, max(1, a_1, |b|).
  double scale() const;
  bool unital() const;

 private:
  void decompose();

  Mat3 a_;
  Vec3 b_;
  Vec3 eigenvalues_;
  Mat3 eigenvectors_;
  Vec3 b_eigen_;
  DegeneracyPattern pattern_;
};

/// Eigenvalues within this distance are treated as equal.
double eigen_equal_threshold(const LindbladSystem& sys);
/// Drift components below this magnitude are treated as zero.
double b_zero_threshold(double b_norm);

struct ValidationReport {
  bool finite = true;
  bool psd_ok = true;
  double min_eigenvalue = 0.0;
  double psd_tolerance = 0.0;
  bool inequality_ok = true;
  /// 4 det A - b^T A b; non-negative for a physical system.
  double inequality_margin = 0.0;
  double inequality_tolerance = 0.0;

  bool ok() const { return finite && psd_ok && inequality_ok; }
  std::string describe() const;
};

LindbladSystem build_system(const LindbladOperatorSet& ops);
ValidationReport validate_system(const LindbladSystem& sys);

/// Jump operators realizing (A, b): the Hermitian matrix A + (i/2)[b]_x is
/// factored into rank-one terms.  Requires a valid system.
LindbladOperatorSet operators_for(const LindbladSystem& sys);

/// Pauli matrices sigma_x, sigma_y, sigma_z.
const std::array<Mat2c, 3>& pauli();
Mat2c pauli_combination(const Vec3c& coeffs);
Mat2c pauli_combination(const Vec3& coeffs);

class DensityMatrix {
 public:
  /// Validates hermiticity, unit trace and spectrum; throws
  /// std::invalid_argument otherwise.
  explicit DensityMatrix(const Mat2c& rho);
  const Mat2c& matrix() const { return rho_; }
  double purity() const;

 private:
  Mat2c rho_;
};

/// A point of the Bloch ball as radius plus direction.  At r = 0 the
/// direction is optional; it tags the branch of a trajectory passing
/// through the completely mixed state.
class BlochState {
 public:
  static BlochState at(double r, const Vec3& n_hat);
  static BlochState origin(std::optional<Vec3> direction = std::nullopt);
  static BlochState from_vector(const Vec3& n);

  double r() const { return r_; }
  bool has_direction() const { return direction_.has_value(); }
  /// Throws std::logic_error at the origin without direction tag.
  const Vec3& n_hat() const;
  const std::optional<Vec3>& direction() const { return direction_; }
  Vec3 vector() const;

 private:
  BlochState(double r, std::optional<Vec3> d) : r_(r), direction_(std::move(d)) {}
  double r_;
  std::optional<Vec3> direction_;
};

DensityMatrix bloch_to_density(const BlochState& s);
BlochState density_to_bloch(const DensityMatrix& rho);

/// Pauli coordinates Tr(X sigma_j) of a 2x2 matrix.
Vec3 pauli_coordinates(const Mat2c& x);

/// Tr(rho^2) for a state of radius r.
inline double purity_at_radius(double r) { return 0.5 * (1.0 + r * r); }

}  // namespace bloch
