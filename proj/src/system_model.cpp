#include "bloch/system_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bloch {

namespace {

// Deterministic sign: first component of non-negligible magnitude positive.
void fix_sign(Eigen::Ref<Vec3> v) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(v[i]) > 1e-12) {
      if (v[i] < 0) v = -v;
      return;
    }
  }
}

}  // namespace

int DegeneracyPattern::group_size(int g) const {
  return static_cast<int>(std::count(group.begin(), group.end(), g));
}

bool DegeneracyPattern::group_drift_free(int g) const {
  for (int j = 0; j < 3; ++j)
    if (group[j] == g && !b_zero[j]) return false;
  return true;
}

LindbladSystem::LindbladSystem(const Mat3& a, const Vec3& b)
    : a_(0.5 * (a + a.transpose())), b_(b) {
  decompose();
}

LindbladSystem LindbladSystem::from_diagonal(const Vec3& a_diag, const Vec3& b) {
  return LindbladSystem(a_diag.asDiagonal().toDenseMatrix(), b);
}

double LindbladSystem::scale() const {
  return std::max({1.0, std::abs(eigenvalues_[0]), b_.norm()});
}

bool LindbladSystem::unital() const {
  return pattern_.b_zero[0] && pattern_.b_zero[1] && pattern_.b_zero[2];
}

double eigen_equal_threshold(const LindbladSystem& sys) {
  return 1e-9 * std::max(1.0, sys.eigenvalues()[0]);
}

double b_zero_threshold(double b_norm) { return 1e-9 * std::max(1.0, b_norm); }

void LindbladSystem::decompose() {
  Eigen::SelfAdjointEigenSolver<Mat3> solver(a_);
  // Solver returns ascending order; store descending.
  for (int j = 0; j < 3; ++j) {
    eigenvalues_[j] = solver.eigenvalues()[2 - j];
    eigenvectors_.col(j) = solver.eigenvectors().col(2 - j);
    fix_sign(eigenvectors_.col(j));
  }

  const double eq_tol = 1e-9 * std::max(1.0, eigenvalues_[0]);
  pattern_ = DegeneracyPattern{};
  int gid = 0;
  pattern_.group[0] = 0;
  for (int j = 1; j < 3; ++j) {
    if (std::abs(eigenvalues_[j - 1] - eigenvalues_[j]) > eq_tol) ++gid;
    pattern_.group[j] = gid;
  }
  pattern_.group_count = gid + 1;

  const double zero_tol = b_zero_threshold(b_.norm());
  for (int g = 0; g < pattern_.group_count; ++g) {
    std::vector<int> members;
    for (int j = 0; j < 3; ++j)
      if (pattern_.group[j] == g) members.push_back(j);
    if (members.size() < 2) continue;

    double mean = 0.0;
    for (int j : members) mean += eigenvalues_[j];
    mean /= static_cast<double>(members.size());
    for (int j : members) eigenvalues_[j] = mean;

    Vec3 proj = Vec3::Zero();
    for (int j : members) proj += eigenvectors_.col(j).dot(b_) * eigenvectors_.col(j);
    if (proj.norm() <= zero_tol) continue;

    const Vec3 first = proj.normalized();
    if (members.size() == 2) {
      // The remaining direction of the group plane.
      const int other = 3 - members[0] - members[1];
      Vec3 second = eigenvectors_.col(other).cross(first).normalized();
      fix_sign(second);
      eigenvectors_.col(members[0]) = first;
      eigenvectors_.col(members[1]) = second;
    } else {
      Eigen::Matrix<double, 3, 2> t = tangent_basis(first);
      Vec3 second = t.col(0);
      fix_sign(second);
      Vec3 third = first.cross(second);
      fix_sign(third);
      eigenvectors_.col(0) = first;
      eigenvectors_.col(1) = second;
      eigenvectors_.col(2) = third;
    }
  }

  b_eigen_ = eigenvectors_.transpose() * b_;
  for (int j = 0; j < 3; ++j) {
    pattern_.b_zero[j] = std::abs(b_eigen_[j]) <= zero_tol;
    if (pattern_.b_zero[j]) b_eigen_[j] = 0.0;
  }
}

std::string ValidationReport::describe() const {
  std::ostringstream os;
  os.precision(6);
  if (!finite) os << "non-finite entries in A or b; ";
  os << "PSD check " << (psd_ok ? "passed" : "FAILED") << " (min eigenvalue " << min_eigenvalue
     << ", tolerance " << psd_tolerance << "); ";
  os << "4 det A - b^T A b = " << inequality_margin << " "
     << (inequality_ok ? "passed" : "FAILED") << " (tolerance " << inequality_tolerance << ")";
  return os.str();
}

LindbladSystem build_system(const LindbladOperatorSet& ops) {
  Mat3 a = Mat3::Zero();
  Vec3 b = Vec3::Zero();
  const Complex i(0.0, 1.0);
  for (const Vec3c& l : ops.operators) {
    if (!l.allFinite()) throw std::invalid_argument("Lindblad operator has non-finite coefficients");
    a += (l * l.adjoint()).real();
    // Eigen conjugates the left operand of a complex cross product; spell it out.
    const Vec3c lc = l.conjugate();
    const Vec3c x(l[1] * lc[2] - l[2] * lc[1], l[2] * lc[0] - l[0] * lc[2], l[0] * lc[1] - l[1] * lc[0]);
    b += (i * x).real();
  }
  LindbladSystem sys(a, b);
  // Physical by construction; a failure here is a bug, not bad input.
  if (!validate_system(sys).ok())
    throw std::logic_error("build_system produced an unphysical system: " +
                           validate_system(sys).describe());
  return sys;
}

ValidationReport validate_system(const LindbladSystem& sys) {
  ValidationReport rep;
  rep.finite = sys.A().allFinite() && sys.b().allFinite();
  if (!rep.finite) {
    rep.psd_ok = rep.inequality_ok = false;
    return rep;
  }
  const Vec3& a = sys.eigenvalues();
  rep.min_eigenvalue = a[2];
  rep.psd_tolerance = 1e-10 * std::max(0.0, a[0]);
  rep.psd_ok = a[2] >= -rep.psd_tolerance;

  // Unsnapped eigen-frame drift keeps the margin exact for tiny components.
  const Vec3 b_raw = sys.eigenvectors().transpose() * sys.b();
  const double quad = a[0] * b_raw[0] * b_raw[0] + a[1] * b_raw[1] * b_raw[1] +
                      a[2] * b_raw[2] * b_raw[2];
  rep.inequality_margin = 4.0 * a[0] * a[1] * a[2] - quad;
  const double s = std::max(std::abs(a[0]), sys.b().norm());
  rep.inequality_tolerance = 1e-8 * s * s * s;
  rep.inequality_ok = rep.inequality_margin >= -rep.inequality_tolerance;
  return rep;
}

LindbladOperatorSet operators_for(const LindbladSystem& sys) {
  const Vec3& b = sys.b();
  Mat3 cross;
  cross << 0, -b[2], b[1], b[2], 0, -b[0], -b[1], b[0], 0;
  Eigen::Matrix3cd gks = sys.A().cast<Complex>() + Complex(0.0, 0.5) * cross.cast<Complex>();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> solver(gks);
  LindbladOperatorSet ops;
  for (int k = 0; k < 3; ++k) {
    const double lam = solver.eigenvalues()[k];
    if (lam <= 0.0) continue;
    ops.operators.push_back(std::sqrt(lam) * solver.eigenvectors().col(k));
  }
  return ops;
}

const std::array<Mat2c, 3>& pauli() {
  static const std::array<Mat2c, 3> s = [] {
    std::array<Mat2c, 3> m;
    const Complex i(0.0, 1.0);
    m[0] << 0, 1, 1, 0;
    m[1] << 0, -i, i, 0;
    m[2] << 1, 0, 0, -1;
    return m;
  }();
  return s;
}

Mat2c pauli_combination(const Vec3c& c) {
  const auto& s = pauli();
  return c[0] * s[0] + c[1] * s[1] + c[2] * s[2];
}

Mat2c pauli_combination(const Vec3& c) { return pauli_combination(Vec3c(c.cast<Complex>())); }

Vec3 pauli_coordinates(const Mat2c& x) {
  const auto& s = pauli();
  return Vec3((x * s[0]).trace().real(), (x * s[1]).trace().real(), (x * s[2]).trace().real());
}

DensityMatrix::DensityMatrix(const Mat2c& rho) : rho_(rho) {
  if (!rho.allFinite()) throw std::invalid_argument("density matrix has non-finite entries");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("density matrix is not Hermitian");
  if (std::abs(rho.trace() - Complex(1.0, 0.0)) > 1e-12)
    throw std::invalid_argument("density matrix trace differs from 1");
  Eigen::SelfAdjointEigenSolver<Mat2c> solver(rho);
  const auto& ev = solver.eigenvalues();
  if (ev.minCoeff() < -1e-10 || ev.maxCoeff() > 1.0 + 1e-10)
    throw std::invalid_argument("density matrix eigenvalues outside [0, 1]");
}

double DensityMatrix::purity() const { return (rho_ * rho_).trace().real(); }

BlochState BlochState::at(double r, const Vec3& n_hat) {
  if (!(r >= 0.0) || r > 1.0 + 1e-9) throw std::invalid_argument("Bloch radius outside [0, 1]");
  const double len = n_hat.norm();
  if (!(len > 0.0) || !std::isfinite(len)) throw std::invalid_argument("direction must be a finite nonzero vector");
  return BlochState(r, n_hat / len);
}

BlochState BlochState::origin(std::optional<Vec3> direction) {
  if (direction) {
    const double len = direction->norm();
    if (!(len > 0.0)) throw std::invalid_argument("origin direction tag must be nonzero");
    *direction /= len;
  }
  return BlochState(0.0, std::move(direction));
}

BlochState BlochState::from_vector(const Vec3& n) {
  const double r = n.norm();
  if (r == 0.0) return origin();
  return at(r, n / r);
}

const Vec3& BlochState::n_hat() const {
  if (!direction_) throw std::logic_error("Bloch state at the origin carries no direction");
  return *direction_;
}

Vec3 BlochState::vector() const { return direction_ ? Vec3(r_ * *direction_) : Vec3::Zero(); }

DensityMatrix bloch_to_density(const BlochState& s) {
  Mat2c rho = 0.5 * (Mat2c::Identity() + pauli_combination(s.vector()));
  return DensityMatrix(rho);
}

BlochState density_to_bloch(const DensityMatrix& rho) {
  return BlochState::from_vector(pauli_coordinates(rho.matrix()));
}

}  // namespace bloch
