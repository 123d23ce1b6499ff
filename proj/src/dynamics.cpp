#include "bloch/dynamics.hpp"

#include <cmath>

namespace bloch {

Vec3 bloch_rhs(const LindbladSystem& sys, const HamiltonianVector& h, const Vec3& n) {
  return sys.b() + h.h.cross(n) + sys.A() * n - sys.trace() * n;
}

double radial_velocity(const LindbladSystem& sys, double r, const Vec3& n_hat) {
  return sys.b().dot(n_hat) + r * (n_hat.dot(sys.A() * n_hat) - sys.trace());
}

double radial_velocity(const LindbladSystem& sys, const BlochState& s) {
  if (!s.has_direction()) return sys.b().norm();
  return radial_velocity(sys, s.r(), s.n_hat());
}

Vec3 transverse_velocity(const LindbladSystem& sys, const HamiltonianVector& h,
                         const BlochState& s) {
  if (!(s.r() > 0.0))
    throw std::domain_error("transverse velocity is singular at r = 0; use the through-origin limit");
  const Vec3& u = s.n_hat();
  return perp(sys.b(), u) / s.r() + h.h.cross(u) + perp(sys.A() * u, u);
}

Vec3 transverse_velocity_through_origin(const LindbladSystem& sys, const HamiltonianVector& h,
                                        int sign) {
  const double bn = sys.b().norm();
  if (bn == 0.0) throw std::domain_error("no trajectory crosses the origin when b = 0");
  const Vec3 bh = sys.b() / bn;
  return 0.5 * static_cast<double>(sign) * (h.h.cross(bh) + perp(sys.A() * bh, bh));
}

VelocitySplit split_velocity(const LindbladSystem& sys, const HamiltonianVector& h,
                             const BlochState& s) {
  return {radial_velocity(sys, s), transverse_velocity(sys, h, s)};
}

Mat2c hamiltonian_matrix(const HamiltonianVector& h) { return pauli_combination(h.h); }

Mat2c lindblad_rhs_density(const LindbladOperatorSet& ops, const Mat2c& hamiltonian,
                           const Mat2c& rho) {
  const Complex i(0.0, 1.0);
  Mat2c out = -i * (hamiltonian * rho - rho * hamiltonian);
  for (const Vec3c& l : ops.operators) {
    const Mat2c L = pauli_combination(l);
    const Mat2c LdL = L.adjoint() * L;
    out += L * rho * L.adjoint() - 0.5 * (LdL * rho + rho * LdL);
  }
  return out;
}

Vec3 reduced_generator_from_density(const LindbladOperatorSet& ops, const HamiltonianVector& h,
                                    const Vec3& n) {
  const Mat2c rho = 0.5 * (Mat2c::Identity() + pauli_combination(n));
  const Mat2c dt = lindblad_rhs_density(ops, hamiltonian_matrix(h), rho);
  return pauli_coordinates(dt) / kBlochTimeScale;
}

Mat2c DensityPropagator::rhs(const Mat2c& rho) const {
  const HamiltonianVector h = control_ ? control_(rho) : HamiltonianVector{};
  return lindblad_rhs_density(ops_, hamiltonian_matrix(h), rho) / kBlochTimeScale;
}

Mat2c DensityPropagator::step(const Mat2c& rho, double dtau) const {
  const Mat2c k1 = rhs(rho);
  const Mat2c k2 = rhs(rho + 0.5 * dtau * k1);
  const Mat2c k3 = rhs(rho + 0.5 * dtau * k2);
  const Mat2c k4 = rhs(rho + dtau * k3);
  return rho + (dtau / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double default_oracle_step(const LindbladSystem& sys) {
  return 1e-4 / std::max(1.0, sys.eigenvalues()[0]);
}

}  // namespace bloch
