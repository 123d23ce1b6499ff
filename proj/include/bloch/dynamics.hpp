#pragma once

// Bloch-vector form of the Lindblad equation and its radial/transverse split.
//
// Conventions
//   * Hamiltonian: H = h_0 I + sum_j h_j sigma_j; h_0 is irrelevant and fixed
//     to zero.
//   * Time: the reduced ODE dn/dtau = b + h x n + (A - tr A) n is written in
//     the rescaled time tau = 2 t, where t is the time of the matrix equation
//     d rho/dt = -i[H, rho] + sum_m (L rho L^+ - {L^+ L, rho}/2) with
//     L_m = sum_j l_{m,j} sigma_j.  With these two conventions the reduction is
//     exact, which the density-matrix oracle below checks.

#include "bloch/system_model.hpp"

#include <functional>

namespace bloch {

/// Traceless Hamiltonian part h (angular-rate units).
struct HamiltonianVector {
  Vec3 h = Vec3::Zero();
};

/// d(tau)/d(t) between the Bloch-ODE time and the matrix-equation time.
inline constexpr double kBlochTimeScale = 2.0;

/// dn/dtau = b + h x n + (A - tr(A) I) n.
Vec3 bloch_rhs(const LindbladSystem& sys, const HamiltonianVector& h, const Vec3& n);

struct VelocitySplit {
  double radial = 0.0;
  Vec3 transverse = Vec3::Zero();
};

/// f(n_hat, r) = b.n_hat + r (n_hat^T A n_hat - tr A).  At the origin the
/// direction tag selects the branch; without a tag the outward limit |b| is
/// returned.
double radial_velocity(const LindbladSystem& sys, const BlochState& s);

/// Convenience overload for hot loops; r may be any value.
double radial_velocity(const LindbladSystem& sys, double r, const Vec3& n_hat);

/// d n_hat/dtau = b_perp / r + h x n_hat + (A n_hat)_perp.  Requires r > 0.
Vec3 transverse_velocity(const LindbladSystem& sys, const HamiltonianVector& h,
                         const BlochState& s);

/// Limit of d n_hat/dtau on a trajectory crossing the origin, evaluated just
/// after (sign = +1) or just before (sign = -1) the crossing:
/// sign * (h x b_hat + (A b_hat)_perp) / 2.
Vec3 transverse_velocity_through_origin(const LindbladSystem& sys, const HamiltonianVector& h,
                                        int sign);

VelocitySplit split_velocity(const LindbladSystem& sys, const HamiltonianVector& h,
                             const BlochState& s);

/// Matrix Hamiltonian sum_j h_j sigma_j.
Mat2c hamiltonian_matrix(const HamiltonianVector& h);

/// d rho/dt of the matrix Lindblad equation (physical time).
Mat2c lindblad_rhs_density(const LindbladOperatorSet& ops, const Mat2c& hamiltonian,
                           const Mat2c& rho);

/// Bloch image of the matrix generator in tau time: Tr(sigma_j d rho/dtau).
/// Independent route to bloch_rhs.
Vec3 reduced_generator_from_density(const LindbladOperatorSet& ops, const HamiltonianVector& h,
                                    const Vec3& n);

/// Fixed-step RK4 propagation of the matrix equation in tau time.  The
/// Hamiltonian may depend on the current state (feedback-style control).
class DensityPropagator {
 public:
  using Control = std::function<HamiltonianVector(const Mat2c& rho)>;

  DensityPropagator(LindbladOperatorSet ops, Control control)
      : ops_(std::move(ops)), control_(std::move(control)) {}

  /// Advances rho by dtau (Bloch-ODE time units).
  Mat2c step(const Mat2c& rho, double dtau) const;

 private:
  Mat2c rhs(const Mat2c& rho) const;

  LindbladOperatorSet ops_;
  Control control_;
};

/// Default oracle step: 1e-4 / max(1, a_1).
double default_oracle_step(const LindbladSystem& sys);

}  // namespace bloch
