#pragma once

// Control Hamiltonians that move the state along a prescribed curve
// r -> n_hat(r).  With dn_hat/dtau = m f required, the transverse equation
// gives h x n_hat = m f - b_perp / r - (A n_hat)_perp, hence
//   h = c n_hat + n_hat x (m f - b / r - A n_hat)
// for an arbitrary gauge c.  Times are in the Bloch-ODE time tau.

#include "bloch/dynamics.hpp"
#include "bloch/threads.hpp"

#include <functional>
#include <stdexcept>
#include <vector>

namespace bloch {

/// Requires r > 0 and m orthogonal to n_hat.
HamiltonianVector hamiltonian_for(const LindbladSystem& sys, double r, const Vec3& n_hat,
                                  const Vec3& m, double c = 0.0);

/// Limit of hamiltonian_for at the origin for a curve leaving the origin
/// along n_hat0 = +-b_hat with initial tangent m0 (n_hat x b / r -> m0 x b).
HamiltonianVector hamiltonian_at_origin(const LindbladSystem& sys, const Vec3& n_hat0,
                                        const Vec3& m0, double c = 0.0);

using GaugeProfile = std::function<double(double r)>;

struct PlanPoint {
  double r = 0.0;
  double tau = 0.0;
  Vec3 n_hat = Vec3::UnitX();
  Vec3 m = Vec3::Zero();
  double f = 0.0;
  HamiltonianVector h;
};

struct PlanSegment {
  /// +1: r increases along the segment (f > 0); -1: r decreases.
  int direction = 1;
  /// In travel order; tau starts at zero.
  std::vector<PlanPoint> points;
};

struct Plan {
  std::vector<PlanSegment> segments;
  /// Radii where f changes sign along the thread; each splits the plan.
  std::vector<double> crossings;
};

class PlanError : public std::runtime_error {
 public:
  enum class Kind { FIsZeroOnThread, ResidualTooLarge };
  PlanError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct PlanOptions {
  /// +1: the plan must leave the smallest radius of the thread outwards;
  /// -1: it must leave the largest radius inwards; 0: no requirement.
  int direction = 0;
  GaugeProfile gauge;
  /// Largest accepted criticality residual; defaults to 1e-6 * scale.
  std::optional<double> residual_tol;
};

/// Per-sample Hamiltonians and tau(r) = int dr / f.  The thread is split
/// into segments of constant sign of f; sign changes are listed in
/// crossings.  Throws PlanError(FIsZeroOnThread) when the requested direction
/// is impossible at the start of the thread.
Plan plan_trajectory(const LindbladSystem& sys, const Thread& thread, const PlanOptions& opts = {});

/// Bloch-ODE simulation with state feedback: at every stage
/// h = hamiltonian_for(r, n_hat, m(r, n_hat), gauge(r)) with m from the
/// thread feedback field.  Returns the states after each step.
std::vector<Vec3> simulate_feedback_plan(const LindbladSystem& sys, const Vec3& n0, double tau_end,
                                         double dtau, const GaugeProfile& gauge = {});

struct ReplaySample {
  double r = 0.0;
  /// Angle between the replayed direction and the thread at the same radius.
  double angle = 0.0;
};

/// Propagates the density matrix from the thread point at r_start through
/// the full matrix equation with H = h(r(rho)) taken from the thread, until
/// r reaches r_stop.  dtau defaults to default_oracle_step(sys).
std::vector<ReplaySample> replay_through_density(const LindbladSystem& sys, const Thread& thread,
                                                 double r_start, double r_stop,
                                                 std::optional<double> dtau = std::nullopt,
                                                 const GaugeProfile& gauge = {});

}  // namespace bloch
