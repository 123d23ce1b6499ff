#pragma once

// The chimney: the region of the Bloch ball where f > 0.  Its wall, the zero
// set of f_r, is the ellipsoid
//   n^T (tr(A) I - A) n - b . n = 0,
// which passes through the origin.  Generators start on the circle
// {n_hat : n_hat . b = 0} at r = 0 and follow dn_hat/dr = m with
//   m = (tr A - n_hat^T A n_hat) / (|v|^2 - (n_hat . v)^2) (v - (n_hat . v) n_hat),
//   v = b + 2 r A n_hat,
// which keeps f = 0 and has no component along n_hat x v.

#include "bloch/threads.hpp"

#include <optional>
#include <variant>
#include <vector>

namespace bloch {

struct ApogeeReached {
  /// |v|^2 - (n_hat . v)^2 at the failing point.
  double denominator = 0.0;
};

using ChimneyFeedbackResult = std::variant<Vec3, ApogeeReached>;

/// Default denominator threshold: 1e-14 * scale^2.
double default_apogee_tolerance(const LindbladSystem& sys);

ChimneyFeedbackResult chimney_feedback(const LindbladSystem& sys, double r, const Vec3& n_hat,
                                       std::optional<double> apogee_tol = std::nullopt);

struct ChimneyOptions {
  int theta_count = 36;
  double dr = 1e-3;
  /// Generators stop once |f| would exceed this.
  double f_threshold = 1e-3;
  /// Steps raising |f| by more than drift_tol * (step / dr) are retried with
  /// half the step; this is what localizes the apogee.
  double drift_tol = 1e-9;
  /// Smallest step as a fraction of dr.
  double min_step_fraction = 1.0 / (1ull << 30);
  std::optional<double> apogee_tol;
};

struct ChimneyApogee {
  double r = 0.0;
  Vec3 n_hat = Vec3::UnitX();
  /// Indices into ChimneyMesh::generators ending in this cluster.
  std::vector<int> members;
  /// Index into the thread list passed to match_apogees().
  std::optional<int> matched_thread;
  double match_distance = 0.0;
};

struct ChimneyMesh {
  int theta_count = 36;
  /// Orthonormal basis of the plane orthogonal to b; c_theta = cos u + sin w.
  Vec3 u = Vec3::UnitX();
  Vec3 w = Vec3::UnitY();
  std::vector<Thread> generators;
  std::vector<ChimneyApogee> apogees;
};

/// Initial-circle basis: u = e1 x b_hat normalized (e2 x b_hat when b is
/// nearly along e1), w = b_hat x u.
std::pair<Vec3, Vec3> chimney_circle_basis(const Vec3& b);

/// One generator from angle theta.
Thread trace_generator(const LindbladSystem& sys, double theta, const ChimneyOptions& opts = {});

/// All generators plus apogees clustered from their endpoints (5 degrees).
/// Requires b != 0.
ChimneyMesh trace_chimney(const LindbladSystem& sys, const ChimneyOptions& opts = {});

/// Matches each apogee to the closest thread (Bloch-vector distance at the
/// apogee radius) within max_distance.
void match_apogees(const LindbladSystem& sys, ChimneyMesh& mesh, const std::vector<Thread>& threads,
                   double max_distance = 1e-2);

/// n^T (tr(A) I - A) n - b . n, equal to -r f_r(n_hat) for n = r n_hat:
/// positive outside the chimney, negative inside, zero on the wall.
double chimney_ellipsoid_residual(const LindbladSystem& sys, const Vec3& n);

/// Right-hand side of the centred ellipsoid form, sum_j b_j^2 / (4 (tr A - a_j)),
/// used to make the residual relative.  Falls back to max(1, |b|^2) when some
/// tr A - a_j vanishes.
double chimney_ellipsoid_scale(const LindbladSystem& sys);

enum class PurityTrend { Rising, Falling, OnWall };
std::string_view to_string(PurityTrend t);

/// Sign of f with a dead band |f| <= f_tol (default 1e-12 * scale).
PurityTrend classify_point(const LindbladSystem& sys, const BlochState& s,
                           std::optional<double> f_tol = std::nullopt);

}  // namespace bloch
