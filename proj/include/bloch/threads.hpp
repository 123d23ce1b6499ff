#pragma once

// Criticality-preserving continuation of optima of f_r in the radius r.
//
// Differentiating the criticality condition along r gives, for m = dn_hat/dr,
//   2 A n_hat + Lambda m = k n_hat,   Lambda = 2 r A - C,
//   C = n_hat . (b + 2 r A n_hat),
// solved as m = Lambda^{-1} (k - 2A) n_hat with
//   k = 2 (n_hat^T Lambda^{-1} A n_hat) / (n_hat^T Lambda^{-1} n_hat).
// Threads start at (0, +-b_hat) and are integrated with the Lie-group
// Runge-Kutta scheme of lie_rk.hpp.

#include "bloch/critical_points.hpp"

#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace bloch {

struct FeedbackState {
  double r = 0.0;
  Vec3 n_hat = Vec3::UnitX();
  double C = 0.0;
  Mat3 Lambda = Mat3::Zero();
  double k = 0.0;
  Vec3 m = Vec3::Zero();
};

struct FeedbackFailure {
  enum class Kind { SingularLambda, KDenominatorVanished };
  Kind kind = Kind::SingularLambda;
  /// Offending eigen index of Lambda (SingularLambda only).
  int eigen_index = -1;
  /// Smallest |eigenvalue of Lambda| or the k denominator.
  double value = 0.0;
};

using FeedbackResult = std::variant<FeedbackState, FeedbackFailure>;

FeedbackResult feedback(const LindbladSystem& sys, double r, const Vec3& n_hat);

/// Outcome of the degenerate-case analysis behind a feedback failure.
struct SpecialFeedback {
  enum class Case {
    ConstantF,          // A = aI, b = 0: every direction is critical
    MainAxis,           // n_hat is an eigenvector of A: m = 0 satisfies the raw equation
    TangentRestricted,  // solved on the tangent plane; Lambda degenerate orthogonal to n_hat
    SpecialLine,        // point of an affine line of critical points, free component unbounded near its tangency
    Unresolvable
  };
  Case kind = Case::Unresolvable;
  std::optional<Vec3> m;
  FeedbackFailure failure;
};

std::string_view to_string(SpecialFeedback::Case c);

SpecialFeedback handle_special_cases(const LindbladSystem& sys, double r, const Vec3& n_hat,
                                     const FeedbackFailure& failure);

/// m from the regular formula or, on failure, from the special handlers.
std::optional<Vec3> thread_tangent(const LindbladSystem& sys, double r, const Vec3& n_hat);

/// Tangent of the affine critical line through offset + t * direction
/// (Bloch-vector coordinates) at the point r n_hat of that line.
Vec3 special_line_tangent(const Vec3& offset, const Vec3& direction, double r, const Vec3& n_hat);

enum class ThreadKind { Maximizing, Minimizing, Alternate, SpecialLine, ChimneyGenerator };
std::string_view to_string(ThreadKind k);

enum class Termination {
  ReachedBoundary,       // r = 1 (or r = 0 when integrating inwards)
  SingularLambda,        // unresolved singular Lambda
  KDenominatorVanished,  // tangency with a concentric sphere
  LeftBall,
  ApogeeReached,         // chimney: |v_perp| vanished
  ErrorThreshold         // chimney: |f| exceeded the threshold
};
std::string_view to_string(Termination t);

struct ThreadSample {
  double r = 0.0;
  Vec3 n_hat = Vec3::UnitX();
  double residual = 0.0;
  double f = 0.0;
};

struct Thread {
  ThreadKind kind = ThreadKind::Maximizing;
  std::vector<ThreadSample> samples;
  Termination termination = Termination::ReachedBoundary;
  /// Alternate threads sharing a tangency point share a family id.
  int family = -1;
  /// Chimney generators: initial angle theta.
  double theta = 0.0;

  double max_residual() const;
  /// n_hat at radius r by cubic Hermite interpolation on the sphere; nullopt
  /// outside the sampled range.
  std::optional<Vec3> direction_at(const LindbladSystem& sys, double r) const;
  double r_min() const;
  double r_max() const;
};

struct ThreadOptions {
  double dr = 1e-3;
  /// Target radius; defaults to the ball boundary in the integration direction.
  std::optional<double> r_end;
  /// Steps whose criticality residual exceeds this are retried with half the
  /// step; defaults to 1e-8 * (|b| + 2 a_1).
  std::optional<double> residual_tol;
  /// Smallest step as a fraction of dr before the thread is terminated.
  double min_step_fraction = 1.0 / (1 << 20);
};

/// Integrates the feedback ODE from a critical start point in the direction
/// sign(direction) of r.
Thread integrate_thread(const LindbladSystem& sys, double r0, const Vec3& n0, int direction,
                        ThreadKind kind, const ThreadOptions& opts = {});

/// Maximizing and minimizing threads from (0, +-b_hat).  Empty for b = 0.
std::vector<Thread> main_threads(const LindbladSystem& sys, const ThreadOptions& opts = {});

struct AlternateOptions {
  ThreadOptions thread;
  /// Seeds are taken this many steps dr away from the tangency radius.
  double seed_steps = 5.0;
};

/// Alternate threads: special lines of the degenerate cases plus, for every
/// tangency point inside the ball, the two branches leaving it.  Seeding
/// solves the degree-six polynomial once per branch.
std::vector<Thread> alternate_threads(const LindbladSystem& sys, const AlternateOptions& opts = {});

/// Minimum distance between the Bloch-vector curves of two threads.
double thread_distance(const Thread& a, const Thread& b);

}  // namespace bloch
