#include "bloch/threads.hpp"

#include "bloch/dynamics.hpp"
#include "bloch/lie_rk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bloch {

namespace {

double lambda_tolerance(const LindbladSystem& sys, double r) {
  return 1e-10 * std::max(1.0, 2.0 * r * sys.eigenvalues()[0]);
}

ThreadSample make_sample(const LindbladSystem& sys, double r, const Vec3& n) {
  return {r, n, criticality_residual(sys, r, n), radial_velocity(sys, r, n)};
}

}  // namespace

FeedbackResult feedback(const LindbladSystem& sys, double r, const Vec3& n_hat) {
  const Vec3& a = sys.eigenvalues();
  const Vec3 ne = sys.to_eigen(n_hat);
  const Vec3 ane = a.cwiseProduct(ne);
  const double c = n_hat.dot(sys.b()) + 2.0 * r * ne.dot(ane);
  const Vec3 lam = 2.0 * r * a - Vec3::Constant(c);

  Eigen::Index jmin;
  const double smallest = lam.cwiseAbs().minCoeff(&jmin);
  if (smallest <= lambda_tolerance(sys, r))
    return FeedbackFailure{FeedbackFailure::Kind::SingularLambda, static_cast<int>(jmin), smallest};

  const Vec3 inv_n = ne.cwiseQuotient(lam);
  const Vec3 inv_an = ane.cwiseQuotient(lam);
  const double den = ne.dot(inv_n);
  const double mag = ne.cwiseProduct(ne).cwiseQuotient(lam.cwiseAbs()).sum();
  if (std::abs(den) <= 1e-10 * mag)
    return FeedbackFailure{FeedbackFailure::Kind::KDenominatorVanished, -1, den};

  FeedbackState st;
  st.r = r;
  st.n_hat = n_hat;
  st.C = c;
  st.Lambda = sys.eigenvectors() * lam.asDiagonal() * sys.eigenvectors().transpose();
  st.k = 2.0 * ne.dot(inv_an) / den;
  const Vec3 me = (st.k * ne - 2.0 * ane).cwiseQuotient(lam);
  st.m = perp(sys.to_world(me), n_hat);
  return st;
}

std::string_view to_string(SpecialFeedback::Case c) {
  switch (c) {
    case SpecialFeedback::Case::ConstantF: return "constant-f";
    case SpecialFeedback::Case::MainAxis: return "main-axis";
    case SpecialFeedback::Case::TangentRestricted: return "tangent-restricted";
    case SpecialFeedback::Case::SpecialLine: return "special-line";
    case SpecialFeedback::Case::Unresolvable: return "unresolvable";
  }
  return "?";
}

Vec3 special_line_tangent(const Vec3& offset, const Vec3& direction, double r, const Vec3& n_hat) {
  const double t = (r * n_hat - offset).dot(direction);
  return direction / t - n_hat / r;
}

SpecialFeedback handle_special_cases(const LindbladSystem& sys, double r, const Vec3& n_hat,
                                     const FeedbackFailure& failure) {
  SpecialFeedback out;
  out.failure = failure;
  const double a1 = std::max(1.0, sys.eigenvalues()[0]);

  if (sys.pattern().group_count == 1 && sys.unital()) {
    out.kind = SpecialFeedback::Case::ConstantF;
    out.m = Vec3::Zero();
    return out;
  }

  const Vec3 an = sys.A() * n_hat;
  if (perp(an, n_hat).norm() <= 1e-10 * a1 &&
      criticality_residual(sys, r, n_hat) <= 1e-8 * (sys.b().norm() + 2.0 * r * a1)) {
    out.kind = SpecialFeedback::Case::MainAxis;
    out.m = Vec3::Zero();
    return out;
  }

  if (r > 0.0) {
    const Vec3 n = r * n_hat;
    for (const SpecialCriticalSet& set : special_case_critical_sets(sys, r)) {
      if (set.kind != SpecialSetKind::Line || set.closest_radius() == 0.0) continue;
      const Vec3& dir = set.free_directions.front();
      const Vec3 d = n - set.offset;
      const double t = d.dot(dir);
      if (perp(d, dir).norm() <= 1e-9 * std::max(1.0, r) && std::abs(t) > 1e-9) {
        out.kind = SpecialFeedback::Case::SpecialLine;
        out.m = special_line_tangent(set.offset, dir, r, n_hat);
        return out;
      }
    }
  }

  // Tangent-plane form of 2 A n_hat + Lambda m = k n_hat: with m = P y the
  // tangential part reads (P^T Lambda P) y = -P^T 2 A n_hat.
  const Eigen::Matrix<double, 3, 2> p = tangent_basis(n_hat);
  const Eigen::Matrix2d hess = projected_hessian(sys, r, n_hat);
  const Eigen::Vector2d rhs = -2.0 * p.transpose() * an;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(hess);
  const double eta_tol = 1e-10 * std::max(1.0, sys.b().norm() + 2.0 * r * a1);
  const double rhs_tol = 1e-9 * 2.0 * a1;
  Eigen::Vector2d y = Eigen::Vector2d::Zero();
  for (int i = 0; i < 2; ++i) {
    const Eigen::Vector2d u = es.eigenvectors().col(i);
    const double eta = es.eigenvalues()[i];
    const double proj = u.dot(rhs);
    if (std::abs(eta) > eta_tol) {
      y += (proj / eta) * u;
    } else if (std::abs(proj) > rhs_tol) {
      out.kind = SpecialFeedback::Case::Unresolvable;
      return out;
    }
  }
  out.kind = SpecialFeedback::Case::TangentRestricted;
  out.m = p * y;
  return out;
}

std::optional<Vec3> thread_tangent(const LindbladSystem& sys, double r, const Vec3& n_hat) {
  FeedbackResult res = feedback(sys, r, n_hat);
  if (auto* st = std::get_if<FeedbackState>(&res)) return st->m;
  return handle_special_cases(sys, r, n_hat, std::get<FeedbackFailure>(res)).m;
}

std::string_view to_string(ThreadKind k) {
  switch (k) {
    case ThreadKind::Maximizing: return "maximizing";
    case ThreadKind::Minimizing: return "minimizing";
    case ThreadKind::Alternate: return "alternate";
    case ThreadKind::SpecialLine: return "special-line";
    case ThreadKind::ChimneyGenerator: return "chimney-generator";
  }
  return "?";
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::ReachedBoundary: return "reached-boundary";
    case Termination::SingularLambda: return "singular-lambda";
    case Termination::KDenominatorVanished: return "k-denominator-vanished";
    case Termination::LeftBall: return "left-ball";
    case Termination::ApogeeReached: return "apogee-reached";
    case Termination::ErrorThreshold: return "error-threshold";
  }
  return "?";
}

double Thread::max_residual() const {
  double m = 0.0;
  for (const auto& s : samples) m = std::max(m, s.residual);
  return m;
}

double Thread::r_min() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) m = std::min(m, s.r);
  return m;
}

double Thread::r_max() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& s : samples) m = std::max(m, s.r);
  return m;
}

std::optional<Vec3> Thread::direction_at(const LindbladSystem& sys, double r) const {
  if (samples.empty()) return std::nullopt;
  const bool ascending = samples.size() < 2 || samples.back().r > samples.front().r;
  auto before = [&](const ThreadSample& s, double x) { return ascending ? s.r < x : s.r > x; };
  auto it = std::lower_bound(samples.begin(), samples.end(), r, before);
  if (it == samples.end()) {
    if (std::abs(samples.back().r - r) <= 1e-12) return samples.back().n_hat;
    return std::nullopt;
  }
  if (it->r == r || it == samples.begin()) {
    if (std::abs(it->r - r) <= 1e-12) return it->n_hat;
    return std::nullopt;
  }
  const ThreadSample& s1 = *it;
  const ThreadSample& s0 = *(it - 1);
  const double span = s1.r - s0.r;
  const double t = (r - s0.r) / span;
  const auto m0 = thread_tangent(sys, s0.r, s0.n_hat);
  const auto m1 = thread_tangent(sys, s1.r, s1.n_hat);
  Vec3 p;
  if (m0 && m1 && m0->allFinite() && m1->allFinite()) {
    const double t2 = t * t, t3 = t2 * t;
    p = (2 * t3 - 3 * t2 + 1) * s0.n_hat + (t3 - 2 * t2 + t) * span * *m0 +
        (-2 * t3 + 3 * t2) * s1.n_hat + (t3 - t2) * span * *m1;
  } else {
    p = (1 - t) * s0.n_hat + t * s1.n_hat;
  }
  return p.normalized();
}

Thread integrate_thread(const LindbladSystem& sys, double r0, const Vec3& n0, int direction,
                        ThreadKind kind, const ThreadOptions& opts) {
  const double sign = direction >= 0 ? 1.0 : -1.0;
  const double r_end = opts.r_end.value_or(sign > 0 ? 1.0 : 0.0);
  const double tol = opts.residual_tol.value_or(
      std::max(1e-12, 1e-8 * (sys.b().norm() + 2.0 * sys.eigenvalues()[0])));
  if (!(r0 >= 0.0 && r0 <= 1.0)) throw std::invalid_argument("thread start radius outside [0, 1]");
  const Vec3 start = n0.normalized();
  if (criticality_residual(sys, r0, start) > tol)
    throw std::invalid_argument("thread start point is not critical");

  Thread th;
  th.kind = kind;
  th.samples.push_back(make_sample(sys, r0, start));

  std::optional<FeedbackFailure> last_failure;
  auto tangent = [&](double r, const Vec3& n) -> std::optional<Vec3> {
    FeedbackResult res = feedback(sys, r, n);
    if (auto* st = std::get_if<FeedbackState>(&res)) return st->m;
    const auto& fail = std::get<FeedbackFailure>(res);
    SpecialFeedback sp = handle_special_cases(sys, r, n, fail);
    if (!sp.m) last_failure = fail;
    return sp.m;
  };

  double r = r0;
  Vec3 n = start;
  double h = opts.dr;
  const double h_min = opts.dr * opts.min_step_fraction;
  const double snap = 1e-9 * opts.dr;
  while (sign * (r_end - r) > snap) {
    const double step = sign * std::min(h, std::abs(r_end - r));
    double r_next = r + step;
    // Keep full steps on the r0 + k dr grid so rounding never adds a sliver step.
    const double k = std::round((r_next - r0) / opts.dr);
    if (std::abs(r0 + k * opts.dr - r_next) <= snap) r_next = r0 + k * opts.dr;
    if (std::abs(r_end - r_next) <= snap || sign * (r_next - r_end) > 0.0) r_next = r_end;
    last_failure.reset();
    const std::optional<Vec3> next = rkmk4_step(tangent, r, n, r_next - r);
    if (next && criticality_residual(sys, r_next, *next) <= tol) {
      r = r_next;
      n = *next;
      th.samples.push_back(make_sample(sys, r, n));
      h = std::min(opts.dr, 2.0 * h);
      continue;
    }
    h *= 0.5;
    if (h < h_min) {
      th.termination = (last_failure && last_failure->kind == FeedbackFailure::Kind::SingularLambda)
                           ? Termination::SingularLambda
                           : Termination::KDenominatorVanished;
      return th;
    }
  }
  th.termination = Termination::ReachedBoundary;
  return th;
}

std::vector<Thread> main_threads(const LindbladSystem& sys, const ThreadOptions& opts) {
  if (sys.unital()) return {};
  const Vec3 bh = sys.b().normalized();
  std::vector<Thread> out;
  out.push_back(integrate_thread(sys, 0.0, bh, +1, ThreadKind::Maximizing, opts));
  out.push_back(integrate_thread(sys, 0.0, -bh, +1, ThreadKind::Minimizing, opts));
  return out;
}

std::vector<Thread> alternate_threads(const LindbladSystem& sys, const AlternateOptions& opts) {
  std::vector<Thread> out;
  int family = 0;
  const double dr = opts.thread.dr;

  for (const SpecialCriticalSet& set : special_case_critical_sets(sys, 1.0)) {
    if (set.kind != SpecialSetKind::Line) continue;
    const double r0 = set.closest_radius();
    if (r0 <= 1e-12 || r0 >= 1.0) continue;
    const Vec3& dir = set.free_directions.front();
    for (double branch : {1.0, -1.0}) {
      Thread th;
      th.kind = ThreadKind::SpecialLine;
      th.family = family;
      th.samples.push_back(make_sample(sys, r0, set.offset / r0));
      for (long j = static_cast<long>(std::floor(r0 / dr)) + 1; j * dr <= 1.0 + 1e-12; ++j) {
        const double r = std::min(1.0, j * dr);
        const double t = std::sqrt(std::max(0.0, r * r - r0 * r0));
        th.samples.push_back(make_sample(sys, r, (set.offset + branch * t * dir) / r));
      }
      out.push_back(std::move(th));
    }
    ++family;
  }

  const double delta = opts.seed_steps * dr;
  for (const TangencyPoint& tp : tangency_points(sys)) {
    if (!tp.inside_ball || tp.radius() <= 1e-12) continue;
    const double rt = tp.radius();
    const Vec3 nt = tp.n / rt;

    struct Side {
      double sign;
      double r;
      std::vector<Vec3> seeds;
      double score = std::numeric_limits<double>::infinity();
    };
    std::vector<Side> sides;
    for (double sgn : {1.0, -1.0}) {
      Side s{sgn, rt + sgn * delta, {}};
      if (s.r <= 0.0 || s.r > 1.0) continue;
      std::vector<CriticalPoint> pts = critical_points_at(sys, s.r);
      std::sort(pts.begin(), pts.end(), [&](const CriticalPoint& x, const CriticalPoint& y) {
        return angle_between(x.n_hat, nt) < angle_between(y.n_hat, nt);
      });
      if (pts.size() >= 2) {
        s.score = angle_between(pts[1].n_hat, nt);
        s.seeds = {pts[0].n_hat, pts[1].n_hat};
      }
      sides.push_back(std::move(s));
    }
    auto best = std::min_element(sides.begin(), sides.end(),
                                 [](const Side& x, const Side& y) { return x.score < y.score; });
    if (best == sides.end()) continue;
    if (!(best->score < 0.5))
      throw NumericalError("no critical-point pair near the tangency point at r = " +
                           std::to_string(rt));

    ThreadOptions topts = opts.thread;
    for (const Vec3& seed : best->seeds) {
      Thread branch = integrate_thread(sys, best->r, seed, static_cast<int>(best->sign),
                                       ThreadKind::Alternate, topts);
      branch.samples.insert(branch.samples.begin(), make_sample(sys, rt, nt));
      branch.family = family;
      out.push_back(std::move(branch));
    }
    ++family;
  }
  return out;
}

double thread_distance(const Thread& a, const Thread& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : a.samples)
    for (const auto& t : b.samples)
      best = std::min(best, (s.r * s.n_hat - t.r * t.n_hat).norm());
  return best;
}

}  // namespace bloch
