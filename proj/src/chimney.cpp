#include "bloch/chimney.hpp"

#include "bloch/dynamics.hpp"
#include "bloch/lie_rk.hpp"
#include "bloch/parallel.hpp"

#include <cmath>
#include <numbers>

namespace bloch {

double default_apogee_tolerance(const LindbladSystem& sys) {
  const double s = sys.scale();
  return 1e-14 * s * s;
}

ChimneyFeedbackResult chimney_feedback(const LindbladSystem& sys, double r, const Vec3& n_hat,
                                       std::optional<double> apogee_tol) {
  const Vec3 an = sys.A() * n_hat;
  const Vec3 v = sys.b() + 2.0 * r * an;
  const double nv = n_hat.dot(v);
  const double den = v.squaredNorm() - nv * nv;
  if (!(den > apogee_tol.value_or(default_apogee_tolerance(sys)))) return ApogeeReached{den};
  return Vec3((sys.trace() - n_hat.dot(an)) / den * (v - nv * n_hat));
}

std::pair<Vec3, Vec3> chimney_circle_basis(const Vec3& b) {
  const Vec3 bh = b.normalized();
  Vec3 u = Vec3::UnitX().cross(bh);
  if (u.norm() < 1e-3) u = Vec3::UnitY().cross(bh);
  u.normalize();
  return {u, bh.cross(u)};
}

Thread trace_generator(const LindbladSystem& sys, double theta, const ChimneyOptions& opts) {
  if (sys.unital()) throw std::invalid_argument("the chimney is degenerate for b = 0");
  const auto [u, w] = chimney_circle_basis(sys.b());

  Thread th;
  th.kind = ThreadKind::ChimneyGenerator;
  th.theta = theta;
  auto push = [&](double r, const Vec3& n) {
    th.samples.push_back({r, n, std::abs(chimney_ellipsoid_residual(sys, r * n)),
                          radial_velocity(sys, r, n)});
  };

  double r = 0.0;
  Vec3 n = (std::cos(theta) * u + std::sin(theta) * w).normalized();
  push(r, n);

  bool hit_apogee = false;
  auto tangent = [&](double rr, const Vec3& nn) -> std::optional<Vec3> {
    ChimneyFeedbackResult res = chimney_feedback(sys, rr, nn, opts.apogee_tol);
    if (auto* m = std::get_if<Vec3>(&res)) return *m;
    hit_apogee = true;
    return std::nullopt;
  };

  double h = opts.dr;
  const double h_min = opts.dr * opts.min_step_fraction;
  while (1.0 - r > 1e-14) {
    double r_next = r + std::min(h, 1.0 - r);
    if (1.0 - r_next <= 1e-14) r_next = 1.0;
    hit_apogee = false;
    bool over_threshold = false;
    const std::optional<Vec3> next = rkmk4_step(tangent, r, n, r_next - r);
    if (next) {
      const double f_old = std::abs(th.samples.back().f);
      const double f_new = std::abs(radial_velocity(sys, r_next, *next));
      over_threshold = !(f_new <= opts.f_threshold);
      const bool drifted = f_new > f_old + opts.drift_tol * (r_next - r) / opts.dr;
      if (!over_threshold && !drifted) {
        r = r_next;
        n = *next;
        push(r, n);
        h = std::min(opts.dr, 2.0 * h);
        continue;
      }
    }
    h *= 0.5;
    if (h < h_min) {
      th.termination = (over_threshold && !hit_apogee) ? Termination::ErrorThreshold
                                                       : Termination::ApogeeReached;
      return th;
    }
  }
  th.termination = Termination::ReachedBoundary;
  return th;
}

ChimneyMesh trace_chimney(const LindbladSystem& sys, const ChimneyOptions& opts) {
  if (sys.unital()) throw std::invalid_argument("the chimney is degenerate for b = 0");
  if (opts.theta_count < 1) throw std::invalid_argument("theta_count must be positive");
  ChimneyMesh mesh;
  mesh.theta_count = opts.theta_count;
  std::tie(mesh.u, mesh.w) = chimney_circle_basis(sys.b());
  mesh.generators.resize(opts.theta_count);
  parallel_for(opts.theta_count, [&](std::size_t j) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(j) / opts.theta_count;
    mesh.generators[j] = trace_generator(sys, theta, opts);
  });

  const double cluster_angle = 5.0 * std::numbers::pi / 180.0;
  for (int j = 0; j < opts.theta_count; ++j) {
    const Thread& g = mesh.generators[j];
    if (g.termination == Termination::ReachedBoundary) continue;
    const ThreadSample& end = g.samples.back();
    auto it = std::find_if(mesh.apogees.begin(), mesh.apogees.end(), [&](const ChimneyApogee& a) {
      const ThreadSample& first = mesh.generators[a.members.front()].samples.back();
      return angle_between(first.n_hat, end.n_hat) <= cluster_angle;
    });
    if (it == mesh.apogees.end()) {
      mesh.apogees.push_back({end.r, end.n_hat, {j}, std::nullopt, 0.0});
    } else {
      it->members.push_back(j);
      if (end.r > it->r) {
        it->r = end.r;
        it->n_hat = end.n_hat;
      }
    }
  }
  return mesh;
}

void match_apogees(const LindbladSystem& sys, ChimneyMesh& mesh, const std::vector<Thread>& threads,
                   double max_distance) {
  for (ChimneyApogee& a : mesh.apogees) {
    const Vec3 p = a.r * a.n_hat;
    a.matched_thread.reset();
    a.match_distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < threads.size(); ++i) {
      double d = std::numeric_limits<double>::infinity();
      if (auto dir = threads[i].direction_at(sys, a.r)) d = (a.r * *dir - p).norm();
      for (const ThreadSample& s : threads[i].samples) d = std::min(d, (s.r * s.n_hat - p).norm());
      if (d < a.match_distance) {
        a.match_distance = d;
        if (d <= max_distance) a.matched_thread = static_cast<int>(i);
      }
    }
  }
}

double chimney_ellipsoid_residual(const LindbladSystem& sys, const Vec3& n) {
  return sys.trace() * n.squaredNorm() - n.dot(sys.A() * n) - sys.b().dot(n);
}

double chimney_ellipsoid_scale(const LindbladSystem& sys) {
  const Vec3& a = sys.eigenvalues();
  const Vec3& beta = sys.b_eigen();
  double sum = 0.0;
  for (int j = 0; j < 3; ++j) {
    const double at = sys.trace() - a[j];
    if (at <= 1e-12 * std::max(1.0, a[0])) return std::max(1.0, sys.b().squaredNorm());
    sum += beta[j] * beta[j] / (4.0 * at);
  }
  return sum > 0.0 ? sum : 1.0;
}

std::string_view to_string(PurityTrend t) {
  switch (t) {
    case PurityTrend::Rising: return "purity_rising";
    case PurityTrend::Falling: return "purity_falling";
    case PurityTrend::OnWall: return "on_wall";
  }
  return "?";
}

PurityTrend classify_point(const LindbladSystem& sys, const BlochState& s,
                           std::optional<double> f_tol) {
  const double f = radial_velocity(sys, s);
  const double tol = f_tol.value_or(1e-12 * sys.scale());
  if (f > tol) return PurityTrend::Rising;
  if (f < -tol) return PurityTrend::Falling;
  return PurityTrend::OnWall;
}

}  // namespace bloch
