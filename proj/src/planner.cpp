#include "bloch/planner.hpp"

#include <algorithm>
#include <cmath>

namespace bloch {

HamiltonianVector hamiltonian_for(const LindbladSystem& sys, double r, const Vec3& n_hat,
                                  const Vec3& m, double c) {
  if (!(r > 0.0)) throw std::domain_error("hamiltonian_for requires r > 0");
  const double f = radial_velocity(sys, r, n_hat);
  const Vec3 q = m * f - sys.b() / r - sys.A() * n_hat;
  return {c * n_hat + n_hat.cross(q)};
}

HamiltonianVector hamiltonian_at_origin(const LindbladSystem& sys, const Vec3& n_hat0,
                                        const Vec3& m0, double c) {
  const double f = radial_velocity(sys, 0.0, n_hat0);
  return {c * n_hat0 + n_hat0.cross(m0 * f - sys.A() * n_hat0) - m0.cross(sys.b())};
}

namespace {

Vec3 sample_tangent(const LindbladSystem& sys, const std::vector<ThreadSample>& s, std::size_t i) {
  if (auto m = thread_tangent(sys, s[i].r, s[i].n_hat); m && m->allFinite()) return *m;
  // Tangency points: one-sided difference of the neighbouring samples.
  const std::size_t lo = i > 0 ? i - 1 : i, hi = i + 1 < s.size() ? i + 1 : i;
  if (hi == lo) return Vec3::Zero();
  return perp((s[hi].n_hat - s[lo].n_hat) / (s[hi].r - s[lo].r), s[i].n_hat);
}

}  // namespace

Plan plan_trajectory(const LindbladSystem& sys, const Thread& thread, const PlanOptions& opts) {
  if (thread.samples.empty()) throw std::invalid_argument("empty thread");
  std::vector<ThreadSample> s = thread.samples;
  std::sort(s.begin(), s.end(), [](const ThreadSample& x, const ThreadSample& y) { return x.r < y.r; });

  const double res_tol = opts.residual_tol.value_or(1e-6 * sys.scale());
  if (thread.kind != ThreadKind::ChimneyGenerator)
    for (const auto& p : s)
      if (criticality_residual(sys, p.r, p.n_hat) > res_tol)
        throw PlanError(PlanError::Kind::ResidualTooLarge,
                        "thread residual exceeds tolerance at r = " + std::to_string(p.r));

  const double f_tol = 1e-12 * sys.scale();
  std::vector<double> f(s.size());
  std::vector<int> sgn(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    f[i] = radial_velocity(sys, s[i].r, s[i].n_hat);
    sgn[i] = f[i] > f_tol ? 1 : (f[i] < -f_tol ? -1 : 0);
  }

  if (opts.direction != 0) {
    const std::size_t start = opts.direction > 0 ? 0 : s.size() - 1;
    if (sgn[start] != opts.direction)
      throw PlanError(PlanError::Kind::FIsZeroOnThread,
                      std::string(opts.direction > 0 ? "outward" : "inward") +
                          " plan impossible: f has the wrong sign at r = " +
                          std::to_string(s[start].r));
  }

  Plan plan;
  int prev = 0;
  std::size_t prev_i = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (sgn[i] == 0) continue;
    if (prev != 0 && sgn[i] != prev) {
      plan.crossings.push_back(s[prev_i].r + (s[i].r - s[prev_i].r) * f[prev_i] / (f[prev_i] - f[i]));
    }
    if (sgn[i] != prev) plan.segments.push_back({sgn[i], {}});
    PlanPoint pt;
    pt.r = s[i].r;
    pt.n_hat = s[i].n_hat;
    pt.f = f[i];
    pt.m = sample_tangent(sys, s, i);
    const double c = opts.gauge ? opts.gauge(pt.r) : 0.0;
    pt.h = pt.r > 1e-12 ? hamiltonian_for(sys, pt.r, pt.n_hat, pt.m, c)
                        : hamiltonian_at_origin(sys, pt.n_hat, pt.m, c);
    plan.segments.back().points.push_back(pt);
    prev = sgn[i];
    prev_i = i;
  }

  for (PlanSegment& seg : plan.segments) {
    if (seg.direction < 0) std::reverse(seg.points.begin(), seg.points.end());
    for (std::size_t i = 1; i < seg.points.size(); ++i) {
      const PlanPoint& a = seg.points[i - 1];
      PlanPoint& b = seg.points[i];
      b.tau = a.tau + 0.5 * (b.r - a.r) * (1.0 / a.f + 1.0 / b.f);
    }
  }
  return plan;
}

std::vector<Vec3> simulate_feedback_plan(const LindbladSystem& sys, const Vec3& n0, double tau_end,
                                         double dtau, const GaugeProfile& gauge) {
  auto rhs = [&](const Vec3& n) {
    const double r = n.norm();
    const Vec3 nh = n / r;
    const std::optional<Vec3> m = thread_tangent(sys, r, nh);
    if (!m) throw NumericalError("feedback undefined at r = " + std::to_string(r));
    return bloch_rhs(sys, hamiltonian_for(sys, r, nh, *m, gauge ? gauge(r) : 0.0), n);
  };
  std::vector<Vec3> out{n0};
  Vec3 n = n0;
  const long steps = std::lround(tau_end / dtau);
  for (long i = 0; i < steps; ++i) {
    const Vec3 k1 = rhs(n);
    const Vec3 k2 = rhs(n + 0.5 * dtau * k1);
    const Vec3 k3 = rhs(n + 0.5 * dtau * k2);
    const Vec3 k4 = rhs(n + dtau * k3);
    n += dtau / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.push_back(n);
  }
  return out;
}

std::vector<ReplaySample> replay_through_density(const LindbladSystem& sys, const Thread& thread,
                                                 double r_start, double r_stop,
                                                 std::optional<double> dtau,
                                                 const GaugeProfile& gauge) {
  const auto start_dir = thread.direction_at(sys, r_start);
  if (!start_dir) throw std::invalid_argument("r_start outside the thread");
  const double step = dtau.value_or(default_oracle_step(sys));
  const int dir = r_stop > r_start ? 1 : -1;

  auto control = [&](const Mat2c& rho) -> HamiltonianVector {
    const double r = pauli_coordinates(rho).norm();
    const auto nh = thread.direction_at(sys, r);
    if (!nh) throw NumericalError("replay left the thread range at r = " + std::to_string(r));
    const auto m = thread_tangent(sys, r, *nh);
    if (!m) throw NumericalError("thread feedback undefined at r = " + std::to_string(r));
    return hamiltonian_for(sys, r, *nh, *m, gauge ? gauge(r) : 0.0);
  };
  DensityPropagator prop(operators_for(sys), control);

  Mat2c rho = 0.5 * (Mat2c::Identity() + pauli_combination(Vec3(r_start * *start_dir)));
  std::vector<ReplaySample> out{{r_start, 0.0}};
  const long max_steps = 100000000;
  for (long i = 0; i < max_steps; ++i) {
    const Mat2c next = prop.step(rho, step);
    const Vec3 n = pauli_coordinates(next);
    const double r = n.norm();
    if (!n.allFinite()) throw NumericalError("density replay produced a non-finite state");
    if (dir * (r - r_stop) > 0.0) return out;
    if (dir * (r - out.back().r) <= 0.0)
      throw NumericalError("replay stalled at r = " + std::to_string(r));
    rho = next;
    const auto th = thread.direction_at(sys, r);
    out.push_back({r, th ? angle_between(n / r, *th) : std::numeric_limits<double>::infinity()});
  }
  throw NumericalError("density replay did not reach r_stop");
}

}  // namespace bloch
