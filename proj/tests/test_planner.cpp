#include "bloch/planner.hpp"

#include "bloch/chimney.hpp"
#include "bloch/presets.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace bloch;

TEST_CASE("reconstructed Hamiltonian produces the requested transverse motion") {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> ur(0.05, 1.0);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int i = 0; i < 500; ++i) {
    const LindbladSystem sys = testing::random_system(rng);
    const double r = ur(rng);
    const Vec3 nh = testing::random_unit(rng);
    const Vec3 m = perp(Vec3(g(rng), g(rng), g(rng)), nh);
    const double c = g(rng);
    const HamiltonianVector h = hamiltonian_for(sys, r, nh, m, c);
    const Vec3 dn = transverse_velocity(sys, h, BlochState::at(r, nh));
    const double f = radial_velocity(sys, r, nh);
    CHECK((dn - m * f).norm() <= 1e-10 * sys.scale() * std::max(1.0, m.norm()));
    // The gauge component is invisible.
    const HamiltonianVector h0 = hamiltonian_for(sys, r, nh, m, 0.0);
    CHECK((transverse_velocity(sys, h0, BlochState::at(r, nh)) - dn).norm() <= 1e-10 * sys.scale());
  }
  CHECK_THROWS_AS(hamiltonian_for(figure_system(1), 0.0, Vec3(1, 0, 0), Vec3::Zero()), std::domain_error);
}

TEST_CASE("on a symmetric main axis no Hamiltonian is needed") {
  const LindbladSystem sys = figure_system(2);
  const Vec3 bh = sys.b().normalized();
  const HamiltonianVector h = hamiltonian_for(sys, 0.4, bh, Vec3::Zero(), 0.0);
  CHECK(h.h.norm() < 1e-12);
}

TEST_CASE("one Bloch-ODE step along figure 1's maximizing thread") {
  const LindbladSystem sys = figure_system(1);
  const Thread t = main_threads(sys).front();
  const double r = 0.3;
  const Vec3 nh = *t.direction_at(sys, r);
  const Vec3 m = *thread_tangent(sys, r, nh);
  const HamiltonianVector h = hamiltonian_for(sys, r, nh, m);
  // Open-loop RK4 with h frozen: the angular miss shrinks like dtau^2.
  auto miss = [&](double dtau) {
    auto rhs = [&](const Vec3& n) { return bloch_rhs(sys, h, n); };
    const Vec3 n0 = r * nh;
    const Vec3 k1 = rhs(n0), k2 = rhs(n0 + 0.5 * dtau * k1), k3 = rhs(n0 + 0.5 * dtau * k2),
               k4 = rhs(n0 + dtau * k3);
    const Vec3 n1 = n0 + dtau / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    CHECK(n1.norm() > r);
    return angle_between(n1.normalized(), *t.direction_at(sys, n1.norm()));
  };
  const double e1 = miss(1e-5), e2 = miss(5e-6);
  CHECK(e1 < 1e-6);
  CHECK(e1 / e2 > 3.5);
  CHECK(e1 / e2 < 4.5);
}

TEST_CASE("origin limit of the planned Hamiltonian") {
  const LindbladSystem sys = figure_system(1);
  const Thread t = main_threads(sys).front();
  const Vec3 m0 = *thread_tangent(sys, 0.0, t.samples.front().n_hat);
  const HamiltonianVector h0 = hamiltonian_at_origin(sys, t.samples.front().n_hat, m0);
  const double r = 1e-6;
  const Vec3 nh = *t.direction_at(sys, r);
  const HamiltonianVector hr = hamiltonian_for(sys, r, nh, *thread_tangent(sys, r, nh));
  CHECK((h0.h - hr.h).norm() <= 1e-3 * std::max(1.0, h0.h.norm()));
}

TEST_CASE("figure 1 maximizing thread: outward plan ends at the chimney wall") {
  const LindbladSystem sys = figure_system(1);
  const Thread t = main_threads(sys).front();
  PlanOptions opts;
  opts.direction = +1;
  const Plan plan = plan_trajectory(sys, t, opts);
  REQUIRE(plan.crossings.size() == 1);
  const ChimneyMesh mesh = trace_chimney(sys);
  CHECK(plan.crossings[0] == doctest::Approx(mesh.apogees.front().r).epsilon(1e-4));
  REQUIRE(plan.segments.size() == 2);
  const PlanSegment& out = plan.segments[0];
  CHECK(out.direction == 1);
  CHECK(out.points.front().r == 0.0);
  for (std::size_t i = 1; i < out.points.size(); ++i) {
    CHECK(out.points[i].tau > out.points[i - 1].tau);
    CHECK(std::isfinite(out.points[i].tau));
  }
  // The dwell time per unit radius grows as f -> 0.
  const auto& last = out.points.back();
  const auto& prev = out.points[out.points.size() - 2];
  CHECK((last.tau - prev.tau) > 10.0 * (out.points[2].tau - out.points[1].tau));
  CHECK(plan.segments[1].direction == -1);
  CHECK(plan.segments[1].points.front().r == 1.0);
}

TEST_CASE("figure 1 minimizing thread: one inward segment") {
  const LindbladSystem sys = figure_system(1);
  const Thread t = main_threads(sys)[1];
  PlanOptions opts;
  opts.direction = -1;
  const Plan plan = plan_trajectory(sys, t, opts);
  CHECK(plan.crossings.empty());
  REQUIRE(plan.segments.size() == 1);
  CHECK(plan.segments[0].direction == -1);
  CHECK(plan.segments[0].points.front().r == 1.0);
  CHECK(plan.segments[0].points.back().r == 0.0);
  opts.direction = +1;
  CHECK_THROWS_AS(plan_trajectory(sys, t, opts), PlanError);
}

TEST_CASE("unital system: an outward plan is impossible") {
  const auto sys = LindbladSystem::from_diagonal(Vec3(3, 2, 1), Vec3::Zero());
  // Critical line along the largest eigenvector.
  Thread t;
  for (int i = 0; i <= 10; ++i) t.samples.push_back({0.1 * i, Vec3(1, 0, 0), 0.0, 0.0});
  PlanOptions opts;
  opts.direction = +1;
  try {
    plan_trajectory(sys, t, opts);
    FAIL("expected PlanError");
  } catch (const PlanError& e) {
    CHECK(e.kind() == PlanError::Kind::FIsZeroOnThread);
  }
}

TEST_CASE("a thread with a large residual is refused") {
  const LindbladSystem sys = figure_system(1);
  Thread t;
  t.samples.push_back({0.5, Vec3(1, 0, 0), 0.0, 0.0});
  CHECK_THROWS_AS(plan_trajectory(sys, t), PlanError);
}

TEST_CASE("gauge invariance of the feedback plan") {
  const LindbladSystem sys = figure_system(1);
  const Thread t = main_threads(sys).front();
  const Vec3 n0 = 0.1 * *t.direction_at(sys, 0.1);
  const double dtau = 1e-5, tau = 3e-3;
  const auto a = simulate_feedback_plan(sys, n0, tau, dtau);
  const auto b = simulate_feedback_plan(sys, n0, tau, dtau, [](double r) { return 40.0 * r - 3.0; });
  const auto c = simulate_feedback_plan(sys, n0, tau, dtau, [](double) { return 250.0; });
  REQUIRE(a.size() == b.size());
  double worst = 0.0, track = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max({worst, (a[i] - b[i]).norm(), (a[i] - c[i]).norm()});
    const double r = a[i].norm();
    track = std::max(track, angle_between(a[i] / r, *t.direction_at(sys, r)));
  }
  CHECK(worst <= 1e-10);
  CHECK(track <= 1e-6);
  CHECK(a.back().norm() > 0.2);
}

TEST_CASE("density-matrix replay tracks the thread") {
  const LindbladSystem sys = figure_system(1);
  const Thread t = main_threads(sys).front();
  const auto samples = replay_through_density(sys, t, 0.1, 0.3, 1e-5);
  REQUIRE(samples.size() > 10);
  CHECK(samples.back().r > 0.29);
  for (const auto& s : samples) CHECK(s.angle <= 1e-6);
}
