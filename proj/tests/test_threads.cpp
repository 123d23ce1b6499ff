#include "bloch/threads.hpp"

#include "bloch/dynamics.hpp"
#include "bloch/lie_rk.hpp"
#include "bloch/presets.hpp"
#include "support.hpp"

#include <doctest.h>

#include <numbers>

using namespace bloch;

namespace {

// Oracle root closest to a direction.
Vec3 nearest_root(const LindbladSystem& sys, double r, const Vec3& near) {
  Vec3 best = near;
  double d = 1e9;
  for (const auto& p : critical_points_at(sys, r)) {
    const double a = angle_between(p.n_hat, near);
    if (a < d) {
      d = a;
      best = p.n_hat;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("feedback matches a finite difference of oracle roots") {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> ur(0.1, 0.9);
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    const LindbladSystem sys = testing::random_system(rng);
    const double r = ur(rng);
    for (const CriticalPoint& p : critical_points_at(sys, r)) {
      const FeedbackResult res = feedback(sys, r, p.n_hat);
      const auto* st = std::get_if<FeedbackState>(&res);
      if (!st || st->m.norm() > 50.0) continue;
      const double h = 1e-5;
      const Vec3 up = nearest_root(sys, r + h, p.n_hat), dn = nearest_root(sys, r - h, p.n_hat);
      const Vec3 fd = (up - dn) / (2 * h);
      CHECK((fd - st->m).norm() <= 1e-4 * std::max(1.0, st->m.norm()));
      CHECK(std::abs(st->m.dot(p.n_hat)) < 1e-12 * std::max(1.0, st->m.norm()));
      // Raw relation 2 A n + Lambda m = k n.
      const Vec3 raw = 2.0 * sys.A() * p.n_hat + st->Lambda * st->m - st->k * p.n_hat;
      CHECK(raw.norm() <= 1e-8 * sys.scale() * std::max(1.0, st->m.norm()));
      ++checked;
    }
  }
  CHECK(checked > 200);
}

TEST_CASE("special cases of a failing feedback") {
  SUBCASE("isotropic unital system: every direction is critical") {
    const auto sys = LindbladSystem::from_diagonal(Vec3(4, 4, 4), Vec3::Zero());
    const FeedbackResult res = feedback(sys, 0.5, Vec3(0, 0, 1));
    REQUIRE(std::holds_alternative<FeedbackFailure>(res));
    const auto sp = handle_special_cases(sys, 0.5, Vec3(0, 0, 1), std::get<FeedbackFailure>(res));
    CHECK(sp.kind == SpecialFeedback::Case::ConstantF);
    CHECK(sp.m->norm() == 0.0);
  }
  SUBCASE("main axis of a single-drift system") {
    const LindbladSystem sys = figure_system(2);
    const Vec3 bh = sys.b().normalized();
    // b lies in the degenerate eigenspace, so the thread stays on b_hat.
    const FeedbackResult res = feedback(sys, 0.3, bh);
    REQUIRE(std::holds_alternative<FeedbackState>(res));
    CHECK(std::get<FeedbackState>(res).m.norm() < 1e-12);
    const FeedbackFailure fake{FeedbackFailure::Kind::SingularLambda, 1, 0.0};
    const auto sp = handle_special_cases(sys, 0.3, bh, fake);
    CHECK(sp.kind == SpecialFeedback::Case::MainAxis);
    CHECK(sp.m->norm() == 0.0);
  }
  SUBCASE("point of a special line") {
    const LindbladSystem sys = figure_system(3);
    const double r = 0.6;
    Vec3 on_line;
    for (const auto& s : special_case_critical_sets(sys, r))
      if (s.kind == SpecialSetKind::Line) on_line = s.points.front();
    const FeedbackResult res = feedback(sys, r, on_line);
    REQUIRE(std::holds_alternative<FeedbackFailure>(res));
    const auto sp = handle_special_cases(sys, r, on_line, std::get<FeedbackFailure>(res));
    CHECK(sp.kind == SpecialFeedback::Case::SpecialLine);
    const Vec3 up = nearest_root(sys, r + 1e-5, on_line), dn = nearest_root(sys, r - 1e-5, on_line);
    CHECK((*sp.m - (up - dn) / 2e-5).norm() < 1e-5);
  }
  SUBCASE("degenerate Lambda orthogonal to n_hat: tangent-plane solve") {
    // In-plane critical points of figure 3 near the line's tangency radius.
    const LindbladSystem sys = figure_system(3);
    const Vec3 nh(0.98, 0.0, -0.2);
    const FeedbackFailure fake{FeedbackFailure::Kind::SingularLambda, 1, 0.0};
    const double r = 0.5;
    const Vec3 root = nearest_root(sys, r, nh.normalized());
    const auto sp = handle_special_cases(sys, r, root, fake);
    CHECK(sp.kind == SpecialFeedback::Case::TangentRestricted);
    const FeedbackResult regular = feedback(sys, r, root);
    REQUIRE(std::holds_alternative<FeedbackState>(regular));
    CHECK((*sp.m - std::get<FeedbackState>(regular).m).norm() < 1e-9);
  }
}

TEST_CASE("RKMK4 preserves the unit norm and rotates exactly") {
  const Vec3 n(1, 0, 0);
  const Vec3 rotated = rotate(Vec3(0, 0, std::numbers::pi / 2), n);
  CHECK((rotated - Vec3(0, 1, 0)).norm() < 1e-15);
  auto field = [](double, const Vec3& x) -> std::optional<Vec3> { return perp(Vec3(0.3, -2, 5), x); };
  Vec3 x = Vec3(1, 2, 3).normalized();
  for (int i = 0; i < 1000; ++i) x = *rkmk4_step(field, 0.0, x, 0.01);
  CHECK(std::abs(x.norm() - 1.0) < 1e-13);
}

TEST_CASE("RKMK4 is fourth order") {
  // dn/dr = omega(r) x n with a turning axis; a fine run is the reference.
  auto field = [](double r, const Vec3& x) -> std::optional<Vec3> {
    return Vec3(std::cos(3 * r), std::sin(2 * r), 1.5 * r).cross(x);
  };
  auto solve = [&](int steps) {
    Vec3 x(0, 0, 1);
    const double h = 2.0 / steps;
    for (int i = 0; i < steps; ++i) x = *rkmk4_step(field, i * h, x, h);
    return x;
  };
  const Vec3 ref = solve(20480);
  const double ratio = (solve(40) - ref).norm() / (solve(80) - ref).norm();
  CHECK(ratio > 14.0);
  CHECK(ratio < 18.0);
}

TEST_CASE("main threads of figure 1 stay critical") {
  const LindbladSystem sys = figure_system(1);
  const auto threads = main_threads(sys);
  REQUIRE(threads.size() == 2);
  CHECK(threads[0].kind == ThreadKind::Maximizing);
  CHECK(threads[1].kind == ThreadKind::Minimizing);
  for (const Thread& t : threads) {
    CHECK(t.termination == Termination::ReachedBoundary);
    CHECK(t.samples.size() == 1001);
    CHECK(t.max_residual() <= 1e-9);
    for (const auto& s : t.samples) CHECK(std::abs(s.n_hat.norm() - 1.0) < 1e-13);
  }
  // The maximizing thread carries the largest f of all critical points.
  for (double r : {0.2, 0.5, 0.8}) {
    const auto pts = critical_points_at(sys, r);
    CHECK(angle_between(*threads[0].direction_at(sys, r), pts.front().n_hat) < 1e-8);
    CHECK(angle_between(*threads[1].direction_at(sys, r), pts.back().n_hat) < 1e-8);
  }
}

TEST_CASE("interpolation between samples") {
  const LindbladSystem sys = figure_system(4);
  const Thread t = main_threads(sys).front();
  const double r = 0.4567;
  const Vec3 oracle = nearest_root(sys, r, *t.direction_at(sys, r));
  CHECK(angle_between(*t.direction_at(sys, r), oracle) < 1e-10);
  CHECK_FALSE(t.direction_at(sys, 1.5).has_value());
}

TEST_CASE("unital systems have no main threads") {
  const auto sys = LindbladSystem::from_diagonal(Vec3(3, 2, 1), Vec3::Zero());
  CHECK(main_threads(sys).empty());
}

TEST_CASE("inward integration retraces the outward thread") {
  const LindbladSystem sys = figure_system(1);
  const Thread out = main_threads(sys).front();
  const Thread back = integrate_thread(sys, 1.0, out.samples.back().n_hat, -1, ThreadKind::Maximizing);
  CHECK(back.termination == Termination::ReachedBoundary);
  CHECK(angle_between(back.samples.back().n_hat, sys.b().normalized()) < 1e-9);
}

TEST_CASE("non-critical start points are rejected") {
  const LindbladSystem sys = figure_system(1);
  CHECK_THROWS_AS(integrate_thread(sys, 0.5, Vec3(1, 0, 0), 1, ThreadKind::Maximizing),
                  std::invalid_argument);
}

TEST_CASE("alternate threads of figures 2, 3 and 4") {
  SUBCASE("figure 1 has none") { CHECK(alternate_threads(figure_system(1)).empty()); }
  SUBCASE("figure 2: special line branches") {
    const LindbladSystem sys = figure_system(2);
    const auto alt = alternate_threads(sys);
    REQUIRE(alt.size() == 2);
    for (const Thread& t : alt) {
      CHECK(t.kind == ThreadKind::SpecialLine);
      CHECK(t.r_min() == doctest::Approx(std::hypot(32.0, 26.0) / 180.0));
      CHECK(t.max_residual() < 1e-10);
    }
  }
  SUBCASE("figure 4: a pair born at the tangency point") {
    const LindbladSystem sys = figure_system(4);
    const auto alt = alternate_threads(sys);
    REQUIRE(alt.size() == 2);
    CHECK(alt[0].family == alt[1].family);
    const Thread main = main_threads(sys).front();
    for (const Thread& t : alt) {
      CHECK(t.kind == ThreadKind::Alternate);
      CHECK(t.termination == Termination::ReachedBoundary);
      CHECK(thread_distance(t, main) > 0.1);
      for (double r : {0.6, 0.8, 1.0}) {
        const auto d = t.direction_at(sys, r);
        REQUIRE(d);
        CHECK(angle_between(nearest_root(sys, r, *d), *d) < 1e-6);
      }
    }
    // One branch maximizes f locally, the other is a saddle.
    const auto c0 = classify_critical(sys, 0.8, *alt[0].direction_at(sys, 0.8));
    const auto c1 = classify_critical(sys, 0.8, *alt[1].direction_at(sys, 0.8));
    CHECK(c0 != c1);
  }
}

TEST_CASE("thread kinds and terminations print") {
  CHECK(to_string(ThreadKind::ChimneyGenerator) == "chimney-generator");
  CHECK(to_string(Termination::KDenominatorVanished) == "k-denominator-vanished");
  CHECK(to_string(SpecialFeedback::Case::TangentRestricted) == "tangent-restricted");
}
