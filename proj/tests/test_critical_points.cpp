#include "bloch/critical_points.hpp"

#include "bloch/dynamics.hpp"
#include "bloch/presets.hpp"
#include "support.hpp"

#include <doctest.h>

#include <numbers>

using namespace bloch;

namespace {

// Brute force: local maxima and minima of f_r on a Fibonacci grid, refined
// by projected gradient steps.
std::vector<Vec3> grid_extrema(const LindbladSystem& sys, double r, int sign) {
  const int n = 4000;
  std::vector<Vec3> pts(n);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / n;
    const double rho = std::sqrt(1.0 - z * z);
    pts[i] = Vec3(rho * std::cos(golden * i), rho * std::sin(golden * i), z);
  }
  std::vector<double> f(n);
  for (int i = 0; i < n; ++i) f[i] = sign * radial_velocity(sys, r, pts[i]);
  std::vector<Vec3> out;
  const double nbr = 0.12;
  for (int i = 0; i < n; ++i) {
    bool best = true;
    for (int j = 0; j < n && best; ++j)
      if (j != i && (pts[j] - pts[i]).norm() < nbr && f[j] > f[i]) best = false;
    if (!best) continue;
    Vec3 x = pts[i];
    const double step = 0.2 / (sys.b().norm() + 2.0 * r * sys.eigenvalues()[0]);
    for (int it = 0; it < 20000; ++it)
      x = (x + sign * step * perp(ambient_gradient(sys, r, x), x)).normalized();
    bool dup = false;
    for (const Vec3& y : out) dup |= (y - x).norm() < 1e-4;
    if (!dup) out.push_back(x);
  }
  return out;
}

}  // namespace

TEST_CASE("every reported point is critical and classified by the Hessian") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> ur(0.05, 1.0);
  for (int i = 0; i < 200; ++i) {
    const LindbladSystem sys = testing::random_system(rng);
    const double r = ur(rng);
    const auto pts = critical_points_at(sys, r);
    CHECK(pts.size() >= 2);
    CHECK(pts.size() <= 6);
    for (const CriticalPoint& p : pts) {
      CHECK(p.residual <= 1e-9 * (sys.b().norm() + 2.0 * r * sys.eigenvalues()[0]));
      CHECK(std::abs(p.n_hat.norm() - 1.0) < 1e-12);
      CHECK(p.f == doctest::Approx(radial_velocity(sys, r, p.n_hat)));
    }
    for (std::size_t k = 1; k < pts.size(); ++k) CHECK(pts[k - 1].f >= pts[k].f);
    // Global max and min of f_r are always among the critical points.
    CHECK(pts.front().classification == PointClass::Max);
    CHECK(pts.back().classification == PointClass::Min);
  }
}

TEST_CASE("agreement with a brute-force sphere search") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> ur(0.1, 1.0);
  for (int i = 0; i < 12; ++i) {
    const LindbladSystem sys = testing::random_system(rng);
    const double r = ur(rng);
    const auto pts = critical_points_at(sys, r);
    for (int sign : {1, -1}) {
      const auto found = grid_extrema(sys, r, sign);
      const PointClass want = sign > 0 ? PointClass::Max : PointClass::Min;
      for (const Vec3& x : found) {
        double best = 1e9;
        for (const CriticalPoint& p : pts)
          if (p.classification == want) best = std::min(best, angle_between(p.n_hat, x));
        CHECK(best < 1e-5);
      }
      const auto n_want = std::count_if(pts.begin(), pts.end(),
                                        [&](const CriticalPoint& p) { return p.classification == want; });
      CHECK(static_cast<std::size_t>(n_want) == found.size());
    }
  }
}

TEST_CASE("small radius: the extrema sit at +-b_hat") {
  const LindbladSystem sys = figure_system(1);
  const auto pts = critical_points_at(sys, 1e-6);
  REQUIRE(pts.size() == 2);
  CHECK(angle_between(pts.front().n_hat, sys.b().normalized()) < 1e-5);
  CHECK(angle_between(pts.back().n_hat, -sys.b().normalized()) < 1e-5);
}

TEST_CASE("radius outside (0, 1] is rejected") {
  const LindbladSystem sys = figure_system(1);
  CHECK_THROWS_AS(critical_points_at(sys, 0.0), std::domain_error);
  CHECK_THROWS_AS(critical_points_at(sys, 1.5), std::domain_error);
}

TEST_CASE("tangency points: critical with a singular Hessian") {
  std::mt19937_64 rng(41);
  int checked = 0;
  for (int i = 0; i < 300; ++i) {
    const LindbladSystem sys = testing::random_system(rng);
    for (const TangencyPoint& t : tangency_points(sys)) {
      const double r = t.radius();
      if (r < 1e-3 || r > 10.0) continue;
      const Vec3 nh = t.n / r;
      const double scale = sys.b().norm() + 2.0 * r * sys.eigenvalues()[0];
      CHECK(criticality_residual(sys, r, nh) <= 1e-8 * scale);
      const Eigen::Matrix2d hess = projected_hessian(sys, r, nh);
      CHECK(std::abs(hess.determinant()) <= 1e-6 * hess.squaredNorm());
      CHECK(t.condition_residual < 1e-8);
      CHECK(t.inside_ball == (r < 1.0));
      ++checked;
    }
  }
  CHECK(checked > 50);
}

TEST_CASE("figure 4 has one tangency point inside the ball, figure 1 none") {
  auto inside = [](const LindbladSystem& sys) {
    int n = 0;
    for (const auto& t : tangency_points(sys)) n += t.inside_ball;
    return n;
  };
  CHECK(inside(figure_system(1)) == 0);
  CHECK(inside(figure_system(4)) == 1);
}

TEST_CASE("special line of the degenerate drift pattern") {
  const LindbladSystem sys = figure_system(2);
  const auto sets = special_case_critical_sets(sys, 0.5);
  const auto line = std::find_if(sets.begin(), sets.end(), [](const SpecialCriticalSet& s) {
    return s.kind == SpecialSetKind::Line;
  });
  REQUIRE(line != sets.end());
  CHECK(line->offset.x() == doctest::Approx(0.0));
  CHECK(line->offset.y() == doctest::Approx(32.0 / 180.0).epsilon(1e-12));
  CHECK(line->offset.z() == doctest::Approx(-26.0 / 180.0).epsilon(1e-12));
  REQUIRE(line->points.size() == 2);
  for (const Vec3& p : line->points) CHECK(criticality_residual(sys, 0.5, p) < 1e-10);
  // Main axis along b for the single drift direction.
  const auto axis = std::find_if(sets.begin(), sets.end(), [](const SpecialCriticalSet& s) {
    return s.kind == SpecialSetKind::MainAxis;
  });
  REQUIRE(axis != sets.end());
  CHECK(angle_between(axis->points[0], sys.b().normalized()) < 1e-14);

  // Below the closest radius the line misses the sphere.
  for (const auto& s : special_case_critical_sets(sys, 0.1))
    if (s.kind == SpecialSetKind::Line) CHECK_FALSE(s.intersects);
}

TEST_CASE("plane and all-sphere sets") {
  const auto plane_sys = LindbladSystem::from_diagonal(Vec3(100, 100, 10), Vec3(0, 0, 20));
  bool plane = false;
  for (const auto& s : special_case_critical_sets(plane_sys, 0.5)) {
    if (s.kind != SpecialSetKind::Plane) continue;
    plane = true;
    CHECK(s.offset.z() == doctest::Approx(20.0 / (2.0 * 90.0)));
    CHECK(s.circle_radius == doctest::Approx(std::sqrt(0.25 - s.offset.squaredNorm())));
  }
  CHECK(plane);

  const auto iso = LindbladSystem::from_diagonal(Vec3(3, 3, 3), Vec3::Zero());
  const auto sets = special_case_critical_sets(iso, 0.5);
  REQUIRE(sets.size() == 1);
  CHECK(sets[0].kind == SpecialSetKind::AllSphere);
}

TEST_CASE("critical points include the special line") {
  const LindbladSystem sys = figure_system(3);
  const auto pts = critical_points_at(sys, 0.6);
  for (const auto& s : special_case_critical_sets(sys, 0.6)) {
    if (s.kind != SpecialSetKind::Line) continue;
    for (const Vec3& p : s.points) {
      const bool found = std::any_of(pts.begin(), pts.end(), [&](const CriticalPoint& c) {
        return (c.n_hat - p).norm() < 1e-9;
      });
      CHECK(found);
    }
  }
}
