#include "bloch/critical_points.hpp"

#include "bloch/dynamics.hpp"
#include "bloch/polynomial.hpp"

#include <algorithm>
#include <cmath>

namespace bloch {

namespace {

std::vector<int> drift_axes(const LindbladSystem& sys) {
  std::vector<int> axes;
  for (int j = 0; j < 3; ++j)
    if (!sys.pattern().b_zero[j]) axes.push_back(j);
  return axes;
}

double hessian_threshold(const LindbladSystem& sys, double r) {
  return 1e-10 * std::max(1.0, sys.b().norm() + 2.0 * r * sys.eigenvalues()[0]);
}

CriticalPoint make_point(const LindbladSystem& sys, double r, const Vec3& n_hat_world) {
  CriticalPoint p;
  p.r = r;
  p.n_hat = n_hat_world.normalized();
  const Vec3 g = ambient_gradient(sys, r, p.n_hat);
  p.nu = 0.5 * g.dot(p.n_hat);
  p.residual = perp(g, p.n_hat).norm();
  p.classification = classify_critical(sys, r, p.n_hat);
  p.f = radial_velocity(sys, r, p.n_hat);
  return p;
}

void push_unique(std::vector<CriticalPoint>& pts, CriticalPoint p) {
  for (const auto& q : pts)
    if ((q.n_hat - p.n_hat).norm() <= 1e-9) return;
  pts.push_back(std::move(p));
}

}  // namespace

std::string_view to_string(PointClass c) {
  switch (c) {
    case PointClass::Max: return "max";
    case PointClass::Min: return "min";
    case PointClass::Saddle: return "saddle";
  }
  return "?";
}

std::string_view to_string(SpecialSetKind k) {
  switch (k) {
    case SpecialSetKind::AllSphere: return "all-sphere";
    case SpecialSetKind::Plane: return "plane";
    case SpecialSetKind::Line: return "line";
    case SpecialSetKind::MainAxis: return "main-axis";
  }
  return "?";
}

Vec3 ambient_gradient(const LindbladSystem& sys, double r, const Vec3& n_hat) {
  return sys.b() + 2.0 * r * (sys.A() * n_hat);
}

double criticality_residual(const LindbladSystem& sys, double r, const Vec3& n_hat) {
  return perp(ambient_gradient(sys, r, n_hat), n_hat).norm();
}

Eigen::Matrix2d projected_hessian(const LindbladSystem& sys, double r, const Vec3& n_hat) {
  const Eigen::Matrix<double, 3, 2> p = tangent_basis(n_hat);
  const double c = n_hat.dot(ambient_gradient(sys, r, n_hat));
  return 2.0 * r * p.transpose() * sys.A() * p - c * Eigen::Matrix2d::Identity();
}

PointClass classify_critical(const LindbladSystem& sys, double r, const Vec3& n_hat) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(projected_hessian(sys, r, n_hat),
                                                    Eigen::EigenvaluesOnly);
  const double tol = hessian_threshold(sys, r);
  const auto& ev = es.eigenvalues();
  if (ev[1] < -tol) return PointClass::Max;
  if (ev[0] > tol) return PointClass::Min;
  return PointClass::Saddle;
}

std::vector<CriticalPoint> critical_points_at(const LindbladSystem& sys, double r) {
  if (!(r > 0.0) || r > 1.0 + 1e-9) throw std::domain_error("critical_points_at requires r in (0, 1]");

  const Vec3& a = sys.eigenvalues();
  const Vec3& beta = sys.b_eigen();
  const std::vector<int> axes = drift_axes(sys);
  std::vector<CriticalPoint> pts;

  if (!axes.empty()) {
    // Scaled multiplier x = nu / s keeps the coefficients O(1).
    double s = 0.5 * beta.norm();
    for (int j : axes) s = std::max(s, r * std::abs(a[j]));
    Polynomial sum{0.0};
    Polynomial prod{1.0};
    for (int k : axes) {
      Polynomial term{(beta[k] / s) * (beta[k] / s)};
      for (int l : axes)
        if (l != k) term = term * Polynomial::linear_factor(r * a[l] / s).pow(2);
      sum += term;
      prod = prod * Polynomial::linear_factor(r * a[k] / s).pow(2);
    }
    const Polynomial poly = sum - 4.0 * prod;
    const RootSet roots = solve_polynomial(poly);
    for (double x : roots.real) {
      Vec3 ne = Vec3::Zero();
      for (int k : axes) ne[k] = (beta[k] / s) / (2.0 * (x - r * a[k] / s));
      if (!ne.allFinite() || std::abs(ne.norm() - 1.0) > 1e-8) continue;
      push_unique(pts, make_point(sys, r, sys.to_world(ne)));
    }
  }

  for (const SpecialCriticalSet& set : special_case_critical_sets(sys, r)) {
    if (set.kind != SpecialSetKind::Line) continue;
    for (const Vec3& p : set.points) push_unique(pts, make_point(sys, r, p));
  }

  std::sort(pts.begin(), pts.end(),
            [](const CriticalPoint& x, const CriticalPoint& y) { return x.f > y.f; });
  return pts;
}

std::vector<TangencyPoint> tangency_points(const LindbladSystem& sys) {
  const Vec3& a = sys.eigenvalues();
  const Vec3& beta = sys.b_eigen();
  const std::vector<int> axes = drift_axes(sys);
  std::vector<TangencyPoint> out;
  if (axes.size() < 2) return out;

  const double s = std::max({std::abs(a[0]), beta.norm(), 1e-300});
  Polynomial poly{0.0};
  for (int k : axes) {
    Polynomial term{(beta[k] / s) * (beta[k] / s)};
    for (int l : axes)
      if (l != k) term = term * Polynomial{a[l] / s, -1.0}.pow(3);
    poly += term;
  }

  for (double y : solve_polynomial(poly).real) {
    double mu = s * y;
    // Newton on sum beta^2 / (a - mu)^3, which is much better conditioned near the poles.
    for (int it = 0; it < 8; ++it) {
      double g = 0.0, dg = 0.0;
      for (int k : axes) {
        const double d = a[k] - mu;
        g += beta[k] * beta[k] / (d * d * d);
        dg += 3.0 * beta[k] * beta[k] / (d * d * d * d);
      }
      if (!(dg > 0.0) || !std::isfinite(g)) break;
      const double step = g / dg;
      mu -= step;
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(mu))) break;
    }
    Vec3 ne = Vec3::Zero();
    double sum = 0.0, mag = 0.0;
    for (int k : axes) {
      ne[k] = beta[k] / (2.0 * (mu - a[k]));
      const double term = beta[k] * beta[k] / (8.0 * std::pow(a[k] - mu, 3));
      sum += term;
      mag += std::abs(term);
    }
    if (!ne.allFinite()) continue;
    TangencyPoint t;
    t.mu = mu;
    t.n = sys.to_world(ne);
    t.inside_ball = t.n.norm() < 1.0;
    t.condition_residual = mag > 0.0 ? std::abs(sum) / mag : 0.0;
    const bool dup = std::any_of(out.begin(), out.end(), [&](const TangencyPoint& q) {
      return (q.n - t.n).norm() <= 1e-9;
    });
    if (!dup) out.push_back(t);
  }
  return out;
}

std::vector<SpecialCriticalSet> special_case_critical_sets(const LindbladSystem& sys, double r) {
  const DegeneracyPattern& pat = sys.pattern();
  const Vec3& a = sys.eigenvalues();
  const Vec3& beta = sys.b_eigen();
  std::vector<SpecialCriticalSet> sets;

  for (int g = 0; g < pat.group_count; ++g) {
    if (!pat.group_drift_free(g)) continue;
    SpecialCriticalSet set;
    set.r = r;
    Vec3 offset_e = Vec3::Zero();
    double a_g = 0.0;
    for (int j = 0; j < 3; ++j) {
      if (pat.group[j] == g) {
        set.free_axes.push_back(j);
        set.free_directions.push_back(sys.eigenvectors().col(j));
        a_g = a[j];
      }
    }
    for (int k = 0; k < 3; ++k)
      if (pat.group[k] != g) offset_e[k] = beta[k] / (2.0 * (a_g - a[k]));
    set.offset = sys.to_world(offset_e);

    const double rem = r * r - set.offset.squaredNorm();
    const double touch_tol = 1e-12 * std::max(1.0, r * r);
    set.intersects = rem >= -touch_tol;
    switch (set.free_axes.size()) {
      case 3: set.kind = SpecialSetKind::AllSphere; break;
      case 2:
        set.kind = SpecialSetKind::Plane;
        set.circle_radius = set.intersects ? std::sqrt(std::max(0.0, rem)) : 0.0;
        break;
      default: {
        set.kind = SpecialSetKind::Line;
        if (set.intersects && r > 0.0) {
          const double t = std::sqrt(std::max(0.0, rem));
          const Vec3 dir = set.free_directions.front();
          set.points.push_back((set.offset + t * dir) / r);
          if (t > touch_tol) set.points.push_back((set.offset - t * dir) / r);
        }
      }
    }
    sets.push_back(std::move(set));
  }

  // Drift along a single eigen-direction: +-b_hat stay critical at every r.
  const int drift_count = 3 - static_cast<int>(pat.b_zero[0]) - static_cast<int>(pat.b_zero[1]) -
                          static_cast<int>(pat.b_zero[2]);
  if (drift_count == 1) {
    SpecialCriticalSet axis;
    axis.kind = SpecialSetKind::MainAxis;
    axis.r = r;
    const Vec3 bh = sys.b().normalized();
    axis.points = {bh, -bh};
    axis.intersects = true;
    for (int j = 0; j < 3; ++j)
      if (!pat.b_zero[j]) axis.free_axes.push_back(j);
    axis.free_directions.push_back(bh);
    sets.push_back(std::move(axis));
  }
  return sets;
}

}  // namespace bloch
