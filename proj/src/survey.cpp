#include "bloch/survey.hpp"

#include "bloch/critical_points.hpp"
#include "bloch/parallel.hpp"

#include <cmath>
#include <vector>

namespace bloch {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

double SurveyStats::proportion(int k) const {
  const auto n = counted();
  return n > 0 ? static_cast<double>(counts.at(k)) / static_cast<double>(n) : 0.0;
}

double SurveyStats::standard_error(int k) const {
  const auto n = counted();
  if (n == 0) return 0.0;
  const double p = proportion(k);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{splitmix64(seed), splitmix64(seed ^ splitmix64(index + 1))};
  return std::mt19937_64(seq);
}

LindbladSystem sample_system(std::mt19937_64& rng, const SurveyConfig& cfg) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double a1 = cfg.a1;
  double a2, a3;
  do a2 = a1 * unit(rng); while (a2 < cfg.min_eigenvalue);
  do a3 = a1 * unit(rng); while (a3 < cfg.min_eigenvalue);

  Vec3 g;
  do g = Vec3(normal(rng), normal(rng), normal(rng)); while (g.norm() == 0.0);
  const Vec3 bstar = g.normalized() * std::cbrt(unit(rng));
  const Vec3 b = 2.0 * bstar.cwiseProduct(
                           Vec3(std::sqrt(a2 * a3), std::sqrt(a1 * a3), std::sqrt(a1 * a2)));
  return LindbladSystem::from_diagonal(Vec3(a1, a2, a3), b);
}

int count_alternate_threads(const LindbladSystem& sys, double dedup_tol) {
  if (sys.unital()) return 0;
  bool affine = false;
  int count = 0;
  for (const SpecialCriticalSet& set : special_case_critical_sets(sys, 1.0)) {
    if (set.kind != SpecialSetKind::Line && set.kind != SpecialSetKind::Plane) continue;
    affine = true;
    if (set.closest_radius() < 1.0) ++count;
  }
  if (affine) return count;

  std::vector<Vec3> inside;
  for (const TangencyPoint& t : tangency_points(sys)) {
    if (!t.inside_ball) continue;
    const bool dup = std::any_of(inside.begin(), inside.end(),
                                 [&](const Vec3& p) { return (p - t.n).norm() <= dedup_tol; });
    if (!dup) inside.push_back(t.n);
  }
  return static_cast<int>(inside.size());
}

SurveyStats run_survey(const SurveyConfig& cfg) {
  if (cfg.sample_count < 1) throw std::invalid_argument("sample_count must be at least 1");
  std::vector<int> result(static_cast<std::size_t>(cfg.sample_count), -1);
  parallel_for(result.size(), [&](std::size_t i) {
    std::mt19937_64 rng = sample_rng(cfg.seed, i);
    const LindbladSystem sys = sample_system(rng, cfg);
    try {
      result[i] = count_alternate_threads(sys, cfg.dedup_tol);
    } catch (const NumericalError&) {
      result[i] = -1;
    }
  });
  SurveyStats stats;
  stats.sample_count = cfg.sample_count;
  for (int c : result) {
    if (c < 0)
      ++stats.failures;
    else
      ++stats.counts[std::min(c, 3)];
  }
  return stats;
}

}  // namespace bloch
