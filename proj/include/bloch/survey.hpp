#pragma once

// Randomized census of alternate-thread multiplicity.  A = diag(a1, a2, a3)
// with a1 fixed and a2, a3 uniform on [0, a1]; b = 2 b* o (sqrt(a2 a3),
// sqrt(a1 a3), sqrt(a1 a2)) with b* uniform in the unit ball, which is
// exactly the positivity-feasible set.

#include "bloch/system_model.hpp"

#include <array>
#include <cstdint>
#include <random>

namespace bloch {

struct SurveyConfig {
  std::int64_t sample_count = 100000;
  double a1 = 100.0;
  std::uint64_t seed = 42;
  /// Tangency points closer than this are one thread.
  double dedup_tol = 1e-9;
  /// a2 or a3 below this is resampled.
  double min_eigenvalue = 1e-6;
};

struct SurveyStats {
  std::int64_t sample_count = 0;
  /// Samples with 0, 1, 2 and >= 3 alternate threads.
  std::array<std::int64_t, 4> counts{};
  /// Samples excluded because the root finder failed.
  std::int64_t failures = 0;

  std::int64_t counted() const { return counts[0] + counts[1] + counts[2] + counts[3]; }
  double proportion(int k) const;
  /// Binomial standard error of proportion(k).
  double standard_error(int k) const;
};

/// Per-sample generator: mt19937_64 seeded from SplitMix64(seed, index).
std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index);

LindbladSystem sample_system(std::mt19937_64& rng, const SurveyConfig& cfg = {});

/// Number of alternate threads.  Systems whose drift vanishes along a
/// nondegenerate eigen-direction (or a degenerate eigenspace) have affine
/// critical sets; each such set reaching inside the ball counts once.
/// Otherwise every real tangency point strictly inside the unit ball counts,
/// deduplicated at dedup_tol.  Throws NumericalError if root finding fails.
int count_alternate_threads(const LindbladSystem& sys, double dedup_tol = 1e-9);

/// Deterministic for a fixed seed regardless of the worker count.
SurveyStats run_survey(const SurveyConfig& cfg);

}  // namespace bloch
