#pragma once

#include "bloch/system_model.hpp"

#include <random>

namespace bloch::testing {

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec3 v;
  do v = Vec3(g(rng), g(rng), g(rng)); while (v.norm() < 1e-8);
  return v.normalized();
}

inline Vec3 random_in_ball(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return random_unit(rng) * std::cbrt(u(rng));
}

/// 1 to 3 jump operators with Gaussian complex Pauli coefficients.
inline LindbladOperatorSet random_operators(std::mt19937_64& rng, double spread = 1.0) {
  std::normal_distribution<double> g(0.0, spread);
  std::uniform_int_distribution<int> count(1, 3);
  LindbladOperatorSet ops;
  const int k = count(rng);
  for (int m = 0; m < k; ++m) {
    Vec3c l;
    for (int j = 0; j < 3; ++j) l[j] = Complex(g(rng), g(rng));
    ops.operators.push_back(l);
  }
  return ops;
}

/// Physical system with eigenvalues on a scale of about 100.
inline LindbladSystem random_system(std::mt19937_64& rng) {
  return build_system(random_operators(rng, 5.0));
}

}  // namespace bloch::testing
