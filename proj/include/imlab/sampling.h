#pragma once

#include <cstdint>
#include <random>

#include "imlab/linalg.h"

namespace imlab {

/// Seeded source of sample points for certificates and property suites.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  int index(int n) { return std::uniform_int_distribution<int>(0, n - 1)(gen_); }

  /// Direction with component k scaled by 1/(k+1), normalized to unit
  /// weighted norm. Low modes dominate, which is where the models live.
  Vec direction(const Vec& weights);

  /// Point at weighted radius r along a random direction.
  Vec point(const Vec& weights, double r) { return r * direction(weights); }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace imlab
