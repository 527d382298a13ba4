#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "pslab/linalg.hpp"

namespace testing {

// Seeded generator for property tests.
struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); }
  double log_uniform(double a, double b) { return std::exp(uniform(std::log(a), std::log(b))); }
  int nonzero(int a, int b) {
    int v = 0;
    while (v == 0) v = integer(a, b);
    return v;
  }
  pslab::RVec normal(std::ptrdiff_t n) {
    std::normal_distribution<double> nd;
    pslab::RVec v(n);
    for (auto& x : v) x = nd(rng);
    return v;
  }
  pslab::CVec cnormal(std::ptrdiff_t n) {
    std::normal_distribution<double> nd;
    pslab::CVec v(n);
    for (auto& x : v) x = {nd(rng), nd(rng)};
    return v;
  }
};

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testing
