#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace sysrisk {

// Seeded generator used by all randomized checkers. Passed explicitly so
// reports are reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }

  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(gen_);
  }

  int uniform_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(gen_);
  }

  std::vector<double> uniform_vector(std::size_t k, double lo, double hi) {
    std::vector<double> v(k);
    for (auto& x : v) x = uniform(lo, hi);
    return v;
  }

  // Strictly positive weights normalized to sum 1.
  std::vector<double> probabilities(std::size_t k) {
    std::vector<double> p(k);
    double total = 0.0;
    for (auto& x : p) {
      x = uniform(0.05, 1.0);
      total += x;
    }
    for (auto& x : p) x /= total;
    return p;
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace sysrisk
