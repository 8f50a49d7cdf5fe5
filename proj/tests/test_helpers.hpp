#pragma once

#include "sysrisk/sysrisk.hpp"

namespace sysrisk::testing {

inline SpacePtr coin() { return ScenarioSpace::create({0.5, 0.5}); }

inline SpacePtr random_space(Rng& rng, std::size_t k) {
  return ScenarioSpace::create(rng.probabilities(k));
}

inline SystemLoss random_system(Rng& rng, const SpacePtr& space, std::size_t n,
                                double lo = -1.0, double hi = 1.0) {
  std::vector<RandomVariable> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    rows.emplace_back(space, rng.uniform_vector(space->size(), lo, hi));
  return SystemLoss(std::move(rows));
}

}  // namespace sysrisk::testing
