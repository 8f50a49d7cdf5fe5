#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sysrisk/errors.hpp"

namespace sysrisk {

class ScenarioSpace;
using SpacePtr = std::shared_ptr<const ScenarioSpace>;

// Finite probability space: K atoms with strictly positive weights summing
// to one. Immutable after construction.
class ScenarioSpace {
 public:
  static SpacePtr create(std::vector<double> probabilities) {
    return std::shared_ptr<const ScenarioSpace>(
        new ScenarioSpace(std::move(probabilities)));
  }

  std::size_t size() const { return probs_.size(); }
  const std::vector<double>& probabilities() const { return probs_; }
  double prob(std::size_t k) const { return probs_[k]; }

  bool same_as(const ScenarioSpace& other) const {
    return this == &other || probs_ == other.probs_;
  }

 private:
  explicit ScenarioSpace(std::vector<double> probabilities)
      : probs_(std::move(probabilities)) {
    if (probs_.empty()) throw Error("scenario space needs at least one atom");
    double total = 0.0;
    for (double p : probs_) {
      if (!(p > 0.0)) throw Error("scenario probabilities must be strictly positive");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw Error("scenario probabilities must sum to 1 (got " +
                  std::to_string(total) + ")");
  }

  std::vector<double> probs_;
};

// One real value per scenario, tied to its space.
class RandomVariable {
 public:
  RandomVariable(SpacePtr space, std::vector<double> values)
      : space_(std::move(space)), values_(std::move(values)) {
    if (!space_) throw Error("random variable needs a scenario space");
    if (values_.size() != space_->size())
      throw DimensionMismatch("value count does not match scenario count");
  }

  static RandomVariable constant(SpacePtr space, double c) {
    std::vector<double> v(space->size(), c);
    return RandomVariable(std::move(space), std::move(v));
  }

  const SpacePtr& space() const { return space_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }

  bool compatible_with(const RandomVariable& other) const {
    return space_->same_as(*other.space_);
  }

  RandomVariable map(auto&& f) const {
    std::vector<double> out(values_.size());
    for (std::size_t k = 0; k < values_.size(); ++k) out[k] = f(values_[k]);
    return RandomVariable(space_, std::move(out));
  }

  friend RandomVariable operator+(const RandomVariable& a, const RandomVariable& b) {
    a.require_same_space(b);
    std::vector<double> out(a.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = a[k] + b[k];
    return RandomVariable(a.space_, std::move(out));
  }

  friend RandomVariable operator-(const RandomVariable& a, const RandomVariable& b) {
    a.require_same_space(b);
    std::vector<double> out(a.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = a[k] - b[k];
    return RandomVariable(a.space_, std::move(out));
  }

  friend RandomVariable operator*(double s, const RandomVariable& a) {
    return a.map([s](double x) { return s * x; });
  }

  friend RandomVariable operator+(const RandomVariable& a, double c) {
    return a.map([c](double x) { return x + c; });
  }

  friend RandomVariable operator-(const RandomVariable& a, double c) {
    return a + (-c);
  }

  void require_same_space(const RandomVariable& other) const {
    if (!compatible_with(other))
      throw MismatchedSpace("random variables live on different scenario spaces");
  }

 private:
  SpacePtr space_;
  std::vector<double> values_;
};

// Loss matrix of a financial system: one row per firm, shared space.
class SystemLoss {
 public:
  explicit SystemLoss(std::vector<RandomVariable> rows) : rows_(std::move(rows)) {
    if (rows_.empty()) throw Error("system needs at least one firm");
    for (std::size_t i = 1; i < rows_.size(); ++i)
      if (!rows_[0].compatible_with(rows_[i]))
        throw MismatchedSpace("all firm rows must share one scenario space");
  }

  static SystemLoss from_matrix(const SpacePtr& space,
                                const std::vector<std::vector<double>>& rows) {
    std::vector<RandomVariable> rv;
    rv.reserve(rows.size());
    for (const auto& r : rows) rv.emplace_back(space, r);
    return SystemLoss(std::move(rv));
  }

  // Deterministic system: firm i loses x[i] in every scenario.
  static SystemLoss deterministic(const SpacePtr& space, std::span<const double> x) {
    std::vector<RandomVariable> rv;
    rv.reserve(x.size());
    for (double xi : x) rv.push_back(RandomVariable::constant(space, xi));
    return SystemLoss(std::move(rv));
  }

  std::size_t firms() const { return rows_.size(); }
  std::size_t scenarios() const { return rows_[0].size(); }
  const SpacePtr& space() const { return rows_[0].space(); }
  const RandomVariable& row(std::size_t i) const { return rows_[i]; }
  const std::vector<RandomVariable>& rows() const { return rows_; }

  std::vector<double> column(std::size_t k) const {
    std::vector<double> x(firms());
    for (std::size_t i = 0; i < firms(); ++i) x[i] = rows_[i][k];
    return x;
  }

  RandomVariable sum_rows(std::size_t begin, std::size_t end) const {
    std::vector<double> out(scenarios(), 0.0);
    for (std::size_t k = 0; k < out.size(); ++k)
      for (std::size_t i = begin; i < end; ++i) out[k] += rows_[i][k];
    return RandomVariable(space(), std::move(out));
  }

  RandomVariable sum_rows() const { return sum_rows(0, firms()); }

 private:
  std::vector<RandomVariable> rows_;
};

inline SystemLoss scale(const SystemLoss& X, double s) {
  std::vector<RandomVariable> rows;
  rows.reserve(X.firms());
  for (std::size_t i = 0; i < X.firms(); ++i) rows.push_back(s * X.row(i));
  return SystemLoss(std::move(rows));
}

// e_i X_i: the subsystem holding only firm i's losses.
inline SystemLoss embed_single(const SystemLoss& X, std::size_t i) {
  std::vector<RandomVariable> rows;
  rows.reserve(X.firms());
  for (std::size_t j = 0; j < X.firms(); ++j)
    rows.push_back(j == i ? X.row(j) : RandomVariable::constant(X.space(), 0.0));
  return SystemLoss(std::move(rows));
}

inline double expectation(const RandomVariable& x) {
  double e = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) e += x.space()->prob(k) * x[k];
  return e;
}

inline double variance(const RandomVariable& x) {
  const double m = expectation(x);
  double v = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - m;
    v += x.space()->prob(k) * d * d;
  }
  return v;
}

// Radon-Nikodym density: nonnegative with unit expectation.
class Density {
 public:
  explicit Density(RandomVariable rv) : rv_(std::move(rv)) {
    for (double v : rv_.values())
      if (v < 0.0) throw Error("density values must be nonnegative");
    const double e = expectation(rv_);
    if (std::abs(e - 1.0) > 1e-10)
      throw Error("density expectation must be 1 (got " + std::to_string(e) + ")");
  }

  static Density uniform(const SpacePtr& space) {
    return Density(RandomVariable::constant(space, 1.0));
  }

  const RandomVariable& rv() const { return rv_; }
  const SpacePtr& space() const { return rv_.space(); }
  double operator[](std::size_t k) const { return rv_[k]; }

 private:
  RandomVariable rv_;
};

// The bilinear pairing <x, xi> = E[x xi], fixed duality of the engine.
inline double pairing(const RandomVariable& x, const RandomVariable& xi) {
  x.require_same_space(xi);
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k)
    s += x.space()->prob(k) * x[k] * xi[k];
  return s;
}

inline double pairing(const RandomVariable& x, const Density& xi) {
  return pairing(x, xi.rv());
}

// E[xi ln xi], the relative entropy of the measure with density xi against
// the base measure. Atoms with xi = 0 contribute nothing.
inline double relative_entropy(const RandomVariable& xi) {
  double h = 0.0;
  for (std::size_t k = 0; k < xi.size(); ++k) {
    const double v = xi[k];
    if (v > 0.0) h += xi.space()->prob(k) * v * std::log(v);
  }
  return h;
}

inline double relative_entropy(const Density& xi) { return relative_entropy(xi.rv()); }

// Partition of firms {1..n} into h contiguous groups, stored as the
// increasing right boundaries (n_1, ..., n_h) with n_h = n (1-based).
class GroupStructure {
 public:
  explicit GroupStructure(std::vector<std::size_t> boundaries)
      : boundaries_(std::move(boundaries)) {
    if (boundaries_.empty()) throw BadGroupStructure("empty group boundary list");
    std::size_t prev = 0;
    for (std::size_t b : boundaries_) {
      if (b <= prev) throw BadGroupStructure("group boundaries must be strictly increasing and >= 1");
      prev = b;
    }
  }

  static GroupStructure single(std::size_t n) { return GroupStructure({n}); }

  static GroupStructure singletons(std::size_t n) {
    std::vector<std::size_t> b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = i + 1;
    return GroupStructure(std::move(b));
  }

  std::size_t groups() const { return boundaries_.size(); }
  std::size_t firms() const { return boundaries_.back(); }
  const std::vector<std::size_t>& boundaries() const { return boundaries_; }

  // Half-open 0-based index range of group j.
  std::pair<std::size_t, std::size_t> range(std::size_t j) const {
    if (j >= boundaries_.size()) throw BadGroupStructure("group index out of range");
    return {j == 0 ? 0 : boundaries_[j - 1], boundaries_[j]};
  }

  void require_partition_of(std::size_t n) const {
    if (firms() != n)
      throw BadGroupStructure("group boundaries do not partition the firm set");
  }

 private:
  std::vector<std::size_t> boundaries_;
};

struct GroupSums {
  std::vector<RandomVariable> sums;
  std::vector<bool> deterministic;
};

// Determinism threshold matches the constraint set where within-group
// totals must be scalar "today".
inline constexpr double kDeterministicVarianceTol = 1e-18;

inline GroupSums group_sums(const SystemLoss& y, const GroupStructure& g) {
  g.require_partition_of(y.firms());
  GroupSums out;
  out.sums.reserve(g.groups());
  out.deterministic.reserve(g.groups());
  for (std::size_t j = 0; j < g.groups(); ++j) {
    auto [b, e] = g.range(j);
    RandomVariable s = y.sum_rows(b, e);
    out.deterministic.push_back(variance(s) < kDeterministicVarianceTol);
    out.sums.push_back(std::move(s));
  }
  return out;
}

}  // namespace sysrisk
