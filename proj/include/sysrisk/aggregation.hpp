#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "sysrisk/errors.hpp"
#include "sysrisk/numerics.hpp"
#include "sysrisk/report.hpp"
#include "sysrisk/rng.hpp"
#include "sysrisk/scenario.hpp"
#include "sysrisk/simplex.hpp"

namespace sysrisk {

// Scenario values this close to a hinge point are treated as kinks.
inline constexpr double kKinkTol = 1e-6;

enum class DerivativeSide { TwoSided, Right };

namespace rules {

struct Sum {
  std::size_t n;
};

struct SumShift {
  std::size_t n;
  double c;
};

struct Loss {
  std::size_t n;
};

struct LossThreshold {
  std::size_t n;
  double b;
};

struct Critical {
  std::size_t n;
  std::vector<std::size_t> critical;  // 0-based indices
  double gamma;
};

struct ExpUtility {
  std::vector<double> alphas;
};

struct Contagion {
  std::vector<std::vector<double>> pi;  // relative liabilities, row-substochastic
  double gamma;
};

}  // namespace rules

// Aggregation rule Lambda: R^n -> R compressing firm losses into one
// systemic loss figure.
class AggregationRule {
 public:
  using Variant = std::variant<rules::Sum, rules::SumShift, rules::Loss,
                               rules::LossThreshold, rules::Critical,
                               rules::ExpUtility, rules::Contagion>;

  static AggregationRule sum(std::size_t n) { return AggregationRule(rules::Sum{n}); }

  static AggregationRule sum_shift(std::size_t n, double c) {
    return AggregationRule(rules::SumShift{n, c});
  }

  static AggregationRule loss(std::size_t n) { return AggregationRule(rules::Loss{n}); }

  static AggregationRule loss_threshold(std::size_t n, double b) {
    if (b < 0.0) throw Error("loss threshold b must be >= 0");
    return AggregationRule(rules::LossThreshold{n, b});
  }

  static AggregationRule critical(std::size_t n, std::vector<std::size_t> critical_set,
                                  double gamma) {
    if (!(gamma > 0.0)) throw Error("critical rule needs gamma > 0");
    if (critical_set.empty()) throw Error("critical set must be nonempty");
    for (std::size_t i : critical_set)
      if (i >= n) throw Error("critical index out of range");
    return AggregationRule(rules::Critical{n, std::move(critical_set), gamma});
  }

  static AggregationRule exp_utility(std::vector<double> alphas) {
    if (alphas.empty()) throw Error("exp utility rule needs at least one firm");
    for (double a : alphas)
      if (!(a > 0.0)) throw Error("risk aversion parameters must be positive");
    return AggregationRule(rules::ExpUtility{std::move(alphas)});
  }

  static AggregationRule contagion(std::vector<std::vector<double>> pi, double gamma) {
    if (!(gamma > 1.0)) throw Error("contagion rule needs gamma > 1");
    const std::size_t n = pi.size();
    if (n == 0) throw Error("contagion rule needs at least one firm");
    for (const auto& row : pi) {
      if (row.size() != n) throw DimensionMismatch("liability matrix must be square");
      double total = 0.0;
      for (double v : row) {
        if (v < 0.0 || v > 1.0) throw Error("liability proportions must lie in [0,1]");
        total += v;
      }
      if (total > 1.0 + 1e-12) throw Error("liability matrix row sums must be <= 1");
    }
    return AggregationRule(rules::Contagion{std::move(pi), gamma});
  }

  const Variant& variant() const { return v_; }

  std::size_t firms() const {
    return std::visit(
        [](const auto& r) -> std::size_t {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, rules::ExpUtility>)
            return r.alphas.size();
          else if constexpr (std::is_same_v<T, rules::Contagion>)
            return r.pi.size();
          else
            return r.n;
        },
        v_);
  }

  template <typename T>
  const T* as() const {
    return std::get_if<T>(&v_);
  }

 private:
  explicit AggregationRule(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

inline double aggregate_point(const AggregationRule& rule, std::span<const double> x) {
  if (x.size() != rule.firms())
    throw DimensionMismatch("loss vector size does not match rule firm count");
  return std::visit(
      [&](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, rules::Sum>) {
          double s = 0.0;
          for (double v : x) s += v;
          return s;
        } else if constexpr (std::is_same_v<T, rules::SumShift>) {
          double s = -r.c;
          for (double v : x) s += v;
          return s;
        } else if constexpr (std::is_same_v<T, rules::Loss>) {
          double s = 0.0;
          for (double v : x) s += std::max(v, 0.0);
          return s;
        } else if constexpr (std::is_same_v<T, rules::LossThreshold>) {
          double s = 0.0;
          for (double v : x) s += std::max(v - r.b, 0.0);
          return s;
        } else if constexpr (std::is_same_v<T, rules::Critical>) {
          double crit = 0.0;
          std::vector<bool> in_a(x.size(), false);
          for (std::size_t i : r.critical) in_a[i] = true;
          double rest = 0.0;
          for (std::size_t i = 0; i < x.size(); ++i) {
            if (in_a[i])
              crit += std::max(x[i], 0.0);
            else
              rest += std::max(x[i], 0.0);
          }
          return std::exp(r.gamma * crit) - 1.0 + rest;
        } else if constexpr (std::is_same_v<T, rules::ExpUtility>) {
          double s = 0.0;
          for (std::size_t i = 0; i < x.size(); ++i)
            s += std::exp(r.alphas[i] * x[i]) / r.alphas[i];
          return s;
        } else {
          // Structural contagion: each firm covers its loss plus shortfall
          // passed on by others, via bailout b (cost gamma) or reduced
          // payments y (cost 1, creating losses Pi_ij * y_i downstream).
          const std::size_t n = x.size();
          LinearProgram lp;
          lp.objective.assign(2 * n, 1.0);
          for (std::size_t i = n; i < 2 * n; ++i) lp.objective[i] = r.gamma;
          lp.constraints.assign(n, std::vector<double>(2 * n, 0.0));
          lp.rhs.assign(x.begin(), x.end());
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j)
              lp.constraints[i][j] = (i == j ? 1.0 : 0.0) - r.pi[j][i];
            lp.constraints[i][n + i] = 1.0;
          }
          return solve_lp(lp).value;
        }
      },
      rule.variant());
}

inline RandomVariable aggregate_random(const AggregationRule& rule,
                                       const SystemLoss& X) {
  if (X.firms() != rule.firms())
    throw DimensionMismatch("system firm count does not match rule");
  std::vector<double> out(X.scenarios());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = aggregate_point(rule, X.column(k));
  return RandomVariable(X.space(), std::move(out));
}

// f_Lambda(a) = Lambda(a * 1_n); used to inspect the diagonal range.
inline double f_lambda(const AggregationRule& rule, double a) {
  std::vector<double> x(rule.firms(), a);
  return aggregate_point(rule, x);
}

inline bool is_positively_homogeneous(const AggregationRule& rule) {
  return std::visit(
      [](const auto& r) -> bool {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, rules::Sum> || std::is_same_v<T, rules::Loss> ||
                      std::is_same_v<T, rules::Contagion>)
          return true;
        else if constexpr (std::is_same_v<T, rules::SumShift>)
          return r.c == 0.0;
        else if constexpr (std::is_same_v<T, rules::LossThreshold>)
          return r.b == 0.0;
        else
          return false;
      },
      rule.variant());
}

inline bool is_smooth(const AggregationRule& rule) {
  return std::visit(
      [](const auto& r) -> bool {
        using T = std::decay_t<decltype(r)>;
        return std::is_same_v<T, rules::Sum> || std::is_same_v<T, rules::SumShift> ||
               std::is_same_v<T, rules::ExpUtility>;
      },
      rule.variant());
}

// True when x sits on a hinge of the rule (within kKinkTol).
inline bool has_kink_at(const AggregationRule& rule, std::span<const double> x) {
  if (is_smooth(rule)) return false;
  return std::visit(
      [&](const auto& r) -> bool {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, rules::Loss> || std::is_same_v<T, rules::Critical>) {
          for (double v : x)
            if (std::abs(v) <= kKinkTol) return true;
          return false;
        } else if constexpr (std::is_same_v<T, rules::LossThreshold>) {
          for (double v : x)
            if (std::abs(v - r.b) <= kKinkTol) return true;
          return false;
        } else {
          return true;  // contagion: piecewise linear, hinge locations implicit
        }
      },
      rule.variant());
}

inline std::string describe(const AggregationRule& rule) {
  std::ostringstream os;
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, rules::Sum>)
          os << "sum(n=" << r.n << ")";
        else if constexpr (std::is_same_v<T, rules::SumShift>)
          os << "sum_shift(n=" << r.n << ", c=" << r.c << ")";
        else if constexpr (std::is_same_v<T, rules::Loss>)
          os << "loss(n=" << r.n << ")";
        else if constexpr (std::is_same_v<T, rules::LossThreshold>)
          os << "loss_threshold(n=" << r.n << ", b=" << r.b << ")";
        else if constexpr (std::is_same_v<T, rules::Critical>)
          os << "critical(n=" << r.n << ", |A|=" << r.critical.size()
             << ", gamma=" << r.gamma << ")";
        else if constexpr (std::is_same_v<T, rules::ExpUtility>)
          os << "exp_utility(n=" << r.alphas.size() << ")";
        else
          os << "contagion(n=" << r.pi.size() << ", gamma=" << r.gamma << ")";
      },
      rule.variant());
  return os.str();
}

namespace detail {

// Directional derivative of t -> max(t,0) at x in direction v.
inline double hinge_derivative(double x, double v, double offset,
                               DerivativeSide side) {
  const double z = x - offset;
  if (z > kKinkTol) return v;
  if (z < -kKinkTol) return 0.0;
  const double right = std::max(v, 0.0);
  const double left = std::min(v, 0.0);
  if (side == DerivativeSide::TwoSided && std::abs(left - right) > 1e-6)
    throw NotDifferentiable("hinge kink hit with a two-sided derivative request");
  return right;
}

inline double aggregate_derivative_point(const AggregationRule& rule,
                                         std::span<const double> x,
                                         std::span<const double> v,
                                         DerivativeSide side) {
  return std::visit(
      [&](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, rules::Sum> || std::is_same_v<T, rules::SumShift>) {
          double s = 0.0;
          for (double d : v) s += d;
          return s;
        } else if constexpr (std::is_same_v<T, rules::Loss>) {
          double s = 0.0;
          for (std::size_t i = 0; i < x.size(); ++i)
            s += hinge_derivative(x[i], v[i], 0.0, side);
          return s;
        } else if constexpr (std::is_same_v<T, rules::LossThreshold>) {
          double s = 0.0;
          for (std::size_t i = 0; i < x.size(); ++i)
            s += hinge_derivative(x[i], v[i], r.b, side);
          return s;
        } else if constexpr (std::is_same_v<T, rules::Critical>) {
          std::vector<bool> in_a(x.size(), false);
          for (std::size_t i : r.critical) in_a[i] = true;
          double crit = 0.0, dcrit = 0.0, drest = 0.0;
          for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = hinge_derivative(x[i], v[i], 0.0, side);
            if (in_a[i]) {
              crit += std::max(x[i], 0.0);
              dcrit += d;
            } else {
              drest += d;
            }
          }
          return r.gamma * std::exp(r.gamma * crit) * dcrit + drest;
        } else if constexpr (std::is_same_v<T, rules::ExpUtility>) {
          double s = 0.0;
          for (std::size_t i = 0; i < x.size(); ++i)
            s += std::exp(r.alphas[i] * x[i]) * v[i];
          return s;
        } else {
          const auto f = [&](std::span<const double> p) {
            return aggregate_point(rule, p);
          };
          if (side == DerivativeSide::Right)
            return directional_derivative_fd_right(f, x, v);
          const double h = fd_step(x);
          const double fx = f(x);
          const double right = (f(axpy(x, h, v)) - fx) / h;
          const double left = (fx - f(axpy(x, -h, v))) / h;
          if (std::abs(left - right) > 1e-6)
            throw NotDifferentiable("contagion value has a kink along this direction");
          return 0.5 * (left + right);
        }
      },
      rule.variant());
}

}  // namespace detail

// Scenario-wise directional derivative of the aggregate, X in direction V.
inline RandomVariable gateaux_aggregate(const AggregationRule& rule,
                                        const SystemLoss& X, const SystemLoss& V,
                                        DerivativeSide side = DerivativeSide::TwoSided) {
  if (X.firms() != rule.firms() || V.firms() != rule.firms())
    throw DimensionMismatch("system firm count does not match rule");
  X.row(0).require_same_space(V.row(0));
  std::vector<double> out(X.scenarios());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const std::vector<double> xk = X.column(k), vk = V.column(k);
    out[k] = detail::aggregate_derivative_point(rule, xk, vk, side);
  }
  return RandomVariable(X.space(), std::move(out));
}

enum class SurjectivityTarget { RealLine, NonNegative };

namespace detail {

inline std::string vec_to_string(std::span<const double> x) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
  os << ")";
  return os.str();
}

}  // namespace detail

// Randomized evidence for (A1)-(A5). Surjectivity is a range scan over
// diagonal points and is reported as evidence, not proof.
inline AxiomReport check_ar_axioms(const AggregationRule& rule, int samples,
                                   std::uint64_t seed,
                                   SurjectivityTarget target = SurjectivityTarget::RealLine) {
  Rng rng(seed);
  const std::size_t n = rule.firms();
  AxiomReport report;

  {  // (A1) monotonicity
    bool ok = true;
    std::string detail;
    for (int s = 0; s < samples && ok; ++s) {
      auto x = rng.uniform_vector(n, -3.0, 3.0);
      auto y = x;
      for (auto& v : y) v -= rng.uniform(0.0, 2.0);
      if (aggregate_point(rule, x) < aggregate_point(rule, y) - 1e-9) {
        ok = false;
        detail = "violated at x=" + detail::vec_to_string(x) +
                 " >= y=" + detail::vec_to_string(y);
      }
    }
    report.add("A1 monotonicity", ok, detail);
  }

  {  // (A2) convexity
    bool ok = true;
    std::string detail;
    for (int s = 0; s < samples && ok; ++s) {
      auto x = rng.uniform_vector(n, -3.0, 3.0);
      auto y = rng.uniform_vector(n, -3.0, 3.0);
      const double a = rng.uniform(0.0, 1.0);
      std::vector<double> z(n);
      for (std::size_t i = 0; i < n; ++i) z[i] = a * x[i] + (1.0 - a) * y[i];
      const double lhs = aggregate_point(rule, z);
      const double rhs = a * aggregate_point(rule, x) + (1.0 - a) * aggregate_point(rule, y);
      if (lhs > rhs + 1e-10) {
        ok = false;
        detail = "violated at alpha=" + std::to_string(a);
      }
    }
    report.add("A2 convexity", ok, detail);
  }

  {  // (A3) surjectivity evidence via the diagonal map f_Lambda
    double fmin = f_lambda(rule, -40.0), fmax = fmin;
    for (int i = 0; i <= 200; ++i) {
      const double a = -40.0 + 80.0 * i / 200.0;
      const double f = f_lambda(rule, a);
      fmin = std::min(fmin, f);
      fmax = std::max(fmax, f);
    }
    std::ostringstream os;
    os << "diagonal range evidence [" << fmin << ", " << fmax << "]";
    bool ok;
    if (target == SurjectivityTarget::RealLine) {
      ok = fmin <= -10.0 && fmax >= 10.0;
      os << " vs target R";
    } else {
      ok = fmin >= -1e-9 && fmin <= 1e-6 && fmax >= 10.0;
      os << " vs target R+";
    }
    report.add("A3 surjectivity (evidence)", ok, os.str());
  }

  {  // (A4) positive homogeneity
    bool ok = true;
    std::string detail;
    for (int s = 0; s < samples && ok; ++s) {
      auto x = rng.uniform_vector(n, -3.0, 3.0);
      const double a = rng.uniform(0.0, 3.0);
      std::vector<double> ax(n);
      for (std::size_t i = 0; i < n; ++i) ax[i] = a * x[i];
      const double lhs = aggregate_point(rule, ax);
      const double rhs = a * aggregate_point(rule, x);
      if (std::abs(lhs - rhs) > 1e-8 * std::max(1.0, std::abs(rhs))) {
        ok = false;
        detail = "Lambda(a x) = " + std::to_string(lhs) + " != a Lambda(x) = " +
                 std::to_string(rhs) + " at a=" + std::to_string(a) +
                 ", x=" + detail::vec_to_string(x);
      }
    }
    report.add("A4 positive homogeneity", ok, detail);
  }

  {  // (A5) normalization
    const double f1 = f_lambda(rule, 1.0);
    const bool ok = std::abs(f1 - double(n)) <= 1e-12;
    report.add("A5 normalization", ok,
               ok ? "" : "Lambda(1_n) = " + std::to_string(f1) + " != n = " + std::to_string(n));
  }

  return report;
}

}  // namespace sysrisk
