#pragma once

#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "sysrisk/aggregation.hpp"
#include "sysrisk/composed.hpp"
#include "sysrisk/errors.hpp"
#include "sysrisk/inject.hpp"
#include "sysrisk/numerics.hpp"
#include "sysrisk/scenario.hpp"
#include "sysrisk/single_firm.hpp"

namespace sysrisk {

struct AllocationReport {
  std::vector<double> per_firm;
  double total = 0.0;
  double risk = 0.0;
  double full_allocation_gap = 0.0;
  std::string method;
};

namespace detail {

inline AllocationReport finish_report(std::vector<double> per_firm, double risk,
                                      std::string method) {
  AllocationReport rep;
  rep.per_firm = std::move(per_firm);
  rep.total = std::accumulate(rep.per_firm.begin(), rep.per_firm.end(), 0.0);
  rep.risk = risk;
  rep.full_allocation_gap = std::abs(rep.total - rep.risk);
  rep.method = std::move(method);
  return rep;
}

}  // namespace detail

inline bool full_allocation_check(const AllocationReport& report, double tol) {
  return report.full_allocation_gap <= tol;
}

// Dual CAR for the positively homogeneous case: firm i carries <X_i, Xi_i>.
// With a nonzero penalty the shares miss the risk by exactly that penalty;
// the gap is reported, never patched.
inline AllocationReport car_dual(const ComposedRiskMeasure& rho, const SystemLoss& X,
                                 const DualSolution& sol) {
  if (sol.Xi.size() != X.firms())
    throw DimensionMismatch("dual solution firm count mismatch");
  std::vector<double> per(X.firms());
  for (std::size_t i = 0; i < per.size(); ++i) per[i] = pairing(X.row(i), sol.Xi[i]);
  return detail::finish_report(std::move(per), evaluate(rho, X), "dual");
}

// Penalized dual CAR for the (shifted) entropic-sum measure: the penalty is
// apportioned by gamma_i = theta/alpha_i, which sums to one by construction.
inline AllocationReport car_dual_penalized(double theta, double c,
                                           std::span<const double> alphas,
                                           const SystemLoss& X) {
  if (alphas.size() != X.firms())
    throw DimensionMismatch("alpha count does not match firm count");
  const DualSolution sol = dual_solution_entropic_sum(theta, c, X);
  const double risk = entropic_value(X.sum_rows(), theta) - c;
  std::vector<double> per(X.firms());
  for (std::size_t i = 0; i < per.size(); ++i) {
    const double gamma_i = theta / alphas[i];
    per[i] = pairing(X.row(i), sol.xi) - gamma_i * sol.penalty;
  }
  return detail::finish_report(std::move(per), risk, "dual-penalized");
}

inline AllocationReport car_dual_penalized(const ComposedRiskMeasure& rho,
                                           std::span<const double> alphas,
                                           const SystemLoss& X) {
  const auto* ent = rho.rho0.as<measures::Entropic>();
  if (ent == nullptr)
    throw UnsupportedRule("penalized dual CAR needs the entropic measure");
  double c = 0.0;
  if (const auto* shift = rho.rule.as<rules::SumShift>())
    c = shift->c;
  else if (rho.rule.as<rules::Sum>() == nullptr)
    throw UnsupportedRule("penalized dual CAR needs a (shifted) sum rule");
  return car_dual_penalized(ent->theta, c, alphas, X);
}

// Scenario-dependent allocation behind the penalized entropic CAR:
// Y_i = X_i - (theta/alpha_i) S + (1/alpha_i) ln E[exp(theta S)] - (theta/alpha_i) c,
// so sum_i Y_i = rho_ses(X) - c. At c = ln(theta B)/theta this is the unique
// optimal inject-capital allocation for one group.
inline SystemLoss scenario_allocation(double theta, double c,
                                      std::span<const double> alphas,
                                      const SystemLoss& X) {
  if (alphas.size() != X.firms())
    throw DimensionMismatch("alpha count does not match firm count");
  const RandomVariable s = X.sum_rows();
  const double log_mgf = entropic_value(s, theta) * theta;
  std::vector<RandomVariable> rows;
  rows.reserve(X.firms());
  for (std::size_t i = 0; i < X.firms(); ++i) {
    const double ai = alphas[i];
    rows.push_back(X.row(i) - (theta / ai) * s + (log_mgf / ai - theta * c / ai));
  }
  return SystemLoss(std::move(rows));
}

// ---------------------------------------------------------------------------
// Aumann-Shapley CARs: integrate directional derivatives along gamma X.

struct ASEvaluator {
  std::string name;
  std::function<double(const SystemLoss&)> value;
  std::function<double(const SystemLoss&, const SystemLoss&)> dderiv;
};

inline ASEvaluator make_as_evaluator(const ComposedRiskMeasure& rho) {
  return ASEvaluator{
      describe(rho), [rho](const SystemLoss& X) { return evaluate(rho, X); },
      [rho](const SystemLoss& X, const SystemLoss& V) {
        return directional_derivative(rho, X, V);
      }};
}

inline ASEvaluator make_as_evaluator(const InjectCapitalProblem& p) {
  SystemicEvaluator base = make_evaluator(p);
  return ASEvaluator{base.name,
                     [p](const SystemLoss& X) { return evaluate_closed_form(p, X); },
                     [p](const SystemLoss& X, const SystemLoss& V) {
                       return gateaux_derivative(p, X, V);
                     }};
}

// CS^AS(Y, X) = integral over [0,1] of the derivative of rho at gamma X in
// direction Y.
inline double aumann_shapley(const ASEvaluator& rho, const SystemLoss& X,
                             const SystemLoss& Y, const QuadratureConfig& cfg = {}) {
  return integrate_unit_interval(
      [&](double gamma) { return rho.dderiv(scale(X, gamma), Y); }, cfg);
}

// Whether the chain-rule differential is linear in the direction at X, i.e.
// whether the chain-rule AS can satisfy full allocation there.
inline bool chain_differential_is_linear(const AggregationRule& rule,
                                         const SystemLoss& X) {
  if (is_smooth(rule)) return true;
  if (rule.as<rules::Contagion>() != nullptr) return false;
  for (std::size_t k = 0; k < X.scenarios(); ++k)
    if (has_kink_at(rule, X.column(k))) return false;
  return true;
}

// Chain-rule form: integral of <grad rho0(Lambda(gamma X)), dLambda(gamma X, Y)>.
// Hinge rules are rejected when a scenario sits on a kink; away from kinks
// the differential factor is constant on gamma in (0,1], and the gamma = 0
// node is evaluated at the limit sign pattern.
inline double aumann_shapley_chain(const SingleFirmRiskMeasure& rho0,
                                   const AggregationRule& rule, const SystemLoss& X,
                                   const SystemLoss& Y,
                                   const QuadratureConfig& cfg = {}) {
  if (!has_gradient_density(rho0))
    throw Unsupported("chain-rule CAR needs a gradient density for rho0");
  double gamma_safe = 0.0;
  if (!is_smooth(rule)) {
    if (rule.as<rules::Contagion>() == nullptr) {
      double min_nonzero = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < X.firms(); ++i)
        for (std::size_t k = 0; k < X.scenarios(); ++k) {
          const double a = std::abs(X.row(i)[k]);
          if (a <= kKinkTol)
            throw NotDifferentiable(
                "aggregation rule is kinked at a scenario of X; chain-rule CAR undefined");
          min_nonzero = std::min(min_nonzero, a);
        }
      gamma_safe = (2.0 * kKinkTol) / min_nonzero;
    }
  }
  const auto integrand = [&](double gamma) {
    const SystemLoss gx = scale(X, gamma);
    const Density grad = gradient_density(rho0, aggregate_random(rule, gx));
    const SystemLoss gx_sign = gamma_safe > 0.0 && gamma < gamma_safe
                                   ? scale(X, gamma_safe)
                                   : gx;
    const RandomVariable dlam =
        gateaux_aggregate(rule, gx_sign, Y, DerivativeSide::TwoSided);
    return pairing(dlam, grad);
  };
  return integrate_unit_interval(integrand, cfg);
}

// Alternative form: integral of <grad rho0(gamma Lambda(X)), Lambda(Y)>.
// Defined even for kinked rules; full allocation holds only for additive
// rules, and the defect is informative.
inline double aumann_shapley_alt(const SingleFirmRiskMeasure& rho0,
                                 const AggregationRule& rule, const SystemLoss& X,
                                 const SystemLoss& Y,
                                 const QuadratureConfig& cfg = {}) {
  if (!has_gradient_density(rho0))
    throw Unsupported("alternative CAR needs a gradient density for rho0");
  const RandomVariable lam_x = aggregate_random(rule, X);
  const RandomVariable lam_y = aggregate_random(rule, Y);
  return integrate_unit_interval(
      [&](double gamma) {
        return pairing(lam_y, gradient_density(rho0, gamma * lam_x));
      },
      cfg);
}

// (exp(z) - 1)/z with the short series below 1e-8; keeps the ExpUtility AS
// closed form stable for losses near zero.
inline double expm1_over_z(double z) {
  if (std::abs(z) < 1e-8) return 1.0 + z / 2.0 + z * z / 6.0;
  return std::expm1(z) / z;
}

// Closed form E[(exp(alpha_i X_i) - 1)/alpha_i] for the chain-rule AS share
// of firm i under the exponential-utility rule with a mean-shift measure.
inline double exp_utility_as_closed_form(std::span<const double> alphas,
                                         const SystemLoss& X, std::size_t i) {
  const double ai = alphas[i];
  return expectation(
      X.row(i).map([ai](double x) { return x * expm1_over_z(ai * x); }));
}

// ---------------------------------------------------------------------------
// Report builders for the CLI and the verification suites.

inline AllocationReport allocation_report_dual(const ComposedRiskMeasure& rho,
                                               const SystemLoss& X) {
  return car_dual(rho, X, dual_solution(rho, X));
}

inline AllocationReport allocation_report_as(const ASEvaluator& rho,
                                             const SystemLoss& X,
                                             const QuadratureConfig& cfg = {}) {
  std::vector<double> per(X.firms());
  for (std::size_t i = 0; i < per.size(); ++i)
    per[i] = aumann_shapley(rho, X, embed_single(X, i), cfg);
  return detail::finish_report(std::move(per), rho.value(X), "aumann-shapley");
}

inline AllocationReport allocation_report_as_chain(const SingleFirmRiskMeasure& rho0,
                                                   const AggregationRule& rule,
                                                   const SystemLoss& X,
                                                   const QuadratureConfig& cfg = {}) {
  const ComposedRiskMeasure rho{rho0, rule};
  std::vector<double> per(X.firms());
  for (std::size_t i = 0; i < per.size(); ++i)
    per[i] = aumann_shapley_chain(rho0, rule, X, embed_single(X, i), cfg);
  return detail::finish_report(std::move(per), evaluate(rho, X), "as-chain");
}

// The alternative AS is not normalized at the diagonal, so its report
// measures the full-allocation defect against its own valuation of the
// whole system.
inline AllocationReport allocation_report_as_alt(const SingleFirmRiskMeasure& rho0,
                                                 const AggregationRule& rule,
                                                 const SystemLoss& X,
                                                 const QuadratureConfig& cfg = {}) {
  std::vector<double> per(X.firms());
  for (std::size_t i = 0; i < per.size(); ++i)
    per[i] = aumann_shapley_alt(rho0, rule, X, embed_single(X, i), cfg);
  const double diag = aumann_shapley_alt(rho0, rule, X, X, cfg);
  return detail::finish_report(std::move(per), diag, "as-alt");
}

inline AllocationReport allocation_report_inject_optimal(const InjectCapitalProblem& p,
                                                         const SystemLoss& X) {
  return detail::finish_report(systemic_capital_allocation_dual(p, X),
                               evaluate_closed_form(p, X), "inject-optimal");
}

}  // namespace sysrisk
