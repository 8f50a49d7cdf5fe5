#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "sysrisk/composed.hpp"
#include "sysrisk/errors.hpp"
#include "sysrisk/numerics.hpp"
#include "sysrisk/scenario.hpp"
#include "sysrisk/single_firm.hpp"

namespace sysrisk {

// "First inject capital" problem with exponential loss functions
// l_i(x) = exp(alpha_i x)/alpha_i and group-constrained allocations:
// R(X) = inf{ sum Y_i | group sums of Y deterministic, E[sum l_i(X_i-Y_i)] <= B }.
class InjectCapitalProblem {
 public:
  InjectCapitalProblem(std::vector<double> alphas, double B, GroupStructure groups)
      : alphas_(std::move(alphas)), B_(B), groups_(std::move(groups)) {
    if (alphas_.empty()) throw Error("inject problem needs at least one firm");
    for (double a : alphas_)
      if (!(a > 0.0)) throw Error("risk aversion parameters must be positive");
    if (!(B_ > 0.0)) throw Error("acceptance threshold B must exceed Lambda(-inf) = 0");
    groups_.require_partition_of(alphas_.size());
  }

  std::size_t firms() const { return alphas_.size(); }
  const std::vector<double>& alphas() const { return alphas_; }
  double acceptance_threshold() const { return B_; }
  const GroupStructure& groups() const { return groups_; }

  double theta() const { return theta_from_alphas(alphas_); }

  // Harmonic aggregate of the risk aversions inside group j.
  double theta_group(std::size_t j) const {
    auto [b, e] = groups_.range(j);
    double inv = 0.0;
    for (std::size_t i = b; i < e; ++i) inv += 1.0 / alphas_[i];
    return 1.0 / inv;
  }

  double loss(std::size_t i, double x) const {
    return std::exp(alphas_[i] * x) / alphas_[i];
  }

  // Fenchel conjugate of the exponential loss and its derivative.
  double loss_conjugate(std::size_t i, double y) const {
    if (y <= 0.0) return 0.0;  // y ln y -> 0
    return y * (std::log(y) - 1.0) / alphas_[i];
  }

  double loss_conjugate_derivative(std::size_t i, double y) const {
    return std::log(y) / alphas_[i];
  }

 private:
  std::vector<double> alphas_;
  double B_;
  GroupStructure groups_;
};

inline double theta_group(const InjectCapitalProblem& p, std::size_t j) {
  return p.theta_group(j);
}

// Shift c identifying the one-group problem with the shifted entropic-sum
// measure: R = rho_ses(X) - c with c = ln(theta B)/theta.
inline double identification_shift(const InjectCapitalProblem& p) {
  return std::log(p.theta() * p.acceptance_threshold()) / p.theta();
}

// Per-group capital d_j = (1/theta_j) ln E[exp(theta_j sum_{I_j} X)] - ln(theta B)/theta_j.
inline std::vector<double> group_allocation(const InjectCapitalProblem& p,
                                            const SystemLoss& X) {
  if (X.firms() != p.firms()) throw DimensionMismatch("system firm count mismatch");
  const double log_tb = std::log(p.theta() * p.acceptance_threshold());
  std::vector<double> d(p.groups().groups());
  for (std::size_t j = 0; j < d.size(); ++j) {
    auto [b, e] = p.groups().range(j);
    const double tj = p.theta_group(j);
    d[j] = entropic_value(X.sum_rows(b, e), tj) - log_tb / tj;
  }
  return d;
}

// R(X) as the sum of the per-group closed forms.
inline double evaluate_closed_form(const InjectCapitalProblem& p, const SystemLoss& X) {
  double total = 0.0;
  for (double d : group_allocation(p, X)) total += d;
  return total;
}

// Optimal dual densities: constant within each group,
// Xi_l = exp(theta_j sum_{I_j} X)/E[...] for l in I_j.
inline std::vector<Density> dual_density(const InjectCapitalProblem& p,
                                         const SystemLoss& X) {
  if (X.firms() != p.firms()) throw DimensionMismatch("system firm count mismatch");
  std::vector<Density> out;
  out.reserve(p.firms());
  for (std::size_t j = 0; j < p.groups().groups(); ++j) {
    auto [b, e] = p.groups().range(j);
    const Density xi = entropic_gradient(X.sum_rows(b, e), p.theta_group(j));
    for (std::size_t i = b; i < e; ++i) out.push_back(xi);
  }
  return out;
}

// Penalty alpha_{Lambda,B}(Xi) = sum_i (1/alpha_i)(H(Q_i|P) + ln(theta B)).
inline double penalty(const InjectCapitalProblem& p, const std::vector<Density>& Xi) {
  if (Xi.size() != p.firms()) throw DimensionMismatch("density count mismatch");
  const double log_tb = std::log(p.theta() * p.acceptance_threshold());
  double total = 0.0;
  for (std::size_t i = 0; i < Xi.size(); ++i)
    total += (relative_entropy(Xi[i]) + log_tb) / p.alphas()[i];
  return total;
}

// lambda* = theta B, the minimizer inside the conjugate form of the penalty.
inline double lambda_star(const InjectCapitalProblem& p) {
  return p.theta() * p.acceptance_threshold();
}

// Same lambda* recovered from the scalar first-order equation
// B + sum E[l*(lambda Xi)] - lambda sum E[Xi (l*)'(lambda Xi)] = 0.
inline double lambda_star_bisection(const InjectCapitalProblem& p,
                                    const std::vector<Density>& Xi) {
  const auto g = [&](double lambda) {
    if (lambda <= 0.0) return p.acceptance_threshold() + 1.0;
    double acc = p.acceptance_threshold();
    for (std::size_t i = 0; i < Xi.size(); ++i) {
      const RandomVariable& xi = Xi[i].rv();
      for (std::size_t k = 0; k < xi.size(); ++k) {
        const double v = xi[k];
        if (v <= 0.0) continue;
        const double pk = xi.space()->prob(k);
        acc += pk * p.loss_conjugate(i, lambda * v);
        acc -= pk * lambda * v * p.loss_conjugate_derivative(i, lambda * v);
      }
    }
    return acc;
  };
  return bisect_root(g, 1e-8, 2.0 * lambda_star(p) + 1.0);
}

// Explicit exponential form of the optimal allocation, firm i in group j:
// Y_i = X_i - (theta_j/alpha_i) S_j + (1/alpha_i) ln E[exp(theta_j S_j)] - ln(theta B)/alpha_i.
inline SystemLoss optimal_allocation(const InjectCapitalProblem& p, const SystemLoss& X) {
  if (X.firms() != p.firms()) throw DimensionMismatch("system firm count mismatch");
  const double log_tb = std::log(p.theta() * p.acceptance_threshold());
  std::vector<RandomVariable> rows;
  rows.reserve(p.firms());
  for (std::size_t j = 0; j < p.groups().groups(); ++j) {
    auto [b, e] = p.groups().range(j);
    const double tj = p.theta_group(j);
    const RandomVariable sj = X.sum_rows(b, e);
    const double log_mgf = entropic_value(sj, tj) * tj;  // ln E[exp(theta_j S_j)]
    for (std::size_t i = b; i < e; ++i) {
      const double ai = p.alphas()[i];
      rows.push_back(X.row(i) - (tj / ai) * sj + (log_mgf - log_tb) / ai);
    }
  }
  return SystemLoss(std::move(rows));
}

// The same allocation through the conjugate route Y_i = X_i - (l_i*)'(lambda* Xi_i).
inline SystemLoss optimal_allocation_conjugate(const InjectCapitalProblem& p,
                                               const SystemLoss& X) {
  const std::vector<Density> Xi = dual_density(p, X);
  const double ls = lambda_star(p);
  std::vector<RandomVariable> rows;
  rows.reserve(p.firms());
  for (std::size_t i = 0; i < p.firms(); ++i) {
    std::vector<double> y(X.scenarios());
    for (std::size_t k = 0; k < y.size(); ++k)
      y[k] = X.row(i)[k] - p.loss_conjugate_derivative(i, ls * Xi[i][k]);
    rows.emplace_back(X.space(), std::move(y));
  }
  return SystemLoss(std::move(rows));
}

// E[sum l_i(X_i - Y_i)] - B; zero when the acceptance constraint binds.
inline double acceptance_gap(const InjectCapitalProblem& p, const SystemLoss& X,
                             const SystemLoss& Y) {
  double e = 0.0;
  for (std::size_t i = 0; i < p.firms(); ++i)
    e += expectation((X.row(i) - Y.row(i)).map([&](double z) { return p.loss(i, z); }));
  return e - p.acceptance_threshold();
}

// Fair valuation of the optimal random allocation: component i = <Y_i, Xi_i>.
inline std::vector<double> systemic_capital_allocation_dual(
    const InjectCapitalProblem& p, const SystemLoss& X) {
  const SystemLoss Y = optimal_allocation(p, X);
  const std::vector<Density> Xi = dual_density(p, X);
  std::vector<double> cs(p.firms());
  for (std::size_t i = 0; i < cs.size(); ++i) cs[i] = pairing(Y.row(i), Xi[i]);
  return cs;
}

// Gateaux derivative of R at X in direction V: <V, Xi^X>_n.
inline double gateaux_derivative(const InjectCapitalProblem& p, const SystemLoss& X,
                                 const SystemLoss& V) {
  const std::vector<Density> Xi = dual_density(p, X);
  double d = 0.0;
  for (std::size_t i = 0; i < p.firms(); ++i) d += pairing(V.row(i), Xi[i]);
  return d;
}

// ---------------------------------------------------------------------------
// Brute-force oracle: nested grid search over allocations respecting the
// group constraint (deterministic group sums eliminate one firm per group).

struct OracleResult {
  double value = 0.0;
  SystemLoss allocation;
  double acceptance_gap = 0.0;
  std::vector<double> group_values;
};

namespace detail {

struct OracleParametrization {
  // Layout per group: d_j, then (size_j - 1) * K free scenario values.
  std::vector<std::size_t> group_offset;
  std::size_t dims = 0;
};

inline SystemLoss decode_allocation(const InjectCapitalProblem& p, const SystemLoss& X,
                                    std::span<const double> z,
                                    const OracleParametrization& par,
                                    std::vector<double>* group_values = nullptr) {
  const std::size_t K = X.scenarios();
  std::vector<std::vector<double>> rows(p.firms(), std::vector<double>(K, 0.0));
  for (std::size_t j = 0; j < p.groups().groups(); ++j) {
    auto [b, e] = p.groups().range(j);
    std::size_t off = par.group_offset[j];
    const double dj = z[off++];
    if (group_values != nullptr) group_values->push_back(dj);
    for (std::size_t k = 0; k < K; ++k) {
      double rest = 0.0;
      for (std::size_t i = b; i + 1 < e; ++i) {
        rows[i][k] = z[off + (i - b) * K + k];
        rest += rows[i][k];
      }
      rows[e - 1][k] = dj - rest;
    }
  }
  return SystemLoss::from_matrix(X.space(), rows);
}

}  // namespace detail

inline OracleResult oracle_solve(const InjectCapitalProblem& p, const SystemLoss& X) {
  const std::size_t n = p.firms(), K = X.scenarios();
  if (n > 3 || K > 3)
    throw ScaleTooLarge("oracle is limited to n <= 3 firms and K <= 3 scenarios");
  if (X.firms() != n) throw DimensionMismatch("system firm count mismatch");

  detail::OracleParametrization par;
  for (std::size_t j = 0; j < p.groups().groups(); ++j) {
    auto [b, e] = p.groups().range(j);
    par.group_offset.push_back(par.dims);
    par.dims += 1 + (e - b - 1) * K;
  }

  double max_abs_x = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < K; ++k) max_abs_x = std::max(max_abs_x, std::abs(X.row(i)[k]));
  double theta_min = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < p.groups().groups(); ++j)
    theta_min = std::min(theta_min, p.theta_group(j));
  const double log_tb = std::abs(std::log(p.theta() * p.acceptance_threshold()));
  const double w_free = 2.0 * double(n) * max_abs_x + log_tb / theta_min + 2.0;

  Box box;
  box.bounds.resize(par.dims);
  for (std::size_t j = 0; j < p.groups().groups(); ++j) {
    auto [b, e] = p.groups().range(j);
    const RandomVariable sj = X.sum_rows(b, e);
    const double smin = *std::min_element(sj.values().begin(), sj.values().end());
    const double smax = *std::max_element(sj.values().begin(), sj.values().end());
    const double wd = log_tb / p.theta_group(j) + 1.0;
    std::size_t off = par.group_offset[j];
    box.bounds[off] = {smin - wd, smax + wd};
    for (std::size_t i = b; i + 1 < e; ++i)
      for (std::size_t k = 0; k < K; ++k) {
        const double xik = X.row(i)[k];
        box.bounds[off + 1 + (i - b) * K + k] = {xik - w_free, xik + w_free};
      }
  }

  // Exact penalty for the acceptance constraint; kappa exceeds the
  // constraint multiplier sum(1/alpha_i)/B, so argmin and value match the
  // constrained problem while killing the flat directions of sum(d_j).
  double inv_alpha_sum = 0.0;
  for (double a : p.alphas()) inv_alpha_sum += 1.0 / a;
  const double kappa = 4.0 * inv_alpha_sum / p.acceptance_threshold() + 1.0;

  const auto objective = [&](std::span<const double> z) {
    const SystemLoss y = detail::decode_allocation(p, X, z, par);
    double total = 0.0;
    for (std::size_t j = 0; j < p.groups().groups(); ++j)
      total += z[par.group_offset[j]];
    const double gap = acceptance_gap(p, X, y);
    return total + kappa * std::max(gap, 0.0);
  };

  int resolution, refinements;
  switch (par.dims) {
    case 1:
    case 2: resolution = 101; refinements = 8; break;
    case 3: resolution = 41; refinements = 8; break;
    case 4: resolution = 25; refinements = 10; break;
    case 5: resolution = 17; refinements = 10; break;
    case 6: resolution = 11; refinements = 14; break;
    default: resolution = 9; refinements = 14; break;
  }

  const GridResult best = grid_minimize(objective, box, resolution, refinements);

  OracleResult out{best.value, detail::decode_allocation(p, X, best.argmin, par,
                                                         nullptr),
                   0.0, {}};
  std::vector<double> group_values;
  detail::decode_allocation(p, X, best.argmin, par, &group_values);
  out.group_values = std::move(group_values);
  out.acceptance_gap = acceptance_gap(p, X, out.allocation);
  return out;
}

inline double evaluate_numerical_oracle(const InjectCapitalProblem& p,
                                        const SystemLoss& X) {
  return oracle_solve(p, X).value;
}

// ---------------------------------------------------------------------------

inline SystemicEvaluator make_evaluator(const InjectCapitalProblem& p) {
  SystemicEvaluator ev;
  std::ostringstream os;
  os << "inject_exponential(n=" << p.firms() << ", h=" << p.groups().groups()
     << ", B=" << p.acceptance_threshold() << ")";
  ev.name = os.str();
  ev.firms = p.firms();
  ev.value = [p](const SystemLoss& X) { return evaluate_closed_form(p, X); };
  const SpacePtr atom = ScenarioSpace::create({1.0});
  ev.point = [p, atom](std::span<const double> x) {
    return evaluate_closed_form(p, SystemLoss::deterministic(atom, x));
  };
  ev.claims_positive_homogeneity = false;
  return ev;
}

// Systemic axiom suite for R plus the R(0) = 0 normalization that holds
// exactly when B = sum l_i(0) = sum 1/alpha_i.
inline AxiomReport verify_inject_properties(const InjectCapitalProblem& p,
                                            const SpacePtr& space, int samples,
                                            std::uint64_t seed) {
  AxiomReport report = check_systemic_axioms(make_evaluator(p), space, samples, seed);
  double sum_l0 = 0.0;
  for (double a : p.alphas()) sum_l0 += 1.0 / a;
  if (std::abs(p.acceptance_threshold() - sum_l0) <= 1e-12) {
    const std::vector<double> zeros(p.firms(), 0.0);
    const SpacePtr atom = ScenarioSpace::create({1.0});
    const double r0 = evaluate_closed_form(p, SystemLoss::deterministic(atom, zeros));
    report.add("R(0) = 0 at B = sum l_i(0)", std::abs(r0) <= 1e-10,
               std::abs(r0) <= 1e-10 ? "" : "R(0) = " + std::to_string(r0));
  } else {
    report.add_skipped("R(0) = 0 at B = sum l_i(0)",
                       "B != sum l_i(0), normalization not claimed");
  }
  return report;
}

// One-group identification with the shifted entropic-sum measure.
inline ComposedRiskMeasure to_composed(const InjectCapitalProblem& p) {
  if (p.groups().groups() != 1)
    throw Unsupported("identification with a composed measure needs one group");
  return ComposedRiskMeasure{SingleFirmRiskMeasure::entropic(p.theta()),
                             AggregationRule::sum_shift(p.firms(),
                                                        identification_shift(p))};
}

}  // namespace sysrisk
