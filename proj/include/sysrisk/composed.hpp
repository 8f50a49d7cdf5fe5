#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "sysrisk/aggregation.hpp"
#include "sysrisk/errors.hpp"
#include "sysrisk/numerics.hpp"
#include "sysrisk/report.hpp"
#include "sysrisk/rng.hpp"
#include "sysrisk/scenario.hpp"
#include "sysrisk/single_firm.hpp"

namespace sysrisk {

// "First aggregate" systemic risk measure rho = rho0 o Lambda.
struct ComposedRiskMeasure {
  SingleFirmRiskMeasure rho0;
  AggregationRule rule;
};

// Candidate dual point: base density xi, one density per firm, and the
// penalty charged to it. Plain data; verify_dual_feasibility judges it.
struct DualSolution {
  RandomVariable xi;
  std::vector<RandomVariable> Xi;
  double penalty = 0.0;
};

inline double evaluate(const ComposedRiskMeasure& rho, const SystemLoss& X) {
  return evaluate(rho.rho0, aggregate_random(rho.rule, X));
}

inline bool is_positively_homogeneous(const ComposedRiskMeasure& rho) {
  return is_positively_homogeneous(rho.rho0) && is_positively_homogeneous(rho.rule);
}

inline std::string describe(const ComposedRiskMeasure& rho) {
  return describe(rho.rho0) + " o " + describe(rho.rule);
}

// Epigraph form inf{ m | m >= rho0(Y), Y >= Lambda(X) }, minimized over a
// grid of candidates Y above the aggregate. Exists as an executable proof
// that the epigraph optimum sits at Y = Lambda(X).
inline double primal_evaluate(const ComposedRiskMeasure& rho, const SystemLoss& X,
                              int grid = 8) {
  if (grid < 1) throw Error("primal grid resolution must be >= 1");
  const RandomVariable base = aggregate_random(rho.rule, X);
  double best = evaluate(rho.rho0, base);
  for (int g = 1; g <= grid; ++g) {
    const double t = 2.0 * g / grid;
    best = std::min(best, evaluate(rho.rho0, base + t));
    for (std::size_t k = 0; k < base.size(); ++k) {
      std::vector<double> bumped = base.values();
      bumped[k] += t;
      best = std::min(best, evaluate(rho.rho0, RandomVariable(base.space(), bumped)));
    }
  }
  return best;
}

// Closed-form optimal dual point for the entropic measure composed with
// (shifted) summation: xi = exp(theta S)/E[exp(theta S)], Xi_i = xi, and
// penalty (1/theta) E[xi ln xi] + c.
inline DualSolution dual_solution_entropic_sum(double theta, double c,
                                               const SystemLoss& X) {
  const Density xi = entropic_gradient(X.sum_rows(), theta);
  DualSolution sol{xi.rv(), std::vector<RandomVariable>(X.firms(), xi.rv()),
                   relative_entropy(xi) / theta + c};
  return sol;
}

inline DualSolution dual_solution(const ComposedRiskMeasure& rho, const SystemLoss& X) {
  const auto* ent = rho.rho0.as<measures::Entropic>();
  if (ent == nullptr)
    throw UnsupportedRule("closed-form dual point needs the entropic measure");
  if (rho.rule.as<rules::Sum>() != nullptr)
    return dual_solution_entropic_sum(ent->theta, 0.0, X);
  if (const auto* shift = rho.rule.as<rules::SumShift>())
    return dual_solution_entropic_sum(ent->theta, shift->c, X);
  throw UnsupportedRule("closed-form dual point needs a (shifted) sum rule");
}

// rho(X) - (<X,Xi>_n - penalty). Nonnegative for feasible candidates (weak
// duality), zero at an optimal one.
inline double dual_gap(const ComposedRiskMeasure& rho, const SystemLoss& X,
                       const DualSolution& sol) {
  if (sol.Xi.size() != X.firms())
    throw DimensionMismatch("dual candidate firm count mismatch");
  double lower = -sol.penalty;
  for (std::size_t i = 0; i < X.firms(); ++i) lower += pairing(X.row(i), sol.Xi[i]);
  return evaluate(rho, X) - lower;
}

// Sampled membership checks for the dual cones A'_rho0 and A'_Lambda plus
// the normalization and sign constraints every feasible point carries. The
// cone tests only bind when the respective component is positively
// homogeneous; otherwise they are reported as skipped.
inline AxiomReport verify_dual_feasibility(const ComposedRiskMeasure& rho,
                                           const DualSolution& sol, int samples,
                                           std::uint64_t seed) {
  Rng rng(seed);
  AxiomReport report;
  const SpacePtr space = sol.xi.space();
  const std::size_t K = space->size();
  const std::size_t n = sol.Xi.size();

  {
    bool ok = true;
    std::string detail;
    for (std::size_t k = 0; k < K && ok; ++k)
      if (sol.xi[k] < -1e-12) {
        ok = false;
        detail = "xi has a negative atom";
      }
    for (std::size_t i = 0; i < n && ok; ++i)
      for (std::size_t k = 0; k < K && ok; ++k)
        if (sol.Xi[i][k] < -1e-12) {
          ok = false;
          detail = "Xi_" + std::to_string(i + 1) + " has a negative atom";
        }
    report.add("nonnegativity", ok, detail);
  }

  {
    const double mass = expectation(sol.xi);
    const bool ok = std::abs(mass - 1.0) <= 1e-10;
    report.add("normalization <1,xi> = 1", ok,
               ok ? "" : "<1,xi> = " + std::to_string(mass));
  }

  if (is_positively_homogeneous(rho.rho0)) {
    bool ok = true;
    std::string detail;
    for (int s = 0; s < samples && ok; ++s) {
      const RandomVariable y(space, rng.uniform_vector(K, -3.0, 3.0));
      const double m = evaluate(rho.rho0, y) + std::abs(rng.normal());
      if (m - pairing(y, sol.xi) < -1e-9) {
        ok = false;
        detail = "m - <Y,xi> < 0 on an epigraph sample";
      }
    }
    report.add("rho0 cone membership", ok, detail);
  } else {
    report.add_skipped("rho0 cone membership",
                       "rho0 not positively homogeneous; its penalty is finite");
  }

  if (is_positively_homogeneous(rho.rule)) {
    bool ok = true;
    std::string detail;
    for (int s = 0; s < samples && ok; ++s) {
      std::vector<RandomVariable> rows;
      for (std::size_t i = 0; i < n; ++i)
        rows.emplace_back(space, rng.uniform_vector(K, -3.0, 3.0));
      const SystemLoss z(rows);
      RandomVariable y = aggregate_random(rho.rule, z);
      y = y.map([&](double v) { return v + std::abs(rng.normal()); });
      double rhs = 0.0;
      for (std::size_t i = 0; i < n; ++i) rhs += pairing(z.row(i), sol.Xi[i]);
      if (pairing(y, sol.xi) - rhs < -1e-9) {
        ok = false;
        detail = "<Y,xi> < <Z,Xi>_n on an epigraph sample";
      }
    }
    report.add("Lambda cone membership", ok, detail);

    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) mass += expectation(sol.Xi[i]);
    const bool ok_mass = mass <= double(n) + 1e-9;
    report.add("mass bound <1_n,Xi> <= n", ok_mass,
               ok_mass ? "" : "<1_n,Xi> = " + std::to_string(mass));
  } else {
    report.add_skipped("Lambda cone membership",
                       "rule not positively homogeneous; its penalty is finite");
  }

  return report;
}

// Directional derivative of rho at X in direction V. Analytic chain rule
// where the gradient density exists, scenario-wise right derivatives at
// kinks, finite differences for acceptance-set measures.
inline double directional_derivative(const ComposedRiskMeasure& rho,
                                     const SystemLoss& X, const SystemLoss& V) {
  if (has_gradient_density(rho.rho0)) {
    DerivativeSide side = DerivativeSide::TwoSided;
    if (!is_smooth(rho.rule)) {
      for (std::size_t k = 0; k < X.scenarios(); ++k)
        if (has_kink_at(rho.rule, X.column(k))) {
          side = DerivativeSide::Right;
          break;
        }
    }
    const RandomVariable dlam = gateaux_aggregate(rho.rule, X, V, side);
    return pairing(dlam, gradient_density(rho.rho0, aggregate_random(rho.rule, X)));
  }
  // Finite-difference fallback along t -> rho(X + tV).
  const auto along = [&](double t) {
    std::vector<RandomVariable> rows;
    for (std::size_t i = 0; i < X.firms(); ++i) rows.push_back(X.row(i) + t * V.row(i));
    return evaluate(rho, SystemLoss(rows));
  };
  return directional_derivative_fd_scalar(along, 0.0, 1.0);
}

struct SubgradientReport {
  bool passed = false;
  double worst_margin = 0.0;
  std::string detail;
};

// Verifies <U - X, Xi>_n <= rho(U) - rho(X) over sampled systems U.
inline SubgradientReport subgradient_check(const ComposedRiskMeasure& rho,
                                           const SystemLoss& X, const DualSolution& sol,
                                           int samples, std::uint64_t seed) {
  Rng rng(seed);
  const double rho_x = evaluate(rho, X);
  const std::size_t n = X.firms(), K = X.scenarios();

  SubgradientReport rep;
  rep.worst_margin = std::numeric_limits<double>::infinity();

  const auto probe = [&](const SystemLoss& u) {
    double inner = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      inner += pairing(u.row(i) - X.row(i), sol.Xi[i]);
    const double margin = evaluate(rho, u) - rho_x - inner;
    if (margin < rep.worst_margin) rep.worst_margin = margin;
  };

  for (int s = 0; s < samples; ++s) {
    const double scale = (s % 3 == 0) ? 0.1 : 1.0;
    std::vector<RandomVariable> rows;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> vals(K);
      for (auto& v : vals) v = rng.normal(0.0, scale);
      rows.push_back(X.row(i) + RandomVariable(X.space(), vals));
    }
    probe(SystemLoss(rows));
  }
  // Scaled copies of X probe the kink of the conjugate directly.
  for (double a : {0.0, 0.5, 1.5, 2.0}) {
    std::vector<RandomVariable> rows;
    for (std::size_t i = 0; i < n; ++i) rows.push_back(a * X.row(i));
    probe(SystemLoss(rows));
  }

  rep.passed = rep.worst_margin >= -1e-9;
  std::ostringstream os;
  os << "worst margin " << rep.worst_margin;
  rep.detail = os.str();
  return rep;
}

// ---------------------------------------------------------------------------
// Systemic axiom suite, shared by both measure families. The evaluator
// carries the measure on random systems plus its restriction to
// deterministic loss vectors (used scenario-wise by S2b/S4).
struct SystemicEvaluator {
  std::string name;
  std::size_t firms = 0;
  std::function<double(const SystemLoss&)> value;
  std::function<double(std::span<const double>)> point;
  bool claims_positive_homogeneity = false;
};

inline SystemicEvaluator make_evaluator(const ComposedRiskMeasure& rho) {
  SystemicEvaluator ev;
  ev.name = describe(rho);
  ev.firms = rho.rule.firms();
  ev.value = [rho](const SystemLoss& X) { return evaluate(rho, X); };
  const SpacePtr atom = ScenarioSpace::create({1.0});
  ev.point = [rho, atom](std::span<const double> x) {
    return evaluate(rho, SystemLoss::deterministic(atom, x));
  };
  ev.claims_positive_homogeneity = is_positively_homogeneous(rho);
  return ev;
}

inline AxiomReport check_systemic_axioms(
    const SystemicEvaluator& ev, const SpacePtr& space, int samples,
    std::uint64_t seed, SurjectivityTarget target = SurjectivityTarget::RealLine) {
  Rng rng(seed);
  AxiomReport report;
  const std::size_t n = ev.firms, K = space->size();

  const auto sample_system = [&] {
    std::vector<RandomVariable> rows;
    for (std::size_t i = 0; i < n; ++i)
      rows.emplace_back(space, rng.uniform_vector(K, -2.0, 2.0));
    return SystemLoss(rows);
  };

  {  // (S1)
    bool ok = true;
    std::string detail;
    for (int s = 0; s < samples && ok; ++s) {
      const SystemLoss y = sample_system();
      std::vector<RandomVariable> rows;
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> bump(K);
        for (auto& b : bump) b = rng.uniform(0.0, 1.5);
        rows.push_back(y.row(i) + RandomVariable(space, bump));
      }
      if (ev.value(SystemLoss(rows)) < ev.value(y) - 1e-9) {
        ok = false;
        detail = "rho(X) < rho(Y) for X >= Y";
      }
    }
    report.add("S1 monotonicity", ok, detail);
  }

  {  // (S2a)
    bool ok = true;
    std::string detail;
    for (int s = 0; s < samples && ok; ++s) {
      const SystemLoss x = sample_system(), y = sample_system();
      const double a = rng.uniform(0.0, 1.0);
      std::vector<RandomVariable> rows;
      for (std::size_t i = 0; i < n; ++i)
        rows.push_back(a * x.row(i) + (1.0 - a) * y.row(i));
      if (ev.value(SystemLoss(rows)) >
          a * ev.value(x) + (1.0 - a) * ev.value(y) + 1e-10) {
        ok = false;
        detail = "outcome convexity violated at alpha=" + std::to_string(a);
      }
    }
    report.add("S2a outcome convexity", ok, detail);
  }

  {  // (S2b): synthesize Z with rho(Z(w)) = a rho(X(w)) + (1-a) rho(Y(w))
    bool ok = true, bracket_failed = false;
    std::string detail;
    const int rounds = std::max(1, samples / 10);
    for (int s = 0; s < rounds && ok && !bracket_failed; ++s) {
      const SystemLoss x = sample_system(), y = sample_system();
      const double a = rng.uniform(0.0, 1.0);
      std::vector<double> diag(K);
      try {
        for (std::size_t k = 0; k < K; ++k) {
          const double tgt =
              a * ev.point(x.column(k)) + (1.0 - a) * ev.point(y.column(k));
          diag[k] = bisect_root(
              [&](double z) {
                const std::vector<double> zv(n, z);
                return ev.point(zv) - tgt;
              },
              tgt / double(n) - 5.0, tgt / double(n) + 5.0);
        }
      } catch (const NoBracket&) {
        bracket_failed = true;
        break;
      }
      const RandomVariable zrow(space, diag);
      const SystemLoss z(std::vector<RandomVariable>(n, zrow));
      if (ev.value(z) > a * ev.value(x) + (1.0 - a) * ev.value(y) + 1e-7) {
        ok = false;
        detail = "risk convexity violated at alpha=" + std::to_string(a);
      }
    }
    if (bracket_failed)
      report.add_skipped("S2b risk convexity",
                         "could not synthesize the scenario-wise premise for this family");
    else
      report.add("S2b risk convexity", ok, detail);
  }

  {  // (S3)
    bool ok = true;
    std::string detail;
    for (int s = 0; s < samples && ok; ++s) {
      const SystemLoss x = sample_system();
      const double a = rng.uniform(0.0, 3.0);
      std::vector<RandomVariable> rows;
      for (std::size_t i = 0; i < n; ++i) rows.push_back(a * x.row(i));
      const double lhs = ev.value(SystemLoss(rows));
      const double rhs = a * ev.value(x);
      if (std::abs(lhs - rhs) > 1e-8 * std::max(1.0, std::abs(rhs))) {
        ok = false;
        std::ostringstream os;
        os << "rho(aX)=" << lhs << " != a rho(X)=" << rhs << " at a=" << a;
        detail = os.str();
      }
    }
    report.add("S3 positive homogeneity", ok, detail);
  }

  {  // (S4): X = Y + s(w) 1_n with s >= 0 makes the premise hold atom-wise
    bool ok = true;
    std::string detail;
    for (int s = 0; s < samples && ok; ++s) {
      const SystemLoss y = sample_system();
      std::vector<double> shift(K);
      for (auto& v : shift) v = rng.uniform(0.0, 2.0);
      const RandomVariable srow(space, shift);
      std::vector<RandomVariable> rows;
      for (std::size_t i = 0; i < n; ++i) rows.push_back(y.row(i) + srow);
      const SystemLoss x(rows);
      bool premise = true;
      for (std::size_t k = 0; k < K && premise; ++k)
        premise = ev.point(x.column(k)) >= ev.point(y.column(k)) - 1e-12;
      if (!premise) continue;
      if (ev.value(x) < ev.value(y) - 1e-9) {
        ok = false;
        detail = "preference consistency violated";
      }
    }
    report.add("S4 preference consistency", ok, detail);
  }

  {  // (S5) surjectivity evidence on deterministic diagonals
    double fmin = std::numeric_limits<double>::infinity(), fmax = -fmin;
    for (int i = 0; i <= 200; ++i) {
      const double a = -40.0 + 80.0 * i / 200.0;
      const std::vector<double> diag(n, a);
      const double f = ev.point(diag);
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
    report.add("S5 surjectivity (evidence)", ok, os.str());
  }

  {  // (S6)
    const std::vector<double> ones(n, 1.0);
    const double r = ev.point(ones);
    const bool ok = std::abs(r - double(n)) <= 1e-9;
    report.add("S6 normalization", ok,
               ok ? "" : "rho(1_n) = " + std::to_string(r) + " != n = " + std::to_string(n));
  }

  return report;
}

inline AxiomReport check_systemic_axioms(const ComposedRiskMeasure& rho,
                                         const SpacePtr& space, int samples,
                                         std::uint64_t seed) {
  return check_systemic_axioms(make_evaluator(rho), space, samples, seed);
}

}  // namespace sysrisk
