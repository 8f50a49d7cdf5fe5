#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "sysrisk/errors.hpp"
#include "sysrisk/numerics.hpp"
#include "sysrisk/report.hpp"
#include "sysrisk/rng.hpp"
#include "sysrisk/scenario.hpp"

namespace sysrisk {

// Systemic risk aversion from individual ones: theta = 1 / sum(1/alpha_i).
inline double theta_from_alphas(std::span<const double> alphas) {
  double inv = 0.0;
  for (double a : alphas) {
    if (!(a > 0.0)) throw Error("risk aversion parameters must be positive");
    inv += 1.0 / a;
  }
  return 1.0 / inv;
}

// (1/theta) ln E[exp(theta X)], evaluated with a max shift.
inline double entropic_value(const RandomVariable& x, double theta) {
  const double m = *std::max_element(x.values().begin(), x.values().end());
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k)
    acc += x.space()->prob(k) * std::exp(theta * (x[k] - m));
  return m + std::log(acc) / theta;
}

// exp(theta X) / E[exp(theta X)] as a valid density.
inline Density entropic_gradient(const RandomVariable& x, double theta) {
  const double m = *std::max_element(x.values().begin(), x.values().end());
  std::vector<double> w(x.size());
  double z = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    w[k] = std::exp(theta * (x[k] - m));
    z += x.space()->prob(k) * w[k];
  }
  for (auto& v : w) v /= z;
  return Density(RandomVariable(x.space(), std::move(w)));
}

namespace measures {

struct Entropic {
  double theta;
};

struct MeanShift {
  double B;
};

struct AcceptanceSet {
  // Must be monotone: X - m acceptable and m' >= m implies X - m' acceptable.
  std::function<bool(const RandomVariable&)> acceptable;
};

}  // namespace measures

class SingleFirmRiskMeasure {
 public:
  using Variant = std::variant<measures::Entropic, measures::MeanShift,
                               measures::AcceptanceSet>;

  static SingleFirmRiskMeasure entropic(double theta) {
    if (!(theta > 0.0)) throw Error("entropic risk needs theta > 0");
    return SingleFirmRiskMeasure(measures::Entropic{theta});
  }

  static SingleFirmRiskMeasure mean_shift(double B) {
    return SingleFirmRiskMeasure(measures::MeanShift{B});
  }

  static SingleFirmRiskMeasure acceptance_set(
      std::function<bool(const RandomVariable&)> acceptable) {
    return SingleFirmRiskMeasure(measures::AcceptanceSet{std::move(acceptable)});
  }

  const Variant& variant() const { return v_; }

  template <typename T>
  const T* as() const {
    return std::get_if<T>(&v_);
  }

 private:
  explicit SingleFirmRiskMeasure(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

inline double evaluate(const SingleFirmRiskMeasure& rho0, const RandomVariable& x) {
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, measures::Entropic>) {
          return entropic_value(x, m.theta);
        } else if constexpr (std::is_same_v<T, measures::MeanShift>) {
          return expectation(x) - m.B;
        } else {
          // rho_A(X) = inf{ m | X - m acceptable }; the essential range
          // brackets the threshold on a finite space.
          const double lo = *std::min_element(x.values().begin(), x.values().end()) - 1.0;
          const double hi = *std::max_element(x.values().begin(), x.values().end()) + 1.0;
          const double root =
              bisect_threshold([&](double s) { return m.acceptable(x - s); }, lo, hi);
          if (!m.acceptable(x - (root + 2.0)))
            throw Error("acceptance predicate is not monotone in the shift");
          return root;
        }
      },
      rho0.variant());
}

// Gradient density of the measure at X (Euler direction pricing).
inline Density gradient_density(const SingleFirmRiskMeasure& rho0,
                                const RandomVariable& x) {
  return std::visit(
      [&](const auto& m) -> Density {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, measures::Entropic>)
          return entropic_gradient(x, m.theta);
        else if constexpr (std::is_same_v<T, measures::MeanShift>)
          return Density::uniform(x.space());
        else
          throw Unsupported("no gradient density for acceptance-set measures");
      },
      rho0.variant());
}

inline bool is_positively_homogeneous(const SingleFirmRiskMeasure& rho0) {
  if (const auto* m = rho0.as<measures::MeanShift>()) return m->B == 0.0;
  return false;
}

inline bool has_gradient_density(const SingleFirmRiskMeasure& rho0) {
  return rho0.as<measures::AcceptanceSet>() == nullptr;
}

inline std::string describe(const SingleFirmRiskMeasure& rho0) {
  std::ostringstream os;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, measures::Entropic>)
          os << "entropic(theta=" << m.theta << ")";
        else if constexpr (std::is_same_v<T, measures::MeanShift>)
          os << "mean_shift(B=" << m.B << ")";
        else
          os << "acceptance_set";
      },
      rho0.variant());
  return os.str();
}

// Randomized (R1)-(R6) evidence on a given scenario space. Constancy (R6)
// is scanned over the supplied scalar grid.
inline AxiomReport check_single_firm_axioms(const SingleFirmRiskMeasure& rho0,
                                            const SpacePtr& space, int samples,
                                            std::uint64_t seed,
                                            std::vector<double> constancy_grid = {}) {
  Rng rng(seed);
  AxiomReport report;
  const std::size_t K = space->size();
  if (constancy_grid.empty())
    for (int i = -5; i <= 5; ++i) constancy_grid.push_back(double(i));

  const auto sample_rv = [&] {
    return RandomVariable(space, rng.uniform_vector(K, -3.0, 3.0));
  };

  {  // (R1)
    bool ok = true;
    std::string detail;
    for (int s = 0; s < samples && ok; ++s) {
      const RandomVariable x = sample_rv();
      const RandomVariable y = x - rng.uniform(0.0, 2.0);
      if (evaluate(rho0, x) < evaluate(rho0, y) - 1e-9) {
        ok = false;
        detail = "rho0(X) < rho0(Y) for X >= Y";
      }
    }
    report.add("R1 monotonicity", ok, detail);
  }

  {  // (R2)
    bool ok = true;
    std::string detail;
    for (int s = 0; s < samples && ok; ++s) {
      const RandomVariable x = sample_rv(), y = sample_rv();
      const double a = rng.uniform(0.0, 1.0);
      const RandomVariable z = a * x + (1.0 - a) * y;
      if (evaluate(rho0, z) >
          a * evaluate(rho0, x) + (1.0 - a) * evaluate(rho0, y) + 1e-10) {
        ok = false;
        detail = "convexity violated at alpha=" + std::to_string(a);
      }
    }
    report.add("R2 convexity", ok, detail);
  }

  {  // (R3)
    bool ok = true;
    std::string detail;
    for (int s = 0; s < samples && ok; ++s) {
      const RandomVariable x = sample_rv();
      const double a = rng.uniform(0.0, 3.0);
      const double lhs = evaluate(rho0, a * x);
      const double rhs = a * evaluate(rho0, x);
      if (std::abs(lhs - rhs) > 1e-8 * std::max(1.0, std::abs(rhs))) {
        ok = false;
        std::ostringstream os;
        os << "rho0(aX)=" << lhs << " != a rho0(X)=" << rhs << " at a=" << a;
        detail = os.str();
      }
    }
    report.add("R3 positive homogeneity", ok, detail);
  }

  {  // (R4)
    bool ok = true;
    std::string detail;
    for (int s = 0; s < samples && ok; ++s) {
      const RandomVariable x = sample_rv();
      const double shift = rng.uniform(-3.0, 3.0);
      if (std::abs(evaluate(rho0, x + shift) - (evaluate(rho0, x) + shift)) > 1e-10) {
        ok = false;
        detail = "translation violated at m=" + std::to_string(shift);
      }
    }
    report.add("R4 translation", ok, detail);
  }

  {  // (R5)
    bool ok = true;
    std::string detail;
    for (int s = 0; s < samples && ok; ++s) {
      const RandomVariable x = sample_rv();
      const RandomVariable y = (s % 4 == 0) ? x : sample_rv();  // X+X probes it hard
      if (evaluate(rho0, x + y) > evaluate(rho0, x) + evaluate(rho0, y) + 1e-9) {
        ok = false;
        detail = "subadditivity violated";
      }
    }
    report.add("R5 subadditivity", ok, detail);
  }

  {  // (R6)
    bool ok = true;
    std::string detail;
    for (double mval : constancy_grid) {
      const double r = evaluate(rho0, RandomVariable::constant(space, mval));
      if (std::abs(r - mval) > 1e-10) {
        ok = false;
        std::ostringstream os;
        os << "rho0(" << mval << ") = " << r << " != " << mval;
        detail = os.str();
        break;
      }
    }
    report.add("R6 constancy", ok, detail);
  }

  return report;
}

}  // namespace sysrisk
