// Batch front door: ingest scenarios and a config, run risk / allocation /
// verification / comparison commands, emit text or JSON reports.
//
// Exit codes: 0 ok, 1 failed check, 2 parse error, 3 numeric failure,
// 4 method/measure incompatibility.

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sysrisk/sysrisk.hpp"

namespace {

using nlohmann::json;
using namespace sysrisk;

struct CliOptions {
  std::string config_path;
  std::string scenario_path;
  std::string format = "text";
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
};

struct Session {
  Config cfg;
  SystemLoss X;
  std::string format;
  std::uint64_t seed = 42;
  int samples = 1000;
};

Session open_session(const CliOptions& opt) {
  Config cfg = Config::parse_file(opt.config_path);
  SystemLoss X = load_scenarios(opt.scenario_path);
  Session s{std::move(cfg), std::move(X), opt.format, 42, 1000};
  s.seed = opt.seed.value_or(
      static_cast<std::uint64_t>(s.cfg.number_or("seed", 42.0)));
  s.samples = opt.samples.value_or(
      static_cast<int>(s.cfg.number_or("samples", 1000.0)));
  return s;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

enum class Measure { Composed, Inject };

Measure pick_measure(const Config& cfg, bool allow_both) {
  const bool has_composed = cfg.has("rule.type") && cfg.has("rho0.type");
  const bool has_inject = cfg.has("inject.alphas");
  if (cfg.has("measure")) {
    const std::string m = cfg.str("measure");
    if (m == "composed") {
      if (!has_composed) throw ParseError("measure=composed needs rule.* and rho0.*");
      return Measure::Composed;
    }
    if (m == "inject") {
      if (!has_inject) throw ParseError("measure=inject needs inject.*");
      return Measure::Inject;
    }
    throw ParseError("unknown measure '" + m + "'");
  }
  if (has_composed && has_inject && !allow_both)
    throw ParseError("both composed and inject configured; set measure = composed|inject");
  if (has_composed) return Measure::Composed;
  if (has_inject) return Measure::Inject;
  throw ParseError("config specifies neither a composed nor an inject measure");
}

std::string inject_formula(const InjectCapitalProblem& p) {
  if (p.groups().groups() == 1)
    return "(1/theta) ln E[exp(theta sum_i X_i)] - ln(theta B)/theta";
  return "sum_j [ (1/theta_j) ln E[exp(theta_j S_j)] - ln(theta B)/theta_j ]";
}

std::string composed_formula(const ComposedRiskMeasure& rho) {
  if (rho.rho0.as<measures::Entropic>() != nullptr) {
    if (rho.rule.as<rules::Sum>() != nullptr)
      return "(1/theta) ln E[exp(theta sum_i X_i)]";
    if (rho.rule.as<rules::SumShift>() != nullptr)
      return "(1/theta) ln E[exp(theta sum_i X_i)] - c";
    return "(1/theta) ln E[exp(theta Lambda(X))]";
  }
  if (rho.rho0.as<measures::MeanShift>() != nullptr) return "E[Lambda(X)] - B";
  return "inf{ m | Lambda(X) - m acceptable }";
}

// ---------------------------------------------------------------------------

int cmd_risk(const CliOptions& opt) {
  Session s = open_session(opt);
  const Measure measure = pick_measure(s.cfg, false);
  json out;
  if (measure == Measure::Composed) {
    const ComposedRiskMeasure rho{build_rho0(s.cfg), build_rule(s.cfg, s.X.firms())};
    const double value = evaluate(rho, s.X);
    if (!std::isfinite(value)) throw NoConvergence("risk value is not finite");
    out["measure"] = describe(rho);
    out["formula"] = composed_formula(rho);
    out["risk"] = value;
    if (s.format == "json") {
      std::cout << out.dump(2) << "\n";
    } else {
      std::cout << "measure: " << describe(rho) << "\n"
                << "formula: " << composed_formula(rho) << "\n"
                << "risk: " << fmt(value) << "\n";
    }
    return 0;
  }
  const InjectCapitalProblem p = build_inject(s.cfg, s.X.firms());
  const double value = evaluate_closed_form(p, s.X);
  if (!std::isfinite(value)) throw NoConvergence("risk value is not finite");
  const std::vector<double> d = group_allocation(p, s.X);
  out["measure"] = make_evaluator(p).name;
  out["formula"] = inject_formula(p);
  out["risk"] = value;
  out["group_allocation"] = d;
  if (s.format == "json") {
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "measure: " << make_evaluator(p).name << "\n"
              << "formula: " << inject_formula(p) << "\n"
              << "risk: " << fmt(value) << "\n";
    for (std::size_t j = 0; j < d.size(); ++j)
      std::cout << "group " << j + 1 << " capital d_" << j + 1 << ": " << fmt(d[j])
                << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------

void print_allocation(const AllocationReport& rep, const std::string& format,
                      json extra = json::object()) {
  if (format == "json") {
    json out;
    out["method"] = rep.method;
    out["per_firm"] = rep.per_firm;
    out["total"] = rep.total;
    out["risk"] = rep.risk;
    out["full_allocation_gap"] = rep.full_allocation_gap;
    for (auto& [k, v] : extra.items()) out[k] = v;
    std::cout << out.dump(2) << "\n";
    return;
  }
  std::cout << "method: " << rep.method << "\n";
  std::cout << std::left << std::setw(8) << "firm" << "allocation\n";
  for (std::size_t i = 0; i < rep.per_firm.size(); ++i)
    std::cout << std::left << std::setw(8) << (i + 1) << fmt(rep.per_firm[i]) << "\n";
  std::cout << "total: " << fmt(rep.total) << "\n"
            << "risk: " << fmt(rep.risk) << "\n"
            << "full allocation gap: " << fmt(rep.full_allocation_gap) << "\n";
  for (auto& [k, v] : extra.items()) {
    if (v.is_number())
      std::cout << k << ": " << fmt(v.get<double>()) << "\n";
    else
      std::cout << k << ": " << v.dump() << "\n";
  }
}

int cmd_allocate(const CliOptions& opt) {
  Session s = open_session(opt);
  const std::string method = s.cfg.str("allocation.method");
  const QuadratureConfig quad = build_quadrature(s.cfg);
  const Measure measure = pick_measure(s.cfg, true);

  if (method == "inject-optimal") {
    if (!s.cfg.has("inject.alphas"))
      throw Unsupported("allocation method inject-optimal needs an inject measure");
    const InjectCapitalProblem p = build_inject(s.cfg, s.X.firms());
    const SystemLoss Y = optimal_allocation(p, s.X);
    const GroupSums sums = group_sums(Y, p.groups());
    AllocationReport rep = allocation_report_inject_optimal(p, s.X);
    json extra;
    extra["acceptance_gap"] = acceptance_gap(p, s.X, Y);
    json table = json::array();
    for (std::size_t i = 0; i < Y.firms(); ++i) table.push_back(Y.row(i).values());
    extra["scenario_allocation"] = table;
    json gs = json::array();
    for (std::size_t j = 0; j < sums.sums.size(); ++j)
      gs.push_back({{"group", j + 1},
                    {"sum", sums.sums[j][0]},
                    {"deterministic", static_cast<bool>(sums.deterministic[j])}});
    extra["group_sums"] = gs;
    print_allocation(rep, s.format, extra);
    return 0;
  }

  if (measure == Measure::Inject && method == "aumann-shapley") {
    const InjectCapitalProblem p = build_inject(s.cfg, s.X.firms());
    print_allocation(allocation_report_as(make_as_evaluator(p), s.X, quad), s.format);
    return 0;
  }
  if (measure == Measure::Inject)
    throw Unsupported("allocation method '" + method + "' needs the composed measure");

  const ComposedRiskMeasure rho{build_rho0(s.cfg), build_rule(s.cfg, s.X.firms())};
  if (method == "dual") {
    print_allocation(car_dual(rho, s.X, dual_solution(rho, s.X)), s.format);
    return 0;
  }
  if (method == "dual-penalized") {
    const std::string alpha_key =
        s.cfg.has("allocation.alphas") ? "allocation.alphas" : "inject.alphas";
    if (!s.cfg.has(alpha_key))
      throw Unsupported("dual-penalized needs allocation.alphas (or inject.alphas)");
    const std::vector<double> alphas = s.cfg.numbers(alpha_key);
    if (alphas.size() != s.X.firms())
      throw DimensionMismatch("alpha count does not match the firm count");
    const auto* ent = rho.rho0.as<measures::Entropic>();
    if (ent == nullptr) throw UnsupportedRule("dual-penalized needs the entropic measure");
    if (std::abs(theta_from_alphas(alphas) - ent->theta) > 1e-9)
      throw Unsupported("rho0.theta must equal 1/sum(1/alpha_i) for dual-penalized");
    print_allocation(car_dual_penalized(rho, alphas, s.X), s.format);
    return 0;
  }
  if (method == "aumann-shapley") {
    print_allocation(allocation_report_as(make_as_evaluator(rho), s.X, quad), s.format);
    return 0;
  }
  if (method == "as-chain") {
    AllocationReport rep = allocation_report_as_chain(rho.rho0, rho.rule, s.X, quad);
    json extra;
    extra["differential_linear"] = chain_differential_is_linear(rho.rule, s.X);
    print_allocation(rep, s.format, extra);
    return 0;
  }
  if (method == "as-alt") {
    AllocationReport rep = allocation_report_as_alt(rho.rho0, rho.rule, s.X, quad);
    json extra;
    extra["diagonal_minus_rho"] = rep.risk - evaluate(rho, s.X);
    print_allocation(rep, s.format, extra);
    return 0;
  }
  throw Unsupported("unknown allocation method '" + method + "'");
}

// ---------------------------------------------------------------------------
// Verification driver. Only properties the configured measure claims are
// asserted; everything else is printed as informative evidence.

struct CheckLine {
  std::string name;
  bool passed = false;
  bool asserted = false;
  bool skipped = false;
  std::string detail;
};

class VerifyRun {
 public:
  void assert_item(const CheckItem& c, const std::string& prefix) {
    lines_.push_back({prefix + c.name, c.passed, !c.skipped, c.skipped, c.detail});
  }

  void info_item(const CheckItem& c, const std::string& prefix) {
    lines_.push_back({prefix + c.name, c.passed, false, c.skipped, c.detail});
  }

  void check(const std::string& name, bool ok, const std::string& detail) {
    lines_.push_back({name, ok, true, false, detail});
  }

  int finish(const std::string& format) const {
    bool ok = true;
    json out = json::array();
    for (const auto& l : lines_) {
      if (l.asserted && !l.passed) ok = false;
      if (format == "json") {
        out.push_back({{"check", l.name},
                       {"passed", l.passed},
                       {"asserted", l.asserted},
                       {"skipped", l.skipped},
                       {"detail", l.detail}});
      } else {
        const char* tag = l.skipped              ? "[skip]"
                          : !l.asserted          ? (l.passed ? "[info]" : "[info-fail]")
                          : l.passed             ? "[pass]"
                                                 : "[FAIL]";
        std::cout << tag << " " << l.name;
        if (!l.detail.empty()) std::cout << ": " << l.detail;
        std::cout << "\n";
      }
    }
    if (format == "json")
      std::cout << json{{"checks", out}, {"ok", ok}}.dump(2) << "\n";
    else
      std::cout << (ok ? "all enabled checks passed" : "enabled checks FAILED") << "\n";
    return ok ? 0 : 1;
  }

 private:
  std::vector<CheckLine> lines_;
};

bool rule_claims_a5(const AggregationRule& rule) {
  if (rule.as<rules::Sum>() != nullptr || rule.as<rules::Loss>() != nullptr) return true;
  if (const auto* lt = rule.as<rules::LossThreshold>()) return lt->b == 0.0;
  return false;
}

SurjectivityTarget rule_surjectivity_target(const AggregationRule& rule, bool* known) {
  *known = true;
  if (rule.as<rules::Sum>() != nullptr || rule.as<rules::SumShift>() != nullptr)
    return SurjectivityTarget::RealLine;
  if (rule.as<rules::Loss>() != nullptr || rule.as<rules::LossThreshold>() != nullptr ||
      rule.as<rules::Critical>() != nullptr || rule.as<rules::Contagion>() != nullptr)
    return SurjectivityTarget::NonNegative;
  *known = false;  // exp utility: range is (0, inf), neither R nor R+
  return SurjectivityTarget::NonNegative;
}

void verify_composed(VerifyRun& run, const Session& s, bool force_normalization) {
  const ComposedRiskMeasure rho{build_rho0(s.cfg), build_rule(s.cfg, s.X.firms())};
  const SpacePtr space = s.X.space();

  bool target_known = false;
  const SurjectivityTarget target = rule_surjectivity_target(rho.rule, &target_known);
  const AxiomReport ar = check_ar_axioms(rho.rule, s.samples, s.seed, target);
  const bool rule_ph = is_positively_homogeneous(rho.rule);
  for (const auto& c : ar.items) {
    bool assert_this = c.name.starts_with("A1") || c.name.starts_with("A2");
    if (c.name.starts_with("A3")) assert_this = target_known;
    if (c.name.starts_with("A4")) assert_this = rule_ph;
    if (c.name.starts_with("A5")) assert_this = rule_claims_a5(rho.rule) || force_normalization;
    if (assert_this)
      run.assert_item(c, "rule ");
    else
      run.info_item(c, "rule ");
  }

  const AxiomReport sf = check_single_firm_axioms(rho.rho0, space, s.samples, s.seed + 1);
  const bool rho0_ph = is_positively_homogeneous(rho.rho0);
  const bool rho0_constant =
      rho.rho0.as<measures::Entropic>() != nullptr || rho0_ph;
  for (const auto& c : sf.items) {
    bool assert_this = c.name.starts_with("R1") || c.name.starts_with("R2");
    if (c.name.starts_with("R3") || c.name.starts_with("R5")) assert_this = rho0_ph;
    if (c.name.starts_with("R4"))
      assert_this = rho.rho0.as<measures::AcceptanceSet>() == nullptr;
    if (c.name.starts_with("R6")) assert_this = rho0_constant || force_normalization;
    if (assert_this)
      run.assert_item(c, "rho0 ");
    else
      run.info_item(c, "rho0 ");
  }

  const AxiomReport sys =
      check_systemic_axioms(make_evaluator(rho), space, s.samples, s.seed + 2, target);
  const bool claims_s6 =
      rule_claims_a5(rho.rule) && rho0_constant;
  for (const auto& c : sys.items) {
    bool assert_this = c.name.starts_with("S1") || c.name.starts_with("S2") ||
                       c.name.starts_with("S4");
    if (c.name.starts_with("S3")) assert_this = is_positively_homogeneous(rho);
    if (c.name.starts_with("S5")) assert_this = target_known;
    if (c.name.starts_with("S6")) assert_this = claims_s6 || force_normalization;
    if (assert_this)
      run.assert_item(c, "systemic ");
    else
      run.info_item(c, "systemic ");
  }

  const bool dual_available = rho.rho0.as<measures::Entropic>() != nullptr &&
                              (rho.rule.as<rules::Sum>() != nullptr ||
                               rho.rule.as<rules::SumShift>() != nullptr);
  if (dual_available) {
    const DualSolution sol = dual_solution(rho, s.X);
    const double gap = dual_gap(rho, s.X, sol);
    run.check("strong duality |gap| <= 1e-8", std::abs(gap) <= 1e-8,
              "gap = " + fmt(gap));
    const AxiomReport feas = verify_dual_feasibility(rho, sol, s.samples, s.seed + 3);
    for (const auto& c : feas.items) run.assert_item(c, "dual ");
    const SubgradientReport sub = subgradient_check(rho, s.X, sol, s.samples, s.seed + 4);
    run.check("subgradient inequality (margin >= -1e-9)", sub.passed, sub.detail);

    Rng rng(s.seed + 5);
    bool weak_ok = true;
    for (int t = 0; t < 20 && weak_ok; ++t) {
      std::vector<double> w(s.X.scenarios());
      for (auto& v : w) v = std::exp(rng.normal());
      RandomVariable xi(space, w);
      xi = (1.0 / expectation(xi)) * xi;
      const double c =
          rho.rule.as<rules::SumShift>() ? rho.rule.as<rules::SumShift>()->c : 0.0;
      const double theta = rho.rho0.as<measures::Entropic>()->theta;
      DualSolution pert{xi, std::vector<RandomVariable>(s.X.firms(), xi),
                        relative_entropy(xi) / theta + c};
      weak_ok = dual_gap(rho, s.X, pert) >= -1e-9;
    }
    run.check("weak duality on perturbed densities", weak_ok, "20 perturbations");
  }

  if (has_gradient_density(rho.rho0) && is_smooth(rho.rule)) {
    Rng rng(s.seed + 6);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      std::vector<RandomVariable> rows;
      for (std::size_t i = 0; i < s.X.firms(); ++i)
        rows.emplace_back(space, rng.uniform_vector(s.X.scenarios(), -1.0, 1.0));
      const SystemLoss V(rows);
      const double analytic = directional_derivative(rho, s.X, V);
      const auto along = [&](double t2) {
        std::vector<RandomVariable> r2;
        for (std::size_t i = 0; i < s.X.firms(); ++i)
          r2.push_back(s.X.row(i) + t2 * V.row(i));
        return evaluate(rho, SystemLoss(r2));
      };
      worst = std::max(worst,
                       std::abs(analytic - directional_derivative_fd_scalar(along, 0.0, 1.0)));
    }
    run.check("directional derivative vs finite differences <= 1e-5", worst <= 1e-5,
              "worst |diff| = " + fmt(worst));
  }
}

void verify_inject(VerifyRun& run, const Session& s) {
  const InjectCapitalProblem p = build_inject(s.cfg, s.X.firms());
  const SpacePtr space = s.X.space();

  const AxiomReport sys = verify_inject_properties(p, space, s.samples, s.seed);
  for (const auto& c : sys.items) {
    const bool assert_this = c.name.starts_with("S1") || c.name.starts_with("S2") ||
                             c.name.starts_with("S4") || c.name.starts_with("R(0)");
    if (assert_this)
      run.assert_item(c, "inject ");
    else
      run.info_item(c, "inject ");
  }

  const double risk = evaluate_closed_form(p, s.X);
  const std::vector<Density> Xi = dual_density(p, s.X);
  double lower = -penalty(p, Xi);
  for (std::size_t i = 0; i < p.firms(); ++i) lower += pairing(s.X.row(i), Xi[i]);
  run.check("inject strong duality |gap| <= 1e-8", std::abs(risk - lower) <= 1e-8,
            "gap = " + fmt(risk - lower));

  const double ls_eq = lambda_star_bisection(p, Xi);
  run.check("lambda* bisection vs theta B <= 1e-8",
            std::abs(ls_eq - lambda_star(p)) <= 1e-8,
            "theta B = " + fmt(lambda_star(p)) + ", bisection = " + fmt(ls_eq));

  const SystemLoss Y = optimal_allocation(p, s.X);
  const SystemLoss Y2 = optimal_allocation_conjugate(p, s.X);
  double route_gap = 0.0;
  for (std::size_t i = 0; i < p.firms(); ++i)
    for (std::size_t k = 0; k < s.X.scenarios(); ++k)
      route_gap = std::max(route_gap, std::abs(Y.row(i)[k] - Y2.row(i)[k]));
  run.check("allocation routes agree <= 1e-10", route_gap <= 1e-10,
            "max |diff| = " + fmt(route_gap));

  const GroupSums sums = group_sums(Y, p.groups());
  bool det = true;
  for (bool d : sums.deterministic) det = det && d;
  run.check("allocation group sums deterministic", det, "variance < 1e-18");

  const double agap = acceptance_gap(p, s.X, Y);
  run.check("acceptance binds |E[sum l] - B| <= 1e-8", std::abs(agap) <= 1e-8,
            "gap = " + fmt(agap));

  const std::vector<double> d = group_allocation(p, s.X);
  double dsum = 0.0;
  for (double v : d) dsum += v;
  run.check("sum_j d_j = R <= 1e-10", std::abs(dsum - risk) <= 1e-10,
            "diff = " + fmt(dsum - risk));

  if (p.groups().groups() == 1) {
    const ComposedRiskMeasure ses{SingleFirmRiskMeasure::entropic(p.theta()),
                                  AggregationRule::sum(p.firms())};
    const double ident = evaluate(ses, s.X) - identification_shift(p);
    run.check("identification R = rho_ses - c <= 1e-12", std::abs(risk - ident) <= 1e-12,
              "diff = " + fmt(risk - ident));
  } else {
    double parts = 0.0;
    for (std::size_t j = 0; j < p.groups().groups(); ++j) {
      auto [b, e] = p.groups().range(j);
      std::vector<double> sub_alphas(p.alphas().begin() + b, p.alphas().begin() + e);
      const double bj = p.theta() / p.theta_group(j) * p.acceptance_threshold();
      InjectCapitalProblem pj(sub_alphas, bj, GroupStructure::single(e - b));
      std::vector<RandomVariable> rows(s.X.rows().begin() + b, s.X.rows().begin() + e);
      parts += evaluate_closed_form(pj, SystemLoss(rows));
    }
    run.check("group decomposition <= 1e-12", std::abs(parts - risk) <= 1e-12,
              "diff = " + fmt(parts - risk));
  }

  const bool oracle_enabled = s.cfg.number_or("verify.oracle", 1.0) != 0.0;
  if (oracle_enabled && p.firms() <= 3 && s.X.scenarios() <= 3) {
    const OracleResult orc = oracle_solve(p, s.X);
    run.check("grid oracle |oracle - closed form| <= 1e-3",
              std::abs(orc.value - risk) <= 1e-3, "diff = " + fmt(orc.value - risk));
    run.check("oracle argmin acceptance |gap| <= 1e-3",
              std::abs(orc.acceptance_gap) <= 1e-3, "gap = " + fmt(orc.acceptance_gap));
  }
}

int cmd_verify(const CliOptions& opt) {
  Session s = open_session(opt);
  VerifyRun run;
  const bool force_norm = s.cfg.number_or("verify.normalization", 0.0) != 0.0;
  const bool has_composed = s.cfg.has("rule.type") && s.cfg.has("rho0.type");
  const bool has_inject = s.cfg.has("inject.alphas");
  if (!has_composed && !has_inject)
    throw ParseError("config specifies neither a composed nor an inject measure");
  if (has_composed) verify_composed(run, s, force_norm);
  if (has_inject) verify_inject(run, s);
  return run.finish(s.format);
}

// ---------------------------------------------------------------------------

int cmd_compare(const CliOptions& opt) {
  Session s = open_session(opt);
  if (!s.cfg.has("inject.alphas"))
    throw ParseError("compare needs an inject measure (inject.*)");
  const InjectCapitalProblem p = build_inject(s.cfg, s.X.firms());
  if (p.groups().groups() != 1)
    throw Unsupported("compare exercises the one-group identification");
  const QuadratureConfig quad = build_quadrature(s.cfg);

  const double r_inject = evaluate_closed_form(p, s.X);
  const ComposedRiskMeasure ses_c = to_composed(p);
  const double r_composed = evaluate(ses_c, s.X);
  const double diff = r_inject - r_composed;

  // Same Aumann-Shapley diagonal through both differentiation routes.
  const ComposedRiskMeasure ses{SingleFirmRiskMeasure::entropic(p.theta()),
                                AggregationRule::sum(p.firms())};
  const double as_composed = aumann_shapley(make_as_evaluator(ses), s.X, s.X, quad);
  const double as_inject = aumann_shapley(make_as_evaluator(p), s.X, s.X, quad);

  const bool ok = std::abs(diff) <= 1e-10 && std::abs(as_composed - as_inject) <= 1e-6;
  if (s.format == "json") {
    json out;
    out["inject_risk"] = r_inject;
    out["composed_risk"] = r_composed;
    out["difference"] = diff;
    out["shift_c"] = identification_shift(p);
    out["as_diagonal_composed"] = as_composed;
    out["as_diagonal_inject"] = as_inject;
    out["ok"] = ok;
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "inject closed form R: " << fmt(r_inject) << "\n"
              << "composed rho_ses,c (c = " << fmt(identification_shift(p))
              << "): " << fmt(r_composed) << "\n"
              << "difference: " << fmt(diff) << " (tolerance 1e-10)\n"
              << "AS diagonal, composed route: " << fmt(as_composed) << "\n"
              << "AS diagonal, inject route: " << fmt(as_inject) << "\n"
              << (ok ? "identification holds" : "identification FAILED") << "\n";
  }
  return ok ? 0 : 1;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"scenario-based systemic risk engine"};
  app.require_subcommand(1);

  CliOptions opt;
  const auto add_common = [&opt](CLI::App* cmd) {
    cmd->add_option("--config", opt.config_path, "config file")->required();
    cmd->add_option("--scenarios", opt.scenario_path, "scenario CSV or JSON file")
        ->required();
    cmd->add_option("--format", opt.format, "output format: text|json")
        ->check(CLI::IsMember({"text", "json"}));
    cmd->add_option("--seed", opt.seed, "seed override for randomized checks");
    cmd->add_option("--samples", opt.samples, "sample count override");
  };

  CLI::App* risk = app.add_subcommand("risk", "evaluate the configured risk measure");
  CLI::App* allocate = app.add_subcommand("allocate", "compute a capital allocation");
  CLI::App* verify = app.add_subcommand("verify", "run axiom/duality/oracle checks");
  CLI::App* compare =
      app.add_subcommand("compare", "inject vs composed identification");
  for (CLI::App* cmd : {risk, allocate, verify, compare}) add_common(cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (risk->parsed()) return cmd_risk(opt);
  if (allocate->parsed()) return cmd_allocate(opt);
  if (verify->parsed()) return cmd_verify(opt);
  return cmd_compare(opt);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const sysrisk::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const sysrisk::UnsupportedRule& e) {
    std::cerr << "incompatible: " << e.what() << "\n";
    return 4;
  } catch (const sysrisk::NotDifferentiable& e) {
    std::cerr << "incompatible: " << e.what() << "\n";
    return 4;
  } catch (const sysrisk::Unsupported& e) {
    std::cerr << "incompatible: " << e.what() << "\n";
    return 4;
  } catch (const sysrisk::ScaleTooLarge& e) {
    std::cerr << "incompatible: " << e.what() << "\n";
    return 4;
  } catch (const sysrisk::DimensionMismatch& e) {
    std::cerr << "incompatible: " << e.what() << "\n";
    return 4;
  } catch (const sysrisk::BadGroupStructure& e) {
    std::cerr << "incompatible: " << e.what() << "\n";
    return 4;
  } catch (const sysrisk::Error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
