#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "sysrisk/aggregation.hpp"
#include "sysrisk/errors.hpp"
#include "sysrisk/inject.hpp"
#include "sysrisk/numerics.hpp"
#include "sysrisk/scenario_io.hpp"
#include "sysrisk/single_firm.hpp"

namespace sysrisk {

// Flat `key = value` config with dotted keys and nested arrays:
//
//   measure = composed          # bare words are strings
//   rho0.type = entropic
//   rho0.theta = 0.5
//   rule.pi = [[0, 0.5], [0.3, 0]]
//
// Values are numbers, strings (bare or double-quoted) or arrays of values.
class ConfigValue {
 public:
  using Array = std::vector<ConfigValue>;

  explicit ConfigValue(double v) : v_(v) {}
  explicit ConfigValue(std::string v) : v_(std::move(v)) {}
  explicit ConfigValue(Array v) : v_(std::move(v)) {}

  bool is_number() const { return std::holds_alternative<double>(v_); }
  bool is_string() const { return std::holds_alternative<std::string>(v_); }
  bool is_array() const { return std::holds_alternative<Array>(v_); }

  double number() const {
    if (!is_number()) throw ParseError("config value is not a number");
    return std::get<double>(v_);
  }

  const std::string& str() const {
    if (!is_string()) throw ParseError("config value is not a string");
    return std::get<std::string>(v_);
  }

  const Array& array() const {
    if (!is_array()) throw ParseError("config value is not an array");
    return std::get<Array>(v_);
  }

 private:
  std::variant<double, std::string, Array> v_;
};

class Config {
 public:
  static Config parse_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::string stripped = strip_comment(line);
      const std::string t = detail::trim(stripped);
      if (t.empty()) continue;
      const std::size_t eq = t.find('=');
      if (eq == std::string::npos)
        throw ParseError("expected 'key = value'", line_no);
      const std::string key = detail::trim(t.substr(0, eq));
      const std::string value = detail::trim(t.substr(eq + 1));
      if (key.empty()) throw ParseError("empty key", line_no);
      if (value.empty()) throw ParseError("empty value for key '" + key + "'", line_no);
      std::size_t pos = 0;
      ConfigValue v = parse_value(value, pos, line_no);
      skip_ws(value, pos);
      if (pos != value.size()) throw ParseError("trailing junk after value", line_no);
      cfg.values_.insert_or_assign(key, std::move(v));
    }
    return cfg;
  }

  static Config parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str());
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  const ConfigValue& at(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ParseError("missing config key '" + key + "'");
    return it->second;
  }

  double number(const std::string& key) const { return at(key).number(); }

  double number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  std::string str(const std::string& key) const { return at(key).str(); }

  std::string str_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? str(key) : fallback;
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    for (const auto& v : at(key).array()) out.push_back(v.number());
    return out;
  }

  std::vector<std::vector<double>> matrix(const std::string& key) const {
    std::vector<std::vector<double>> out;
    for (const auto& row : at(key).array()) {
      out.emplace_back();
      for (const auto& v : row.array()) out.back().push_back(v.number());
    }
    return out;
  }

 private:
  static std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
  }

  static void skip_ws(const std::string& s, std::size_t& pos) {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }

  static ConfigValue parse_value(const std::string& s, std::size_t& pos, int line_no) {
    skip_ws(s, pos);
    if (pos >= s.size()) throw ParseError("expected a value", line_no);
    if (s[pos] == '[') {
      ++pos;
      ConfigValue::Array items;
      skip_ws(s, pos);
      if (pos < s.size() && s[pos] == ']') {
        ++pos;
        return ConfigValue(std::move(items));
      }
      while (true) {
        items.push_back(parse_value(s, pos, line_no));
        skip_ws(s, pos);
        if (pos >= s.size()) throw ParseError("unterminated array", line_no);
        if (s[pos] == ',') {
          ++pos;
          continue;
        }
        if (s[pos] == ']') {
          ++pos;
          return ConfigValue(std::move(items));
        }
        throw ParseError("expected ',' or ']' in array", line_no);
      }
    }
    if (s[pos] == '"') {
      const std::size_t end = s.find('"', pos + 1);
      if (end == std::string::npos) throw ParseError("unterminated string", line_no);
      std::string out = s.substr(pos + 1, end - pos - 1);
      pos = end + 1;
      return ConfigValue(std::move(out));
    }
    std::size_t end = pos;
    while (end < s.size() && s[end] != ',' && s[end] != ']' &&
           !std::isspace(static_cast<unsigned char>(s[end])))
      ++end;
    const std::string token = s.substr(pos, end - pos);
    pos = end;
    try {
      std::size_t used = 0;
      const double num = std::stod(token, &used);
      if (used == token.size()) return ConfigValue(num);
    } catch (const std::exception&) {
    }
    return ConfigValue(token);
  }

  std::map<std::string, ConfigValue> values_;
};

// --------------------------------------------------------------------------
// Builders from config sections to domain objects.

inline AggregationRule build_rule(const Config& cfg, std::size_t n_firms) {
  const std::string type = cfg.str("rule.type");
  if (type == "sum") return AggregationRule::sum(n_firms);
  if (type == "sum_shift")
    return AggregationRule::sum_shift(n_firms, cfg.number("rule.c"));
  if (type == "loss") return AggregationRule::loss(n_firms);
  if (type == "loss_threshold")
    return AggregationRule::loss_threshold(n_firms, cfg.number("rule.b"));
  if (type == "critical") {
    std::vector<std::size_t> idx;
    for (double v : cfg.numbers("rule.critical")) {
      if (v < 1.0) throw ParseError("rule.critical uses 1-based firm indices");
      idx.push_back(static_cast<std::size_t>(v) - 1);
    }
    return AggregationRule::critical(n_firms, std::move(idx), cfg.number("rule.gamma"));
  }
  if (type == "exp_utility") {
    auto alphas = cfg.numbers("rule.alphas");
    if (alphas.size() != n_firms)
      throw DimensionMismatch("rule.alphas length does not match the firm count");
    return AggregationRule::exp_utility(std::move(alphas));
  }
  if (type == "contagion") {
    auto pi = cfg.matrix("rule.pi");
    if (pi.size() != n_firms)
      throw DimensionMismatch("rule.pi size does not match the firm count");
    return AggregationRule::contagion(std::move(pi), cfg.number("rule.gamma"));
  }
  throw ParseError("unknown rule.type '" + type + "'");
}

inline SingleFirmRiskMeasure build_rho0(const Config& cfg) {
  const std::string type = cfg.str("rho0.type");
  if (type == "entropic") return SingleFirmRiskMeasure::entropic(cfg.number("rho0.theta"));
  if (type == "mean_shift") return SingleFirmRiskMeasure::mean_shift(cfg.number("rho0.B"));
  if (type == "acceptance") {
    // Mean-bound acceptance set evaluated through the generic bisection path.
    const double B = cfg.number("rho0.B");
    return SingleFirmRiskMeasure::acceptance_set(
        [B](const RandomVariable& z) { return expectation(z) <= B; });
  }
  throw ParseError("unknown rho0.type '" + type + "'");
}

inline InjectCapitalProblem build_inject(const Config& cfg, std::size_t n_firms) {
  auto alphas = cfg.numbers("inject.alphas");
  if (alphas.size() != n_firms)
    throw DimensionMismatch("inject.alphas length does not match the firm count");
  std::vector<std::size_t> bounds;
  if (cfg.has("inject.groups")) {
    for (double v : cfg.numbers("inject.groups")) {
      if (v < 1.0) throw ParseError("inject.groups lists 1-based right boundaries");
      bounds.push_back(static_cast<std::size_t>(v));
    }
  } else {
    bounds.push_back(n_firms);
  }
  return InjectCapitalProblem(std::move(alphas), cfg.number("inject.B"),
                              GroupStructure(std::move(bounds)));
}

inline QuadratureConfig build_quadrature(const Config& cfg) {
  QuadratureConfig q;
  q.initial_nodes = static_cast<int>(cfg.number_or("quadrature.initial_nodes", 201));
  q.tol = cfg.number_or("quadrature.tol", 1e-8);
  q.max_nodes = static_cast<int>(cfg.number_or("quadrature.max_nodes", 3201));
  return q;
}

}  // namespace sysrisk
