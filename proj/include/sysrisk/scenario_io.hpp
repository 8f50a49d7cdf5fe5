#pragma once

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sysrisk/errors.hpp"
#include "sysrisk/scenario.hpp"

namespace sysrisk {

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline double parse_number(const std::string& s, int line_no) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ParseError("not a number: '" + s + "'", line_no);
  }
  if (pos != s.size()) throw ParseError("trailing junk after number: '" + s + "'", line_no);
  if (!std::isfinite(v)) throw ParseError("non-finite number: '" + s + "'", line_no);
  return v;
}

inline SpacePtr make_space_renormalized(std::vector<double> probs) {
  double total = 0.0;
  for (double p : probs) {
    if (!(p > 0.0)) throw ParseError("scenario probabilities must be strictly positive");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-6)
    throw ParseError("scenario probabilities sum to " + std::to_string(total) +
                     ", further than 1e-6 from 1");
  for (double& p : probs) p /= total;
  return ScenarioSpace::create(std::move(probs));
}

}  // namespace detail

// CSV with header `prob,firm_1,...,firm_n`, one row per scenario.
inline SystemLoss load_scenarios_csv(std::istream& in) {
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty scenario file", 1);
  ++line_no;
  const auto header = detail::split_csv_line(line);
  if (header.empty() || header[0] != "prob")
    throw ParseError("header must start with 'prob'", line_no);
  const std::size_t n = header.size() - 1;
  if (n == 0) throw ParseError("header names no firm columns", line_no);

  std::vector<double> probs;
  std::vector<std::vector<double>> firm_rows(n);
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != n + 1)
      throw ParseError("expected " + std::to_string(n + 1) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    probs.push_back(detail::parse_number(fields[0], line_no));
    for (std::size_t i = 0; i < n; ++i)
      firm_rows[i].push_back(detail::parse_number(fields[i + 1], line_no));
  }
  if (probs.empty()) throw ParseError("no scenario rows", line_no);
  return SystemLoss::from_matrix(detail::make_space_renormalized(std::move(probs)),
                                 firm_rows);
}

// JSON alternative: {"probabilities": [...], "losses": [[...], ...]} with
// one loss row per firm.
inline SystemLoss load_scenarios_json(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.contains("probabilities") || !doc.contains("losses"))
    throw ParseError("scenario JSON needs 'probabilities' and 'losses'");
  std::vector<double> probs;
  try {
    probs = doc["probabilities"].get<std::vector<double>>();
    const auto rows = doc["losses"].get<std::vector<std::vector<double>>>();
    if (rows.empty()) throw ParseError("'losses' must name at least one firm row");
    for (const auto& r : rows)
      if (r.size() != probs.size())
        throw ParseError("loss row length does not match scenario count");
    return SystemLoss::from_matrix(detail::make_space_renormalized(std::move(probs)),
                                   rows);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid scenario JSON: ") + e.what());
  }
}

inline SystemLoss load_scenarios(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file: " + path);
  char first = 0;
  in >> std::ws;
  first = static_cast<char>(in.peek());
  if (first == '{' || (path.size() > 5 && path.substr(path.size() - 5) == ".json"))
    return load_scenarios_json(in);
  return load_scenarios_csv(in);
}

}  // namespace sysrisk
