#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

namespace sysrisk {

// Outcome of one randomized axiom/property check. `skipped` marks checks
// whose premise could not be set up (reported, never silently dropped).
struct CheckItem {
  std::string name;
  bool passed = false;
  bool skipped = false;
  std::string detail;
};

struct AxiomReport {
  std::vector<CheckItem> items;

  bool all_passed() const {
    return std::all_of(items.begin(), items.end(),
                       [](const CheckItem& c) { return c.passed || c.skipped; });
  }

  const CheckItem* find(const std::string& name) const {
    for (const auto& c : items)
      if (c.name == name) return &c;
    return nullptr;
  }

  bool passed(const std::string& name) const {
    const CheckItem* c = find(name);
    return c != nullptr && c->passed;
  }

  void add(std::string name, bool ok, std::string detail = "") {
    items.push_back({std::move(name), ok, false, std::move(detail)});
  }

  void add_skipped(std::string name, std::string why) {
    items.push_back({std::move(name), false, true, std::move(why)});
  }

  std::string to_text() const {
    std::ostringstream os;
    for (const auto& c : items) {
      os << (c.skipped ? "[skip]" : (c.passed ? "[pass]" : "[FAIL]")) << " " << c.name;
      if (!c.detail.empty()) os << ": " << c.detail;
      os << "\n";
    }
    return os.str();
  }
};

}  // namespace sysrisk
