#pragma once

// Machine-readable verification reports. A check compares lhs <= rhs; exact
// checks decide the exit status, diagnostic ones never do.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace pjn {

enum class CheckTag { exact, diagnostic };

inline const char* to_string(CheckTag t) { return t == CheckTag::exact ? "exact" : "diagnostic"; }

struct Check {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  std::optional<double> constant;
  std::optional<double> log2_constant;
  bool pass = true;
  CheckTag tag = CheckTag::exact;
  std::string note;
};

/// lhs <= rhs up to a relative slack (default 1e-9) and an absolute floor.
inline bool leq_slack(double lhs, double rhs, double rel = 1e-9, double abs_floor = 1e-300) {
  if (std::isnan(lhs) || std::isnan(rhs)) return false;
  if (lhs <= rhs) return true;
  return lhs - rhs <= rel * std::max(std::abs(lhs), std::abs(rhs)) + abs_floor;
}

inline Check make_check(std::string name, double lhs, double rhs, CheckTag tag = CheckTag::exact,
                        double rel = 1e-9) {
  Check c;
  c.name = std::move(name);
  c.lhs = lhs;
  c.rhs = rhs;
  c.tag = tag;
  c.pass = leq_slack(lhs, rhs, rel);
  return c;
}

/// A boolean structural assertion recorded as a check (lhs = violations, rhs = 0).
inline Check count_check(std::string name, std::size_t violations, CheckTag tag = CheckTag::exact) {
  Check c;
  c.name = std::move(name);
  c.lhs = static_cast<double>(violations);
  c.rhs = 0.0;
  c.tag = tag;
  c.pass = violations == 0;
  return c;
}

/// JSON numbers cannot carry inf/nan; those become strings.
inline nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline nlohmann::json to_json(const Check& c) {
  nlohmann::json j{{"name", c.name},
                   {"lhs", json_number(c.lhs)},
                   {"rhs", json_number(c.rhs)},
                   {"verdict", c.pass ? "pass" : "fail"},
                   {"tag", to_string(c.tag)}};
  if (c.constant) j["constant_used"] = json_number(*c.constant);
  if (c.log2_constant) j["log2_constant"] = json_number(*c.log2_constant);
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

struct CheckList {
  std::vector<Check> checks;

  void add(Check c) { checks.push_back(std::move(c)); }
  void append(const CheckList& other) { checks.insert(checks.end(), other.checks.begin(), other.checks.end()); }

  bool exact_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.tag != CheckTag::exact || c.pass; });
  }
  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
  std::size_t failures(CheckTag tag) const {
    return static_cast<std::size_t>(
        std::count_if(checks.begin(), checks.end(), [&](const Check& c) { return c.tag == tag && !c.pass; }));
  }

  nlohmann::json to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (auto& c : checks) arr.push_back(pjn::to_json(c));
    return arr;
  }
};

}  // namespace pjn
