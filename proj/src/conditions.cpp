#include "ergoclt/conditions.hpp"

#include <algorithm>
#include <limits>

#include "ergoclt/errors.hpp"

namespace ergoclt {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

double ConditionEntry::evidence_value(const std::string& key) const {
  for (const auto& [k, v] : evidence)
    if (k == key) return v;
  return std::numeric_limits<double>::quiet_NaN();
}

const ConditionEntry& ConditionReport::at(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return e;
  throw Error(ErrorKind::InvalidArgument, "no condition named '" + name + "' in " + theorem);
}

bool ConditionReport::all_pass() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const ConditionEntry& e) { return e.verdict == Verdict::Pass; });
}

bool ConditionReport::any_fail() const {
  return std::any_of(entries.begin(), entries.end(),
                     [](const ConditionEntry& e) { return e.verdict == Verdict::Fail; });
}

}  // namespace ergoclt
