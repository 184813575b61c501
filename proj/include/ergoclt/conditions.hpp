#pragma once

#include <string>
#include <utility>
#include <vector>

namespace ergoclt {

enum class Verdict { Pass, Fail, Indeterminate };

const char* to_string(Verdict v);

struct ConditionEntry {
  std::string name;
  Verdict verdict = Verdict::Indeterminate;
  std::vector<std::pair<std::string, double>> evidence;

  double evidence_value(const std::string& key) const;
};

/// Verdicts for the hypotheses of one theorem; each checked hypothesis
/// appears exactly once.
struct ConditionReport {
  std::string theorem;
  std::vector<ConditionEntry> entries;

  const ConditionEntry& at(const std::string& name) const;
  bool all_pass() const;
  bool any_fail() const;
};

}  // namespace ergoclt
