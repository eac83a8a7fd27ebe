#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "procline/error.hpp"
#include "procline/instantiate.hpp"
#include "procline/line.hpp"
#include "procline/model.hpp"

namespace procline {

struct InstanceDiff {
  std::set<std::string> added;    // in b, not in a
  std::set<std::string> removed;  // in a, not in b
};

struct EffortComparison {
  std::size_t line_effort = 0;      // elements to maintain in the line
  std::size_t separate_effort = 0;  // sum of per-instance element counts
  long long savings = 0;            // separate - line
};

// Shared-over-total element ratio across instances of one line. Kept as the
// exact set sizes; value() derives the rational.
struct CommonalityRatio {
  std::size_t intersection_size = 0;
  std::size_t union_size = 0;

  double value() const {
    return union_size == 0 ? 1.0
                           : static_cast<double>(intersection_size) /
                                 static_cast<double>(union_size);
  }
};

inline CommonalityRatio commonality_ratio(
    const std::vector<InstantiatedModel>& instances) {
  if (instances.size() < 2)
    throw Error("E_TOO_FEW", "commonality needs at least two instances, got " +
                                 std::to_string(instances.size()));
  std::set<std::string> common = model_elements(instances.front().model);
  std::set<std::string> all = common;
  for (std::size_t i = 1; i < instances.size(); ++i) {
    const std::set<std::string> elems = model_elements(instances[i].model);
    all.insert(elems.begin(), elems.end());
    std::set<std::string> kept;
    for (const auto& e : common)
      if (elems.count(e)) kept.insert(e);
    common = std::move(kept);
  }
  return {common.size(), all.size()};
}

// Element-count proxy for maintenance effort: one combined model versus one
// independent model per instance.
inline EffortComparison effort_comparison(
    const ProcessLine& line, const std::vector<InstantiatedModel>& instances) {
  const std::set<std::string> universe = model_elements(line.model);
  EffortComparison cmp;
  cmp.line_effort = universe.size();
  for (const auto& inst : instances) {
    const std::set<std::string> elems = model_elements(inst.model);
    for (const auto& e : elems)
      if (!universe.count(e))
        throw Error("E_FOREIGN_INSTANCE",
                    "instance contains element " + e +
                        " outside the line universe");
    cmp.separate_effort += elems.size();
  }
  cmp.savings = static_cast<long long>(cmp.separate_effort) -
                static_cast<long long>(cmp.line_effort);
  return cmp;
}

inline InstanceDiff diff_instances(const InstantiatedModel& a,
                                   const InstantiatedModel& b) {
  const std::set<std::string> ea = model_elements(a.model);
  const std::set<std::string> eb = model_elements(b.model);
  InstanceDiff diff;
  for (const auto& e : eb)
    if (!ea.count(e)) diff.added.insert(e);
  for (const auto& e : ea)
    if (!eb.count(e)) diff.removed.insert(e);
  return diff;
}

}  // namespace procline
