#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "procline/error.hpp"
#include "procline/line.hpp"
#include "procline/model.hpp"
#include "procline/rules.hpp"
#include "procline/scoping.hpp"

namespace procline {

// A project-specific process model with all variability resolved.
struct InstantiatedModel {
  ProcessModel model;  // passes validate_model, zero variation points
  std::vector<std::string> included_vps;
  std::vector<std::string> excluded_vps;
  ParamMap parameters;
  std::map<std::string, std::vector<std::string>> provenance;  // vp -> fired rules
  std::vector<Finding> warnings;
};

// Evaluation order for variation points: points never targeted by a resolve
// come first in lexicographic id order, then resolve targets in topological
// order. A resolver therefore always precedes its target.
inline std::vector<std::string> resolution_order(const ProcessLine& line) {
  const auto graph = resolve_graph(line);

  std::set<std::string> targets;
  for (const auto& [_, succ] : graph) targets.insert(succ.begin(), succ.end());

  std::vector<std::string> order;
  std::map<std::string, int> indegree;
  for (const auto& vp : line.variation_points)
    if (targets.count(vp.id)) indegree[vp.id] = 0;
  for (const auto& vp : line.variation_points)
    if (!targets.count(vp.id)) order.push_back(vp.id);
  std::sort(order.begin(), order.end());

  // Phase-1 points are emitted before any target, so only edges between
  // targets constrain the Kahn pass.
  for (const auto& [id, succ] : graph) {
    if (!targets.count(id)) continue;
    for (const auto& t : succ)
      if (indegree.count(t)) ++indegree[t];
  }

  // Kahn over the targeted subgraph, smallest id first.
  std::set<std::string> ready;
  for (const auto& [id, deg] : indegree)
    if (deg == 0) ready.insert(id);
  std::size_t emitted = 0;
  while (!ready.empty()) {
    const std::string id = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(id);
    ++emitted;
    const auto it = graph.find(id);
    if (it == graph.end()) continue;
    for (const auto& t : it->second)
      if (indegree.count(t) && --indegree[t] == 0) ready.insert(t);
  }
  if (emitted != indegree.size())
    throw Error("E_RESOLVE_CYCLE", "resolve chain contains a cycle");
  return order;
}

namespace detail {

// The priority backing a fired rule: the strongest characteristic driving
// its condition. Unconditional rules have no driver and score 0, so a
// context-driven decision always outranks a default.
inline int governing_score(const Rule& rule, const ProjectContext& ctx) {
  if (!rule.condition) return 0;
  int score = 0;
  for (const auto& attr : condition_attributes(*rule.condition)) {
    const auto it = ctx.find(attr);
    if (it != ctx.end())
      score = std::max(score, it->second.likelihood * it->second.damage);
  }
  return score;
}

inline void ratchet_parameter(ParamMap& stage, const std::string& name,
                              const ParamValue& value) {
  const auto it = stage.find(name);
  if (it == stage.end()) {
    stage[name] = value;
    return;
  }
  const double* current = std::get_if<double>(&it->second);
  const double* incoming = std::get_if<double>(&value);
  if (current && incoming) {
    if (*incoming > *current) it->second = value;
    return;
  }
  if (it->second != value)
    throw Error("E_PARAM_TYPE", "conflicting non-numeric values for parameter " +
                                    name);
}

}  // namespace detail

// Resolve every variation point of the line under one project context.
//
// Points targeted by a resolve action are evaluated only when some fired
// resolve enqueues them; all other points are evaluated directly. A fired
// include keeps the whole element set of the evaluating point, a fired
// exclude erases it, and a point whose rules fire neither is excluded by
// default: presence must be earned. Include/exclude collisions are decided
// by governing score; an exact tie is E_ACTION_CONFLICT. Erasure cascades
// to incident edges but never to other vertices.
inline InstantiatedModel instantiate(const ProcessLine& line,
                                     const ProjectContext& ctx,
                                     const ParamMap* demand_overlay = nullptr) {
  const std::vector<std::string> order = resolution_order(line);

  std::set<std::string> targets;
  for (const auto& [_, succ] : resolve_graph(line))
    targets.insert(succ.begin(), succ.end());

  struct Disposition {
    int include_score = -1;  // -1 = not fired
    int exclude_score = -1;
  };
  std::map<std::string, Disposition> dispositions;
  std::map<std::string, std::vector<std::string>> provenance;
  std::set<std::string> enqueued;
  ParamMap set_stage;

  for (const auto& vp_id : order) {
    provenance[vp_id];
    const bool direct = !targets.count(vp_id);
    if (!direct && !enqueued.count(vp_id)) continue;

    const VariationPoint* vp = find_vp(line, vp_id);
    auto& disposition = dispositions[vp_id];
    for (const auto& rule_id : vp->rules) {
      const Rule* rule = line.ruleset.find(rule_id);
      if (!rule)
        throw Error("E_NO_RULE", "variation point " + vp_id +
                                     " references unknown rule " + rule_id);
      if (rule->condition && !eval_condition(*rule->condition, ctx)) continue;
      provenance[vp_id].push_back(rule_id);
      const int score = detail::governing_score(*rule, ctx);
      for (const auto& action : rule->actions) {
        if (std::holds_alternative<IncludeAction>(action)) {
          disposition.include_score = std::max(disposition.include_score, score);
        } else if (std::holds_alternative<ExcludeAction>(action)) {
          disposition.exclude_score = std::max(disposition.exclude_score, score);
        } else if (const auto* res = std::get_if<ResolveAction>(&action)) {
          enqueued.insert(res->target);  // idempotent if already processed
        } else {
          const auto& set = std::get<SetAction>(action);
          detail::ratchet_parameter(set_stage, set.parameter, set.value);
        }
      }
    }
  }

  InstantiatedModel result;
  std::set<std::string> doomed;
  for (const auto& vp : line.variation_points) {
    const Disposition d = dispositions.count(vp.id) ? dispositions[vp.id]
                                                    : Disposition{};
    bool included = false;
    if (d.include_score >= 0 && d.exclude_score >= 0) {
      if (d.include_score == d.exclude_score)
        throw Error("E_ACTION_CONFLICT",
                    "include and exclude fired on variation point " + vp.id +
                        " with equal governing score " +
                        std::to_string(d.include_score));
      included = d.include_score > d.exclude_score;
    } else {
      included = d.include_score >= 0;
    }
    if (included)
      result.included_vps.push_back(vp.id);
    else {
      result.excluded_vps.push_back(vp.id);
      doomed.insert(vp.elements.begin(), vp.elements.end());
    }
  }
  std::sort(result.included_vps.begin(), result.included_vps.end());
  std::sort(result.excluded_vps.begin(), result.excluded_vps.end());
  result.provenance = std::move(provenance);

  const std::set<std::string> before = model_elements(line.model);
  result.model = doomed.empty() ? line.model
                                : detail::erase_elements(line.model, doomed);

  // Core vertices may legally lose all their edges; flag them.
  std::set<std::string> with_edges;
  for (const auto& e : result.model.product_flow) {
    with_edges.insert(e.activity);
    with_edges.insert(e.work_product);
  }
  for (const auto& e : result.model.control_flow) {
    with_edges.insert(e.from);
    with_edges.insert(e.to);
  }
  auto had_edges = [&](const std::string& id) {
    for (const auto& e : line.model.product_flow)
      if (e.activity == id || e.work_product == id) return true;
    for (const auto& e : line.model.control_flow)
      if (e.from == id || e.to == id) return true;
    return false;
  };
  for (const auto& a : result.model.activities)
    if (!with_edges.count(a.id) && had_edges(a.id))
      result.warnings.push_back(
          {"W_ISOLATED", a.id, "activity lost all its edges at instantiation"});
  for (const auto& w : result.model.work_products)
    if (w.standalone && !with_edges.count(w.id) && had_edges(w.id))
      result.warnings.push_back(
          {"W_ISOLATED", w.id, "work product lost all its edges at instantiation"});

  if (const ValidationReport report = validate_model(result.model);
      !report.empty())
    throw Error("E_POST_INVALID",
                "instantiation produced an invalid model: " +
                    report.front().code + " " + report.front().element +
                    " (line validation should have caught this)");

  // Containment re-check; cheap and loud.
  for (const auto& e : model_elements(result.model))
    if (!before.count(e))
      throw Error("E_POST_INVALID", "instantiation invented element " + e);

  result.parameters = line.parametric_defaults;
  if (demand_overlay)
    for (const auto& [name, value] : *demand_overlay)
      result.parameters[name] = value;
  for (const auto& [name, value] : set_stage) result.parameters[name] = value;
  return result;
}

// Overlay the parametric demands of one entity onto the line defaults.
// Multiple demands on the same parameter ratchet to the numeric maximum;
// quality settings only ever tighten.
inline ParamMap apply_parametrics(const ProcessLine& line,
                                  const std::vector<Demand>& demands) {
  ParamMap stage;
  for (const auto& d : demands) {
    if (d.kind != DemandKind::parametric || !d.parameter) continue;
    detail::ratchet_parameter(stage, d.parameter->name, d.parameter->value);
  }
  ParamMap out = line.parametric_defaults;
  for (const auto& [name, value] : stage) out[name] = value;
  return out;
}

}  // namespace procline
