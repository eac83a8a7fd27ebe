#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "procline/charmap.hpp"
#include "procline/error.hpp"
#include "procline/model.hpp"
#include "procline/rules.hpp"
#include "procline/scoping.hpp"

namespace procline {

// A named, rule-governed set of model elements that instantiation either
// keeps wholesale or erases wholesale. Element sets of distinct variation
// points are disjoint; shared elements belong in the core.
struct VariationPoint {
  std::string id;
  std::string capability;
  std::set<std::string> elements;
  std::vector<std::string> rules;

  bool operator==(const VariationPoint&) const = default;
};

using ParamMap = std::map<std::string, ParamValue>;

struct ProcessLine {
  ProcessModel model;
  std::vector<VariationPoint> variation_points;
  RuleSet ruleset;
  ParamMap parametric_defaults;
  std::vector<AttributeDef> attributes;  // declarations the ruleset is typed by
};

// Elements not bound to any variation point.
inline std::set<std::string> line_core(const ProcessLine& line) {
  std::set<std::string> core = model_elements(line.model);
  for (const auto& vp : line.variation_points)
    for (const auto& e : vp.elements) core.erase(e);
  return core;
}

inline const VariationPoint* find_vp(const ProcessLine& line,
                                     const std::string& id) {
  for (const auto& vp : line.variation_points)
    if (vp.id == id) return &vp;
  return nullptr;
}

// Requested binding of one capability to a model element set. An empty
// rules list means "every rule whose id is vp_id or starts with vp_id + '.'".
struct Binding {
  std::string capability;
  std::string vp_id;  // defaults to the capability name
  std::set<std::string> elements;
  std::vector<std::string> rules;
};

namespace detail {

inline std::vector<std::string> governing_rules(const RuleSet& rs,
                                                const std::string& vp_id) {
  std::vector<std::string> out;
  const std::string prefix = vp_id + ".";
  for (const auto& r : rs.rules)
    if (r.id == vp_id || r.id.rfind(prefix, 0) == 0) out.push_back(r.id);
  return out;
}

// Erase elements from a model, cascading to incident edges and pruning view
// membership. Vertices other than the erased ones are never removed.
inline ProcessModel erase_elements(const ProcessModel& model,
                                   const std::set<std::string>& doomed) {
  ProcessModel out;
  std::set<std::string> gone_vertices;
  for (const auto& a : model.activities) {
    if (doomed.count(a.id))
      gone_vertices.insert(a.id);
    else
      out.activities.push_back(a);
  }
  for (const auto& w : model.work_products) {
    if (doomed.count(w.id))
      gone_vertices.insert(w.id);
    else
      out.work_products.push_back(w);
  }
  std::set<std::string> gone_edges;
  for (const auto& e : model.product_flow) {
    const std::string key = edge_key(e);
    if (doomed.count(key) || gone_vertices.count(e.activity) ||
        gone_vertices.count(e.work_product))
      gone_edges.insert(key);
    else
      out.product_flow.push_back(e);
  }
  for (const auto& e : model.control_flow) {
    const std::string key = edge_key(e);
    if (doomed.count(key) || gone_vertices.count(e.from) ||
        gone_vertices.count(e.to))
      gone_edges.insert(key);
    else
      out.control_flow.push_back(e);
  }
  for (const auto& v : model.views) {
    View pruned{v.id, v.kind, {}};
    for (const auto& m : v.members)
      if (!doomed.count(m) && !gone_vertices.count(m) && !gone_edges.count(m))
        pruned.members.push_back(m);
    out.views.push_back(std::move(pruned));
  }
  return out;
}

}  // namespace detail

// Assemble the process line from scoping decisions. Structural OPTIONAL
// capabilities become variation points, CORE-bound elements stay in core,
// and elements bound to OUT capabilities are removed from the model
// entirely. Deterministic and independent of binding order.
inline ProcessLine build_line(const ProcessModel& model,
                              const ScopeDecisionSet& scope,
                              const RuleSet& ruleset,
                              const std::vector<Binding>& bindings,
                              ParamMap parametric_defaults = {},
                              std::vector<AttributeDef> attributes = {}) {
  const std::set<std::string> universe = model_elements(model);
  std::map<std::string, const Binding*> by_capability;
  for (const auto& b : bindings) {
    if (!by_capability.emplace(b.capability, &b).second)
      throw Error("E_OVERLAP", "capability " + b.capability +
                                   " is bound more than once");
    for (const auto& e : b.elements)
      if (!universe.count(e))
        throw Error("E_UNKNOWN_ELEMENT", "binding for " + b.capability +
                                             " references " + e +
                                             " which is not in the model");
  }

  ProcessLine line;
  line.ruleset = ruleset;
  line.parametric_defaults = std::move(parametric_defaults);
  line.attributes = std::move(attributes);

  std::set<std::string> removed;
  std::map<std::string, std::string> element_owner;
  for (const auto& [capability, decision] : scope.capabilities) {
    if (decision.kind == DemandKind::parametric) continue;
    const auto found = by_capability.find(capability);
    const Binding* binding = found == by_capability.end() ? nullptr : found->second;
    switch (decision.klass) {
      case ScopeClass::CORE:
        break;  // bound or not, the elements stay in the core
      case ScopeClass::OUT:
        if (binding) removed.insert(binding->elements.begin(), binding->elements.end());
        break;
      case ScopeClass::OPTIONAL: {
        if (!binding)
          throw Error("E_NO_BINDING", "optional capability " + capability +
                                          " has no element binding");
        VariationPoint vp;
        vp.capability = capability;
        vp.id = binding->vp_id.empty() ? capability : binding->vp_id;
        vp.elements = binding->elements;
        for (const auto& e : vp.elements) {
          auto [it, inserted] = element_owner.emplace(e, vp.id);
          if (!inserted)
            throw Error("E_OVERLAP", "element " + e + " is bound to both " +
                                         it->second + " and " + vp.id);
        }
        vp.rules = binding->rules.empty()
                       ? detail::governing_rules(ruleset, vp.id)
                       : binding->rules;
        if (vp.rules.empty())
          throw Error("E_NO_RULE", "optional capability " + capability +
                                       " (variation point " + vp.id +
                                       ") has no governing rule");
        for (const auto& id : vp.rules)
          if (!ruleset.find(id))
            throw Error("E_NO_RULE", "variation point " + vp.id +
                                         " references unknown rule " + id);
        line.variation_points.push_back(std::move(vp));
        break;
      }
    }
  }
  std::sort(line.variation_points.begin(), line.variation_points.end(),
            [](const VariationPoint& a, const VariationPoint& b) {
              return a.id < b.id;
            });

  line.model = removed.empty() ? model : detail::erase_elements(model, removed);
  if (const ValidationReport report = validate_model(line.model); !report.empty())
    throw Error("E_POST_INVALID",
                "removing OUT-bound elements left the model invalid: " +
                    report.front().code + " " + report.front().element);
  return line;
}

// Resolve-graph edges: vp -> target for every resolve action in its rules.
inline std::map<std::string, std::set<std::string>> resolve_graph(
    const ProcessLine& line) {
  std::map<std::string, std::set<std::string>> graph;
  for (const auto& vp : line.variation_points) {
    graph[vp.id];
    for (const auto& rule_id : vp.rules) {
      const Rule* rule = line.ruleset.find(rule_id);
      if (!rule) continue;
      for (const auto& action : rule->actions)
        if (const auto* res = std::get_if<ResolveAction>(&action))
          graph[vp.id].insert(res->target);
    }
  }
  return graph;
}

// Line-level validation: resolve cycles, dangling resolve targets, rules
// acting on elements outside their variation point, and core elements whose
// survival depends on a variation point. Empty report means every total
// context instantiates to a well-formed model.
inline ValidationReport validate_line(const ProcessLine& line) {
  ValidationReport report;
  const std::set<std::string> universe = model_elements(line.model);
  const std::set<std::string> core = line_core(line);

  std::set<std::string> vp_ids;
  std::map<std::string, std::string> owner;
  for (const auto& vp : line.variation_points) {
    if (!vp_ids.insert(vp.id).second)
      report.push_back({"DUP_ID", vp.id, "duplicate variation point id"});
    if (vp.elements.empty())
      report.push_back({"E_UNKNOWN_ELEMENT", vp.id,
                        "variation point has an empty element set"});
    for (const auto& e : vp.elements) {
      if (!universe.count(e))
        report.push_back({"E_UNKNOWN_ELEMENT", e,
                          "variation point " + vp.id +
                              " binds an element missing from the model"});
      auto [it, inserted] = owner.emplace(e, vp.id);
      if (!inserted)
        report.push_back({"E_OVERLAP", e, "element bound to both " +
                                              it->second + " and " + vp.id});
    }
    if (vp.rules.empty())
      report.push_back(
          {"E_NO_RULE", vp.id, "variation point has no governing rule"});
    for (const auto& rule_id : vp.rules) {
      const Rule* rule = line.ruleset.find(rule_id);
      if (!rule) {
        report.push_back({"E_NO_RULE", vp.id,
                          "governing rule " + rule_id + " is not in the rule set"});
        continue;
      }
      for (const auto& action : rule->actions) {
        const std::vector<std::string>* args = nullptr;
        if (const auto* inc = std::get_if<IncludeAction>(&action))
          args = &inc->elements;
        else if (const auto* exc = std::get_if<ExcludeAction>(&action))
          args = &exc->elements;
        else if (const auto* res = std::get_if<ResolveAction>(&action)) {
          if (!find_vp(line, res->target))
            report.push_back({"E_DANGLING_RESOLVE", vp.id,
                              "rule " + rule_id + " resolves unknown "
                              "variation point " + res->target});
          continue;
        }
        if (!args) continue;
        for (const auto& e : *args)
          if (!vp.elements.count(e))
            report.push_back({"E_UNKNOWN_ELEMENT", e,
                              "rule " + rule_id + " acts on an element not "
                              "bound to variation point " + vp.id});
      }
    }
  }

  // Resolve-reference graph must be acyclic.
  const auto graph = resolve_graph(line);
  std::set<std::string> nodes;
  for (const auto& [id, _] : graph) nodes.insert(id);
  for (const auto& comp : detail::sccs(nodes, graph)) {
    if (comp.size() >= 2)
      report.push_back({"E_RESOLVE_CYCLE", comp.front(),
                        "resolve chain cycles through " +
                            std::to_string(comp.size()) + " variation points"});
  }
  for (const auto& [id, targets] : graph)
    if (targets.count(id))
      report.push_back({"E_RESOLVE_CYCLE", id, "variation point resolves itself"});

  // Core edges must not touch variable vertices, and a non-standalone core
  // work product needs at least one core product-flow edge; otherwise some
  // context erases the element's support and the instance cannot validate.
  for (const auto& e : line.model.product_flow) {
    const std::string key = edge_key(e);
    if (!core.count(key)) continue;
    for (const auto& endpoint : {e.activity, e.work_product})
      if (!core.count(endpoint))
        report.push_back({"E_CORE_DEP", key,
                          "core product-flow edge depends on variable element " +
                              endpoint + " (owned by " + owner[endpoint] + ")"});
  }
  for (const auto& e : line.model.control_flow) {
    const std::string key = edge_key(e);
    if (!core.count(key)) continue;
    for (const auto& endpoint : {e.from, e.to})
      if (!core.count(endpoint))
        report.push_back({"E_CORE_DEP", key,
                          "core control-flow edge depends on variable element " +
                              endpoint + " (owned by " + owner[endpoint] + ")"});
  }
  for (const auto& w : line.model.work_products) {
    if (w.standalone || !core.count(w.id)) continue;
    bool core_support = false;
    for (const auto& e : line.model.product_flow)
      if (e.work_product == w.id && core.count(edge_key(e))) {
        core_support = true;
        break;
      }
    if (!core_support)
      report.push_back({"E_CORE_DEP", w.id,
                        "core work product is kept alive only by "
                        "variation-point edges"});
  }

  return report;
}

struct LineStats {
  std::size_t core_count = 0;
  std::map<std::string, std::size_t> variant_counts;
  std::size_t total = 0;
};

inline LineStats line_stats(const ProcessLine& line) {
  LineStats stats;
  stats.total = model_elements(line.model).size();
  stats.core_count = line_core(line).size();
  for (const auto& vp : line.variation_points)
    stats.variant_counts[vp.id] = vp.elements.size();
  return stats;
}

}  // namespace procline
