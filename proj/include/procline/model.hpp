#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "procline/error.hpp"

namespace procline {

enum class FlowDirection { produces, consumes, modifies };

inline const char* to_string(FlowDirection d) {
  switch (d) {
    case FlowDirection::produces: return "produces";
    case FlowDirection::consumes: return "consumes";
    case FlowDirection::modifies: return "modifies";
  }
  return "produces";
}

struct Activity {
  std::string id;
  std::string name;
  std::string description;
  bool iterative = false;  // permits control-flow loops through this activity

  bool operator==(const Activity&) const = default;
};

struct WorkProduct {
  std::string id;
  std::string name;
  std::string description;
  bool standalone = false;  // exempt from the orphan check

  bool operator==(const WorkProduct&) const = default;
};

struct ProductFlowEdge {
  std::string activity;
  std::string work_product;
  FlowDirection direction = FlowDirection::produces;

  bool operator==(const ProductFlowEdge&) const = default;
};

struct ControlFlowEdge {
  std::string from;
  std::string to;

  bool operator==(const ControlFlowEdge&) const = default;
};

enum class ViewKind { product_flow, control_flow };

inline const char* to_string(ViewKind k) {
  return k == ViewKind::product_flow ? "product_flow" : "control_flow";
}

struct View {
  std::string id;
  ViewKind kind = ViewKind::product_flow;
  std::vector<std::string> members;

  bool operator==(const View&) const = default;
};

// The combined model: stable and variable parts live in one structure.
// Variation-point ownership is layered on top by ProcessLine; the model
// itself is plain activities, work products, edges, and views.
struct ProcessModel {
  std::vector<Activity> activities;
  std::vector<WorkProduct> work_products;
  std::vector<ProductFlowEdge> product_flow;
  std::vector<ControlFlowEdge> control_flow;
  std::vector<View> views;

  bool operator==(const ProcessModel&) const = default;
};

// Edges have no user-supplied ids; identity is the canonical tuple key.
inline std::string edge_key(const ProductFlowEdge& e) {
  return "pf:" + e.activity + ">" + e.work_product + ":" + to_string(e.direction);
}

inline std::string edge_key(const ControlFlowEdge& e) {
  return "cf:" + e.from + ">" + e.to;
}

inline bool valid_id(const std::string& id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '.' || c == '-';
  });
}

namespace detail {

inline bool contains(const std::set<std::string>& s, const std::string& k) {
  return s.find(k) != s.end();
}

// Strongly connected components of the induced subgraph over `nodes`,
// returned in a deterministic order. Iterative Tarjan.
inline std::vector<std::vector<std::string>> sccs(
    const std::set<std::string>& nodes,
    const std::map<std::string, std::set<std::string>>& adj) {
  std::map<std::string, int> index, lowlink;
  std::set<std::string> on_stack;
  std::vector<std::string> stack;
  std::vector<std::vector<std::string>> result;
  int next_index = 0;

  struct Frame {
    std::string node;
    std::set<std::string>::const_iterator it, end;
  };

  static const std::set<std::string> kEmpty;
  for (const auto& start : nodes) {
    if (index.count(start)) continue;
    std::vector<Frame> frames;
    auto push_node = [&](const std::string& v) {
      index[v] = lowlink[v] = next_index++;
      stack.push_back(v);
      on_stack.insert(v);
      auto found = adj.find(v);
      const auto& succ = found == adj.end() ? kEmpty : found->second;
      frames.push_back({v, succ.begin(), succ.end()});
    };
    push_node(start);
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.it != f.end) {
        const std::string& w = *f.it++;
        if (!nodes.count(w)) continue;
        if (!index.count(w)) {
          push_node(w);
        } else if (on_stack.count(w)) {
          lowlink[f.node] = std::min(lowlink[f.node], index[w]);
        }
      } else {
        if (lowlink[f.node] == index[f.node]) {
          std::vector<std::string> comp;
          while (true) {
            std::string w = stack.back();
            stack.pop_back();
            on_stack.erase(w);
            comp.push_back(w);
            if (w == f.node) break;
          }
          std::sort(comp.begin(), comp.end());
          result.push_back(std::move(comp));
        }
        std::string done = f.node;
        frames.pop_back();
        if (!frames.empty())
          lowlink[frames.back().node] =
              std::min(lowlink[frames.back().node], lowlink[done]);
      }
    }
  }
  std::sort(result.begin(), result.end());
  return result;
}

}  // namespace detail

// Structural validation of the combined model. Pure; every invariant
// violation becomes one finding with a stable code. An empty report means
// the model is well-formed.
inline ValidationReport validate_model(const ProcessModel& m) {
  ValidationReport report;
  auto add = [&](const char* code, const std::string& element,
                 const std::string& message) {
    report.push_back({code, element, message});
  };

  // Shared id namespace for activities and work products.
  std::set<std::string> activity_ids, product_ids, all_ids;
  auto check_vertex_id = [&](const std::string& id, const char* what) {
    if (!valid_id(id))
      add("BAD_ID", id, std::string(what) + " id is empty or contains "
                                            "characters outside [A-Za-z0-9_.-]");
    if (!all_ids.insert(id).second)
      add("DUP_ID", id, std::string(what) + " id collides with another element");
  };
  for (const auto& a : m.activities) {
    check_vertex_id(a.id, "activity");
    activity_ids.insert(a.id);
  }
  for (const auto& w : m.work_products) {
    check_vertex_id(w.id, "work product");
    product_ids.insert(w.id);
  }

  std::set<std::string> pf_keys;
  std::set<std::string> products_with_flow;
  for (const auto& e : m.product_flow) {
    const std::string key = edge_key(e);
    if (!pf_keys.insert(key).second)
      add("DUP_ID", key, "duplicate product-flow edge");
    if (!detail::contains(activity_ids, e.activity))
      add("DANGLING_REF", e.activity,
          "product-flow edge references unknown activity");
    if (!detail::contains(product_ids, e.work_product))
      add("DANGLING_REF", e.work_product,
          "product-flow edge references unknown work product");
    else
      products_with_flow.insert(e.work_product);
  }

  std::set<std::string> cf_keys;
  std::map<std::string, std::set<std::string>> cf_adj;
  for (const auto& e : m.control_flow) {
    const std::string key = edge_key(e);
    if (!cf_keys.insert(key).second)
      add("DUP_ID", key, "duplicate control-flow edge");
    if (!detail::contains(activity_ids, e.from))
      add("DANGLING_REF", e.from, "control-flow edge from unknown activity");
    if (!detail::contains(activity_ids, e.to))
      add("DANGLING_REF", e.to, "control-flow edge to unknown activity");
    if (e.from == e.to) {
      add("CYCLE", e.from, "self-loop in control flow");
      continue;
    }
    if (detail::contains(activity_ids, e.from) &&
        detail::contains(activity_ids, e.to))
      cf_adj[e.from].insert(e.to);
  }

  // A cycle is legal only if every possible loop runs through an iterative
  // activity, i.e. the subgraph induced by non-iterative activities is acyclic.
  std::set<std::string> non_iterative;
  for (const auto& a : m.activities)
    if (!a.iterative) non_iterative.insert(a.id);
  for (const auto& comp : detail::sccs(non_iterative, cf_adj)) {
    if (comp.size() < 2) continue;
    add("CYCLE", comp.front(),
        "control-flow cycle through " + std::to_string(comp.size()) +
            " activities, none iterative");
  }

  for (const auto& w : m.work_products) {
    if (!w.standalone && !detail::contains(products_with_flow, w.id))
      add("ORPHAN_PRODUCT", w.id,
          "work product has no product-flow edge and is not standalone");
  }

  std::set<std::string> view_ids;
  for (const auto& v : m.views) {
    if (!view_ids.insert(v.id).second)
      add("DUP_ID", v.id, "duplicate view id");
    for (const auto& member : v.members) {
      const bool is_activity = detail::contains(activity_ids, member);
      const bool is_product = detail::contains(product_ids, member);
      const bool is_pf = detail::contains(pf_keys, member);
      const bool is_cf = detail::contains(cf_keys, member);
      if (!is_activity && !is_product && !is_pf && !is_cf) {
        add("BAD_VIEW", v.id, "view member " + member + " is not in the model");
        continue;
      }
      if (v.kind == ViewKind::product_flow && is_cf)
        add("BAD_VIEW", v.id,
            "product-flow view contains control-flow edge " + member);
      if (v.kind == ViewKind::control_flow && (is_product || is_pf))
        add("BAD_VIEW", v.id,
            "control-flow view contains product-flow element " + member);
    }
  }

  return report;
}

// The element universe: vertices plus edges under their canonical keys.
// Views are presentation, not process content, and are excluded.
inline std::set<std::string> model_elements(const ProcessModel& m) {
  std::set<std::string> out;
  for (const auto& a : m.activities) out.insert(a.id);
  for (const auto& w : m.work_products) out.insert(w.id);
  for (const auto& e : m.product_flow) out.insert(edge_key(e));
  for (const auto& e : m.control_flow) out.insert(edge_key(e));
  return out;
}

}  // namespace procline
