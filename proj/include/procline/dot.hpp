#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "procline/line.hpp"
#include "procline/model.hpp"

namespace procline {

namespace dot {

inline std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

inline std::string quote_id(const std::string& s) { return "\"" + escape(s) + "\""; }

struct Emitter {
  const ProcessModel& model;
  std::map<std::string, std::string> owner;  // element -> variation point id

  std::string node_attrs(const std::string& id, const std::string& label,
                         const char* shape) const {
    std::string attrs = "label=" + quote_id(owner.count(id)
                                              ? label + "\\n[" + owner.at(id) + "]"
                                              : label);
    attrs += ", shape=";
    attrs += shape;
    if (owner.count(id)) attrs += ", style=dashed";
    return attrs;
  }

  std::string edge_attrs(const std::string& key, const std::string& label) const {
    std::string text = label;
    if (owner.count(key)) text += " [" + owner.at(key) + "]";
    std::string attrs = "label=" + quote_id(text);
    if (owner.count(key)) attrs += ", style=dashed";
    return attrs;
  }

  void emit(std::string& out, const std::string& graph_id,
            const std::set<std::string>* members) const {
    auto wanted = [&](const std::string& id) {
      return members == nullptr || members->count(id) > 0;
    };
    out += "digraph " + quote_id(graph_id) + " {\n";

    std::vector<const Activity*> acts;
    for (const auto& a : model.activities)
      if (wanted(a.id)) acts.push_back(&a);
    std::sort(acts.begin(), acts.end(),
              [](const Activity* a, const Activity* b) { return a->id < b->id; });
    for (const auto* a : acts)
      out += "  " + quote_id(a->id) + " [" + node_attrs(a->id, a->name, "box") + "];\n";

    std::vector<const WorkProduct*> prods;
    for (const auto& w : model.work_products)
      if (wanted(w.id)) prods.push_back(&w);
    std::sort(prods.begin(), prods.end(), [](const WorkProduct* a,
                                             const WorkProduct* b) {
      return a->id < b->id;
    });
    for (const auto* w : prods)
      out += "  " + quote_id(w->id) + " [" + node_attrs(w->id, w->name, "note") + "];\n";

    std::vector<const ProductFlowEdge*> pf;
    for (const auto& e : model.product_flow)
      if (wanted(edge_key(e))) pf.push_back(&e);
    std::sort(pf.begin(), pf.end(),
              [](const ProductFlowEdge* a, const ProductFlowEdge* b) {
                return edge_key(*a) < edge_key(*b);
              });
    for (const auto* e : pf) {
      const std::string key = edge_key(*e);
      // consumed products point into the activity; everything else flows out
      const bool into_activity = e->direction == FlowDirection::consumes;
      const std::string from = into_activity ? e->work_product : e->activity;
      const std::string to = into_activity ? e->activity : e->work_product;
      out += "  " + quote_id(from) + " -> " + quote_id(to) + " [" +
             edge_attrs(key, to_string(e->direction)) + "];\n";
    }

    std::vector<const ControlFlowEdge*> cf;
    for (const auto& e : model.control_flow)
      if (wanted(edge_key(e))) cf.push_back(&e);
    std::sort(cf.begin(), cf.end(),
              [](const ControlFlowEdge* a, const ControlFlowEdge* b) {
                return edge_key(*a) < edge_key(*b);
              });
    for (const auto* e : cf) {
      const std::string key = edge_key(*e);
      std::string attrs;
      if (owner.count(key))
        attrs = " [" + edge_attrs(key, "") + "]";
      out += "  " + quote_id(e->from) + " -> " + quote_id(e->to) + attrs + ";\n";
    }

    out += "}\n";
  }
};

}  // namespace dot

// Deterministic Graphviz export: one digraph for the whole model followed by
// one per view. Variable elements are dashed and labelled with their
// variation point id.
inline std::string export_dot(const ProcessModel& model,
                              const std::vector<VariationPoint>& vps = {}) {
  dot::Emitter emitter{model, {}};
  for (const auto& vp : vps)
    for (const auto& e : vp.elements) emitter.owner[e] = vp.id;

  std::string out;
  emitter.emit(out, "model", nullptr);

  std::vector<const View*> views;
  for (const auto& v : model.views) views.push_back(&v);
  std::sort(views.begin(), views.end(),
            [](const View* a, const View* b) { return a->id < b->id; });
  for (const auto* v : views) {
    const std::set<std::string> members(v->members.begin(), v->members.end());
    out += "\n";
    emitter.emit(out, "view_" + v->id, &members);
  }
  return out;
}

inline std::string export_dot(const ProcessLine& line) {
  return export_dot(line.model, line.variation_points);
}

}  // namespace procline
