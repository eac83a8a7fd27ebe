#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "procline/error.hpp"
#include "procline/json_io.hpp"
#include "procline/line.hpp"
#include "procline/model.hpp"

namespace procline {

struct FixtureSpec {
  int activities = 76;
  int artifacts = 54;
  int pf_views = 18;
  int cf_views = 18;
  std::uint64_t seed = 1;
};

struct FixtureOutput {
  ModelDocument line;
  // file name -> JSON text for the two satellite-style project contexts
  std::map<std::string, std::string> contexts;
};

namespace detail {

// mt19937_64 has a pinned sequence everywhere; std::uniform_int_distribution
// does not, so reduce by modulo. The slight bias is irrelevant for fixtures.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  return n == 0 ? 0 : rng() % n;
}

inline std::string padded_id(const char* prefix, int i, int total) {
  int width = 1;
  for (int v = total; v >= 10; v /= 10) ++width;
  if (width < 2) width = 2;
  std::string num = std::to_string(i);
  while (static_cast<int>(num.size()) < width) num.insert(num.begin(), '0');
  return std::string(prefix) + num;
}

}  // namespace detail

// Build a desk-scale process line: a layered random control-flow DAG (loops
// only through iterative activities), a product flow touching every
// artifact, the requested number of views, and two variation points wired
// like the satellite fixture (one keyed to the collaboration type, one to
// the mission type). Deterministic per seed.
inline FixtureOutput gen_fixture(const FixtureSpec& spec) {
  if (spec.activities < 0 || spec.artifacts < 0 || spec.pf_views < 0 ||
      spec.cf_views < 0)
    throw Error("E_SCHEMA", "fixture counts must be non-negative");

  std::mt19937_64 rng(spec.seed);
  ModelDocument doc;
  ProcessModel& model = doc.model;

  const bool with_vps = spec.activities >= 3 && spec.artifacts >= 2;
  const int core_acts = with_vps ? spec.activities - 1 : spec.activities;
  const int core_wps = with_vps ? spec.artifacts - 2 : spec.artifacts;

  std::vector<std::string> act_ids, wp_ids;
  for (int i = 1; i <= spec.activities; ++i)
    act_ids.push_back(detail::padded_id("act_", i, spec.activities));
  for (int i = 1; i <= spec.artifacts; ++i)
    wp_ids.push_back(detail::padded_id("wp_", i, spec.artifacts));

  for (int i = 0; i < spec.activities; ++i)
    model.activities.push_back({act_ids[i], "Activity " + std::to_string(i + 1),
                                "", false});
  for (int i = 0; i < spec.artifacts; ++i)
    model.work_products.push_back({wp_ids[i], "Artifact " + std::to_string(i + 1),
                                   "", false});

  // Layered core control flow.
  int layers = 1;
  while (layers * layers < core_acts) ++layers;
  auto layer_of = [&](int i) { return layers == 0 ? 0 : (i * layers) / std::max(core_acts, 1); };
  std::vector<std::vector<int>> by_layer(std::max(layers, 1));
  for (int i = 0; i < core_acts; ++i) by_layer[layer_of(i)].push_back(i);

  std::set<std::string> cf_keys;
  auto add_cf = [&](int from, int to) {
    ControlFlowEdge e{act_ids[from], act_ids[to]};
    if (cf_keys.insert(edge_key(e)).second) model.control_flow.push_back(e);
  };
  for (int i = 0; i < core_acts; ++i) {
    const int layer = layer_of(i);
    if (layer == 0) continue;
    const auto& prev = by_layer[layer - 1];
    if (prev.empty()) continue;
    const int fan_in = 1 + static_cast<int>(detail::bounded(rng, 2));
    for (int k = 0; k < fan_in; ++k)
      add_cf(prev[detail::bounded(rng, prev.size())], i);
  }
  // A few sanctioned loops: back edges into activities flagged iterative.
  const int loop_count = core_acts / 20;
  for (int k = 0; k < loop_count; ++k) {
    const int from = static_cast<int>(detail::bounded(rng, core_acts));
    const int to = static_cast<int>(detail::bounded(rng, core_acts));
    if (from == to || layer_of(to) >= layer_of(from)) continue;
    model.activities[to].iterative = true;
    add_cf(from, to);
  }

  // Product flow: every core artifact gets a producer, most get a consumer.
  std::set<std::string> pf_keys;
  auto add_pf = [&](int act, int wp, FlowDirection dir) {
    ProductFlowEdge e{act_ids[act], wp_ids[wp], dir};
    if (pf_keys.insert(edge_key(e)).second) model.product_flow.push_back(e);
  };
  for (int w = 0; w < core_wps; ++w) {
    if (core_acts == 0) {
      model.work_products[w].standalone = true;
      continue;
    }
    const int producer = static_cast<int>(detail::bounded(rng, core_acts));
    add_pf(producer, w, FlowDirection::produces);
    if (detail::bounded(rng, 10) < 6) {
      const int consumer = static_cast<int>(detail::bounded(rng, core_acts));
      if (consumer != producer) add_pf(consumer, w, FlowDirection::consumes);
    }
    if (detail::bounded(rng, 10) < 2) {
      const int modifier = static_cast<int>(detail::bounded(rng, core_acts));
      if (modifier != producer) add_pf(modifier, w, FlowDirection::modifies);
    }
  }

  // Variation points, wired like the satellite case: an analysis activity
  // producing a dedicated artifact, and a standalone optional artifact.
  std::string ruleset;
  if (with_vps) {
    const int vp_act = spec.activities - 1;        // owned by opt1
    const int vp_wp1 = spec.artifacts - 2;         // produced by vp_act
    const int vp_wp2 = spec.artifacts - 1;         // owned by opt2
    const int anchor1 = static_cast<int>(detail::bounded(rng, core_acts));
    const int anchor2 = static_cast<int>(detail::bounded(rng, core_acts));
    add_cf(anchor1, vp_act);
    add_pf(vp_act, vp_wp1, FlowDirection::produces);
    add_pf(anchor2, vp_wp2, FlowDirection::produces);

    VariationPoint opt1;
    opt1.id = "Opt1";
    opt1.capability = "intl_analysis";
    opt1.elements = {act_ids[vp_act], wp_ids[vp_wp1],
                     edge_key(ControlFlowEdge{act_ids[anchor1], act_ids[vp_act]}),
                     edge_key(ProductFlowEdge{act_ids[vp_act], wp_ids[vp_wp1],
                                              FlowDirection::produces})};
    opt1.rules = {"Opt1.1"};
    VariationPoint opt2;
    opt2.id = "Opt2";
    opt2.capability = "engineering_rationale";
    opt2.elements = {wp_ids[vp_wp2],
                     edge_key(ProductFlowEdge{act_ids[anchor2], wp_ids[vp_wp2],
                                              FlowDirection::produces})};
    opt2.rules = {"Opt2.1", "Opt2.2"};
    doc.variation_points = {opt1, opt2};

    ruleset += "Opt1.1: if collaboration_type == international then include(" +
               act_ids[vp_act] + ", " + wp_ids[vp_wp1] + ")\n";
    ruleset += "Opt2.1: if mission_type == engineering then include(" +
               wp_ids[vp_wp2] + ")\n";
    ruleset += "Opt2.2: if mission_type == engineering then "
               "set(reviews_per_phase, 2)\n";
  }

  // Views partition the edges round-robin; members carry their endpoints.
  auto make_views = [&](int count, const char* prefix, ViewKind kind,
                        auto edge_range, auto members_of) {
    if (count <= 0) return;
    std::vector<View> views(count);
    for (int i = 0; i < count; ++i) {
      views[i].id = detail::padded_id(prefix, i + 1, count);
      views[i].kind = kind;
    }
    int next = 0;
    for (const auto& e : edge_range) {
      auto& view = views[next % count];
      for (const auto& m : members_of(e)) view.members.push_back(m);
      ++next;
    }
    for (auto& v : views) {
      std::sort(v.members.begin(), v.members.end());
      v.members.erase(std::unique(v.members.begin(), v.members.end()),
                      v.members.end());
      model.views.push_back(std::move(v));
    }
  };
  make_views(spec.pf_views, "pfv_", ViewKind::product_flow, model.product_flow,
             [](const ProductFlowEdge& e) {
               return std::vector<std::string>{e.activity, e.work_product,
                                               edge_key(e)};
             });
  make_views(spec.cf_views, "cfv_", ViewKind::control_flow, model.control_flow,
             [](const ControlFlowEdge& e) {
               return std::vector<std::string>{e.from, e.to, edge_key(e)};
             });

  doc.attributes = {
      {"collaboration_type", Scale::nominal({"national", "international"}),
       MapKind::project},
      {"mission_type", Scale::nominal({"engineering", "science"}),
       MapKind::project},
  };
  doc.ruleset_text = ruleset;
  doc.parametric_defaults = {{"reviews_per_phase", 1.0}, {"ivv_level", 1.0}};

  if (const ValidationReport report = validate_model(model); !report.empty())
    throw Error("E_POST_INVALID", "generated fixture failed validation: " +
                                      report.front().code + " " +
                                      report.front().element);

  FixtureOutput out;
  out.line = std::move(doc);
  out.contexts["ctx_international_engineering.json"] =
      "{\n  \"collaboration_type\": \"international\",\n"
      "  \"mission_type\": \"engineering\"\n}\n";
  out.contexts["ctx_national_science.json"] =
      "{\n  \"collaboration_type\": \"national\",\n"
      "  \"mission_type\": \"science\"\n}\n";
  return out;
}

}  // namespace procline
