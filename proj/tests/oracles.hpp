#pragma once

// Brute-force reference implementations, written straight from the operation
// definitions and kept independent of the engine's code paths. The engine is
// required to agree with these on every enumerated input.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "helpers.hpp"
#include "procline/charmap.hpp"
#include "procline/instantiate.hpp"
#include "procline/line.hpp"
#include "procline/model.hpp"
#include "procline/rules.hpp"
#include "procline/scoping.hpp"

namespace oracle {

using procline::AttrValue;
using procline::AttributeDef;
using procline::Condition;
using procline::ProjectContext;

// --- independent condition evaluation ---------------------------------------

inline bool eval(const Condition& cond, const ProjectContext& ctx) {
  struct Visitor {
    const ProjectContext& ctx;
    bool operator()(const procline::Comparison& cmp) const {
      const AttrValue& have = ctx.at(cmp.attribute).value;
      bool any_equal = false;
      for (const auto& v : cmp.values) any_equal = any_equal || have == v;
      switch (cmp.op) {
        case procline::CmpOp::eq: return have == cmp.values.front();
        case procline::CmpOp::ne: return have != cmp.values.front();
        case procline::CmpOp::in_set: return any_equal;
        case procline::CmpOp::le:
          return std::get<int>(have) <= std::get<int>(cmp.values.front());
        case procline::CmpOp::ge:
          return std::get<int>(have) >= std::get<int>(cmp.values.front());
        case procline::CmpOp::lt:
          return std::get<int>(have) < std::get<int>(cmp.values.front());
        case procline::CmpOp::gt:
          return std::get<int>(have) > std::get<int>(cmp.values.front());
      }
      return false;
    }
    bool operator()(const procline::AndExpr& conj) const {
      bool all = true;
      for (const auto& c : conj.children) all = all && std::visit(*this, c.node);
      return all;
    }
    bool operator()(const procline::OrExpr& disj) const {
      bool any = false;
      for (const auto& c : disj.children) any = any || std::visit(*this, c.node);
      return any;
    }
  };
  return std::visit(Visitor{ctx}, cond.node);
}

// De Morgan complement: eval(complement(c)) == !eval(c) on every total
// context, provided no in-set covers its attribute's full domain.
inline std::vector<AttrValue> domain_of(const AttributeDef& def) {
  std::vector<AttrValue> out;
  switch (def.scale.kind) {
    case procline::ScaleKind::boolean:
      out.push_back(false);
      out.push_back(true);
      break;
    case procline::ScaleKind::nominal:
      for (const auto& v : def.scale.values) out.push_back(v);
      break;
    case procline::ScaleKind::ordinal:
      for (int v = def.scale.min; v <= def.scale.max; ++v) out.push_back(v);
      break;
    case procline::ScaleKind::id_set:
      break;
  }
  return out;
}

inline Condition complement(const Condition& cond,
                            const std::vector<AttributeDef>& defs) {
  using procline::AndExpr;
  using procline::CmpOp;
  using procline::Comparison;
  using procline::OrExpr;
  if (const auto* cmp = std::get_if<Comparison>(&cond.node)) {
    Comparison out = *cmp;
    switch (cmp->op) {
      case CmpOp::eq: out.op = CmpOp::ne; break;
      case CmpOp::ne: out.op = CmpOp::eq; break;
      case CmpOp::lt: out.op = CmpOp::ge; break;
      case CmpOp::ge: out.op = CmpOp::lt; break;
      case CmpOp::le: out.op = CmpOp::gt; break;
      case CmpOp::gt: out.op = CmpOp::le; break;
      case CmpOp::in_set: {
        const auto* def = procline::find_attribute(defs, cmp->attribute);
        out.values.clear();
        for (const auto& v : domain_of(*def)) {
          bool in_original = false;
          for (const auto& o : cmp->values) in_original = in_original || o == v;
          if (!in_original) out.values.push_back(v);
        }
        std::sort(out.values.begin(), out.values.end());
        break;
      }
    }
    return Condition{out};
  }
  if (const auto* conj = std::get_if<AndExpr>(&cond.node)) {
    OrExpr out;
    for (const auto& c : conj->children) out.children.push_back(complement(c, defs));
    return Condition{out};
  }
  AndExpr out;
  for (const auto& c : std::get<OrExpr>(cond.node).children)
    out.children.push_back(complement(c, defs));
  return Condition{out};
}

// All total contexts over the declared attribute domains (neutral 2,2
// priorities).
inline std::vector<ProjectContext> enumerate_contexts(
    const std::vector<AttributeDef>& defs) {
  std::vector<ProjectContext> contexts{{}};
  for (const auto& def : defs) {
    std::vector<ProjectContext> grown;
    for (const auto& base : contexts) {
      for (const auto& value : domain_of(def)) {
        ProjectContext next = base;
        next[def.name] = {value, 2, 2};
        grown.push_back(std::move(next));
      }
    }
    contexts = std::move(grown);
  }
  return contexts;
}

// --- scoping oracle ----------------------------------------------------------

// Recomputes the CORE/OPTIONAL/OUT definition verbatim.
inline std::map<std::string, procline::ScopeClass> scope(
    const procline::DemandProfile& profile, long long threshold_num,
    long long threshold_den, int min_score) {
  std::map<std::string, procline::ScopeClass> out;
  const long long total = static_cast<long long>(profile.entities.size());
  for (const auto& cap : profile.capability_universe) {
    long long demanded_by = 0;
    int max_score = 0;
    for (const auto& [entity, demands] : profile.entities) {
      for (const auto& d : demands) {
        if (d.capability != cap) continue;
        ++demanded_by;
        if (d.score > max_score) max_score = d.score;
      }
    }
    if (demanded_by == 0)
      out[cap] = procline::ScopeClass::OUT;
    else if (demanded_by * threshold_den >= threshold_num * total &&
             max_score >= min_score)
      out[cap] = procline::ScopeClass::CORE;
    else
      out[cap] = procline::ScopeClass::OPTIONAL;
  }
  return out;
}

// --- set cover oracle ---------------------------------------------------------

// Smallest subset of processes covering all capabilities; exhaustive over
// all 2^n subsets, preferring smaller then lexicographically smaller picks.
inline std::vector<std::string> minimal_cover(
    const std::vector<std::string>& processes,
    const std::map<std::string, std::set<std::string>>& offers,
    const std::vector<std::string>& capabilities) {
  std::vector<std::string> best;
  bool found = false;
  const size_t n = processes.size();
  for (size_t mask = 0; mask < (size_t{1} << n); ++mask) {
    std::vector<std::string> chosen;
    for (size_t i = 0; i < n; ++i)
      if (mask & (size_t{1} << i)) chosen.push_back(processes[i]);
    bool ok = true;
    for (const auto& cap : capabilities) {
      bool covered = false;
      for (const auto& p : chosen)
        covered = covered || (offers.count(p) && offers.at(p).count(cap));
      if (!covered) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    if (!found || chosen.size() < best.size() ||
        (chosen.size() == best.size() && chosen < best)) {
      best = chosen;
      found = true;
    }
  }
  return best;
}

// --- instantiation oracle -----------------------------------------------------

struct InstantiationOutcome {
  enum class Status { ok, conflict, unbound };
  Status status = Status::ok;
  std::set<std::string> elements;
  std::set<std::string> included;
  std::set<std::string> excluded;

  bool operator==(const InstantiationOutcome&) const = default;
};

// Naive fixpoint over the stated semantics: evaluate every point not
// targeted by a resolve; evaluate targets once some fired resolve reaches
// them; a point is included only if an include fired and outranks any fired
// exclude; everything else is erased together with edges losing an endpoint.
inline InstantiationOutcome instantiate(const procline::ProcessLine& line,
                                        const ProjectContext& ctx) {
  InstantiationOutcome outcome;

  std::set<std::string> targets;
  for (const auto& vp : line.variation_points)
    for (const auto& rule_id : vp.rules) {
      const procline::Rule* rule = line.ruleset.find(rule_id);
      if (!rule) continue;
      for (const auto& action : rule->actions)
        if (const auto* res = std::get_if<procline::ResolveAction>(&action))
          targets.insert(res->target);
    }

  auto rule_score = [&](const procline::Rule& rule) {
    if (!rule.condition) return 0;
    int score = 0;
    for (const auto& attr : procline::condition_attributes(*rule.condition)) {
      const auto it = ctx.find(attr);
      if (it != ctx.end() &&
          it->second.likelihood * it->second.damage > score)
        score = it->second.likelihood * it->second.damage;
    }
    return score;
  };

  std::set<std::string> pending;
  for (const auto& vp : line.variation_points)
    if (!targets.count(vp.id)) pending.insert(vp.id);

  std::map<std::string, std::pair<int, int>> fired;  // vp -> (inc, exc) scores
  std::set<std::string> evaluated;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& vp : line.variation_points) {
      if (!pending.count(vp.id) || evaluated.count(vp.id)) continue;
      evaluated.insert(vp.id);
      changed = true;
      auto& scores = fired.emplace(vp.id, std::make_pair(-1, -1)).first->second;
      for (const auto& rule_id : vp.rules) {
        const procline::Rule* rule = line.ruleset.find(rule_id);
        if (rule->condition) {
          for (const auto& attr :
               procline::condition_attributes(*rule->condition))
            if (!ctx.count(attr)) {
              outcome.status = InstantiationOutcome::Status::unbound;
              return outcome;
            }
          if (!eval(*rule->condition, ctx)) continue;
        }
        const int score = rule_score(*rule);
        for (const auto& action : rule->actions) {
          if (std::holds_alternative<procline::IncludeAction>(action))
            scores.first = std::max(scores.first, score);
          else if (std::holds_alternative<procline::ExcludeAction>(action))
            scores.second = std::max(scores.second, score);
          else if (const auto* res =
                       std::get_if<procline::ResolveAction>(&action))
            pending.insert(res->target);
        }
      }
    }
  }

  for (const auto& vp : line.variation_points) {
    const auto it = fired.find(vp.id);
    const int inc = it == fired.end() ? -1 : it->second.first;
    const int exc = it == fired.end() ? -1 : it->second.second;
    if (inc >= 0 && exc >= 0 && inc == exc) {
      outcome.status = InstantiationOutcome::Status::conflict;
      return outcome;
    }
    const bool included = inc >= 0 && (exc < 0 || inc > exc);
    if (included)
      outcome.included.insert(vp.id);
    else
      outcome.excluded.insert(vp.id);
  }

  std::set<std::string> erased;
  for (const auto& vp : line.variation_points)
    if (outcome.excluded.count(vp.id))
      erased.insert(vp.elements.begin(), vp.elements.end());

  std::set<std::string> alive_vertices;
  for (const auto& a : line.model.activities)
    if (!erased.count(a.id)) alive_vertices.insert(a.id);
  for (const auto& w : line.model.work_products)
    if (!erased.count(w.id)) alive_vertices.insert(w.id);

  outcome.elements = alive_vertices;
  for (const auto& e : line.model.product_flow) {
    const std::string key = procline::edge_key(e);
    if (!erased.count(key) && alive_vertices.count(e.activity) &&
        alive_vertices.count(e.work_product))
      outcome.elements.insert(key);
  }
  for (const auto& e : line.model.control_flow) {
    const std::string key = procline::edge_key(e);
    if (!erased.count(key) && alive_vertices.count(e.from) &&
        alive_vertices.count(e.to))
      outcome.elements.insert(key);
  }
  return outcome;
}

// --- effort recount -----------------------------------------------------------

inline long long recount_savings(
    const procline::ProcessLine& line,
    const std::vector<procline::InstantiatedModel>& instances) {
  long long separate = 0;
  for (const auto& inst : instances)
    separate += static_cast<long long>(
        procline::model_elements(inst.model).size());
  return separate -
         static_cast<long long>(procline::model_elements(line.model).size());
}

}  // namespace oracle
