#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "procline/charmap.hpp"
#include "procline/error.hpp"
#include "procline/rules.hpp"

namespace procline {

enum class DemandKind { structural, parametric };

inline const char* to_string(DemandKind k) {
  return k == DemandKind::structural ? "structural" : "parametric";
}

struct Parameter {
  std::string name;
  ParamValue value;
  bool operator==(const Parameter&) const = default;
};

// One row of the capability mapping: when the condition holds for an entity
// of `map_kind`, that entity demands `capability`.
struct MappingRow {
  Condition condition;
  std::string capability;
  DemandKind kind = DemandKind::structural;
  std::optional<Parameter> parameter;  // parametric rows only
  MapKind map_kind = MapKind::product; // derived from the condition attributes
};

struct CapabilityMapping {
  std::vector<MappingRow> rows;
};

struct Demand {
  std::string capability;
  DemandKind kind = DemandKind::structural;
  std::optional<Parameter> parameter;
  int score = 1;  // max priority_score among triggering entries, 1..9

  bool operator==(const Demand&) const = default;
};

struct DemandProfile {
  // entity id -> demands, capability-unique per entity
  std::map<std::string, std::vector<Demand>> entities;
  std::set<std::string> capability_universe;
  // "mapkind:attribute" -> intersection of allowed id_set values
  std::map<std::string, std::vector<std::string>> restrictions;
};

struct DemandProfileResult {
  DemandProfile profile;
  std::vector<Finding> findings;
};

enum class ScopeClass { CORE, OPTIONAL, OUT };

inline const char* to_string(ScopeClass c) {
  switch (c) {
    case ScopeClass::CORE: return "CORE";
    case ScopeClass::OPTIONAL: return "OPTIONAL";
    case ScopeClass::OUT: return "OUT";
  }
  return "OUT";
}

struct ScopeDecision {
  ScopeClass klass = ScopeClass::OUT;
  DemandKind kind = DemandKind::structural;
  std::vector<std::string> provenance;  // demanding entity ids, sorted
  int max_score = 0;
};

struct ScopeDecisionSet {
  std::map<std::string, ScopeDecision> capabilities;
};

// Exact coverage threshold: a capability is CORE when demanded by at least
// num/den of all entities. Stored as an exact fraction so 1/3 is not 0.3333.
struct Fraction {
  long long num = 1;
  long long den = 1;

  static Fraction parse(const std::string& text);
};

inline Fraction Fraction::parse(const std::string& text) {
  const std::string t = trim(text);
  const auto fail = [&] {
    throw Error("E_SCHEMA", "'" + t + "' is not a fraction in [0,1]");
  };
  auto parse_int = [&](const std::string& s) -> long long {
    try {
      size_t pos = 0;
      const long long v = std::stoll(s, &pos);
      if (pos != s.size()) fail();
      return v;
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      fail();
    }
    return 0;
  };
  Fraction f;
  if (const auto slash = t.find('/'); slash != std::string::npos) {
    f.num = parse_int(t.substr(0, slash));
    f.den = parse_int(t.substr(slash + 1));
  } else if (const auto dot = t.find('.'); dot != std::string::npos) {
    const std::string frac = t.substr(dot + 1);
    if (frac.empty() || frac.size() > 9) fail();
    f.num = parse_int(t.substr(0, dot));
    long long scale = 1;
    for (size_t i = 0; i < frac.size(); ++i) scale *= 10;
    f.num = f.num * scale + parse_int(frac);
    f.den = scale;
  } else {
    f.num = parse_int(t);
    f.den = 1;
  }
  if (f.den <= 0 || f.num < 0 || f.num > f.den) fail();
  return f;
}

struct Constraint {
  struct RequiresCapability {
    std::string capability;
  };
  struct RestrictsEntities {
    MapKind map_kind = MapKind::project;
    std::string attribute;
    std::vector<std::string> allowed;  // sorted id set
  };

  std::string id;
  std::optional<Condition> condition;  // nullopt = always
  std::variant<RequiresCapability, RestrictsEntities> requirement;
};

struct ConflictRecord {
  std::vector<std::string> constraint_ids;  // [winner, loser]
  std::vector<std::string> entities;        // triggering entities, sorted
  std::string kept;
  std::string dropped;
  int winning_score = 0;
};

struct ConstraintResult {
  DemandProfile profile;
  std::vector<ConflictRecord> conflicts;
  std::vector<Finding> findings;
};

struct CoverageReport {
  std::map<std::string, std::vector<std::string>> covers;  // CORE cap -> process ids
  std::vector<std::string> gaps;
  std::vector<std::string> minimal_cover;
  bool approximate = false;
};

// ---------------------------------------------------------------------------

namespace detail {

inline ProjectContext entity_context(const CharacterizationMap& map,
                                     const std::string& entity_id) {
  ProjectContext ctx;
  for (const auto& e : map.entries)
    if (e.entity_id == entity_id)
      ctx[e.attribute] = {e.value, e.likelihood, e.damage};
  return ctx;
}

// Highest priority score among this entity's entries for the condition's
// attributes. The demand inherits the strongest driver, not the sum.
inline int trigger_score(const Condition& cond, const ProjectContext& ctx) {
  int score = 1;
  for (const auto& attr : condition_attributes(cond)) {
    const auto it = ctx.find(attr);
    if (it != ctx.end())
      score = std::max(score, it->second.likelihood * it->second.damage);
  }
  return score;
}

inline void merge_demand(std::vector<Demand>& demands, Demand d) {
  for (auto& existing : demands) {
    if (existing.capability != d.capability) continue;
    existing.score = std::max(existing.score, d.score);
    if (d.parameter && existing.parameter &&
        existing.parameter->name == d.parameter->name) {
      const double* a = std::get_if<double>(&existing.parameter->value);
      const double* b = std::get_if<double>(&d.parameter->value);
      if (a && b) {
        if (*b > *a) existing.parameter = d.parameter;
      } else if (existing.parameter->value != d.parameter->value) {
        throw Error("E_PARAM_TYPE",
                    "conflicting non-numeric values for parameter " +
                        existing.parameter->name);
      }
    } else if (d.parameter && !existing.parameter) {
      existing.parameter = d.parameter;
    }
    return;
  }
  demands.push_back(std::move(d));
}

}  // namespace detail

inline void validate_mapping(const CapabilityMapping& mapping) {
  std::map<std::string, DemandKind> kinds;
  for (const auto& row : mapping.rows) {
    if (row.kind == DemandKind::parametric && !row.parameter)
      throw Error("E_SCHEMA", "parametric mapping row for " + row.capability +
                                  " has no parameter");
    if (row.kind == DemandKind::structural && row.parameter)
      throw Error("E_SCHEMA", "structural mapping row for " + row.capability +
                                  " carries a parameter");
    auto [it, inserted] = kinds.emplace(row.capability, row.kind);
    if (!inserted && it->second != row.kind)
      throw Error("E_SCHEMA", "capability " + row.capability +
                                  " is both structural and parametric");
  }
}

// Derive per-entity capability demands from the product and project maps.
// A row only applies to entities of its own map kind; an applicable row
// whose condition references an attribute the entity never characterized
// yields an E_UNBOUND finding and processing continues.
inline DemandProfileResult demand_profile(
    const std::vector<CharacterizationMap>& maps,
    const CapabilityMapping& mapping) {
  validate_mapping(mapping);
  DemandProfileResult result;
  for (const auto& row : mapping.rows)
    result.profile.capability_universe.insert(row.capability);

  for (const auto& map : maps) {
    for (const auto& entity : map.entities) {
      auto& demands = result.profile.entities[entity.entity_id];
      const ProjectContext ctx = detail::entity_context(map, entity.entity_id);
      for (const auto& row : mapping.rows) {
        if (row.map_kind != map.kind) continue;
        bool holds = false;
        try {
          holds = eval_condition(row.condition, ctx);
        } catch (const Error& e) {
          if (e.code() != "E_UNBOUND") throw;
          result.findings.push_back(
              {"E_UNBOUND", entity.entity_id,
               std::string(e.what()).substr(e.code().size() + 2) +
                   " (capability " + row.capability + ")"});
          continue;
        }
        if (!holds) continue;
        detail::merge_demand(demands,
                             {row.capability, row.kind, row.parameter,
                              detail::trigger_score(row.condition, ctx)});
      }
      std::sort(demands.begin(), demands.end(),
                [](const Demand& a, const Demand& b) {
                  return a.capability < b.capability;
                });
    }
  }
  return result;
}

// Classify every capability of the universe:
//   OUT      demanded by no entity;
//   CORE     demanded by >= threshold of all entities and max score >= min_score;
//   OPTIONAL demanded by at least one entity but not CORE.
inline ScopeDecisionSet scope_capabilities(const DemandProfile& profile,
                                           Fraction threshold = {1, 1},
                                           int min_score = 4) {
  if (profile.entities.empty())
    throw Error("E_EMPTY_PROFILE", "demand profile contains no entities");
  const long long total = static_cast<long long>(profile.entities.size());

  ScopeDecisionSet scope;
  for (const auto& cap : profile.capability_universe)
    scope.capabilities[cap] = {};

  for (const auto& [entity_id, demands] : profile.entities) {
    for (const auto& d : demands) {
      auto& decision = scope.capabilities[d.capability];
      decision.kind = d.kind;
      decision.provenance.push_back(entity_id);
      decision.max_score = std::max(decision.max_score, d.score);
    }
  }

  for (auto& [cap, decision] : scope.capabilities) {
    std::sort(decision.provenance.begin(), decision.provenance.end());
    const long long count =
        static_cast<long long>(decision.provenance.size());
    if (count == 0) {
      decision.klass = ScopeClass::OUT;
    } else if (count * threshold.den >= threshold.num * total &&
               decision.max_score >= min_score) {
      decision.klass = ScopeClass::CORE;
    } else {
      decision.klass = ScopeClass::OPTIONAL;
    }
  }
  return scope;
}

namespace detail {

inline bool entity_offers(const CharacterizationMap& process_map,
                          const std::string& process_id,
                          const std::string& capability) {
  const CharacterizationEntry* e = find_entry(process_map, process_id, capability);
  if (!e) return false;
  const bool* b = std::get_if<bool>(&e->value);
  return b && *b;
}

}  // namespace detail

// Match CORE demands against the process map. The process map characterizes
// each process with boolean attributes named after the capabilities.
// minimal_cover is exact (exhaustive, smallest then lexicographic) up to 20
// processes and greedy beyond, flagged approximate.
inline CoverageReport match_processes(const ScopeDecisionSet& scope,
                                      const CharacterizationMap& process_map) {
  CoverageReport report;
  std::vector<std::string> processes;
  for (const auto& e : process_map.entities) processes.push_back(e.entity_id);
  std::sort(processes.begin(), processes.end());

  std::vector<std::string> coverable;
  for (const auto& [cap, decision] : scope.capabilities) {
    if (decision.klass != ScopeClass::CORE) continue;
    std::vector<std::string> covering;
    for (const auto& p : processes)
      if (detail::entity_offers(process_map, p, cap)) covering.push_back(p);
    if (covering.empty())
      report.gaps.push_back(cap);
    else
      coverable.push_back(cap);
    report.covers[cap] = std::move(covering);
  }

  if (coverable.empty()) return report;

  auto covers_all = [&](const std::vector<std::string>& chosen) {
    for (const auto& cap : coverable) {
      bool hit = false;
      for (const auto& p : chosen)
        if (detail::entity_offers(process_map, p, cap)) {
          hit = true;
          break;
        }
      if (!hit) return false;
    }
    return true;
  };

  const size_t n = processes.size();
  if (n <= 20) {
    // Smallest covering subset; combinations enumerated in lexicographic
    // order so the first hit is deterministic.
    for (size_t size = 1; size <= n; ++size) {
      std::vector<size_t> idx(size);
      for (size_t i = 0; i < size; ++i) idx[i] = i;
      while (true) {
        std::vector<std::string> chosen;
        for (size_t i : idx) chosen.push_back(processes[i]);
        if (covers_all(chosen)) {
          report.minimal_cover = chosen;
          return report;
        }
        // next combination
        size_t k = size;
        while (k > 0 && idx[k - 1] == n - size + k - 1) --k;
        if (k == 0) break;
        ++idx[k - 1];
        for (size_t i = k; i < size; ++i) idx[i] = idx[i - 1] + 1;
      }
    }
    return report;  // unreachable for coverable caps
  }

  report.approximate = true;
  std::set<std::string> uncovered(coverable.begin(), coverable.end());
  while (!uncovered.empty()) {
    std::string best;
    size_t best_count = 0;
    for (const auto& p : processes) {
      size_t count = 0;
      for (const auto& cap : uncovered)
        if (detail::entity_offers(process_map, p, cap)) ++count;
      if (count > best_count) {
        best = p;
        best_count = count;
      }
    }
    report.minimal_cover.push_back(best);
    for (auto it = uncovered.begin(); it != uncovered.end();)
      if (detail::entity_offers(process_map, best, *it))
        it = uncovered.erase(it);
      else
        ++it;
  }
  std::sort(report.minimal_cover.begin(), report.minimal_cover.end());
  return report;
}

// Apply interdependency constraints to a demand profile. requires_capability
// constraints add demands; restricts_entities constraints intersect the
// allowed id sets per (map kind, attribute). Disjoint restrictions are
// resolved in favor of the constraint whose triggering entries score higher;
// an exact tie has no sanctioned resolution and raises E_TIE. Pre-existing
// demands are never removed.
inline ConstraintResult check_constraints(
    const std::vector<CharacterizationMap>& maps, const DemandProfile& profile,
    const std::vector<Constraint>& constraints) {
  ConstraintResult result;
  result.profile = profile;

  struct Triggered {
    const Constraint* constraint;
    int score = 0;
    std::vector<std::string> entities;
  };
  std::vector<Triggered> triggered;

  for (const auto& c : constraints) {
    Triggered t{&c, 0, {}};
    for (const auto& map : maps) {
      for (const auto& entity : map.entities) {
        const ProjectContext ctx = detail::entity_context(map, entity.entity_id);
        bool holds = false;
        int score = 1;
        if (!c.condition) {
          holds = true;
        } else {
          const auto attrs = condition_attributes(*c.condition);
          const bool applicable = std::all_of(
              attrs.begin(), attrs.end(), [&](const std::string& a) {
                const AttributeDef* def = find_attribute(map.attributes, a);
                return def != nullptr;
              });
          if (!applicable) continue;
          try {
            holds = eval_condition(*c.condition, ctx);
          } catch (const Error& e) {
            if (e.code() != "E_UNBOUND") throw;
            result.findings.push_back(
                {"E_UNBOUND", entity.entity_id,
                 std::string(e.what()).substr(e.code().size() + 2) +
                     " (constraint " + c.id + ")"});
            continue;
          }
          score = detail::trigger_score(*c.condition, ctx);
        }
        if (!holds) continue;
        t.entities.push_back(entity.entity_id);
        t.score = std::max(t.score, score);

        if (const auto* req =
                std::get_if<Constraint::RequiresCapability>(&c.requirement)) {
          detail::merge_demand(
              result.profile.entities[entity.entity_id],
              {req->capability, DemandKind::structural, std::nullopt, score});
          result.profile.capability_universe.insert(req->capability);
        }
      }
    }
    std::sort(t.entities.begin(), t.entities.end());
    t.entities.erase(std::unique(t.entities.begin(), t.entities.end()),
                     t.entities.end());
    if (!t.entities.empty() ||
        (!c.condition &&
         std::holds_alternative<Constraint::RestrictsEntities>(c.requirement)))
      triggered.push_back(std::move(t));
  }

  for (auto& [entity, demands] : result.profile.entities)
    std::sort(demands.begin(), demands.end(),
              [](const Demand& a, const Demand& b) {
                return a.capability < b.capability;
              });

  // Fold restrictions per (map kind, attribute), strongest first.
  std::map<std::string, std::vector<Triggered*>> by_slot;
  for (auto& t : triggered) {
    if (const auto* r =
            std::get_if<Constraint::RestrictsEntities>(&t.constraint->requirement))
      by_slot[std::string(to_string(r->map_kind)) + ":" + r->attribute]
          .push_back(&t);
  }
  for (auto& [slot, list] : by_slot) {
    std::sort(list.begin(), list.end(), [](const Triggered* a, const Triggered* b) {
      if (a->score != b->score) return a->score > b->score;
      return a->constraint->id < b->constraint->id;
    });
    std::vector<std::string> allowed =
        std::get<Constraint::RestrictsEntities>(list.front()->constraint->requirement)
            .allowed;
    std::sort(allowed.begin(), allowed.end());
    const Triggered* owner = list.front();
    for (size_t i = 1; i < list.size(); ++i) {
      const Triggered* next = list[i];
      const auto& restriction =
          std::get<Constraint::RestrictsEntities>(next->constraint->requirement);
      std::vector<std::string> narrowed;
      for (const auto& v : restriction.allowed)
        if (std::binary_search(allowed.begin(), allowed.end(), v))
          narrowed.push_back(v);
      std::sort(narrowed.begin(), narrowed.end());
      if (!narrowed.empty()) {
        allowed = std::move(narrowed);
        continue;
      }
      if (next->score == owner->score)
        throw Error("E_TIE", "constraints " + owner->constraint->id + " and " +
                                 next->constraint->id + " restrict " + slot +
                                 " to disjoint sets with equal priority " +
                                 std::to_string(owner->score));
      ConflictRecord record;
      record.constraint_ids = {owner->constraint->id, next->constraint->id};
      std::set<std::string> entities(owner->entities.begin(), owner->entities.end());
      entities.insert(next->entities.begin(), next->entities.end());
      record.entities.assign(entities.begin(), entities.end());
      record.kept = owner->constraint->id;
      record.dropped = next->constraint->id;
      record.winning_score = owner->score;
      result.conflicts.push_back(std::move(record));
    }
    result.profile.restrictions[slot] = allowed;
  }

  return result;
}

}  // namespace procline
