#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "procline/error.hpp"

namespace procline {

enum class MapKind { product, project, process };

inline const char* to_string(MapKind k) {
  switch (k) {
    case MapKind::product: return "product";
    case MapKind::project: return "project";
    case MapKind::process: return "process";
  }
  return "product";
}

enum class ScaleKind { nominal, ordinal, boolean, id_set };

struct Scale {
  ScaleKind kind = ScaleKind::boolean;
  std::vector<std::string> values;  // nominal: allowed values, canonical lowercase
  int min = 0, max = 0;             // ordinal bounds, inclusive

  static Scale nominal(std::vector<std::string> allowed) {
    return {ScaleKind::nominal, std::move(allowed), 0, 0};
  }
  static Scale ordinal(int min, int max) {
    return {ScaleKind::ordinal, {}, min, max};
  }
  static Scale boolean() { return {ScaleKind::boolean, {}, 0, 0}; }
  static Scale id_set() { return {ScaleKind::id_set, {}, 0, 0}; }

  bool operator==(const Scale&) const = default;
};

struct AttributeDef {
  std::string name;
  Scale scale;
  MapKind applies_to = MapKind::product;

  bool operator==(const AttributeDef&) const = default;
};

// Canonical attribute value. Nominal values are stored lowercase, id_set
// values sorted and deduplicated.
using AttrValue = std::variant<bool, int, std::string, std::vector<std::string>>;

enum class EntityKind { existing, future, potential };

inline const char* to_string(EntityKind k) {
  switch (k) {
    case EntityKind::existing: return "existing";
    case EntityKind::future: return "future";
    case EntityKind::potential: return "potential";
  }
  return "existing";
}

struct EntityRecord {
  std::string entity_id;
  EntityKind entity_kind = EntityKind::existing;
  MapKind map_kind = MapKind::product;

  bool operator==(const EntityRecord&) const = default;
};

struct CharacterizationEntry {
  std::string entity_id;
  std::string attribute;
  AttrValue value;
  int likelihood = 2;
  int damage = 2;

  bool operator==(const CharacterizationEntry&) const = default;
};

struct CharacterizationMap {
  MapKind kind = MapKind::product;
  std::vector<AttributeDef> attributes;  // the defs applying to this map kind
  std::vector<EntityRecord> entities;
  std::vector<CharacterizationEntry> entries;

  bool operator==(const CharacterizationMap&) const = default;
};

inline std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

inline std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline const AttributeDef* find_attribute(const std::vector<AttributeDef>& defs,
                                          const std::string& name) {
  for (const auto& d : defs)
    if (d.name == name) return &d;
  return nullptr;
}

inline void validate_defs(const std::vector<AttributeDef>& defs) {
  std::set<std::string> names;
  for (const auto& d : defs) {
    if (!names.insert(d.name).second)
      throw Error("E_SCHEMA", "duplicate attribute definition " + d.name);
    if (d.scale.kind == ScaleKind::ordinal && d.scale.min >= d.scale.max)
      throw Error("E_SCHEMA", "ordinal attribute " + d.name +
                                  " needs min < max");
    if (d.scale.kind == ScaleKind::nominal) {
      if (d.scale.values.empty())
        throw Error("E_SCHEMA", "nominal attribute " + d.name +
                                    " has an empty value list");
      std::set<std::string> seen;
      for (const auto& v : d.scale.values)
        if (!seen.insert(to_lower(v)).second)
          throw Error("E_SCHEMA", "nominal attribute " + d.name +
                                      " repeats value " + v);
    }
  }
}

// Parse a raw cell into the canonical value for the attribute's scale.
inline AttrValue parse_value(const AttributeDef& def, const std::string& raw) {
  const std::string text = trim(raw);
  switch (def.scale.kind) {
    case ScaleKind::nominal: {
      const std::string canon = to_lower(text);
      for (const auto& allowed : def.scale.values)
        if (to_lower(allowed) == canon) return canon;
      throw Error("E_SCALE", "value '" + text + "' is not in the scale of " +
                                 def.name);
    }
    case ScaleKind::boolean: {
      const std::string canon = to_lower(text);
      if (canon == "yes" || canon == "true") return true;
      if (canon == "no" || canon == "false") return false;
      throw Error("E_SCALE", "value '" + text + "' is not a boolean for " +
                                 def.name);
    }
    case ScaleKind::ordinal: {
      int v = 0;
      try {
        size_t pos = 0;
        v = std::stoi(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
      } catch (const std::exception&) {
        throw Error("E_SCALE", "value '" + text + "' is not an integer for " +
                                   def.name);
      }
      if (v < def.scale.min || v > def.scale.max)
        throw Error("E_SCALE", "value " + text + " outside ordinal range " +
                                   std::to_string(def.scale.min) + ".." +
                                   std::to_string(def.scale.max) + " of " +
                                   def.name);
      return v;
    }
    case ScaleKind::id_set: {
      std::vector<std::string> items;
      std::string item;
      std::istringstream in(text);
      while (std::getline(in, item, ';')) {
        item = trim(item);
        if (!item.empty()) items.push_back(item);
      }
      if (items.empty())
        throw Error("E_SCALE", "empty id_set value for " + def.name);
      std::sort(items.begin(), items.end());
      items.erase(std::unique(items.begin(), items.end()), items.end());
      return items;
    }
  }
  throw Error("E_SCALE", "unknown scale for " + def.name);
}

inline std::string value_to_text(const AttrValue& v) {
  if (const bool* b = std::get_if<bool>(&v)) return *b ? "yes" : "no";
  if (const int* i = std::get_if<int>(&v)) return std::to_string(*i);
  if (const std::string* s = std::get_if<std::string>(&v)) return *s;
  const auto& items = std::get<std::vector<std::string>>(v);
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out += ';';
    out += items[i];
  }
  return out;
}

namespace detail {

inline std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

inline int parse_priority(const std::string& raw, const char* what, int line_no,
                          bool* defaulted) {
  const std::string text = trim(raw);
  if (text.empty()) {
    *defaulted = true;
    return 2;
  }
  int v = 0;
  try {
    size_t pos = 0;
    v = std::stoi(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw Error("E_CSV", "line " + std::to_string(line_no) + ": " + what +
                             " '" + text + "' is not an integer");
  }
  if (v < 1 || v > 3)
    throw Error("E_SCALE", "line " + std::to_string(line_no) + ": " + what +
                               " " + text + " outside 1..3");
  return v;
}

}  // namespace detail

inline constexpr const char* kMapCsvHeader =
    "entity,kind,attribute,value,likelihood,damage";

// Long-format CSV loader. One row per (entity, attribute); the header line is
// mandatory for non-empty input. The map kind is taken from the declared
// attributes actually referenced, so a file must not mix attributes of
// different map kinds. Rows with empty likelihood/damage default to 2,2 and
// produce a W_DEFAULT_PRIORITY warning.
inline CharacterizationMap load_map(std::string_view csv_text,
                                    const std::vector<AttributeDef>& defs,
                                    std::optional<MapKind> expected_kind = {},
                                    std::vector<Finding>* warnings = nullptr) {
  validate_defs(defs);
  CharacterizationMap map;
  map.kind = expected_kind.value_or(MapKind::product);

  if (trim(csv_text).empty()) {
    if (expected_kind)
      for (const auto& d : defs)
        if (d.applies_to == *expected_kind) map.attributes.push_back(d);
    return map;
  }

  std::istringstream in{std::string(csv_text)};
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  bool kind_known = expected_kind.has_value();
  std::map<std::string, EntityKind> entity_kinds;
  std::set<std::pair<std::string, std::string>> seen_pairs;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (!header_seen) {
      if (trim(line) != kMapCsvHeader)
        throw Error("E_CSV", "line 1: expected header '" +
                                 std::string(kMapCsvHeader) + "'");
      header_seen = true;
      continue;
    }

    auto fields = detail::split_csv_row(line);
    if (fields.size() != 6)
      throw Error("E_CSV", "line " + std::to_string(line_no) + ": expected 6 "
                           "fields, got " + std::to_string(fields.size()));

    const std::string entity = trim(fields[0]);
    const std::string kind_text = to_lower(trim(fields[1]));
    const std::string attr_name = trim(fields[2]);
    if (entity.empty())
      throw Error("E_CSV", "line " + std::to_string(line_no) + ": empty entity");

    EntityKind ekind;
    if (kind_text == "existing") ekind = EntityKind::existing;
    else if (kind_text == "future") ekind = EntityKind::future;
    else if (kind_text == "potential") ekind = EntityKind::potential;
    else
      throw Error("E_CSV", "line " + std::to_string(line_no) +
                               ": entity kind '" + kind_text +
                               "' is not existing/future/potential");

    const AttributeDef* def = find_attribute(defs, attr_name);
    if (!def)
      throw Error("E_UNDECLARED", "line " + std::to_string(line_no) +
                                      ": attribute " + attr_name +
                                      " is not declared");
    if (!kind_known) {
      map.kind = def->applies_to;
      kind_known = true;
    }
    if (def->applies_to != map.kind)
      throw Error("E_UNDECLARED",
                  "line " + std::to_string(line_no) + ": attribute " +
                      attr_name + " applies to " + to_string(def->applies_to) +
                      " entities but this is a " + to_string(map.kind) +
                      " map");

    auto [it, inserted] = entity_kinds.emplace(entity, ekind);
    if (!inserted && it->second != ekind)
      throw Error("E_CSV", "line " + std::to_string(line_no) + ": entity " +
                               entity + " re-declared with a different kind");

    if (!seen_pairs.insert({entity, attr_name}).second)
      throw Error("E_DUP", "line " + std::to_string(line_no) + ": duplicate "
                           "entry for " + entity + "/" + attr_name);

    CharacterizationEntry entry;
    entry.entity_id = entity;
    entry.attribute = attr_name;
    try {
      entry.value = parse_value(*def, fields[3]);
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " +
                                std::string(e.what()).substr(
                                    e.code().size() + 2));
    }
    bool defaulted = false;
    entry.likelihood =
        detail::parse_priority(fields[4], "likelihood", line_no, &defaulted);
    entry.damage =
        detail::parse_priority(fields[5], "damage", line_no, &defaulted);
    if (defaulted && warnings)
      warnings->push_back({"W_DEFAULT_PRIORITY", entity,
                           "missing likelihood/damage for " + attr_name +
                               ", defaulting to 2,2"});
    map.entries.push_back(std::move(entry));
  }

  for (const auto& [id, ekind] : entity_kinds)
    map.entities.push_back({id, ekind, map.kind});
  for (const auto& d : defs)
    if (d.applies_to == map.kind) map.attributes.push_back(d);
  return map;
}

// Canonical CSV text; rows sorted by (entity, attribute).
inline std::string print_map(const CharacterizationMap& map) {
  std::vector<const CharacterizationEntry*> rows;
  for (const auto& e : map.entries) rows.push_back(&e);
  std::sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) {
    return std::tie(a->entity_id, a->attribute) <
           std::tie(b->entity_id, b->attribute);
  });
  std::map<std::string, EntityKind> kinds;
  for (const auto& e : map.entities) kinds[e.entity_id] = e.entity_kind;

  std::string out = kMapCsvHeader;
  out += '\n';
  for (const auto* e : rows) {
    out += e->entity_id;
    out += ',';
    out += to_string(kinds.count(e->entity_id) ? kinds[e->entity_id]
                                               : EntityKind::existing);
    out += ',';
    out += e->attribute;
    out += ',';
    out += value_to_text(e->value);
    out += ',';
    out += std::to_string(e->likelihood);
    out += ',';
    out += std::to_string(e->damage);
    out += '\n';
  }
  return out;
}

// Risk-style priority: likelihood times potential damage, both on 1..3.
inline int priority_score(const CharacterizationEntry& entry) {
  return entry.likelihood * entry.damage;
}

inline std::optional<AttrValue> lookup(const CharacterizationMap& map,
                                       const std::string& entity_id,
                                       const std::string& attribute) {
  if (!find_attribute(map.attributes, attribute))
    throw Error("E_UNDECLARED", "attribute " + attribute +
                                    " is not declared for this map");
  for (const auto& e : map.entries)
    if (e.entity_id == entity_id && e.attribute == attribute) return e.value;
  return std::nullopt;
}

inline const CharacterizationEntry* find_entry(const CharacterizationMap& map,
                                               const std::string& entity_id,
                                               const std::string& attribute) {
  for (const auto& e : map.entries)
    if (e.entity_id == entity_id && e.attribute == attribute) return &e;
  return nullptr;
}

}  // namespace procline
