#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "procline/charmap.hpp"
#include "procline/error.hpp"
#include "procline/instantiate.hpp"
#include "procline/line.hpp"
#include "procline/metrics.hpp"
#include "procline/model.hpp"
#include "procline/rules.hpp"
#include "procline/scoping.hpp"

namespace procline {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Small helpers
// ---------------------------------------------------------------------------

namespace io {

inline void check_keys(const json& obj, const std::set<std::string>& allowed,
                       const std::string& where) {
  if (!obj.is_object())
    throw Error("E_SCHEMA", where + " must be a JSON object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key))
      throw Error("E_SCHEMA", where + ": unknown key '" + key + "'");
}

inline const json& require(const json& obj, const char* key,
                           const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end())
    throw Error("E_SCHEMA", where + ": missing key '" + key + "'");
  return *it;
}

inline const json& require_array(const json& obj, const char* key,
                                 const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_array())
    throw Error("E_SCHEMA", where + ": '" + key + "' must be an array");
  return v;
}

inline std::string get_string(const json& obj, const char* key,
                              const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_string())
    throw Error("E_SCHEMA", where + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

inline std::string get_string_or(const json& obj, const char* key,
                                 const std::string& fallback,
                                 const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_string())
    throw Error("E_SCHEMA", where + ": '" + key + "' must be a string");
  return it->get<std::string>();
}

inline bool get_bool_or(const json& obj, const char* key, bool fallback,
                        const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean())
    throw Error("E_SCHEMA", where + ": '" + key + "' must be a boolean");
  return it->get<bool>();
}

inline std::vector<std::string> get_string_list(const json& v,
                                                const std::string& where) {
  if (!v.is_array())
    throw Error("E_SCHEMA", where + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string())
      throw Error("E_SCHEMA", where + " must contain only strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

inline ParamValue json_to_param(const json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return v.get<std::string>();
  throw Error("E_SCHEMA", where + ": parameter values must be numbers or strings");
}

inline json param_to_json(const ParamValue& v) {
  if (const double* num = std::get_if<double>(&v)) {
    if (*num >= -9.0e18 && *num <= 9.0e18 &&
        *num == static_cast<double>(static_cast<long long>(*num)))
      return static_cast<long long>(*num);
    return *num;
  }
  return std::get<std::string>(v);
}

inline json params_to_json(const ParamMap& params) {
  json obj = json::object();
  for (const auto& [name, value] : params) obj[name] = param_to_json(value);
  return obj;
}

inline ParamMap params_from_json(const json& obj, const std::string& where) {
  if (!obj.is_object())
    throw Error("E_SCHEMA", where + " must be an object");
  ParamMap out;
  for (const auto& [name, value] : obj.items())
    out[name] = json_to_param(value, where + "." + name);
  return out;
}

inline json parse_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error("E_SCHEMA", what + ": invalid JSON (" + e.what() + ")");
  }
}

}  // namespace io

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("E_IO", "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("E_IO", "cannot write " + path);
  out << content;
  if (!out) throw Error("E_IO", "short write to " + path);
}

// ---------------------------------------------------------------------------
// Attribute definitions (the sidecar file)
// ---------------------------------------------------------------------------

inline AttributeDef attribute_from_json(const json& j) {
  const std::string where = "attribute";
  io::check_keys(j, {"name", "scale", "applies_to", "values", "min", "max"}, where);
  AttributeDef def;
  def.name = io::get_string(j, "name", where);
  const std::string scale = io::get_string(j, "scale", where);
  const std::string applies = io::get_string(j, "applies_to", where);
  if (applies == "product") def.applies_to = MapKind::product;
  else if (applies == "project") def.applies_to = MapKind::project;
  else if (applies == "process") def.applies_to = MapKind::process;
  else
    throw Error("E_SCHEMA", "attribute " + def.name +
                                ": applies_to must be product/project/process");
  if (scale == "nominal") {
    def.scale = Scale::nominal(
        io::get_string_list(io::require(j, "values", where), def.name + ".values"));
    for (auto& v : def.scale.values) v = to_lower(trim(v));
  } else if (scale == "ordinal") {
    const json& min = io::require(j, "min", where);
    const json& max = io::require(j, "max", where);
    if (!min.is_number_integer() || !max.is_number_integer())
      throw Error("E_SCHEMA", "attribute " + def.name + ": min/max must be integers");
    def.scale = Scale::ordinal(min.get<int>(), max.get<int>());
  } else if (scale == "boolean") {
    def.scale = Scale::boolean();
  } else if (scale == "id_set") {
    def.scale = Scale::id_set();
  } else {
    throw Error("E_SCHEMA", "attribute " + def.name +
                                ": scale must be nominal/ordinal/boolean/id_set");
  }
  return def;
}

inline json attribute_to_json(const AttributeDef& def) {
  json j;
  j["name"] = def.name;
  j["applies_to"] = to_string(def.applies_to);
  switch (def.scale.kind) {
    case ScaleKind::nominal:
      j["scale"] = "nominal";
      j["values"] = def.scale.values;
      break;
    case ScaleKind::ordinal:
      j["scale"] = "ordinal";
      j["min"] = def.scale.min;
      j["max"] = def.scale.max;
      break;
    case ScaleKind::boolean:
      j["scale"] = "boolean";
      break;
    case ScaleKind::id_set:
      j["scale"] = "id_set";
      break;
  }
  return j;
}

inline std::vector<AttributeDef> parse_defs(const std::string& text) {
  const json j = io::parse_text(text, "attribute definitions");
  if (!j.is_array())
    throw Error("E_SCHEMA", "attribute definitions must be a JSON array");
  std::vector<AttributeDef> defs;
  for (const auto& item : j) defs.push_back(attribute_from_json(item));
  validate_defs(defs);
  return defs;
}

inline std::string print_defs(const std::vector<AttributeDef>& defs) {
  json j = json::array();
  for (const auto& d : defs) j.push_back(attribute_to_json(d));
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Model / line / instance documents (one schema; extras mark lines and
// instances)
// ---------------------------------------------------------------------------

struct InstanceInfo {
  std::vector<std::string> included_vps;
  std::vector<std::string> excluded_vps;
  ParamMap parameters;
  std::map<std::string, std::vector<std::string>> provenance;
};

struct ModelDocument {
  ProcessModel model;
  std::vector<VariationPoint> variation_points;
  std::vector<AttributeDef> attributes;
  std::string ruleset_text;
  ParamMap parametric_defaults;
  std::optional<InstanceInfo> instance;
};

inline ModelDocument parse_model_document(const std::string& text) {
  const json j = io::parse_text(text, "model");
  io::check_keys(j,
                 {"activities", "work_products", "product_flow", "control_flow",
                  "views", "variation_points", "attributes", "ruleset",
                  "parametric_defaults", "included_vps", "excluded_vps",
                  "parameters", "provenance"},
                 "model");
  ModelDocument doc;

  for (const auto& item : io::require_array(j, "activities", "model")) {
    io::check_keys(item, {"id", "name", "description", "iterative"}, "activity");
    Activity a;
    a.id = io::get_string(item, "id", "activity");
    a.name = io::get_string_or(item, "name", a.id, "activity");
    a.description = io::get_string_or(item, "description", "", "activity");
    a.iterative = io::get_bool_or(item, "iterative", false, "activity");
    doc.model.activities.push_back(std::move(a));
  }
  for (const auto& item : io::require_array(j, "work_products", "model")) {
    io::check_keys(item, {"id", "name", "description", "standalone"},
                   "work_product");
    WorkProduct w;
    w.id = io::get_string(item, "id", "work_product");
    w.name = io::get_string_or(item, "name", w.id, "work_product");
    w.description = io::get_string_or(item, "description", "", "work_product");
    w.standalone = io::get_bool_or(item, "standalone", false, "work_product");
    doc.model.work_products.push_back(std::move(w));
  }
  for (const auto& item : io::require_array(j, "product_flow", "model")) {
    io::check_keys(item, {"activity", "work_product", "direction"},
                   "product_flow edge");
    ProductFlowEdge e;
    e.activity = io::get_string(item, "activity", "product_flow edge");
    e.work_product = io::get_string(item, "work_product", "product_flow edge");
    const std::string dir = io::get_string(item, "direction", "product_flow edge");
    if (dir == "produces") e.direction = FlowDirection::produces;
    else if (dir == "consumes") e.direction = FlowDirection::consumes;
    else if (dir == "modifies") e.direction = FlowDirection::modifies;
    else
      throw Error("E_SCHEMA",
                  "product_flow edge: direction must be produces/consumes/modifies");
    doc.model.product_flow.push_back(std::move(e));
  }
  for (const auto& item : io::require_array(j, "control_flow", "model")) {
    io::check_keys(item, {"from", "to"}, "control_flow edge");
    doc.model.control_flow.push_back({io::get_string(item, "from", "control_flow edge"),
                                      io::get_string(item, "to", "control_flow edge")});
  }
  for (const auto& item : io::require_array(j, "views", "model")) {
    io::check_keys(item, {"id", "kind", "members"}, "view");
    View v;
    v.id = io::get_string(item, "id", "view");
    const std::string kind = io::get_string(item, "kind", "view");
    if (kind == "product_flow") v.kind = ViewKind::product_flow;
    else if (kind == "control_flow") v.kind = ViewKind::control_flow;
    else
      throw Error("E_SCHEMA", "view " + v.id +
                                  ": kind must be product_flow/control_flow");
    v.members = io::get_string_list(io::require(item, "members", "view"),
                                    "view " + v.id + " members");
    doc.model.views.push_back(std::move(v));
  }
  for (const auto& item : io::require_array(j, "variation_points", "model")) {
    io::check_keys(item, {"id", "capability", "elements", "rules"},
                   "variation_point");
    VariationPoint vp;
    vp.id = io::get_string(item, "id", "variation_point");
    vp.capability = io::get_string(item, "capability", "variation_point");
    const auto elements = io::get_string_list(
        io::require(item, "elements", "variation_point"),
        "variation_point " + vp.id + " elements");
    vp.elements.insert(elements.begin(), elements.end());
    vp.rules = io::get_string_list(io::require(item, "rules", "variation_point"),
                                   "variation_point " + vp.id + " rules");
    doc.variation_points.push_back(std::move(vp));
  }

  if (const auto it = j.find("attributes"); it != j.end()) {
    for (const auto& item : *it)
      doc.attributes.push_back(attribute_from_json(item));
    validate_defs(doc.attributes);
  }
  if (const auto it = j.find("ruleset"); it != j.end()) {
    if (!it->is_string())
      throw Error("E_SCHEMA", "model: 'ruleset' must be a string");
    doc.ruleset_text = it->get<std::string>();
  }
  if (const auto it = j.find("parametric_defaults"); it != j.end())
    doc.parametric_defaults = io::params_from_json(*it, "parametric_defaults");

  const bool has_instance_keys = j.contains("included_vps") ||
                                 j.contains("excluded_vps") ||
                                 j.contains("parameters") || j.contains("provenance");
  if (has_instance_keys) {
    InstanceInfo info;
    if (const auto it = j.find("included_vps"); it != j.end())
      info.included_vps = io::get_string_list(*it, "included_vps");
    if (const auto it = j.find("excluded_vps"); it != j.end())
      info.excluded_vps = io::get_string_list(*it, "excluded_vps");
    if (const auto it = j.find("parameters"); it != j.end())
      info.parameters = io::params_from_json(*it, "parameters");
    if (const auto it = j.find("provenance"); it != j.end()) {
      if (!it->is_object())
        throw Error("E_SCHEMA", "model: 'provenance' must be an object");
      for (const auto& [vp, fired] : it->items())
        info.provenance[vp] = io::get_string_list(fired, "provenance." + vp);
    }
    doc.instance = std::move(info);
  }
  return doc;
}

inline json model_document_to_json(const ModelDocument& doc) {
  json j;

  auto activities = doc.model.activities;
  std::sort(activities.begin(), activities.end(),
            [](const Activity& a, const Activity& b) { return a.id < b.id; });
  j["activities"] = json::array();
  for (const auto& a : activities) {
    json item;
    item["id"] = a.id;
    item["name"] = a.name;
    if (!a.description.empty()) item["description"] = a.description;
    if (a.iterative) item["iterative"] = true;
    j["activities"].push_back(std::move(item));
  }

  auto products = doc.model.work_products;
  std::sort(products.begin(), products.end(),
            [](const WorkProduct& a, const WorkProduct& b) { return a.id < b.id; });
  j["work_products"] = json::array();
  for (const auto& w : products) {
    json item;
    item["id"] = w.id;
    item["name"] = w.name;
    if (!w.description.empty()) item["description"] = w.description;
    if (w.standalone) item["standalone"] = true;
    j["work_products"].push_back(std::move(item));
  }

  auto pf = doc.model.product_flow;
  std::sort(pf.begin(), pf.end(),
            [](const ProductFlowEdge& a, const ProductFlowEdge& b) {
              return edge_key(a) < edge_key(b);
            });
  j["product_flow"] = json::array();
  for (const auto& e : pf)
    j["product_flow"].push_back({{"activity", e.activity},
                                 {"work_product", e.work_product},
                                 {"direction", to_string(e.direction)}});

  auto cf = doc.model.control_flow;
  std::sort(cf.begin(), cf.end(),
            [](const ControlFlowEdge& a, const ControlFlowEdge& b) {
              return edge_key(a) < edge_key(b);
            });
  j["control_flow"] = json::array();
  for (const auto& e : cf)
    j["control_flow"].push_back({{"from", e.from}, {"to", e.to}});

  auto views = doc.model.views;
  std::sort(views.begin(), views.end(),
            [](const View& a, const View& b) { return a.id < b.id; });
  j["views"] = json::array();
  for (const auto& v : views) {
    auto members = v.members;
    std::sort(members.begin(), members.end());
    j["views"].push_back(
        {{"id", v.id}, {"kind", to_string(v.kind)}, {"members", members}});
  }

  auto vps = doc.variation_points;
  std::sort(vps.begin(), vps.end(),
            [](const VariationPoint& a, const VariationPoint& b) {
              return a.id < b.id;
            });
  j["variation_points"] = json::array();
  for (const auto& vp : vps)
    j["variation_points"].push_back(
        {{"id", vp.id},
         {"capability", vp.capability},
         {"elements", std::vector<std::string>(vp.elements.begin(),
                                               vp.elements.end())},
         {"rules", vp.rules}});

  if (!doc.attributes.empty()) {
    j["attributes"] = json::array();
    auto defs = doc.attributes;
    std::sort(defs.begin(), defs.end(),
              [](const AttributeDef& a, const AttributeDef& b) {
                return a.name < b.name;
              });
    for (const auto& d : defs) j["attributes"].push_back(attribute_to_json(d));
  }
  if (!doc.ruleset_text.empty()) j["ruleset"] = doc.ruleset_text;
  if (!doc.parametric_defaults.empty())
    j["parametric_defaults"] = io::params_to_json(doc.parametric_defaults);

  if (doc.instance) {
    j["included_vps"] = doc.instance->included_vps;
    j["excluded_vps"] = doc.instance->excluded_vps;
    j["parameters"] = io::params_to_json(doc.instance->parameters);
    json prov = json::object();
    for (const auto& [vp, fired] : doc.instance->provenance) prov[vp] = fired;
    j["provenance"] = std::move(prov);
  }
  return j;
}

inline std::string print_model_document(const ModelDocument& doc) {
  return model_document_to_json(doc).dump(2) + "\n";
}

// Turn a parsed document into a ProcessLine (parses the embedded ruleset
// against the embedded attribute declarations).
inline ProcessLine to_line(const ModelDocument& doc) {
  ProcessLine line;
  line.model = doc.model;
  line.variation_points = doc.variation_points;
  line.attributes = doc.attributes;
  line.parametric_defaults = doc.parametric_defaults;
  if (!doc.ruleset_text.empty())
    line.ruleset = parse_rules(doc.ruleset_text, doc.attributes);
  return line;
}

inline ModelDocument from_line(const ProcessLine& line) {
  ModelDocument doc;
  doc.model = line.model;
  doc.variation_points = line.variation_points;
  doc.attributes = line.attributes;
  doc.ruleset_text = print_rules(line.ruleset);
  doc.parametric_defaults = line.parametric_defaults;
  return doc;
}

inline ModelDocument from_instance(const InstantiatedModel& inst) {
  ModelDocument doc;
  doc.model = inst.model;
  InstanceInfo info;
  info.included_vps = inst.included_vps;
  info.excluded_vps = inst.excluded_vps;
  info.parameters = inst.parameters;
  info.provenance = inst.provenance;
  doc.instance = std::move(info);
  return doc;
}

inline InstantiatedModel to_instance(const ModelDocument& doc) {
  InstantiatedModel inst;
  inst.model = doc.model;
  if (doc.instance) {
    inst.included_vps = doc.instance->included_vps;
    inst.excluded_vps = doc.instance->excluded_vps;
    inst.parameters = doc.instance->parameters;
    inst.provenance = doc.instance->provenance;
  }
  return inst;
}

// ---------------------------------------------------------------------------
// Project context files: {"attr": value} or {"attr": {"value": v,
// "likelihood": 1..3, "damage": 1..3}}
// ---------------------------------------------------------------------------

inline ProjectContext parse_context(const std::string& text,
                                    const std::vector<AttributeDef>& defs) {
  const json j = io::parse_text(text, "context");
  if (!j.is_object())
    throw Error("E_SCHEMA", "context must be a JSON object");
  ProjectContext ctx;
  for (const auto& [attr, raw] : j.items()) {
    const AttributeDef* def = find_attribute(defs, attr);
    if (!def)
      throw Error("E_UNDECLARED", "context attribute " + attr +
                                      " is not declared");
    ContextBinding binding;
    const json* value = &raw;
    if (raw.is_object()) {
      io::check_keys(raw, {"value", "likelihood", "damage"}, "context." + attr);
      value = &io::require(raw, "value", "context." + attr);
      for (const char* key : {"likelihood", "damage"}) {
        if (const auto it = raw.find(key); it != raw.end()) {
          if (!it->is_number_integer() || it->get<int>() < 1 || it->get<int>() > 3)
            throw Error("E_SCHEMA", "context." + attr + ": " + key +
                                        " must be an integer in 1..3");
          (std::string(key) == "likelihood" ? binding.likelihood
                                            : binding.damage) = it->get<int>();
        }
      }
    }
    std::string text_value;
    if (value->is_string()) text_value = value->get<std::string>();
    else if (value->is_boolean()) text_value = value->get<bool>() ? "yes" : "no";
    else if (value->is_number_integer())
      text_value = std::to_string(value->get<long long>());
    else
      throw Error("E_SCHEMA", "context." + attr + ": unsupported value type");
    binding.value = parse_value(*def, text_value);
    ctx[attr] = std::move(binding);
  }
  return ctx;
}

// ---------------------------------------------------------------------------
// Capability mapping files
// ---------------------------------------------------------------------------

inline MapKind condition_map_kind(const Condition& cond,
                                  const std::vector<AttributeDef>& defs,
                                  const std::string& where) {
  std::optional<MapKind> kind;
  for (const auto& attr : condition_attributes(cond)) {
    const AttributeDef* def = find_attribute(defs, attr);
    if (!def)
      throw Error("E_UNDECLARED", where + ": attribute " + attr +
                                      " is not declared");
    if (kind && *kind != def->applies_to)
      throw Error("E_SCHEMA", where + ": condition mixes attributes of "
                              "different map kinds");
    kind = def->applies_to;
  }
  if (!kind) throw Error("E_SCHEMA", where + ": empty condition");
  return *kind;
}

inline CapabilityMapping parse_mapping(const std::string& text,
                                       const std::vector<AttributeDef>& defs) {
  const json j = io::parse_text(text, "mapping");
  if (!j.is_array())
    throw Error("E_SCHEMA", "mapping must be a JSON array");
  CapabilityMapping mapping;
  for (const auto& item : j) {
    io::check_keys(item, {"condition", "capability", "kind", "parameter"},
                   "mapping row");
    MappingRow row;
    row.capability = io::get_string(item, "capability", "mapping row");
    const std::string where = "mapping row for " + row.capability;
    row.condition =
        parse_condition(io::get_string(item, "condition", where), defs);
    row.map_kind = condition_map_kind(row.condition, defs, where);
    const std::string kind = io::get_string(item, "kind", where);
    if (kind == "structural") row.kind = DemandKind::structural;
    else if (kind == "parametric") row.kind = DemandKind::parametric;
    else
      throw Error("E_SCHEMA", where + ": kind must be structural/parametric");
    if (const auto it = item.find("parameter"); it != item.end()) {
      io::check_keys(*it, {"name", "value"}, where + ".parameter");
      row.parameter = Parameter{
          io::get_string(*it, "name", where + ".parameter"),
          io::json_to_param(io::require(*it, "value", where + ".parameter"),
                            where + ".parameter.value")};
    }
    mapping.rows.push_back(std::move(row));
  }
  validate_mapping(mapping);
  return mapping;
}

// ---------------------------------------------------------------------------
// Constraint files
// ---------------------------------------------------------------------------

inline std::vector<Constraint> parse_constraints(
    const std::string& text, const std::vector<AttributeDef>& defs) {
  const json j = io::parse_text(text, "constraints");
  if (!j.is_array())
    throw Error("E_SCHEMA", "constraints must be a JSON array");
  std::vector<Constraint> out;
  std::set<std::string> ids;
  for (const auto& item : j) {
    io::check_keys(item,
                   {"id", "condition", "requires_capability", "restricts_entities"},
                   "constraint");
    Constraint c;
    c.id = io::get_string(item, "id", "constraint");
    if (!ids.insert(c.id).second)
      throw Error("E_SCHEMA", "duplicate constraint id " + c.id);
    const std::string where = "constraint " + c.id;
    const std::string cond_text = io::get_string_or(item, "condition", "", where);
    if (!cond_text.empty() && to_lower(trim(cond_text)) != "always")
      c.condition = parse_condition(cond_text, defs);
    const bool has_requires = item.contains("requires_capability");
    const bool has_restricts = item.contains("restricts_entities");
    if (has_requires == has_restricts)
      throw Error("E_SCHEMA", where + ": exactly one of requires_capability/"
                              "restricts_entities is required");
    if (has_requires) {
      c.requirement = Constraint::RequiresCapability{
          io::get_string(item, "requires_capability", where)};
    } else {
      const json& r = item["restricts_entities"];
      io::check_keys(r, {"map_kind", "attribute", "allowed"}, where);
      Constraint::RestrictsEntities restricts;
      const std::string kind = io::get_string(r, "map_kind", where);
      if (kind == "product") restricts.map_kind = MapKind::product;
      else if (kind == "project") restricts.map_kind = MapKind::project;
      else if (kind == "process") restricts.map_kind = MapKind::process;
      else
        throw Error("E_SCHEMA", where + ": map_kind must be product/project/process");
      restricts.attribute = io::get_string(r, "attribute", where);
      const AttributeDef* def = find_attribute(defs, restricts.attribute);
      if (!def)
        throw Error("E_UNDECLARED", where + ": attribute " +
                                        restricts.attribute + " is not declared");
      if (def->scale.kind != ScaleKind::id_set)
        throw Error("E_SCHEMA", where + ": restricted attribute must have "
                                "scale id_set");
      restricts.allowed = io::get_string_list(io::require(r, "allowed", where),
                                              where + ".allowed");
      std::sort(restricts.allowed.begin(), restricts.allowed.end());
      c.requirement = std::move(restricts);
    }
    out.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Binding files for build-line
// ---------------------------------------------------------------------------

struct BindingFile {
  std::vector<Binding> bindings;
  ParamMap parametric_defaults;
};

inline BindingFile parse_bindings(const std::string& text) {
  const json j = io::parse_text(text, "binding");
  io::check_keys(j, {"bindings", "parametric_defaults"}, "binding file");
  BindingFile out;
  for (const auto& item : io::require_array(j, "bindings", "binding file")) {
    io::check_keys(item, {"capability", "vp_id", "elements", "rules"}, "binding");
    Binding b;
    b.capability = io::get_string(item, "capability", "binding");
    b.vp_id = io::get_string_or(item, "vp_id", b.capability, "binding");
    const auto elements =
        io::get_string_list(io::require(item, "elements", "binding"),
                            "binding " + b.capability + " elements");
    b.elements.insert(elements.begin(), elements.end());
    if (const auto it = item.find("rules"); it != item.end())
      b.rules = io::get_string_list(*it, "binding " + b.capability + " rules");
    out.bindings.push_back(std::move(b));
  }
  if (const auto it = j.find("parametric_defaults"); it != j.end())
    out.parametric_defaults = io::params_from_json(*it, "parametric_defaults");
  return out;
}

// ---------------------------------------------------------------------------
// Scope documents (output of scoping, input of build-line)
// ---------------------------------------------------------------------------

struct ScopeDocument {
  std::vector<AttributeDef> attributes;
  DemandProfile profile;
  ScopeDecisionSet scope;
  std::vector<ConflictRecord> conflicts;
  std::vector<Finding> findings;
  std::optional<CoverageReport> coverage;
};

inline json finding_to_json(const Finding& f) {
  return {{"code", f.code}, {"element", f.element}, {"message", f.message}};
}

inline json scope_document_to_json(const ScopeDocument& doc) {
  json j;
  j["attributes"] = json::array();
  auto defs = doc.attributes;
  std::sort(defs.begin(), defs.end(),
            [](const AttributeDef& a, const AttributeDef& b) {
              return a.name < b.name;
            });
  for (const auto& d : defs) j["attributes"].push_back(attribute_to_json(d));

  json entities = json::object();
  for (const auto& [entity, demands] : doc.profile.entities) {
    json list = json::array();
    for (const auto& d : demands) {
      json item;
      item["capability"] = d.capability;
      item["kind"] = to_string(d.kind);
      item["score"] = d.score;
      if (d.parameter)
        item["parameter"] = {{"name", d.parameter->name},
                             {"value", io::param_to_json(d.parameter->value)}};
      list.push_back(std::move(item));
    }
    entities[entity] = std::move(list);
  }
  j["entities"] = std::move(entities);

  json capabilities = json::object();
  for (const auto& [cap, decision] : doc.scope.capabilities) {
    capabilities[cap] = {{"class", to_string(decision.klass)},
                         {"kind", to_string(decision.kind)},
                         {"max_score", decision.max_score},
                         {"provenance", decision.provenance}};
  }
  j["capabilities"] = std::move(capabilities);

  json restrictions = json::object();
  for (const auto& [slot, allowed] : doc.profile.restrictions)
    restrictions[slot] = allowed;
  j["restrictions"] = std::move(restrictions);

  j["conflicts"] = json::array();
  for (const auto& c : doc.conflicts)
    j["conflicts"].push_back({{"constraints", c.constraint_ids},
                              {"entities", c.entities},
                              {"kept", c.kept},
                              {"dropped", c.dropped},
                              {"winning_score", c.winning_score}});

  j["findings"] = json::array();
  for (const auto& f : doc.findings) j["findings"].push_back(finding_to_json(f));

  if (doc.coverage) {
    json cov;
    cov["covers"] = json::object();
    for (const auto& [cap, procs] : doc.coverage->covers)
      cov["covers"][cap] = procs;
    cov["gaps"] = doc.coverage->gaps;
    cov["minimal_cover"] = doc.coverage->minimal_cover;
    cov["approximate"] = doc.coverage->approximate;
    j["coverage"] = std::move(cov);
  }
  return j;
}

inline std::string print_scope_document(const ScopeDocument& doc) {
  return scope_document_to_json(doc).dump(2) + "\n";
}

// Reads back what build-line needs: attribute declarations and the
// per-capability decisions.
inline ScopeDocument parse_scope_document(const std::string& text) {
  const json j = io::parse_text(text, "scope document");
  io::check_keys(j,
                 {"attributes", "entities", "capabilities", "restrictions",
                  "conflicts", "findings", "coverage"},
                 "scope document");
  ScopeDocument doc;
  for (const auto& item : io::require_array(j, "attributes", "scope document"))
    doc.attributes.push_back(attribute_from_json(item));
  validate_defs(doc.attributes);

  for (const auto& [cap, item] :
       io::require(j, "capabilities", "scope document").items()) {
    io::check_keys(item, {"class", "kind", "max_score", "provenance"},
                   "capability " + cap);
    ScopeDecision decision;
    const std::string klass = io::get_string(item, "class", cap);
    if (klass == "CORE") decision.klass = ScopeClass::CORE;
    else if (klass == "OPTIONAL") decision.klass = ScopeClass::OPTIONAL;
    else if (klass == "OUT") decision.klass = ScopeClass::OUT;
    else
      throw Error("E_SCHEMA", "capability " + cap +
                                  ": class must be CORE/OPTIONAL/OUT");
    const std::string kind = io::get_string(item, "kind", cap);
    decision.kind =
        kind == "parametric" ? DemandKind::parametric : DemandKind::structural;
    const json& score = io::require(item, "max_score", cap);
    if (!score.is_number_integer())
      throw Error("E_SCHEMA", "capability " + cap + ": max_score must be an integer");
    decision.max_score = score.get<int>();
    decision.provenance = io::get_string_list(
        io::require(item, "provenance", cap), "capability " + cap + " provenance");
    doc.scope.capabilities[cap] = std::move(decision);
  }

  if (const auto it = j.find("entities"); it != j.end()) {
    for (const auto& [entity, demands] : it->items()) {
      std::vector<Demand> list;
      for (const auto& item : demands) {
        Demand d;
        d.capability = io::get_string(item, "capability", "demand");
        d.kind = io::get_string(item, "kind", "demand") == "parametric"
                     ? DemandKind::parametric
                     : DemandKind::structural;
        const json& score = io::require(item, "score", "demand");
        d.score = score.get<int>();
        if (const auto p = item.find("parameter"); p != item.end())
          d.parameter = Parameter{
              io::get_string(*p, "name", "demand parameter"),
              io::json_to_param(io::require(*p, "value", "demand parameter"),
                                "demand parameter value")};
        doc.profile.capability_universe.insert(d.capability);
        list.push_back(std::move(d));
      }
      doc.profile.entities[entity] = std::move(list);
    }
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Metrics reports (output only)
// ---------------------------------------------------------------------------

struct MetricsReport {
  CommonalityRatio ratio;
  EffortComparison effort;
  struct NamedDiff {
    std::string a, b;
    InstanceDiff diff;
  };
  std::vector<NamedDiff> diffs;
};

inline json metrics_report_to_json(const MetricsReport& report) {
  json j;
  j["commonality_ratio"] = report.ratio.value();
  j["common_elements"] = report.ratio.intersection_size;
  j["union_elements"] = report.ratio.union_size;
  j["line_effort"] = report.effort.line_effort;
  j["separate_effort"] = report.effort.separate_effort;
  j["savings"] = report.effort.savings;
  j["diffs"] = json::array();
  for (const auto& d : report.diffs)
    j["diffs"].push_back(
        {{"a", d.a},
         {"b", d.b},
         {"added", std::vector<std::string>(d.diff.added.begin(), d.diff.added.end())},
         {"removed",
          std::vector<std::string>(d.diff.removed.begin(), d.diff.removed.end())}});
  return j;
}

}  // namespace procline
