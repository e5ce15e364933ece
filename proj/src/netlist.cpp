#include "twinforge/netlist.hpp"

#include <nlohmann/json.hpp>

#include "twinforge/dsl.hpp"

namespace twinforge {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const char* ir_kind_name(IrKind k) { return k == IrKind::Dsl ? "dsl" : "netlist"; }

namespace {

[[noreturn]] void schema_error(const std::string& message, const std::string& entity = {}) {
  throw Error(Errc::Schema, message, entity);
}

ParamValue param_from_json(const json& value, const std::string& context) {
  if (value.is_null()) return ParamValue::unset();
  if (value.is_number()) return ParamValue::of(value.get<double>());
  if (value.is_string()) return ParamValue::of(value.get<std::string>());
  if (value.is_object()) {
    if (!value.contains("dist") || !value["dist"].is_string())
      schema_error("distribution param needs a string 'dist' field", context);
    const auto family = parse_dist_family(value["dist"].get<std::string>());
    if (!family)
      schema_error("unknown distribution family '" + value["dist"].get<std::string>() + "'", context);
    auto field = [&](const char* name) {
      if (!value.contains(name) || !value[name].is_number())
        schema_error(std::string("distribution needs numeric '") + name + "'", context);
      return value[name].get<double>();
    };
    switch (*family) {
      case DistFamily::Deterministic: return ParamValue::of(DistSpec::deterministic(field("value")));
      case DistFamily::Exponential: return ParamValue::of(DistSpec::exponential(field("rate")));
      case DistFamily::Normal: return ParamValue::of(DistSpec::normal(field("mean"), field("std")));
      case DistFamily::Lognormal: return ParamValue::of(DistSpec::lognormal(field("mu"), field("sigma")));
      case DistFamily::Uniform: return ParamValue::of(DistSpec::uniform(field("min"), field("max")));
      case DistFamily::Gamma: return ParamValue::of(DistSpec::gamma(field("shape"), field("scale")));
    }
  }
  schema_error("param value must be number, string, or distribution object", context);
}

ordered_json param_to_json(const ParamValue& value) {
  switch (value.type) {
    case ParamValue::Type::Unset:
      return nullptr;
    case ParamValue::Type::Number:
      return value.number;
    case ParamValue::Type::Text:
      return value.text;
    case ParamValue::Type::Dist: {
      ordered_json out;
      out["dist"] = dist_family_name(value.dist.family);
      switch (value.dist.family) {
        case DistFamily::Deterministic: out["value"] = value.dist.a; break;
        case DistFamily::Exponential: out["rate"] = value.dist.a; break;
        case DistFamily::Normal: out["mean"] = value.dist.a; out["std"] = value.dist.b; break;
        case DistFamily::Lognormal: out["mu"] = value.dist.a; out["sigma"] = value.dist.b; break;
        case DistFamily::Uniform: out["min"] = value.dist.a; out["max"] = value.dist.b; break;
        case DistFamily::Gamma: out["shape"] = value.dist.a; out["scale"] = value.dist.b; break;
      }
      return out;
    }
  }
  return nullptr;
}

ParamMap params_from_json(const json& entry, const std::string& context) {
  ParamMap params;
  if (!entry.contains("params")) return params;
  const json& block = entry["params"];
  if (!block.is_object()) schema_error("'params' must be an object", context);
  for (auto it = block.begin(); it != block.end(); ++it)
    params[it.key()] = param_from_json(it.value(), context + "." + it.key());
  return params;
}

std::string require_string(const json& entry, const char* field, const std::string& context) {
  if (!entry.contains(field) || !entry[field].is_string())
    schema_error(std::string("entry needs a string '") + field + "'", context);
  return entry[field].get<std::string>();
}

} // namespace

ModelGraph read_netlist(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::Parse, e.what());
  }
  if (!doc.is_object()) schema_error("netlist document must be a JSON object");
  if (doc.contains("schema")) {
    if (!doc["schema"].is_string() || doc["schema"].get<std::string>() != kNetlistSchemaId)
      schema_error("unsupported schema id (want '" + std::string(kNetlistSchemaId) + "')");
  }

  ModelGraph graph;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) schema_error("'name' must be a string");
    graph.name = doc["name"].get<std::string>();
  }

  if (doc.contains("nodes")) {
    if (!doc["nodes"].is_array()) schema_error("'nodes' must be an array");
    for (const json& entry : doc["nodes"]) {
      if (!entry.is_object()) schema_error("node entry must be an object");
      Node node;
      node.id = require_string(entry, "id", "node");
      const std::string kind = require_string(entry, "kind", node.id);
      const auto parsed = parse_node_kind(kind);
      if (!parsed) {
        if (parse_edge_kind(kind))
          schema_error("'" + kind + "' is an edge kind; edges are not nodes", node.id);
        schema_error("unknown node kind '" + kind + "'", node.id);
      }
      node.kind = *parsed;
      node.params = params_from_json(entry, node.id);
      graph.nodes.push_back(std::move(node));
    }
  }

  if (doc.contains("edges")) {
    if (!doc["edges"].is_array()) schema_error("'edges' must be an array");
    for (const json& entry : doc["edges"]) {
      if (!entry.is_object()) schema_error("edge entry must be an object");
      Edge edge;
      edge.id = require_string(entry, "id", "edge");
      const std::string kind = require_string(entry, "kind", edge.id);
      const auto parsed = parse_edge_kind(kind);
      if (!parsed) {
        if (parse_node_kind(kind))
          schema_error("'" + kind + "' is a node kind; nodes are not edges", edge.id);
        schema_error("unknown edge kind '" + kind + "'", edge.id);
      }
      edge.kind = *parsed;
      edge.from = require_string(entry, "from", edge.id);
      edge.to = require_string(entry, "to", edge.id);
      edge.params = params_from_json(entry, edge.id);
      // Endpoints must name some node entry. Duplicate ids and rebound edge
      // ids are left for the validator; absent endpoints are a shape defect.
      for (const std::string* endpoint : {&edge.from, &edge.to}) {
        bool found = false;
        for (const auto& n : graph.nodes)
          if (n.id == *endpoint) { found = true; break; }
        if (!found)
          schema_error("endpoint '" + *endpoint + "' names no node entry", edge.id);
      }
      graph.edges.push_back(std::move(edge));
    }
  }

  if (doc.contains("hierarchy")) {
    if (!doc["hierarchy"].is_array()) schema_error("'hierarchy' must be an array");
    std::map<std::string, std::string> member_scope;
    for (const json& entry : doc["hierarchy"]) {
      if (!entry.is_object()) schema_error("hierarchy entry must be an object");
      const std::string scope_text = require_string(entry, "scope", "hierarchy");
      const ScopePath path = scope_from_string(scope_text);
      if (path.empty()) schema_error("hierarchy scope must be non-empty");
      graph.scopes.insert(path);
      if (!entry.contains("members")) continue;
      if (!entry["members"].is_array()) schema_error("'members' must be an array", scope_text);
      for (const json& member : entry["members"]) {
        if (!member.is_string()) schema_error("member must be a node id string", scope_text);
        const std::string id = member.get<std::string>();
        auto [it, inserted] = member_scope.emplace(id, scope_text);
        if (!inserted)
          schema_error("node '" + id + "' is a member of two scopes", scope_text);
        bool found = false;
        for (auto& n : graph.nodes) {
          if (n.id == id) {
            n.scope = path;
            found = true;
          }
        }
        if (!found) schema_error("member '" + id + "' names no node entry", scope_text);
      }
    }
  }

  return graph;
}

std::string write_netlist(const ModelGraph& graph) {
  const ModelGraph g = canonical_form(graph);
  ordered_json doc;
  doc["schema"] = kNetlistSchemaId;
  if (!g.name.empty()) doc["name"] = g.name;

  ordered_json nodes = ordered_json::array();
  for (const auto& n : g.nodes) {
    ordered_json entry;
    entry["id"] = n.id;
    entry["kind"] = node_kind_name(n.kind);
    if (!n.params.empty()) {
      ordered_json params;
      for (const auto& [name, value] : n.params) params[name] = param_to_json(value);
      entry["params"] = std::move(params);
    }
    nodes.push_back(std::move(entry));
  }
  doc["nodes"] = std::move(nodes);

  ordered_json edges = ordered_json::array();
  for (const auto& e : g.edges) {
    ordered_json entry;
    entry["id"] = e.id;
    entry["kind"] = edge_kind_name(e.kind);
    entry["from"] = e.from;
    entry["to"] = e.to;
    if (!e.params.empty()) {
      ordered_json params;
      for (const auto& [name, value] : e.params) params[name] = param_to_json(value);
      entry["params"] = std::move(params);
    }
    edges.push_back(std::move(entry));
  }
  doc["edges"] = std::move(edges);

  if (g.scopes.size() > 0) {
    ordered_json hierarchy = ordered_json::array();
    for (const auto& path : g.scopes.paths()) {
      ordered_json entry;
      entry["scope"] = scope_to_string(path);
      ordered_json members = ordered_json::array();
      for (const auto& n : g.nodes)
        if (n.scope == path) members.push_back(n.id);
      entry["members"] = std::move(members);
      hierarchy.push_back(std::move(entry));
    }
    doc["hierarchy"] = std::move(hierarchy);
  }

  return doc.dump(1) + "\n";
}

DensityReport density(const std::string& ir_text, IrKind kind, const ModelGraph& graph) {
  DensityReport report;
  report.ir_kind = kind;
  report.char_count = ir_text.size();
  report.flat_node_count = graph.nodes.size();
  report.flat_edge_count = graph.edges.size();

  std::size_t entries = 0;
  if (kind == IrKind::Netlist) {
    json doc;
    try {
      doc = json::parse(ir_text);
    } catch (const json::parse_error& e) {
      throw Error(Errc::Parse, e.what());
    }
    if (doc.is_object()) {
      if (doc.contains("nodes") && doc["nodes"].is_array()) entries += doc["nodes"].size();
      if (doc.contains("edges") && doc["edges"].is_array()) entries += doc["edges"].size();
    }
  } else {
    entries = count_statements(ir_text);
  }

  report.entry_count = entries == 0 ? 1 : entries;  // clamp: ratio stays finite
  report.expansion_ratio =
      static_cast<double>(report.flat_node_count + report.flat_edge_count) /
      static_cast<double>(report.entry_count);
  return report;
}

} // namespace twinforge
