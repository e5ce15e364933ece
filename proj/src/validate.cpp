#include "twinforge/validate.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "text_util.hpp"

namespace twinforge {

namespace {

constexpr RuleInfo kRules[] = {
    {"V-ISOLATED", "node has no incoming and no outgoing edge"},
    {"V-DANGLING-OUT", "non-sink node has no outgoing edge"},
    {"V-DANGLING-IN", "non-source node has no incoming edge"},
    {"V-DUP-ID", "id appears on more than one node or edge"},
    {"V-EDGE-REUSE", "one edge id is bound between different endpoint pairs"},
    {"V-MISSING-PARAM", "mandatory parameter is absent or unset"},
    {"V-BAD-POLICY", "routing policy is not a known policy name"},
    {"V-SRC-HAS-IN", "source has an incoming edge"},
    {"V-SINK-HAS-OUT", "sink has an outgoing edge"},
    {"V-SPLIT-ARITY", "splitter has exactly one outgoing edge"},
    {"V-MERGE-ARITY", "merger has exactly one incoming edge"},
    {"V-PARAM-RANGE", "parameter value is outside its legal range"},
};

struct Checker {
  const ModelGraph& graph;
  std::vector<Diagnostic> out;

  void report(const char* rule, Severity severity, const std::string& entity,
              std::string message) {
    out.push_back({rule, severity, entity, std::move(message)});
  }

  // V-PARAM-RANGE for one set param. `policy` has its own rule and is
  // skipped here so one bad value never yields two findings.
  void check_range(const std::string& entity, const std::string& name,
                   const ParamValue& value) {
    if (!value.is_set() || name == "policy") return;

    auto bad = [&](const std::string& why) {
      report("V-PARAM-RANGE", Severity::Error, entity, name + " " + why);
    };

    const bool is_number = value.type == ParamValue::Type::Number;
    const bool is_dist = value.type == ParamValue::Type::Dist;

    if (name == "capacity" || name == "work_capacity") {
      if (!is_number) return bad("must be a number");
      if (value.number < 1.0 || value.number != std::floor(value.number))
        bad("must be a positive integer, got " + format_double(value.number));
      return;
    }
    if (name == "transit_delay") {
      if (!is_number) return bad("must be a fixed number of seconds");
      if (value.number < 0.0) bad("must be non-negative");
      return;
    }
    if (name == "delay" || name == "inter_arrival") {
      if (is_number) {
        if (value.number < 0.0) bad("must be non-negative");
        return;
      }
      if (is_dist) {
        if (!value.dist.valid())
          bad(std::string("has an invalid ") + dist_family_name(value.dist.family) +
              " distribution");
        return;
      }
      return bad("must be a number or a distribution");
    }
    // Off-schema params carry no range contract.
  }

  void check_missing(const std::string& entity, const ParamMap& params,
                     std::span<const std::string_view> names) {
    for (std::string_view name : names) {
      auto it = params.find(std::string(name));
      if (it == params.end() || !it->second.is_set())
        report("V-MISSING-PARAM", Severity::Error, entity,
               "'" + std::string(name) + "' is required");
    }
  }

  void run() {
    std::map<std::string_view, std::size_t> in_deg, out_deg;
    for (const auto& e : graph.edges) {
      ++out_deg[e.from];
      ++in_deg[e.to];
    }

    for (const auto& n : graph.nodes) {
      const std::size_t in = in_deg.count(n.id) ? in_deg[n.id] : 0;
      const std::size_t out_count = out_deg.count(n.id) ? out_deg[n.id] : 0;

      if (in == 0 && out_count == 0) {
        const bool endpoint = n.kind == NodeKind::Source || n.kind == NodeKind::Sink;
        report("V-ISOLATED", endpoint ? Severity::Warning : Severity::Error, n.id,
               std::string(node_kind_name(n.kind)) + " is connected to nothing");
      } else {
        if (out_count == 0 && n.kind != NodeKind::Sink)
          report("V-DANGLING-OUT", Severity::Error, n.id,
                 std::string(node_kind_name(n.kind)) + " has no outgoing edge");
        if (in == 0 && n.kind != NodeKind::Source)
          report("V-DANGLING-IN", Severity::Error, n.id,
                 std::string(node_kind_name(n.kind)) + " has no incoming edge");
        if (n.kind == NodeKind::Splitter && out_count == 1)
          report("V-SPLIT-ARITY", Severity::Error, n.id,
                 "splitter routes to a single edge");
        if (n.kind == NodeKind::Merger && in == 1)
          report("V-MERGE-ARITY", Severity::Error, n.id,
                 "merger joins a single edge");
      }

      if (n.kind == NodeKind::Source && in > 0)
        report("V-SRC-HAS-IN", Severity::Error, n.id, "source receives flow");
      if (n.kind == NodeKind::Sink && out_count > 0)
        report("V-SINK-HAS-OUT", Severity::Error, n.id, "sink emits flow");

      check_missing(n.id, n.params, mandatory_params(n.kind));

      if (n.kind == NodeKind::Splitter || n.kind == NodeKind::Merger) {
        auto it = n.params.find("policy");
        if (it != n.params.end() && it->second.is_set()) {
          if (it->second.type != ParamValue::Type::Text ||
              !is_known_policy(it->second.text))
            report("V-BAD-POLICY", Severity::Error, n.id,
                   "policy must be one of ROUND_ROBIN, FIRST_AVAILABLE");
        }
      }

      for (const auto& [name, value] : n.params) check_range(n.id, name, value);
    }

    for (const auto& e : graph.edges) {
      check_missing(e.id, e.params, mandatory_params(e.kind));
      for (const auto& [name, value] : e.params) check_range(e.id, name, value);
    }

    // Duplicate ids, reported once per offending id value. An edge id bound
    // between two different endpoint pairs is the reuse rule instead.
    std::map<std::string_view, std::size_t> node_ids;
    for (const auto& n : graph.nodes) ++node_ids[n.id];
    for (const auto& [id, count] : node_ids)
      if (count > 1)
        report("V-DUP-ID", Severity::Error, std::string(id),
               "node id appears " + std::to_string(count) + " times");

    std::map<std::string_view, std::vector<const Edge*>> edge_ids;
    for (const auto& e : graph.edges) edge_ids[e.id].push_back(&e);
    for (const auto& [id, entries] : edge_ids) {
      if (entries.size() < 2) continue;
      bool same_binding = true;
      for (const Edge* e : entries)
        if (e->from != entries[0]->from || e->to != entries[0]->to) same_binding = false;
      if (same_binding)
        report("V-DUP-ID", Severity::Error, std::string(id),
               "edge id appears " + std::to_string(entries.size()) + " times");
      else
        report("V-EDGE-REUSE", Severity::Error, std::string(id),
               "edge id bound between different endpoint pairs");
    }
  }
};

} // namespace

std::span<const RuleInfo> rule_catalog() { return kRules; }

std::vector<Diagnostic> validate(const ModelGraph& graph) {
  Checker checker{canonical_form(graph), {}};
  checker.run();
  return std::move(checker.out);
}

bool has_errors(std::span<const Diagnostic> diagnostics) {
  for (const auto& d : diagnostics)
    if (d.severity == Severity::Error) return true;
  return false;
}

} // namespace twinforge
