#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "twinforge/error.hpp"

namespace twinforge {

// Nodes and edges are deliberately separate kinds: a buffer can never appear
// as a node, a machine can never carry flow. Factories stay one-to-one.
enum class NodeKind { Source, Sink, Machine, Splitter, Merger };
enum class EdgeKind { Buffer, Conveyor };

const char* node_kind_name(NodeKind k);  // "source", "sink", ...
const char* edge_kind_name(EdgeKind k);  // "buffer", "conveyor"
std::optional<NodeKind> parse_node_kind(std::string_view name);
std::optional<EdgeKind> parse_edge_kind(std::string_view name);

enum class DistFamily { Deterministic, Exponential, Normal, Lognormal, Uniform, Gamma };

const char* dist_family_name(DistFamily f);  // "det", "exp", "normal", ...
std::optional<DistFamily> parse_dist_family(std::string_view name);

// Parameter meanings of a/b per family:
//   Deterministic: a = value            Exponential: a = rate
//   Normal:        a = mean, b = std    Lognormal:   a = mu,  b = sigma
//   Uniform:       a = min,  b = max    Gamma:       a = shape, b = scale
// Stored unvalidated so that an out-of-range spec loaded from a netlist can
// reach the validator instead of dying at parse time; valid() is the check.
struct DistSpec {
  DistFamily family = DistFamily::Deterministic;
  double a = 0.0;
  double b = 0.0;

  static DistSpec deterministic(double value) { return {DistFamily::Deterministic, value, 0.0}; }
  static DistSpec exponential(double rate) { return {DistFamily::Exponential, rate, 0.0}; }
  static DistSpec normal(double mean, double stddev) { return {DistFamily::Normal, mean, stddev}; }
  static DistSpec lognormal(double mu, double sigma) { return {DistFamily::Lognormal, mu, sigma}; }
  static DistSpec uniform(double lo, double hi) { return {DistFamily::Uniform, lo, hi}; }
  static DistSpec gamma(double shape, double scale) { return {DistFamily::Gamma, shape, scale}; }

  std::size_t param_count() const;  // 1 for det/exp, 2 otherwise
  double mean() const;
  bool valid() const;

  bool operator==(const DistSpec&) const = default;
  bool operator<(const DistSpec& o) const;
};

// A parameter is a number, a short text (routing policies), or a distribution.
// Unset exists so a binding pass can blank a value without forgetting the key.
struct ParamValue {
  enum class Type { Unset, Number, Text, Dist };

  Type type = Type::Unset;
  double number = 0.0;
  std::string text;
  DistSpec dist;

  static ParamValue unset() { return {}; }
  static ParamValue of(double v) { ParamValue p; p.type = Type::Number; p.number = v; return p; }
  static ParamValue of(std::string v) { ParamValue p; p.type = Type::Text; p.text = std::move(v); return p; }
  static ParamValue of(DistSpec v) { ParamValue p; p.type = Type::Dist; p.dist = v; return p; }

  bool is_set() const { return type != Type::Unset; }
  bool operator==(const ParamValue&) const = default;
  bool operator<(const ParamValue& o) const;
};

// std::map keeps parameter iteration order deterministic everywhere.
using ParamMap = std::map<std::string, ParamValue>;

// Hierarchy scope as a path of subsystem instance names, outermost first.
// Empty path = root. Ids of scoped elements embed the path ("Cell_1/M_IN"),
// so the path is recoverable from the id, but it is kept explicit because
// flattening errors preserve ids while losing scopes.
using ScopePath = std::vector<std::string>;

std::string scope_to_string(const ScopePath& scope);        // "A/B"
ScopePath scope_from_string(std::string_view text);          // "" -> {}

struct Node {
  std::string id;
  NodeKind kind = NodeKind::Machine;
  ParamMap params;
  ScopePath scope;

  bool operator==(const Node&) const = default;
};

struct Edge {
  std::string id;
  EdgeKind kind = EdgeKind::Buffer;
  std::string from;
  std::string to;
  ParamMap params;

  bool operator==(const Edge&) const = default;
};

// Set of scope paths closed under prefixes, stored sorted.
class ScopeSet {
public:
  void insert(const ScopePath& path);          // inserts path and all prefixes
  bool contains(const ScopePath& path) const;
  std::size_t size() const { return paths_.size(); }  // root not counted
  const std::vector<ScopePath>& paths() const { return paths_; }
  bool operator==(const ScopeSet&) const = default;

private:
  std::vector<ScopePath> paths_;
};

// Flat directed multigraph. Storage intentionally does not force uniqueness:
// graphs loaded from foreign netlists may carry duplicate ids, and the
// validator reports those as findings. The add_node/connect ops DO enforce
// uniqueness, so graphs built through the API are well-formed by construction.
struct ModelGraph {
  std::string name;
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  ScopeSet scopes;

  const Node* find_node(std::string_view id) const;
  const Edge* find_edge(std::string_view id) const;
  std::vector<const Edge*> in_edges(std::string_view node_id) const;
  std::vector<const Edge*> out_edges(std::string_view node_id) const;

  bool operator==(const ModelGraph&) const = default;
};

struct GraphStats {
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  std::size_t param_count = 0;     // set (non-Unset) params on nodes and edges
  std::size_t max_scope_depth = 0; // 0 = flat graph

  bool operator==(const GraphStats&) const = default;
};

// Pure graph ops: each returns the updated graph, inputs untouched.
ModelGraph add_node(ModelGraph graph, Node node);
ModelGraph connect(ModelGraph graph, const std::string& from_id, Edge edge,
                   const std::string& to_id);
GraphStats stats(const ModelGraph& graph);

// Deterministic normal form: nodes sorted by (scope, id), edges by
// (id, from, to), Unset params dropped. Equal models have equal canonical
// forms regardless of construction order; stats() is invariant under it.
ModelGraph canonical_form(ModelGraph graph);

// Routing policy text values accepted on splitter/merger `policy` params.
inline constexpr const char* kPolicyRoundRobin = "ROUND_ROBIN";
inline constexpr const char* kPolicyFirstAvailable = "FIRST_AVAILABLE";

bool is_known_policy(std::string_view text);

// Parameter schema per kind: which params must / may be set. Used by the
// validator (missing/range checks), the binder, and the taxonomy classifier.
std::span<const std::string_view> mandatory_params(NodeKind kind);
std::span<const std::string_view> optional_params(NodeKind kind);
std::span<const std::string_view> mandatory_params(EdgeKind kind);
std::span<const std::string_view> optional_params(EdgeKind kind);
bool is_known_param(NodeKind kind, std::string_view name);
bool is_known_param(EdgeKind kind, std::string_view name);

} // namespace twinforge
