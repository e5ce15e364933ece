#include "twinforge/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <tuple>

namespace twinforge {

const char* node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Source: return "source";
    case NodeKind::Sink: return "sink";
    case NodeKind::Machine: return "machine";
    case NodeKind::Splitter: return "splitter";
    case NodeKind::Merger: return "merger";
  }
  return "?";
}

const char* edge_kind_name(EdgeKind k) {
  return k == EdgeKind::Buffer ? "buffer" : "conveyor";
}

std::optional<NodeKind> parse_node_kind(std::string_view name) {
  if (name == "source") return NodeKind::Source;
  if (name == "sink") return NodeKind::Sink;
  if (name == "machine") return NodeKind::Machine;
  if (name == "splitter") return NodeKind::Splitter;
  if (name == "merger") return NodeKind::Merger;
  return std::nullopt;
}

std::optional<EdgeKind> parse_edge_kind(std::string_view name) {
  if (name == "buffer") return EdgeKind::Buffer;
  if (name == "conveyor") return EdgeKind::Conveyor;
  return std::nullopt;
}

const char* dist_family_name(DistFamily f) {
  switch (f) {
    case DistFamily::Deterministic: return "det";
    case DistFamily::Exponential: return "exp";
    case DistFamily::Normal: return "normal";
    case DistFamily::Lognormal: return "lognormal";
    case DistFamily::Uniform: return "uniform";
    case DistFamily::Gamma: return "gamma";
  }
  return "?";
}

std::optional<DistFamily> parse_dist_family(std::string_view name) {
  if (name == "det" || name == "deterministic") return DistFamily::Deterministic;
  if (name == "exp" || name == "exponential") return DistFamily::Exponential;
  if (name == "normal") return DistFamily::Normal;
  if (name == "lognormal") return DistFamily::Lognormal;
  if (name == "uniform") return DistFamily::Uniform;
  if (name == "gamma") return DistFamily::Gamma;
  return std::nullopt;
}

std::size_t DistSpec::param_count() const {
  switch (family) {
    case DistFamily::Deterministic:
    case DistFamily::Exponential:
      return 1;
    default:
      return 2;
  }
}

double DistSpec::mean() const {
  switch (family) {
    case DistFamily::Deterministic: return a;
    case DistFamily::Exponential: return a > 0 ? 1.0 / a : 0.0;
    case DistFamily::Normal: return a;
    case DistFamily::Lognormal: return std::exp(a + b * b / 2.0);
    case DistFamily::Uniform: return (a + b) / 2.0;
    case DistFamily::Gamma: return a * b;
  }
  return 0.0;
}

bool DistSpec::valid() const {
  if (!std::isfinite(a) || !std::isfinite(b)) return false;
  switch (family) {
    case DistFamily::Deterministic: return a >= 0.0;
    case DistFamily::Exponential: return a > 0.0;
    case DistFamily::Normal: return b >= 0.0;
    case DistFamily::Lognormal: return b >= 0.0;
    case DistFamily::Uniform: return a <= b;
    case DistFamily::Gamma: return a > 0.0 && b > 0.0;
  }
  return false;
}

bool DistSpec::operator<(const DistSpec& o) const {
  return std::tie(family, a, b) < std::tie(o.family, o.a, o.b);
}

bool ParamValue::operator<(const ParamValue& o) const {
  if (type != o.type) return type < o.type;
  switch (type) {
    case Type::Unset: return false;
    case Type::Number: return number < o.number;
    case Type::Text: return text < o.text;
    case Type::Dist: return dist < o.dist;
  }
  return false;
}

std::string scope_to_string(const ScopePath& scope) {
  std::string out;
  for (const auto& part : scope) {
    if (!out.empty()) out += '/';
    out += part;
  }
  return out;
}

ScopePath scope_from_string(std::string_view text) {
  ScopePath path;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t slash = text.find('/', start);
    if (slash == std::string_view::npos) slash = text.size();
    if (slash > start) path.emplace_back(text.substr(start, slash - start));
    start = slash + 1;
  }
  return path;
}

void ScopeSet::insert(const ScopePath& path) {
  for (std::size_t depth = 1; depth <= path.size(); ++depth) {
    ScopePath prefix(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(depth));
    auto it = std::lower_bound(paths_.begin(), paths_.end(), prefix);
    if (it == paths_.end() || *it != prefix) paths_.insert(it, std::move(prefix));
  }
}

bool ScopeSet::contains(const ScopePath& path) const {
  if (path.empty()) return true;
  return std::binary_search(paths_.begin(), paths_.end(), path);
}

const Node* ModelGraph::find_node(std::string_view id) const {
  for (const auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

const Edge* ModelGraph::find_edge(std::string_view id) const {
  for (const auto& e : edges)
    if (e.id == id) return &e;
  return nullptr;
}

std::vector<const Edge*> ModelGraph::in_edges(std::string_view node_id) const {
  std::vector<const Edge*> out;
  for (const auto& e : edges)
    if (e.to == node_id) out.push_back(&e);
  return out;
}

std::vector<const Edge*> ModelGraph::out_edges(std::string_view node_id) const {
  std::vector<const Edge*> out;
  for (const auto& e : edges)
    if (e.from == node_id) out.push_back(&e);
  return out;
}

ModelGraph add_node(ModelGraph graph, Node node) {
  if (node.id.empty())
    throw Error(Errc::PreconditionFailed, "node id must be non-empty");
  if (graph.find_node(node.id))
    throw Error(Errc::DuplicateId, "node id already present", node.id);
  if (!node.scope.empty()) graph.scopes.insert(node.scope);
  graph.nodes.push_back(std::move(node));
  return graph;
}

ModelGraph connect(ModelGraph graph, const std::string& from_id, Edge edge,
                   const std::string& to_id) {
  if (edge.id.empty())
    throw Error(Errc::PreconditionFailed, "edge id must be non-empty");
  if (!graph.find_node(from_id))
    throw Error(Errc::UnknownEndpoint, "no node named '" + from_id + "'", edge.id);
  if (!graph.find_node(to_id))
    throw Error(Errc::UnknownEndpoint, "no node named '" + to_id + "'", edge.id);
  if (const Edge* existing = graph.find_edge(edge.id)) {
    // Same id, same endpoints = an accidental double add; same id pointing
    // elsewhere = an attempt to route one edge twice. Edges are one-to-one.
    if (existing->from == from_id && existing->to == to_id)
      throw Error(Errc::DuplicateEdgeId, "edge id already present", edge.id);
    throw Error(Errc::EdgeReuse,
                "edge already bound " + existing->from + " -> " + existing->to,
                edge.id);
  }
  edge.from = from_id;
  edge.to = to_id;
  graph.edges.push_back(std::move(edge));
  return graph;
}

GraphStats stats(const ModelGraph& graph) {
  GraphStats s;
  s.node_count = graph.nodes.size();
  s.edge_count = graph.edges.size();
  for (const auto& n : graph.nodes) {
    s.max_scope_depth = std::max(s.max_scope_depth, n.scope.size());
    for (const auto& [name, value] : n.params)
      if (value.is_set()) ++s.param_count;
  }
  for (const auto& e : graph.edges)
    for (const auto& [name, value] : e.params)
      if (value.is_set()) ++s.param_count;
  return s;
}

namespace {

void drop_unset(ParamMap& params) {
  for (auto it = params.begin(); it != params.end();)
    it = it->second.is_set() ? std::next(it) : params.erase(it);
}

// Total orders usable even on degenerate graphs with duplicate ids.
bool node_less(const Node& x, const Node& y) {
  return std::tie(x.scope, x.id, x.kind, x.params) <
         std::tie(y.scope, y.id, y.kind, y.params);
}

bool edge_less(const Edge& x, const Edge& y) {
  return std::tie(x.id, x.from, x.to, x.kind, x.params) <
         std::tie(y.id, y.from, y.to, y.kind, y.params);
}

} // namespace

ModelGraph canonical_form(ModelGraph graph) {
  for (auto& n : graph.nodes) drop_unset(n.params);
  for (auto& e : graph.edges) drop_unset(e.params);
  std::stable_sort(graph.nodes.begin(), graph.nodes.end(), node_less);
  std::stable_sort(graph.edges.begin(), graph.edges.end(), edge_less);
  return graph;
}

bool is_known_policy(std::string_view text) {
  return text == kPolicyRoundRobin || text == kPolicyFirstAvailable;
}

namespace {

using Names = std::span<const std::string_view>;

constexpr std::string_view kSourceMandatory[] = {"inter_arrival"};
constexpr std::string_view kMachineMandatory[] = {"delay"};
constexpr std::string_view kMachineOptional[] = {"work_capacity"};
constexpr std::string_view kRouterMandatory[] = {"policy"};
constexpr std::string_view kBufferMandatory[] = {"capacity"};
constexpr std::string_view kConveyorMandatory[] = {"capacity", "transit_delay"};

} // namespace

Names mandatory_params(NodeKind kind) {
  switch (kind) {
    case NodeKind::Source: return kSourceMandatory;
    case NodeKind::Sink: return {};
    case NodeKind::Machine: return kMachineMandatory;
    case NodeKind::Splitter:
    case NodeKind::Merger: return kRouterMandatory;
  }
  return {};
}

Names optional_params(NodeKind kind) {
  return kind == NodeKind::Machine ? Names(kMachineOptional) : Names();
}

Names mandatory_params(EdgeKind kind) {
  return kind == EdgeKind::Buffer ? Names(kBufferMandatory) : Names(kConveyorMandatory);
}

Names optional_params(EdgeKind) { return {}; }

namespace {

bool contains_name(Names names, std::string_view name) {
  return std::find(names.begin(), names.end(), name) != names.end();
}

} // namespace

bool is_known_param(NodeKind kind, std::string_view name) {
  return contains_name(mandatory_params(kind), name) ||
         contains_name(optional_params(kind), name);
}

bool is_known_param(EdgeKind kind, std::string_view name) {
  return contains_name(mandatory_params(kind), name) ||
         contains_name(optional_params(kind), name);
}

} // namespace twinforge
