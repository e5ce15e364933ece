#include "twinforge/diff.hpp"

#include <algorithm>
#include <cctype>
#include <tuple>

#include <nlohmann/json.hpp>

namespace twinforge {

namespace {

using json = nlohmann::ordered_json;

constexpr ErrorType kAllTypes[] = {
    ErrorType::T1Naming,           ErrorType::T2ParamError,
    ErrorType::T3NodeHallucination, ErrorType::T4EdgeHallucination,
    ErrorType::T5ParamHallucination, ErrorType::T6HierarchyMismatch,
    ErrorType::T7Syntax,           ErrorType::T8FrameworkViolation,
};

std::string fold_id(const std::string& id, const MatchConfig& config) {
  std::string out;
  out.reserve(id.size());
  for (char c : id) {
    if (config.separator_set.find(c) != std::string::npos) {
      out.push_back('_');
      continue;
    }
    out.push_back(config.normalize_case
                      ? static_cast<char>(std::tolower(static_cast<unsigned char>(c)))
                      : c);
  }
  return out;
}

// One matching pass used both for the plain staged match and for shift
// hypotheses. Pairs unmatched truth nodes against unmatched candidate nodes
// of the same kind where truth_key(truth id) == cand_key(cand id); first
// unmatched candidate in canonical order wins. The two key functions differ
// only in the shift pass, which rewrites truth ids and leaves candidates as
// they are.
template <typename TruthKey, typename CandKey>
void pair_by_key(const std::vector<Node>& truth, const std::vector<Node>& cand,
                 std::vector<int>& truth_match, std::vector<int>& cand_match,
                 std::vector<MatchedPair>& pairs, const std::string& tag,
                 TruthKey truth_key, CandKey cand_key) {
  std::map<std::string, std::vector<std::size_t>> cand_by_key;
  for (std::size_t j = 0; j < cand.size(); ++j)
    if (cand_match[j] < 0)
      if (auto k = cand_key(cand[j].id)) cand_by_key[*k].push_back(j);

  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth_match[i] >= 0) continue;
    auto k = truth_key(truth[i].id);
    if (!k) continue;
    auto it = cand_by_key.find(*k);
    if (it == cand_by_key.end()) continue;
    for (std::size_t j : it->second) {
      if (cand_match[j] >= 0 || cand[j].kind != truth[i].kind) continue;
      truth_match[i] = static_cast<int>(j);
      cand_match[j] = static_cast<int>(i);
      pairs.push_back({truth[i].id, cand[j].id, tag});
      break;
    }
  }
}

std::optional<std::string> identity_key(const std::string& id) { return id; }

struct Signature {
  std::map<NodeKind, int> in_kinds;
  std::map<NodeKind, int> out_kinds;
  int degree = 0;
};

Signature signature_of(const ModelGraph& g, const std::string& node_id) {
  Signature s;
  for (const Edge& e : g.edges) {
    if (e.to == node_id) {
      if (const Node* n = g.find_node(e.from)) ++s.in_kinds[n->kind];
      ++s.degree;
    }
    if (e.from == node_id) {
      if (const Node* n = g.find_node(e.to)) ++s.out_kinds[n->kind];
      ++s.degree;
    }
  }
  return s;
}

int overlap(const std::map<NodeKind, int>& a, const std::map<NodeKind, int>& b) {
  int total = 0;
  for (const auto& [kind, count] : a) {
    auto it = b.find(kind);
    if (it != b.end()) total += std::min(count, it->second);
  }
  return total;
}

double similarity(const Signature& t, const Signature& c) {
  if (t.degree == 0 && c.degree == 0) return 1.0;
  const int shared = overlap(t.in_kinds, c.in_kinds) + overlap(t.out_kinds, c.out_kinds);
  return static_cast<double>(shared) / std::max({1, t.degree, c.degree});
}

struct Matcher {
  const ModelGraph truth;
  const ModelGraph cand;
  const MatchConfig& config;
  std::vector<int> truth_match;  // truth index -> cand index, -1 unmatched
  std::vector<int> cand_match;

  Matcher(const ModelGraph& t, const ModelGraph& c, const MatchConfig& cfg)
      : truth(canonical_form(t)), cand(canonical_form(c)), config(cfg),
        truth_match(truth.nodes.size(), -1), cand_match(cand.nodes.size(), -1) {}

  std::vector<MatchedPair> baseline() {
    std::vector<MatchedPair> pairs;
    auto fold = [this](const std::string& id) {
      return std::optional<std::string>(fold_id(id, config));
    };
    pair_by_key(truth.nodes, cand.nodes, truth_match, cand_match, pairs, "",
                identity_key, identity_key);
    pair_by_key(truth.nodes, cand.nodes, truth_match, cand_match, pairs, "T1.case",
                fold, fold);
    return pairs;
  }

  // Full-set matching under the hypothesis "candidate ids are truth ids with
  // every embedded integer moved by s". Shift pairs take precedence so a
  // shifted range can re-seat ids that would otherwise alias exact matches
  // (truth m_1..m_10 against candidate m_0..m_9 must pair m_1 with m_0, not
  // with the aliasing candidate m_1).
  std::vector<MatchedPair> hypothesis(int s, std::vector<int>& t_match,
                                      std::vector<int>& c_match) const {
    t_match.assign(truth.nodes.size(), -1);
    c_match.assign(cand.nodes.size(), -1);
    std::vector<MatchedPair> pairs;
    auto fold = [this](const std::string& id) {
      return std::optional<std::string>(fold_id(id, config));
    };
    pair_by_key(truth.nodes, cand.nodes, t_match, c_match, pairs, "T1.shift",
                [s](const std::string& id) { return shift_integers(id, s); },
                identity_key);
    pair_by_key(truth.nodes, cand.nodes, t_match, c_match, pairs, "",
                identity_key, identity_key);
    pair_by_key(truth.nodes, cand.nodes, t_match, c_match, pairs, "T1.case",
                fold, fold);
    return pairs;
  }

  void structural(std::vector<MatchedPair>& pairs) {
    std::vector<Signature> cand_sigs(cand.nodes.size());
    for (std::size_t j = 0; j < cand.nodes.size(); ++j)
      if (cand_match[j] < 0) cand_sigs[j] = signature_of(cand, cand.nodes[j].id);

    for (std::size_t i = 0; i < truth.nodes.size(); ++i) {
      if (truth_match[i] >= 0) continue;
      const Signature sig = signature_of(truth, truth.nodes[i].id);
      double best = config.structural_match_threshold;
      int best_j = -1;
      for (std::size_t j = 0; j < cand.nodes.size(); ++j) {
        if (cand_match[j] >= 0 || cand.nodes[j].kind != truth.nodes[i].kind) continue;
        const double sim = similarity(sig, cand_sigs[j]);
        if (sim > best || (best_j < 0 && sim >= best)) {
          best = sim;
          best_j = static_cast<int>(j);
        }
      }
      if (best_j >= 0) {
        truth_match[i] = best_j;
        cand_match[best_j] = static_cast<int>(i);
        pairs.push_back({truth.nodes[i].id, cand.nodes[best_j].id, "T1.rename"});
      }
    }
  }
};

// Endpoint-group edge matching state.
struct EdgeGroup {
  std::vector<const Edge*> truth;
  std::vector<const Edge*> cand;
};

bool param_is_set(const ParamMap& params, const std::string& name) {
  auto it = params.find(name);
  return it != params.end() && it->second.is_set();
}

// T2/T5 comparison shared by node pairs and edge pairs.
void compare_params(const ParamMap& truth, const ParamMap& cand,
                    const std::string& truth_id, const std::string& cand_id,
                    std::vector<ErrorRecord>& records) {
  std::vector<std::string> names;
  for (const auto& [k, v] : truth) names.push_back(k);
  for (const auto& [k, v] : cand)
    if (!truth.count(k)) names.push_back(k);
  std::sort(names.begin(), names.end());

  for (const std::string& name : names) {
    const bool t_set = param_is_set(truth, name);
    const bool c_set = param_is_set(cand, name);
    if (t_set && c_set) {
      if (!(truth.at(name) == cand.at(name)))
        records.push_back({ErrorType::T2ParamError, "T2.value", truth_id, cand_id,
                           "parameter '" + name + "' differs"});
    } else if (t_set) {
      records.push_back({ErrorType::T2ParamError, "T2.default", truth_id, cand_id,
                         "parameter '" + name + "' left unset in candidate"});
    } else if (c_set) {
      records.push_back({ErrorType::T5ParamHallucination, "T5", truth_id, cand_id,
                         "parameter '" + name + "' set without a source value"});
    }
  }
}

} // namespace

const char* error_type_label(ErrorType t) {
  switch (t) {
    case ErrorType::T1Naming: return "T1";
    case ErrorType::T2ParamError: return "T2";
    case ErrorType::T3NodeHallucination: return "T3";
    case ErrorType::T4EdgeHallucination: return "T4";
    case ErrorType::T5ParamHallucination: return "T5";
    case ErrorType::T6HierarchyMismatch: return "T6";
    case ErrorType::T7Syntax: return "T7";
    case ErrorType::T8FrameworkViolation: return "T8";
  }
  return "?";
}

std::size_t DiffReport::total() const {
  std::size_t sum = 0;
  for (const auto& [type, count] : counts) sum += count;
  return sum;
}

std::optional<std::string> shift_integers(const std::string& id, int shift) {
  std::string out;
  bool any = false;
  std::size_t i = 0;
  while (i < id.size()) {
    if (!std::isdigit(static_cast<unsigned char>(id[i]))) {
      out.push_back(id[i]);
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < id.size() && std::isdigit(static_cast<unsigned char>(id[j]))) ++j;
    long long value = 0;
    for (std::size_t k = i; k < j; ++k) {
      value = value * 10 + (id[k] - '0');
      if (value > 1000000000) return std::nullopt;  // not an index, leave id alone
    }
    value += shift;
    if (value < 0) return std::nullopt;
    std::string digits = std::to_string(value);
    // Preserve zero-padding width so m_007 shifts to m_008, not m_8.
    while (digits.size() < j - i) digits.insert(digits.begin(), '0');
    out += digits;
    any = true;
    i = j;
  }
  if (!any) return std::nullopt;
  return out;
}

Correspondence match_nodes(const ModelGraph& truth, const ModelGraph& cand,
                           const MatchConfig& config) {
  Matcher m(truth, cand, config);
  Correspondence result;
  result.nodes = m.baseline();

  std::vector<std::size_t> leftovers;
  for (std::size_t i = 0; i < m.truth.nodes.size(); ++i)
    if (m.truth_match[i] < 0) leftovers.push_back(i);

  if (config.shift_detection && !leftovers.empty()) {
    const int candidates[] = {-1, 1, -2, 2};
    std::size_t best_score = result.nodes.size();  // must strictly beat the baseline
    std::optional<int> best_s;
    std::vector<MatchedPair> best_pairs;
    std::vector<int> best_t, best_c;

    for (int s : candidates) {
      std::vector<int> t_match, c_match;
      std::vector<MatchedPair> pairs = m.hypothesis(s, t_match, c_match);
      std::size_t shifted_leftovers = 0;
      for (std::size_t i : leftovers) {
        const int j = t_match[i];
        if (j < 0) continue;
        // Count this leftover as explained only if the hypothesis seated it
        // through the shift itself.
        for (const MatchedPair& p : pairs)
          if (p.truth_id == m.truth.nodes[i].id && p.tag == "T1.shift") {
            ++shifted_leftovers;
            break;
          }
      }
      const double coverage =
          static_cast<double>(shifted_leftovers) / static_cast<double>(leftovers.size());
      if (coverage >= 0.8 && pairs.size() > best_score) {
        best_score = pairs.size();
        best_s = s;
        best_pairs = std::move(pairs);
        best_t = std::move(t_match);
        best_c = std::move(c_match);
      }
    }
    if (best_s) {
      result.nodes = std::move(best_pairs);
      result.accepted_shift = *best_s;
      m.truth_match = std::move(best_t);
      m.cand_match = std::move(best_c);
    }
  }

  m.structural(result.nodes);
  return result;
}

DiffReport classify(const ModelGraph& truth_in, const ModelGraph& cand_in,
                    const Correspondence& correspondence,
                    const std::vector<Diagnostic>& cand_diagnostics,
                    const ParseOutcome& parse_outcome, DescriptionMode mode) {
  DiffReport report;
  report.description_mode = mode;
  for (ErrorType t : kAllTypes) report.counts[t] = 0;

  if (!parse_outcome.ok) {
    report.records.push_back({ErrorType::T7Syntax, "T7", std::nullopt, std::nullopt,
                              parse_outcome.message.empty() ? "candidate failed to parse"
                                                            : parse_outcome.message});
    report.counts[ErrorType::T7Syntax] = 1;
    return report;
  }

  const ModelGraph truth = canonical_form(truth_in);
  const ModelGraph cand = canonical_form(cand_in);
  report.matched_nodes = correspondence.nodes;

  std::map<std::string, std::string> node_map;  // truth id -> cand id
  std::map<std::string, const MatchedPair*> pair_by_truth;
  std::map<std::string, bool> cand_matched;
  for (const MatchedPair& p : correspondence.nodes) {
    node_map[p.truth_id] = p.cand_id;
    pair_by_truth[p.truth_id] = &p;
    cand_matched[p.cand_id] = true;
  }

  // T1 from match tags.
  for (const MatchedPair& p : correspondence.nodes) {
    if (p.tag.empty()) continue;
    ErrorRecord rec{ErrorType::T1Naming, p.tag, p.truth_id, p.cand_id,
                    "node '" + p.truth_id + "' matched as '" + p.cand_id + "'"};
    rec.systematic = p.tag == "T1.shift" && correspondence.accepted_shift.has_value();
    report.records.push_back(std::move(rec));
  }

  // Unmatched nodes.
  for (const Node& n : truth.nodes)
    if (!node_map.count(n.id))
      report.records.push_back({ErrorType::T3NodeHallucination, "T3.omitted", n.id,
                                std::nullopt, "node missing from candidate"});
  for (const Node& n : cand.nodes)
    if (!cand_matched.count(n.id))
      report.records.push_back({ErrorType::T3NodeHallucination, "T3.added", std::nullopt,
                                n.id, "node not present in ground truth"});

  // Edges, grouped by (mapped endpoints, kind). Inside a group the same
  // staged id matching applies; an edge with an unmatched endpoint can join
  // no group and falls straight through to T4.
  std::map<std::tuple<std::string, std::string, int>, EdgeGroup> groups;
  std::vector<const Edge*> orphaned_truth;
  for (const Edge& e : truth.edges) {
    auto from = node_map.find(e.from);
    auto to = node_map.find(e.to);
    if (from == node_map.end() || to == node_map.end()) {
      orphaned_truth.push_back(&e);
      continue;
    }
    groups[{from->second, to->second, static_cast<int>(e.kind)}].truth.push_back(&e);
  }
  for (const Edge& e : cand.edges)
    groups[{e.from, e.to, static_cast<int>(e.kind)}].cand.push_back(&e);

  MatchConfig fold_config;  // defaults mirror MatchConfig's

  std::vector<ErrorRecord> edge_records;
  std::vector<const Edge*> extra_truth = orphaned_truth;
  std::vector<const Edge*> extra_cand;
  for (auto& [key, group] : groups) {
    std::vector<bool> used(group.cand.size(), false);
    std::vector<const Edge*> pending;
    auto take = [&](const Edge* t, auto pred, const char* tag) -> bool {
      for (std::size_t j = 0; j < group.cand.size(); ++j) {
        if (used[j] || !pred(*group.cand[j])) continue;
        used[j] = true;
        report.matched_edges.push_back({t->id, group.cand[j]->id, tag});
        if (tag[0] != '\0') {
          ErrorRecord rec{ErrorType::T1Naming, tag, t->id, group.cand[j]->id,
                          "edge '" + t->id + "' matched as '" + group.cand[j]->id + "'"};
          rec.systematic = std::string(tag) == "T1.shift";
          edge_records.push_back(std::move(rec));
        }
        compare_params(t->params, group.cand[j]->params, t->id, group.cand[j]->id,
                       edge_records);
        return true;
      }
      return false;
    };

    for (const Edge* t : group.truth)
      if (!take(t, [&](const Edge& c) { return c.id == t->id; }, "")) pending.push_back(t);

    std::vector<const Edge*> still;
    for (const Edge* t : pending) {
      bool ok = false;
      if (correspondence.accepted_shift) {
        auto shifted = shift_integers(t->id, *correspondence.accepted_shift);
        if (shifted)
          ok = take(t, [&](const Edge& c) { return c.id == *shifted; }, "T1.shift");
      }
      if (!ok) still.push_back(t);
    }
    pending = std::move(still);
    still.clear();
    for (const Edge* t : pending) {
      const std::string folded = fold_id(t->id, fold_config);
      if (!take(t, [&](const Edge& c) { return fold_id(c.id, fold_config) == folded; },
                "T1.case"))
        still.push_back(t);
    }
    // Same endpoints, same kind, unrecognizable id: a rename, positionally.
    for (const Edge* t : still)
      if (!take(t, [](const Edge&) { return true; }, "T1.rename")) extra_truth.push_back(t);
    for (std::size_t j = 0; j < group.cand.size(); ++j)
      if (!used[j]) extra_cand.push_back(group.cand[j]);
  }

  for (const Edge* e : extra_truth)
    edge_records.push_back({ErrorType::T4EdgeHallucination, "T4.omitted", e->id,
                            std::nullopt, "edge missing from candidate"});
  for (const Edge* e : extra_cand)
    edge_records.push_back({ErrorType::T4EdgeHallucination, "T4.added", std::nullopt,
                            e->id, "edge not present in ground truth"});
  for (ErrorRecord& r : edge_records) report.records.push_back(std::move(r));

  // Params and hierarchy on matched node pairs, truth canonical order.
  for (const Node& tn : truth.nodes) {
    auto it = pair_by_truth.find(tn.id);
    if (it == pair_by_truth.end()) continue;
    const Node* cn = cand.find_node(it->second->cand_id);
    if (!cn) continue;
    compare_params(tn.params, cn->params, tn.id, cn->id, report.records);

    if (tn.scope != cn->scope) {
      if (!tn.scope.empty() && cn->scope.empty())
        report.records.push_back({ErrorType::T6HierarchyMismatch, "T6.flattened", tn.id,
                                  cn->id,
                                  "subsystem member '" + scope_to_string(tn.scope) +
                                      "' placed at root"});
      else
        // Covers both differing non-root scopes and hierarchy invented by
        // the candidate where the truth is flat.
        report.records.push_back({ErrorType::T6HierarchyMismatch, "T6.misplaced", tn.id,
                                  cn->id,
                                  "scope '" + scope_to_string(tn.scope) + "' vs '" +
                                      scope_to_string(cn->scope) + "'"});
    }
  }

  for (const Diagnostic& d : cand_diagnostics) {
    if (d.severity != Severity::Error) continue;
    report.records.push_back({ErrorType::T8FrameworkViolation, "T8", std::nullopt,
                              d.entity, d.rule + ": " + d.message});
  }

  for (const ErrorRecord& r : report.records) ++report.counts[r.type];
  return report;
}

DiffReport diff_models(const ModelGraph& truth, const ModelGraph& cand,
                       const MatchConfig& config, DescriptionMode mode) {
  Correspondence correspondence = match_nodes(truth, cand, config);
  return classify(truth, cand, correspondence, validate(cand), {}, mode);
}

std::string report_csv(const std::vector<DiffReport>& reports,
                       const std::vector<std::string>& labels) {
  if (reports.size() != labels.size())
    throw Error(Errc::PreconditionFailed, "one label per report required");
  std::string out = "label,mode,T1,T2,T3,T4,T5,T6,T7,T8,total\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    std::string label = labels[i];
    if (label.find_first_of(",\"\n") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : label) {
        if (c == '"') quoted += "\"\"";
        else quoted.push_back(c);
      }
      label = quoted + "\"";
    }
    out += label;
    out += reports[i].description_mode == DescriptionMode::Coarse ? ",coarse" : ",detailed";
    for (ErrorType t : kAllTypes) out += "," + std::to_string(reports[i].counts.at(t));
    out += "," + std::to_string(reports[i].total());
    out += "\n";
  }
  return out;
}

std::string report_json(const DiffReport& report) {
  json j;
  j["mode"] = report.description_mode == DescriptionMode::Coarse ? "coarse" : "detailed";
  json counts = json::object();
  for (ErrorType t : kAllTypes) counts[error_type_label(t)] = report.counts.at(t);
  j["counts"] = std::move(counts);
  j["total"] = report.total();
  json records = json::array();
  for (const ErrorRecord& r : report.records) {
    json rec;
    rec["type"] = error_type_label(r.type);
    rec["subkind"] = r.subkind;
    if (r.truth_ref) rec["truth_ref"] = *r.truth_ref;
    if (r.cand_ref) rec["cand_ref"] = *r.cand_ref;
    rec["detail"] = r.detail;
    if (r.systematic) rec["systematic"] = true;
    records.push_back(std::move(rec));
  }
  j["records"] = std::move(records);
  json matched = json::array();
  for (const MatchedPair& p : report.matched_nodes)
    matched.push_back({{"truth", p.truth_id}, {"cand", p.cand_id}, {"tag", p.tag}});
  j["matched_nodes"] = std::move(matched);
  json medges = json::array();
  for (const MatchedPair& p : report.matched_edges)
    medges.push_back({{"truth", p.truth_id}, {"cand", p.cand_id}, {"tag", p.tag}});
  j["matched_edges"] = std::move(medges);
  return j.dump(1) + "\n";
}

} // namespace twinforge
