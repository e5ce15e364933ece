#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "twinforge/diff.hpp"
#include "twinforge/model.hpp"

namespace twinforge {

// Benchmark family parameter blocks. Sizes are member counts, not indices.
struct SerialParams {
  std::size_t machines = 1;
};

// `blocks` split/merge stages in series, `lines` parallel lines per stage of
// `machines_per_line` machines each; `long_lines` lines (filled block-major)
// carry one extra machine. Consecutive blocks are joined by one connector
// machine. S35's 112-node / 165-edge layout is Parallel{6, 10, 1, 33}.
struct ParallelParams {
  std::size_t blocks = 1;
  std::size_t lines = 2;
  std::size_t machines_per_line = 1;
  std::size_t long_lines = 0;
};

// Rework loop: a merger feeds a machine chain into a splitter that routes
// either onward to the exit machine or back to the merger.
struct FeedbackParams {
  std::size_t chain = 1;
};

// Parallel edges between the same node pair, exercising routing policies.
struct MultiEdgeParams {
  std::size_t parallel_edges = 2;
  bool conveyors = false;  // the splitter-side bundle becomes conveyors
};

// rows x cols of machines in per-row chains, each row with its own source
// and sink. Absent cells are skipped and the chain bridges over them.
struct GridParams {
  std::size_t rows = 1;
  std::size_t cols = 1;
  std::vector<std::pair<std::size_t, std::size_t>> absent;  // 1-based (row, col)
};

// `width` instances chained at every level, `depth` nesting levels; leaves
// hold two machines. Exercises scopes and the elaborator's instance paths.
struct HierParams {
  std::size_t depth = 1;
  std::size_t width = 2;
};

// Seeded layered DAG with splitter fan-out and merger fan-in, constructively
// validator-clean. Same seed, same graph.
struct IrregularParams {
  std::uint64_t seed = 0;
  std::size_t size = 12;  // machine count
};

using FamilySpec = std::variant<SerialParams, ParallelParams, FeedbackParams,
                                MultiEdgeParams, GridParams, HierParams, IrregularParams>;

struct BenchmarkSpec {
  std::string label;  // S-style tag
  FamilySpec family;
};

// Closed-form expectations computed by counting, not by inspecting the built
// artifacts; tests compare the artifacts against these.
struct BenchManifest {
  GraphStats expected;
  std::size_t netlist_entries = 0;   // node entries + edge entries
  std::size_t dsl_statements = 0;    // recursive statement count of dsl_text
};

struct GeneratedModel {
  BenchmarkSpec spec;
  ModelGraph graph;          // built through the core graph ops
  std::string dsl_text;      // independently emitted; must elaborate to graph
  std::string netlist_text;  // serialized enumerative form
  BenchManifest manifest;
};

GeneratedModel generate(const BenchmarkSpec& spec);

// The 35 reconstructed benchmark systems. Labels are ours; topologies follow
// the published family descriptions, with per-label parameters documented in
// the README.
std::vector<BenchmarkSpec> standard_catalog();

// Pure-grid DSL (no source/sink): n x n machines, right+down neighbor links.
// Elaborates to n^2 nodes and 2n(n-1) edges from a constant statement count.
std::string mesh_dsl(std::size_t n);

// One requested mutation batch. subkind names a taxonomy refinement:
// T1.case, T1.shift, T2, T3.added, T3.omitted, T4.added, T4.omitted, T5,
// T6.flattened, T7, T8.
struct InjectionItem {
  std::string subkind;
  std::size_t count = 1;
  std::uint64_t seed = 0;
};

using InjectionSpec = std::vector<InjectionItem>;

struct InjectionManifest {
  std::map<ErrorType, std::size_t> counts;  // all eight keys
  std::vector<std::string> mutations;       // one line per applied mutation
  std::optional<int> systematic_shift;
};

struct InjectionResult {
  ModelGraph graph;  // mutated candidate
  std::optional<std::string> corrupted_netlist;  // T7 only: unparseable text
  InjectionManifest manifest;
};

// Apply exactly the requested mutations, seeded-deterministically, and
// predict the classified counts analytically. Composition rules: T1.shift
// and T7 stand alone; T6.flattened composes only with additive/parameter
// subkinds (T2, T5, T3.added, T4.added). Throws Infeasible when the graph
// lacks capacity for an item or the composition is unsupported.
InjectionResult inject(const ModelGraph& graph, const InjectionSpec& spec);

InjectionSpec parse_injection_spec(const std::string& json_text);
std::string injection_manifest_json(const InjectionManifest& manifest);

struct CampaignMismatch {
  std::size_t trial = 0;
  std::string label;
  std::string subkinds;
  std::string detail;
};

struct CampaignResult {
  std::size_t trials = 0;
  std::size_t mismatches = 0;
  std::vector<CampaignMismatch> examples;  // first few mismatches, for debugging
  std::size_t total_injected = 0;          // sum of manifest totals
};

// Randomized injection round-trips: draw a catalog graph and a feasible
// mutation batch per trial, inject, classify, compare counts to the
// manifest. `parallel` fans trials out across OpenMP workers when built with
// OpenMP; results are identical either way.
CampaignResult run_injection_campaign(const std::vector<GeneratedModel>& models,
                                      std::size_t trials, std::uint64_t master_seed,
                                      bool parallel);

} // namespace twinforge
