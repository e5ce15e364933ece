#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "twinforge/model.hpp"
#include "twinforge/validate.hpp"

namespace twinforge {

// The eight-class discrepancy taxonomy. Closed set.
enum class ErrorType {
  T1Naming,
  T2ParamError,
  T3NodeHallucination,
  T4EdgeHallucination,
  T5ParamHallucination,
  T6HierarchyMismatch,
  T7Syntax,
  T8FrameworkViolation,
};

const char* error_type_label(ErrorType t);  // "T1" .. "T8"

struct ErrorRecord {
  ErrorType type = ErrorType::T1Naming;
  std::string subkind;  // dotted refinement ("T1.case", "T3.omitted", ...) or the bare type
  std::optional<std::string> truth_ref;  // entity id on the ground-truth side
  std::optional<std::string> cand_ref;   // entity id on the candidate side
  std::string detail;
  bool systematic = false;  // member of one detected root cause (global index shift)
};

// One matched (truth, candidate) entity pair. tag is empty for exact matches,
// otherwise the T1 subkind the pairing itself implies.
struct MatchedPair {
  std::string truth_id;
  std::string cand_id;
  std::string tag;
};

struct Correspondence {
  std::vector<MatchedPair> nodes;
  std::optional<int> accepted_shift;  // global index shift adopted in stage 3
};

struct MatchConfig {
  bool normalize_case = true;
  std::string separator_set = "_-";  // characters folded together when comparing ids
  bool shift_detection = true;
  double structural_match_threshold = 0.5;  // neighbor-signature similarity floor
};

struct ParseOutcome {
  bool ok = true;
  std::string message;
};

enum class DescriptionMode { Coarse, Detailed };

struct DiffReport {
  std::map<ErrorType, std::size_t> counts;  // all eight keys, zero-filled
  std::vector<ErrorRecord> records;
  std::vector<MatchedPair> matched_nodes;
  std::vector<MatchedPair> matched_edges;
  DescriptionMode description_mode = DescriptionMode::Coarse;

  std::size_t total() const;
};

// Rewrite every maximal digit run in `id` by adding `shift`. Returns nullopt
// when the id has no digit run or any run would go negative. Shared by the
// matcher's shift stage and the fault injector so both sides agree on the
// transform exactly.
std::optional<std::string> shift_integers(const std::string& id, int shift);

// Stage-matched node correspondence. Stages consume only unmatched nodes:
// exact id+kind, then case/separator-folded id, then a global index-shift
// hypothesis (|s| <= 2, adopted only when it shift-maps >= 80% of the
// leftovers AND strictly grows the total pairing), then structural signature
// matching above the similarity threshold. Deterministic: both graphs are
// canonicalized first and every scan runs in canonical order.
Correspondence match_nodes(const ModelGraph& truth, const ModelGraph& cand,
                           const MatchConfig& config = {});

// Classify every discrepancy between the graphs into the taxonomy. A failed
// parse yields a single T7 record and nothing else (there is no graph to
// compare). Each Error-severity candidate diagnostic becomes one T8.
DiffReport classify(const ModelGraph& truth, const ModelGraph& cand,
                    const Correspondence& correspondence,
                    const std::vector<Diagnostic>& cand_diagnostics,
                    const ParseOutcome& parse_outcome = {},
                    DescriptionMode mode = DescriptionMode::Coarse);

// match + validate + classify in one step.
DiffReport diff_models(const ModelGraph& truth, const ModelGraph& cand,
                       const MatchConfig& config = {},
                       DescriptionMode mode = DescriptionMode::Coarse);

// One row per report: label, mode, counts T1..T8, total. Stable column order.
std::string report_csv(const std::vector<DiffReport>& reports,
                       const std::vector<std::string>& labels);

std::string report_json(const DiffReport& report);

} // namespace twinforge
