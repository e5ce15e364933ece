#pragma once

#include <span>
#include <string>
#include <vector>

#include "twinforge/model.hpp"

namespace twinforge {

enum class Severity { Warning, Error };

struct Diagnostic {
  std::string rule;     // "V-ISOLATED", "V-DUP-ID", ...
  Severity severity = Severity::Error;
  std::string entity;   // offending node or edge id
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

struct RuleInfo {
  const char* id;
  const char* summary;
};

// The fixed rule set, in reporting order.
std::span<const RuleInfo> rule_catalog();

// Structural and parameter checks over a flat graph. Deterministic order:
// per-node findings in canonical node order, then per-edge findings, then
// duplicate-id findings. Each concrete violation yields exactly one
// diagnostic; in particular a fully isolated node reports V-ISOLATED alone,
// not the two dangling rules as well, and a splitter/merger with zero
// outgoing/incoming reports dangling, with the arity rules reserved for
// exactly one.
std::vector<Diagnostic> validate(const ModelGraph& graph);

bool has_errors(std::span<const Diagnostic> diagnostics);

} // namespace twinforge
