#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace twinforge {

// Position of a construct in DSL source text, 1-based. end_* is inclusive.
struct SourceSpan {
  std::size_t line = 0;
  std::size_t column = 0;
  std::size_t end_line = 0;
  std::size_t end_column = 0;
};

// One enumerator per failure class the library reports. Keeping them in one
// enum lets the CLI map any Error to an exit code without ad-hoc catch chains.
enum class Errc {
  DuplicateId,        // node or edge id already present in the graph
  DuplicateEdgeId,    // edge id re-added with identical endpoints
  EdgeReuse,          // edge id already bound between a different pair
  UnknownEndpoint,    // connect names a node id the graph does not contain
  PreconditionFailed, // op called on a graph violating its preconditions
  Syntax,             // DSL text does not lex/parse
  UndefinedName,      // DSL reference to a name that is not in scope
  Elaboration,        // structurally valid DSL that cannot be expanded
  Parse,              // netlist text is not well-formed JSON
  Schema,             // well-formed JSON that does not satisfy the netlist shape
  Config,             // bad run configuration (horizon, warmup, ...)
  DegenerateData,     // sample set unusable for the requested fit
  InsufficientData,   // too few samples to fit
  UnsupportedData,    // samples outside the family's support
  NoViableFit,        // every candidate family was skipped
  UnknownFamily,      // distribution family name not recognized
  BindConflict,       // two sample sources target the same parameter
  Spec,               // benchmark spec outside the generator's domain
  Infeasible,         // injection cannot be realized on this graph
  Transport,          // endpoint unreachable / connection failure
  Protocol,           // endpoint reachable but reply is not in contract shape
  Replay,             // replay directory lacks the requested interaction
  Io,                 // filesystem read/write failure
};

const char* errc_name(Errc c);

// Single exception type for the whole library. what() carries a prefixed,
// human-readable message; code()/entity()/span() let callers branch.
class Error : public std::runtime_error {
public:
  Error(Errc code, std::string message, std::string entity = {},
        std::optional<SourceSpan> span = std::nullopt);

  Errc code() const { return code_; }
  const std::string& entity() const { return entity_; }
  const std::optional<SourceSpan>& span() const { return span_; }

private:
  Errc code_;
  std::string entity_;
  std::optional<SourceSpan> span_;
};

} // namespace twinforge
