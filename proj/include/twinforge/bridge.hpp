#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "twinforge/error.hpp"

namespace twinforge {

// Two-step generation contract: a reasoning call that turns a free-text
// description into explicit assumptions, then a generation call that emits
// model IR. The endpoint is opaque; everything it returns is re-checked
// downstream (parse, validate, diff), never trusted.

enum class GenMode { Reason, GenerateIR };

struct GenContext {
  std::string api_summary;
  std::vector<std::string> examples;
};

struct GenRequest {
  GenMode mode = GenMode::Reason;
  std::string description;
  std::vector<std::string> prior_assumptions;
  GenContext context;
};

struct GenResponse {
  std::vector<std::string> assumptions;  // Reason replies
  std::string ir_kind;                   // GenerateIR replies: "dsl" | "netlist"
  std::string ir_text;                   // byte-identical to the payload received
  std::string raw;                       // unmodified reply body, for transcripts
};

// Canonical wire body for a request: fixed key order, no indentation. Doubles
// as the replay key material.
std::string request_wire_json(const GenRequest& request);

// 16 hex digits of the FNV-1a hash of the canonical wire body.
std::string request_hash(const GenRequest& request);

class Endpoint {
 public:
  virtual ~Endpoint() = default;
  virtual GenResponse complete(const GenRequest& request) = 0;
};

// Sets the mode, rejects an empty description before any transport happens,
// and dispatches to the endpoint.
GenResponse reason(Endpoint& endpoint, GenRequest request);
GenResponse generate_ir(Endpoint& endpoint, GenRequest request);

// POSTs the wire JSON to <base_url>/v1/generate with an optional bearer
// token. Connection failures raise TransportError; non-200 statuses and
// malformed reply bodies raise ProtocolError.
class HttpEndpoint : public Endpoint {
 public:
  explicit HttpEndpoint(std::string base_url, std::string api_key = {});
  GenResponse complete(const GenRequest& request) override;

 private:
  std::string base_url_;
  std::string api_key_;
};

// Serves recorded replies from a fixture directory, so the whole pipeline
// runs offline. Each scenario is a subdirectory holding:
//   meta.json    {"requests": {"reason": <hash>, "generate_ir": <hash>}}
//   reason.json  wire reply for the Reason step
//   gen.fdl      IR payload (or gen.json for a netlist reply)
// Lookup is by request hash. When no hash matches, strict mode raises
// ReplayMiss; lenient mode falls back to the first scenario (sorted by name)
// that can answer the requested mode, so hand-run pipelines need not
// reproduce a recorded description byte for byte.
class ReplayEndpoint : public Endpoint {
 public:
  explicit ReplayEndpoint(std::string dir, bool strict = false);
  GenResponse complete(const GenRequest& request) override;

 private:
  std::string dir_;
  bool strict_;
};

struct SessionState {
  std::string description;
  std::vector<std::string> assumptions;
  std::string ir_kind;
  std::string ir_text;
  std::size_t revision = 0;
  std::vector<std::string> history;  // superseded IR texts, oldest first
};

// Refinement step: apply edits (or an explicit re-run of the same inputs),
// retiring the current IR into history and bumping the revision. Requires at
// least one edit unless `rerun` is set.
SessionState iterate(SessionState state,
                     const std::optional<std::string>& edited_description,
                     const std::optional<std::vector<std::string>>& edited_assumptions,
                     bool rerun = false);

// FF_REPLAY_DIR selects a lenient ReplayEndpoint; otherwise FF_ENDPOINT (with
// optional FF_API_KEY) selects an HttpEndpoint; neither set is a ConfigError.
std::unique_ptr<Endpoint> endpoint_from_env();

} // namespace twinforge
