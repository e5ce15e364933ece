#include "twinforge/bridge.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "twinforge/rng.hpp"
#include "text_util.hpp"

namespace twinforge {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

const char* mode_name(GenMode mode) {
  return mode == GenMode::Reason ? "reason" : "generate_ir";
}

void check_request(const GenRequest& request) {
  if (request.description.empty())
    throw Error(Errc::PreconditionFailed, "generation request needs a description");
}

GenResponse parse_reply(const GenRequest& request, const std::string& body) {
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    throw Error(Errc::Protocol, "endpoint reply is not a JSON object");
  GenResponse response;
  response.raw = body;
  if (request.mode == GenMode::Reason) {
    if (!doc.contains("assumptions") || !doc["assumptions"].is_array())
      throw Error(Errc::Protocol, "reasoning reply lacks an 'assumptions' array");
    for (const json& item : doc["assumptions"]) {
      if (!item.is_string())
        throw Error(Errc::Protocol, "assumption entries must be strings");
      response.assumptions.push_back(item.get<std::string>());
    }
    return response;
  }
  if (!doc.contains("ir_kind") || !doc["ir_kind"].is_string() ||
      !doc.contains("ir_text") || !doc["ir_text"].is_string())
    throw Error(Errc::Protocol, "generation reply lacks 'ir_kind'/'ir_text' strings");
  response.ir_kind = doc["ir_kind"].get<std::string>();
  if (response.ir_kind != "dsl" && response.ir_kind != "netlist")
    throw Error(Errc::Protocol, "unknown ir_kind '" + response.ir_kind + "'");
  response.ir_text = doc["ir_text"].get<std::string>();
  return response;
}

} // namespace

std::string request_wire_json(const GenRequest& request) {
  json j;
  j["mode"] = mode_name(request.mode);
  j["description"] = request.description;
  j["assumptions"] = request.prior_assumptions;
  j["context"] = {{"api_summary", request.context.api_summary},
                  {"examples", request.context.examples}};
  return j.dump();
}

std::string request_hash(const GenRequest& request) {
  const std::uint64_t h = fnv1a64(request_wire_json(request));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

GenResponse reason(Endpoint& endpoint, GenRequest request) {
  request.mode = GenMode::Reason;
  return endpoint.complete(request);
}

GenResponse generate_ir(Endpoint& endpoint, GenRequest request) {
  request.mode = GenMode::GenerateIR;
  return endpoint.complete(request);
}

// ---- HTTP -------------------------------------------------------------

HttpEndpoint::HttpEndpoint(std::string base_url, std::string api_key)
    : base_url_(std::move(base_url)), api_key_(std::move(api_key)) {
  if (base_url_.empty()) throw Error(Errc::Config, "endpoint URL is empty");
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

GenResponse HttpEndpoint::complete(const GenRequest& request) {
  check_request(request);
  httplib::Client client(base_url_);
  client.set_connection_timeout(10);
  client.set_read_timeout(60);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  const httplib::Result res =
      client.Post("/v1/generate", headers, request_wire_json(request), "application/json");
  if (!res)
    throw Error(Errc::Transport,
                "endpoint unreachable: " + httplib::to_string(res.error()), base_url_);
  if (res->status != 200)
    throw Error(Errc::Protocol,
                "endpoint returned status " + std::to_string(res->status), base_url_);
  return parse_reply(request, res->body);
}

// ---- replay fixtures -----------------------------------------------------

ReplayEndpoint::ReplayEndpoint(std::string dir, bool strict)
    : dir_(std::move(dir)), strict_(strict) {
  if (!fs::is_directory(dir_))
    throw Error(Errc::Io, "replay directory not found", dir_);
}

GenResponse ReplayEndpoint::complete(const GenRequest& request) {
  check_request(request);
  const std::string wanted = request_hash(request);
  const std::string mode = mode_name(request.mode);

  struct Scenario {
    std::string name;
    fs::path path;
    std::string hash;  // recorded hash for this mode, empty if absent
  };
  std::vector<Scenario> scenarios;
  auto add_scenario = [&](const fs::path& path) {
    const fs::path meta_path = path / "meta.json";
    if (!fs::exists(meta_path)) return;
    json meta = json::parse(read_file(meta_path.string()), nullptr, false);
    if (meta.is_discarded() || !meta.is_object())
      throw Error(Errc::Replay, "meta.json is not a JSON object",
                  path.filename().string());
    Scenario s;
    s.name = path.filename().string();
    s.path = path;
    if (meta.contains("requests") && meta["requests"].is_object() &&
        meta["requests"].contains(mode) && meta["requests"][mode].is_string())
      s.hash = meta["requests"][mode].get<std::string>();
    scenarios.push_back(std::move(s));
  };
  // The directory may itself be one scenario, or a collection of them.
  add_scenario(dir_);
  if (scenarios.empty())
    for (const fs::directory_entry& entry : fs::directory_iterator(dir_))
      if (entry.is_directory()) add_scenario(entry.path());
  std::sort(scenarios.begin(), scenarios.end(),
            [](const Scenario& a, const Scenario& b) { return a.name < b.name; });

  auto serve = [&](const Scenario& s) -> GenResponse {
    if (request.mode == GenMode::Reason) {
      const fs::path file = s.path / "reason.json";
      if (!fs::exists(file))
        throw Error(Errc::Replay, "scenario lacks reason.json", s.name);
      return parse_reply(request, read_file(file.string()));
    }
    for (const auto& [file, kind] :
         {std::pair<const char*, const char*>{"gen.fdl", "dsl"}, {"gen.json", "netlist"}}) {
      const fs::path path = s.path / file;
      if (!fs::exists(path)) continue;
      GenResponse response;
      response.ir_kind = kind;
      response.ir_text = read_file(path.string());
      response.raw = response.ir_text;
      return response;
    }
    throw Error(Errc::Replay, "scenario lacks gen.fdl or gen.json", s.name);
  };

  for (const Scenario& s : scenarios)
    if (!s.hash.empty() && s.hash == wanted) return serve(s);
  if (strict_)
    throw Error(Errc::Replay, "no fixture recorded for request " + wanted, dir_);
  for (const Scenario& s : scenarios) {
    const bool can_answer =
        request.mode == GenMode::Reason
            ? fs::exists(s.path / "reason.json")
            : fs::exists(s.path / "gen.fdl") || fs::exists(s.path / "gen.json");
    if (can_answer) return serve(s);
  }
  throw Error(Errc::Replay, "no fixture can answer a " + std::string(mode) + " request",
              dir_);
}

// ---- session --------------------------------------------------------------

SessionState iterate(SessionState state,
                     const std::optional<std::string>& edited_description,
                     const std::optional<std::vector<std::string>>& edited_assumptions,
                     bool rerun) {
  if (!edited_description && !edited_assumptions && !rerun)
    throw Error(Errc::PreconditionFailed,
                "iteration needs an edit or an explicit re-run");
  if (!state.ir_text.empty()) {
    state.history.push_back(state.ir_text);
    state.ir_text.clear();
    state.ir_kind.clear();
  }
  if (edited_description) state.description = *edited_description;
  if (edited_assumptions) state.assumptions = *edited_assumptions;
  ++state.revision;
  return state;
}

std::unique_ptr<Endpoint> endpoint_from_env() {
  if (const char* dir = std::getenv("FF_REPLAY_DIR"))
    return std::make_unique<ReplayEndpoint>(dir, false);
  if (const char* url = std::getenv("FF_ENDPOINT")) {
    const char* key = std::getenv("FF_API_KEY");
    return std::make_unique<HttpEndpoint>(url, key ? key : "");
  }
  throw Error(Errc::Config, "set FF_REPLAY_DIR or FF_ENDPOINT to choose an endpoint");
}

} // namespace twinforge
