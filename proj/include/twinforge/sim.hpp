#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "twinforge/model.hpp"

namespace twinforge {

struct SimConfig {
  double horizon = 0.0;   // events strictly after this are not processed;
                          // events exactly at the horizon still count
  double warmup = 0.0;    // KPIs measured over (warmup, horizon]
  std::uint64_t seed = 0;
  bool record_trace = false;
};

enum class TraceKind { Arrive, Start, Finish, Block, Unblock, Exit };

const char* trace_kind_name(TraceKind k);

// entity is "item-<n>@<element>": arrive names the edge being entered,
// start/finish/block/unblock the machine (or source) involved, exit the sink.
struct TraceEvent {
  double time = 0.0;
  std::string entity;
  TraceKind kind = TraceKind::Arrive;

  bool operator==(const TraceEvent&) const = default;
};

struct SimReport {
  double horizon = 0.0;
  double warmup = 0.0;
  std::uint64_t seed = 0;

  std::map<std::string, double> throughput;  // per sink, items/s post-warmup
  std::size_t completed = 0;                 // absorptions in (warmup, horizon]
  std::size_t created = 0;                   // items that entered the system, whole run
  bool cycle_stats_defined = false;          // false when nothing completed post-warmup
  double cycle_time_mean = 0.0;
  double cycle_time_p95 = 0.0;
  std::map<std::string, double> utilization;     // per machine, in-service fraction
  double wip = 0.0;                              // time-averaged items in system
  std::map<std::string, std::size_t> max_occupancy;  // per edge, whole run

  std::vector<TraceEvent> trace;  // populated when config.record_trace
};

// Deterministic discrete-event run. Requires a graph that validates with no
// Error-severity findings (PreconditionFailed otherwise) and a config with
// horizon > 0, 0 <= warmup < horizon (ConfigError otherwise). Same
// (graph, seed) gives an identical report and byte-identical trace.
SimReport simulate(const ModelGraph& graph, const SimConfig& config);

std::string trace_csv(const std::vector<TraceEvent>& trace);
std::string report_json(const SimReport& report);

struct LittleCheck {
  bool defined = false;  // false when the run completed nothing post-warmup
  double wip = 0.0;           // L: time-averaged items in system
  double lambda_w = 0.0;      // arrival_rate x mean cycle time
  double rel_err = 0.0;       // |L - lambda W| / L
};

// Little's law consistency: L vs lambda x W over the post-warmup window.
LittleCheck little_check(const SimReport& report, double arrival_rate);

} // namespace twinforge
