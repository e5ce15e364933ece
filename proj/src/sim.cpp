#include "twinforge/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <sstream>

#include <nlohmann/json.hpp>

#include "text_util.hpp"
#include "twinforge/rng.hpp"
#include "twinforge/validate.hpp"

namespace twinforge {

const char* trace_kind_name(TraceKind k) {
  switch (k) {
    case TraceKind::Arrive: return "arrive";
    case TraceKind::Start: return "start";
    case TraceKind::Finish: return "finish";
    case TraceKind::Block: return "block";
    case TraceKind::Unblock: return "unblock";
    case TraceKind::Exit: return "exit";
  }
  return "?";
}

namespace {

struct Item {
  std::uint64_t seq = 0;
  double entered = 0.0;  // time it left its source; cycle time base
};

struct EdgeState {
  std::string id;
  std::size_t capacity = 1;
  double transit = 0.0;  // 0 for buffers
  std::deque<std::pair<Item, double>> queue;  // item, ready time
  std::size_t max_occupancy = 0;

  bool full() const { return queue.size() >= capacity; }
  bool head_ready(double now) const {
    return !queue.empty() && queue.front().second <= now;
  }
};

struct Channel {
  bool busy = false;      // in service
  bool holding = false;   // service done, item waiting to push
  bool blocked_logged = false;
  Item item;
  double start = 0.0;
  double finish = 0.0;
};

// Delay or inter-arrival time: a plain number costs no random draws, so
// adding a stochastic element elsewhere never shifts this one's schedule.
struct Sampler {
  bool stochastic = false;
  double fixed = 0.0;
  DistSpec dist;

  double draw(Rng& rng) const { return stochastic ? sample(dist, rng) : fixed; }
};

struct NodeState {
  const Node* node = nullptr;
  std::vector<std::size_t> in_edges;   // indices into edge states, canonical order
  std::vector<std::size_t> out_edges;

  // Machine
  std::vector<Channel> channels;
  Sampler delay;
  double busy_accum = 0.0;

  // Source
  Sampler interval;
  bool always_available = false;
  bool pending = false;  // emitted item waiting for buffer space
  Item pending_item;
  bool source_blocked_logged = false;

  // Splitter / merger
  bool round_robin = false;
  std::size_t rr_index = 0;

  Rng rng{0};
};

enum class EventType { Finish = 0, Ready = 1, Emit = 2 };

struct Event {
  double time = 0.0;
  EventType type = EventType::Finish;
  std::size_t rank = 0;     // node or edge index, canonical
  std::size_t channel = 0;

  bool operator>(const Event& o) const {
    if (time != o.time) return time > o.time;
    if (type != o.type) return type > o.type;
    if (rank != o.rank) return rank > o.rank;
    return channel > o.channel;
  }
};

class Engine {
public:
  Engine(const ModelGraph& graph, const SimConfig& config)
      : graph_(canonical_form(graph)), config_(config) {}

  SimReport run() {
    build();
    cascade(0.0);
    while (!calendar_.empty() && calendar_.top().time <= config_.horizon) {
      const double now = calendar_.top().time;
      while (!calendar_.empty() && calendar_.top().time == now) {
        apply(calendar_.top());
        calendar_.pop();
      }
      cascade(now);
    }
    return finish_report();
  }

private:
  ModelGraph graph_;
  SimConfig config_;
  std::vector<NodeState> nodes_;
  std::vector<EdgeState> edges_;
  std::map<std::string_view, std::size_t> node_index_;
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> calendar_;
  SimReport report_;

  std::uint64_t next_item_ = 0;
  std::size_t items_in_system_ = 0;
  double wip_integral_ = 0.0;
  double wip_last_t_ = 0.0;
  std::vector<double> cycle_times_;
  std::map<std::string, std::size_t> sink_exits_;

  static double param_number(const ParamMap& params, const char* name, double fallback) {
    auto it = params.find(name);
    if (it == params.end() || it->second.type != ParamValue::Type::Number) return fallback;
    return it->second.number;
  }

  static Sampler make_sampler(const ParamMap& params, const char* name) {
    Sampler s;
    auto it = params.find(name);
    if (it == params.end()) return s;
    if (it->second.type == ParamValue::Type::Number) {
      s.fixed = it->second.number;
    } else if (it->second.type == ParamValue::Type::Dist) {
      s.stochastic = true;
      s.dist = it->second.dist;
    }
    return s;
  }

  void build() {
    const auto diagnostics = validate(graph_);
    if (has_errors(diagnostics)) {
      for (const auto& d : diagnostics)
        if (d.severity == Severity::Error)
          throw Error(Errc::PreconditionFailed,
                      "graph does not validate: " + d.rule + " on " + d.entity, d.entity);
    }
    if (!(config_.horizon > 0.0))
      throw Error(Errc::Config, "horizon must be positive");
    if (config_.warmup < 0.0 || config_.warmup >= config_.horizon)
      throw Error(Errc::Config, "warmup must satisfy 0 <= warmup < horizon");

    report_.horizon = config_.horizon;
    report_.warmup = config_.warmup;
    report_.seed = config_.seed;

    edges_.reserve(graph_.edges.size());
    for (const auto& e : graph_.edges) {
      EdgeState state;
      state.id = e.id;
      state.capacity = static_cast<std::size_t>(param_number(e.params, "capacity", 1.0));
      if (e.kind == EdgeKind::Conveyor)
        state.transit = param_number(e.params, "transit_delay", 0.0);
      edges_.push_back(std::move(state));
    }

    nodes_.reserve(graph_.nodes.size());
    for (std::size_t i = 0; i < graph_.nodes.size(); ++i) {
      const Node& n = graph_.nodes[i];
      node_index_[n.id] = i;
      NodeState state;
      state.node = &n;
      state.rng = Rng(derive_stream_seed(config_.seed, n.id));
      switch (n.kind) {
        case NodeKind::Machine: {
          const double capacity = param_number(n.params, "work_capacity", 1.0);
          state.channels.resize(static_cast<std::size_t>(std::max(1.0, capacity)));
          state.delay = make_sampler(n.params, "delay");
          break;
        }
        case NodeKind::Source: {
          state.interval = make_sampler(n.params, "inter_arrival");
          state.always_available = !state.interval.stochastic && state.interval.fixed == 0.0;
          break;
        }
        case NodeKind::Splitter:
        case NodeKind::Merger: {
          auto it = n.params.find("policy");
          state.round_robin =
              it == n.params.end() || it->second.text != kPolicyFirstAvailable;
          break;
        }
        default:
          break;
      }
      nodes_.push_back(std::move(state));
    }

    // Adjacency in canonical edge order (edges_ is already sorted by id).
    for (std::size_t ei = 0; ei < graph_.edges.size(); ++ei) {
      const Edge& e = graph_.edges[ei];
      nodes_[node_index_[e.from]].out_edges.push_back(ei);
      nodes_[node_index_[e.to]].in_edges.push_back(ei);
    }

    // First emission of a timed source happens one interval after t = 0.
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      NodeState& s = nodes_[i];
      if (s.node->kind == NodeKind::Source && !s.always_available)
        calendar_.push({s.interval.draw(s.rng), EventType::Emit, i, 0});
    }
  }

  void trace(double time, TraceKind kind, const Item& item, const std::string& where) {
    if (!config_.record_trace) return;
    report_.trace.push_back(
        {time, "item-" + std::to_string(item.seq) + "@" + where, kind});
  }

  void wip_step(double now, int delta) {
    const double lo = std::max(wip_last_t_, config_.warmup);
    if (now > lo) wip_integral_ += static_cast<double>(items_in_system_) * (now - lo);
    if (now > wip_last_t_) wip_last_t_ = now;
    items_in_system_ = static_cast<std::size_t>(
        static_cast<long long>(items_in_system_) + delta);
  }

  double window_overlap(double lo, double hi) const {
    const double a = std::max(lo, config_.warmup);
    const double b = std::min(hi, config_.horizon);
    return b > a ? b - a : 0.0;
  }

  // Push an item onto an edge; caller checked for space.
  void push_edge(std::size_t ei, const Item& item, double now) {
    EdgeState& e = edges_[ei];
    const double ready = now + e.transit;
    e.queue.emplace_back(item, ready);
    e.max_occupancy = std::max(e.max_occupancy, e.queue.size());
    trace(now, TraceKind::Arrive, item, e.id);
    if (e.transit > 0.0) calendar_.push({ready, EventType::Ready, ei, 0});
  }

  // First out edge with space, in canonical order; npos when all full.
  std::size_t first_open(const std::vector<std::size_t>& out) const {
    for (std::size_t ei : out)
      if (!edges_[ei].full()) return ei;
    return static_cast<std::size_t>(-1);
  }

  std::size_t first_ready(const std::vector<std::size_t>& in, double now) const {
    for (std::size_t ei : in)
      if (edges_[ei].head_ready(now)) return ei;
    return static_cast<std::size_t>(-1);
  }

  void apply(const Event& ev) {
    switch (ev.type) {
      case EventType::Finish: {
        NodeState& m = nodes_[ev.rank];
        Channel& ch = m.channels[ev.channel];
        ch.busy = false;
        ch.holding = true;
        m.busy_accum += window_overlap(ch.start, ch.finish);
        trace(ev.time, TraceKind::Finish, ch.item, m.node->id);
        break;
      }
      case EventType::Ready:
        break;  // wakes the cascade; readiness is derived from time
      case EventType::Emit: {
        NodeState& s = nodes_[ev.rank];
        s.pending = true;
        s.pending_item = {next_item_++, ev.time};
        break;
      }
    }
  }

  bool try_source(std::size_t ni, double now) {
    NodeState& s = nodes_[ni];
    bool progress = false;
    if (s.always_available) {
      // Always-available: materialize items only when there is room, so a
      // full line simply exerts backpressure with no loss and no churn.
      for (;;) {
        const std::size_t ei = first_open(s.out_edges);
        if (ei == static_cast<std::size_t>(-1)) break;
        Item item{next_item_++, now};
        wip_step(now, +1);
        ++report_.created;
        push_edge(ei, item, now);
        progress = true;
      }
      return progress;
    }
    if (!s.pending) return false;
    const std::size_t ei = first_open(s.out_edges);
    if (ei == static_cast<std::size_t>(-1)) {
      if (!s.source_blocked_logged) {
        trace(now, TraceKind::Block, s.pending_item, s.node->id);
        s.source_blocked_logged = true;
      }
      return false;
    }
    if (s.source_blocked_logged) {
      trace(now, TraceKind::Unblock, s.pending_item, s.node->id);
      s.source_blocked_logged = false;
    }
    s.pending = false;
    s.pending_item.entered = now;
    wip_step(now, +1);
    ++report_.created;
    push_edge(ei, s.pending_item, now);
    // Next emission is clocked from the successful hand-off.
    calendar_.push({now + s.interval.draw(s.rng), EventType::Emit, ni, 0});
    return true;
  }

  bool try_machine(std::size_t ni, double now) {
    NodeState& m = nodes_[ni];
    bool progress = false;
    for (Channel& ch : m.channels) {
      if (!ch.holding) continue;
      const std::size_t ei = first_open(m.out_edges);
      if (ei == static_cast<std::size_t>(-1)) {
        if (!ch.blocked_logged) {
          trace(now, TraceKind::Block, ch.item, m.node->id);
          ch.blocked_logged = true;
        }
        continue;
      }
      if (ch.blocked_logged) {
        trace(now, TraceKind::Unblock, ch.item, m.node->id);
        ch.blocked_logged = false;
      }
      push_edge(ei, ch.item, now);
      ch.holding = false;
      progress = true;
    }
    for (std::size_t ci = 0; ci < m.channels.size(); ++ci) {
      Channel& ch = m.channels[ci];
      if (ch.busy || ch.holding) continue;
      const std::size_t ei = first_ready(m.in_edges, now);
      if (ei == static_cast<std::size_t>(-1)) break;
      ch.item = edges_[ei].queue.front().first;
      edges_[ei].queue.pop_front();
      ch.busy = true;
      ch.start = now;
      ch.finish = now + m.delay.draw(m.rng);
      trace(now, TraceKind::Start, ch.item, m.node->id);
      calendar_.push({ch.finish, EventType::Finish, ni, ci});
      progress = true;
    }
    return progress;
  }

  bool try_router(std::size_t ni, double now) {
    NodeState& r = nodes_[ni];
    const bool splitter = r.node->kind == NodeKind::Splitter;
    bool progress = false;
    for (;;) {
      std::size_t in_ei, out_ei;
      if (splitter) {
        // Policy governs the out side; the in side drains first-available.
        if (r.round_robin) {
          out_ei = r.out_edges.empty() ? static_cast<std::size_t>(-1)
                                       : r.out_edges[r.rr_index % r.out_edges.size()];
          if (out_ei != static_cast<std::size_t>(-1) && edges_[out_ei].full())
            out_ei = static_cast<std::size_t>(-1);  // strict rotation: wait
        } else {
          out_ei = first_open(r.out_edges);
        }
        in_ei = first_ready(r.in_edges, now);
      } else {
        // Merger: policy governs the in side.
        out_ei = first_open(r.out_edges);
        if (r.round_robin) {
          in_ei = r.in_edges.empty() ? static_cast<std::size_t>(-1)
                                     : r.in_edges[r.rr_index % r.in_edges.size()];
          if (in_ei != static_cast<std::size_t>(-1) && !edges_[in_ei].head_ready(now))
            in_ei = static_cast<std::size_t>(-1);
        } else {
          in_ei = first_ready(r.in_edges, now);
        }
      }
      if (in_ei == static_cast<std::size_t>(-1) || out_ei == static_cast<std::size_t>(-1))
        return progress;
      const Item item = edges_[in_ei].queue.front().first;
      edges_[in_ei].queue.pop_front();
      push_edge(out_ei, item, now);
      if (r.round_robin) ++r.rr_index;
      progress = true;
    }
  }

  bool try_sink(std::size_t ni, double now) {
    NodeState& s = nodes_[ni];
    bool progress = false;
    for (;;) {
      const std::size_t ei = first_ready(s.in_edges, now);
      if (ei == static_cast<std::size_t>(-1)) return progress;
      const Item item = edges_[ei].queue.front().first;
      edges_[ei].queue.pop_front();
      trace(now, TraceKind::Exit, item, s.node->id);
      wip_step(now, -1);
      if (now > config_.warmup) {
        ++report_.completed;
        ++sink_exits_[s.node->id];
        cycle_times_.push_back(now - item.entered);
      }
      progress = true;
    }
  }

  void cascade(double now) {
    // Zero-time moves chain arbitrarily deep (router hops, freed buffers),
    // so sweep nodes in canonical order until a full pass changes nothing.
    // The pass bound only trips on a router-only cycle, which never settles.
    for (std::size_t pass = 0;; ++pass) {
      if (pass > 1000000)
        throw Error(Errc::Config, "zero-delay routing cycle never settles at t=" +
                                      format_double(now));
      bool progress = false;
      for (std::size_t ni = 0; ni < nodes_.size(); ++ni) {
        switch (nodes_[ni].node->kind) {
          case NodeKind::Source: progress |= try_source(ni, now); break;
          case NodeKind::Machine: progress |= try_machine(ni, now); break;
          case NodeKind::Splitter:
          case NodeKind::Merger: progress |= try_router(ni, now); break;
          case NodeKind::Sink: progress |= try_sink(ni, now); break;
        }
      }
      if (!progress) return;
    }
  }

  SimReport finish_report() {
    const double horizon = config_.horizon;
    const double window = horizon - config_.warmup;

    // Close out open intervals: WIP to the horizon, channels still serving.
    const double lo = std::max(wip_last_t_, config_.warmup);
    if (horizon > lo) wip_integral_ += static_cast<double>(items_in_system_) * (horizon - lo);
    report_.wip = wip_integral_ / window;

    for (NodeState& n : nodes_) {
      if (n.node->kind != NodeKind::Machine) continue;
      double busy = n.busy_accum;
      for (const Channel& ch : n.channels)
        if (ch.busy) busy += window_overlap(ch.start, horizon);
      report_.utilization[n.node->id] =
          busy / (window * static_cast<double>(n.channels.size()));
    }

    for (const auto& n : graph_.nodes)
      if (n.kind == NodeKind::Sink)
        report_.throughput[n.id] =
            static_cast<double>(sink_exits_.count(n.id) ? sink_exits_[n.id] : 0) / window;

    for (const EdgeState& e : edges_) report_.max_occupancy[e.id] = e.max_occupancy;

    if (!cycle_times_.empty()) {
      report_.cycle_stats_defined = true;
      double sum = 0.0;
      for (double ct : cycle_times_) sum += ct;
      report_.cycle_time_mean = sum / static_cast<double>(cycle_times_.size());
      std::vector<double> sorted = cycle_times_;
      std::sort(sorted.begin(), sorted.end());
      const std::size_t n = sorted.size();
      const std::size_t idx =
          static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
      report_.cycle_time_p95 = sorted[std::min(n - 1, idx == 0 ? 0 : idx - 1)];
    }
    return std::move(report_);
  }
};

} // namespace

SimReport simulate(const ModelGraph& graph, const SimConfig& config) {
  return Engine(graph, config).run();
}

std::string trace_csv(const std::vector<TraceEvent>& trace) {
  std::ostringstream out;
  out << "time,entity,event\n";
  for (const auto& ev : trace)
    out << format_double(ev.time) << "," << ev.entity << "," << trace_kind_name(ev.kind)
        << "\n";
  return out.str();
}

std::string report_json(const SimReport& report) {
  nlohmann::ordered_json doc;
  doc["horizon"] = report.horizon;
  doc["warmup"] = report.warmup;
  doc["seed"] = report.seed;
  doc["completed"] = report.completed;
  doc["created"] = report.created;
  doc["throughput"] = report.throughput;
  if (report.cycle_stats_defined) {
    doc["cycle_time"] = {{"mean", report.cycle_time_mean}, {"p95", report.cycle_time_p95}};
  } else {
    doc["cycle_time"] = nullptr;
  }
  doc["utilization"] = report.utilization;
  doc["wip"] = report.wip;
  doc["max_occupancy"] = report.max_occupancy;
  return doc.dump(1) + "\n";
}

LittleCheck little_check(const SimReport& report, double arrival_rate) {
  LittleCheck check;
  if (!report.cycle_stats_defined || report.wip <= 0.0) return check;
  check.defined = true;
  check.wip = report.wip;
  check.lambda_w = arrival_rate * report.cycle_time_mean;
  check.rel_err = std::abs(check.wip - check.lambda_w) / check.wip;
  return check;
}

} // namespace twinforge
