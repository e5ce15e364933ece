#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <string>

#include "helpers.hpp"
#include "twinforge/sim.hpp"
#include "twinforge/validate.hpp"

using namespace twinforge;
using tf_test::make_line;

namespace {

SimConfig cfg(double horizon, double warmup, std::uint64_t seed,
              bool trace = false) {
  SimConfig c;
  c.horizon = horizon;
  c.warmup = warmup;
  c.seed = seed;
  c.record_trace = trace;
  return c;
}

// "item-12@B3" -> {"item-12", "B3"}
std::pair<std::string, std::string> split_entity(const std::string& entity) {
  auto at = entity.find('@');
  REQUIRE(at != std::string::npos);
  return {entity.substr(0, at), entity.substr(at + 1)};
}

} // namespace

TEST_SUITE("sim/contract") {
  TEST_CASE("rejects graphs that do not validate") {
    ModelGraph g = make_line(1, ParamValue::of(2.0));
    g.edges.pop_back();  // M1 dangles
    try {
      simulate(g, cfg(10, 0, 1));
      FAIL("expected PreconditionFailed");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::PreconditionFailed);
    }
  }

  TEST_CASE("warnings alone do not block a run") {
    ModelGraph g = make_line(1, ParamValue::of(2.0));
    Node spare;
    spare.id = "SPARE";
    spare.kind = NodeKind::Sink;
    g = add_node(std::move(g), std::move(spare));
    REQUIRE_FALSE(has_errors(validate(g)));
    SimReport r = simulate(g, cfg(10, 0, 1));
    CHECK(r.completed > 0);
    CHECK(r.throughput.count("SPARE") == 1);  // reported, with zero flow
    CHECK(r.throughput.at("SPARE") == 0.0);
  }

  TEST_CASE("config bounds") {
    ModelGraph g = make_line(1, ParamValue::of(2.0));
    CHECK_THROWS_AS(simulate(g, cfg(0, 0, 1)), Error);
    CHECK_THROWS_AS(simulate(g, cfg(-5, 0, 1)), Error);
    CHECK_THROWS_AS(simulate(g, cfg(10, 10, 1)), Error);
    CHECK_THROWS_AS(simulate(g, cfg(10, 12, 1)), Error);
    CHECK_THROWS_AS(simulate(g, cfg(10, -1, 1)), Error);
    try {
      simulate(g, cfg(10, 10, 1));
    } catch (const Error& e) {
      CHECK(e.code() == Errc::Config);
    }
  }
}

TEST_SUITE("sim/deterministic-lines") {
  TEST_CASE("uncontended line: every item takes the pure service time") {
    // Arrivals every 2, three unit-delay machines, no queueing anywhere.
    ModelGraph g = make_line(3, ParamValue::of(2.0));
    SimReport r = simulate(g, cfg(1000, 100, 42));
    CHECK(r.throughput.at("SINK") == doctest::Approx(0.5).epsilon(0.01));
    CHECK(r.cycle_stats_defined);
    CHECK(r.cycle_time_mean == doctest::Approx(3.0));
    CHECK(r.cycle_time_p95 == doctest::Approx(3.0));
    // Each machine busy 1 of every 2 seconds.
    CHECK(r.utilization.at("M1") == doctest::Approx(0.5).epsilon(0.01));
    CHECK(r.utilization.at("M3") == doctest::Approx(0.5).epsilon(0.01));
    // 1.5 items in flight on average (3 stations x 0.5 utilization).
    CHECK(r.wip == doctest::Approx(1.5).epsilon(0.02));
  }

  TEST_CASE("saturated line: throughput converges to the bottleneck rate") {
    ModelGraph g = make_line(3, ParamValue::of(0.5), {1.0, 2.0, 1.0});
    SimReport r = simulate(g, cfg(5000, 500, 7));
    CHECK(r.throughput.at("SINK") == doctest::Approx(0.5).epsilon(0.01));
    // The bottleneck machine never starves post-warmup.
    CHECK(r.utilization.at("M2") == doctest::Approx(1.0).epsilon(0.01));
    CHECK(r.created >= r.completed);
  }

  TEST_CASE("blocking propagates upstream through full buffers") {
    ModelGraph g = make_line(2, ParamValue::of(0.5), {0.5, 2.0});
    SimReport r = simulate(g, cfg(200, 0, 3, true));
    REQUIRE_FALSE(r.trace.empty());
    bool saw_block = false, saw_unblock = false;
    for (const auto& ev : r.trace) {
      if (ev.kind == TraceKind::Block) saw_block = true;
      if (ev.kind == TraceKind::Unblock) saw_unblock = true;
    }
    CHECK(saw_block);
    CHECK(saw_unblock);
    // M1 finishes fast but spends most of its time blocked on B1.
    CHECK(r.utilization.at("M1") < 0.5);
  }
}

TEST_SUITE("sim/trace") {
  TEST_CASE("same seed gives a byte-identical trace") {
    ModelGraph g = make_line(2, ParamValue::of(DistSpec::exponential(0.8)),
                             {1.0, 1.0}, 3);
    SimReport a = simulate(g, cfg(500, 50, 99, true));
    SimReport b = simulate(g, cfg(500, 50, 99, true));
    CHECK(a.trace == b.trace);
    CHECK(trace_csv(a.trace) == trace_csv(b.trace));
    CHECK(report_json(a) == report_json(b));

    SimReport c = simulate(g, cfg(500, 50, 100, true));
    CHECK(trace_csv(a.trace) != trace_csv(c.trace));
  }

  TEST_CASE("trace times never go backwards") {
    ModelGraph g = make_line(3, ParamValue::of(DistSpec::uniform(0.5, 1.5)));
    SimReport r = simulate(g, cfg(300, 0, 5, true));
    REQUIRE(r.trace.size() > 10);
    for (std::size_t i = 1; i < r.trace.size(); ++i)
      CHECK(r.trace[i].time >= r.trace[i - 1].time);
  }

  TEST_CASE("every item is conserved: arrive once, exit at most once") {
    ModelGraph g = make_line(2, ParamValue::of(DistSpec::exponential(1.0)));
    SimReport r = simulate(g, cfg(400, 0, 11, true));
    std::map<std::string, std::size_t> exits;
    std::set<std::string> items;
    for (const auto& ev : r.trace) {
      auto [item, element] = split_entity(ev.entity);
      items.insert(item);
      if (ev.kind == TraceKind::Exit) ++exits[item];
    }
    for (const auto& [item, n] : exits) CHECK(n == 1);
    // Whole-run exits can only trail the item count.
    CHECK(exits.size() <= items.size());
    // Start/Finish pair up per item and station.
    std::map<std::string, int> open;
    for (const auto& ev : r.trace) {
      if (ev.kind == TraceKind::Start) ++open[ev.entity];
      if (ev.kind == TraceKind::Finish) --open[ev.entity];
    }
    for (const auto& [key, n] : open) {
      CHECK(n >= 0);
      CHECK(n <= 1);  // an unmatched Start only at the horizon cut
    }
  }

  TEST_CASE("occupancy never exceeds configured capacity") {
    ModelGraph g = make_line(3, ParamValue::of(DistSpec::exponential(2.0)),
                             {0.4, 1.2, 0.6}, 2);
    SimReport r = simulate(g, cfg(500, 0, 13));
    for (const auto& e : g.edges) {
      REQUIRE(r.max_occupancy.count(e.id) == 1);
      CHECK(r.max_occupancy.at(e.id) <=
            static_cast<std::size_t>(e.params.at("capacity").number));
    }
    // The buffer in front of the slow machine actually fills.
    CHECK(r.max_occupancy.at("B1") == 2);
  }

  TEST_CASE("csv layout: time,entity,event") {
    ModelGraph g = make_line(1, ParamValue::of(2.0));
    SimReport r = simulate(g, cfg(10, 0, 1, true));
    const std::string csv = trace_csv(r.trace);
    CHECK(csv.rfind("time,entity,event\n", 0) == 0);
    CHECK(csv.find(",item-0@") != std::string::npos);
    CHECK(csv.find(",exit\n") != std::string::npos);
  }
}

TEST_SUITE("sim/routing") {
  TEST_CASE("round-robin splitter alternates branches exactly") {
    // SRC -> SP -> {M1, M2} -> two sinks; equal deterministic service.
    ModelGraph g;
    auto add = [&](const char* id, NodeKind kind, ParamMap params = {}) {
      Node n;
      n.id = id;
      n.kind = kind;
      n.params = std::move(params);
      g = add_node(std::move(g), std::move(n));
    };
    add("SRC", NodeKind::Source, {{"inter_arrival", ParamValue::of(1.0)}});
    add("SP", NodeKind::Splitter, {{"policy", ParamValue::of(std::string(kPolicyRoundRobin))}});
    add("M1", NodeKind::Machine, {{"delay", ParamValue::of(0.5)}});
    add("M2", NodeKind::Machine, {{"delay", ParamValue::of(0.5)}});
    add("K1", NodeKind::Sink);
    add("K2", NodeKind::Sink);
    auto buf = [&](const char* id, const char* from, const char* to) {
      Edge e;
      e.id = id;
      e.kind = EdgeKind::Buffer;
      e.params["capacity"] = ParamValue::of(2.0);
      g = connect(std::move(g), from, std::move(e), to);
    };
    buf("E0", "SRC", "SP");
    buf("E1", "SP", "M1");
    buf("E2", "SP", "M2");
    buf("E3", "M1", "K1");
    buf("E4", "M2", "K2");
    REQUIRE_FALSE(has_errors(validate(g)));

    SimReport r = simulate(g, cfg(1001, 1, 21));
    CHECK(r.throughput.at("K1") == doctest::Approx(0.5).epsilon(0.01));
    CHECK(r.throughput.at("K2") == doctest::Approx(0.5).epsilon(0.01));
    CHECK(r.utilization.at("M1") == doctest::Approx(r.utilization.at("M2")).epsilon(0.01));
  }

  TEST_CASE("merger funnels parallel feeders into one stream") {
    // Two sources feed MG -> M -> SINK; M is fast enough for both.
    ModelGraph g;
    auto add = [&](const char* id, NodeKind kind, ParamMap params = {}) {
      Node n;
      n.id = id;
      n.kind = kind;
      n.params = std::move(params);
      g = add_node(std::move(g), std::move(n));
    };
    add("S1", NodeKind::Source, {{"inter_arrival", ParamValue::of(2.0)}});
    add("S2", NodeKind::Source, {{"inter_arrival", ParamValue::of(2.0)}});
    add("MG", NodeKind::Merger, {{"policy", ParamValue::of(std::string(kPolicyFirstAvailable))}});
    add("M", NodeKind::Machine, {{"delay", ParamValue::of(0.5)}});
    add("K", NodeKind::Sink);
    auto buf = [&](const char* id, const char* from, const char* to) {
      Edge e;
      e.id = id;
      e.kind = EdgeKind::Buffer;
      e.params["capacity"] = ParamValue::of(2.0);
      g = connect(std::move(g), from, std::move(e), to);
    };
    buf("E0", "S1", "MG");
    buf("E1", "S2", "MG");
    buf("E2", "MG", "M");
    buf("E3", "M", "K");
    REQUIRE_FALSE(has_errors(validate(g)));

    SimReport r = simulate(g, cfg(2000, 200, 33));
    CHECK(r.throughput.at("K") == doctest::Approx(1.0).epsilon(0.01));
  }

  TEST_CASE("work_capacity lets one machine serve in parallel") {
    ModelGraph slow = make_line(1, ParamValue::of(0.5), {1.0});
    SimReport r1 = simulate(slow, cfg(2000, 200, 8));
    CHECK(r1.throughput.at("SINK") == doctest::Approx(1.0).epsilon(0.01));

    ModelGraph wide = slow;
    for (auto& n : wide.nodes)
      if (n.id == "M1") n.params["work_capacity"] = ParamValue::of(2.0);
    SimReport r2 = simulate(wide, cfg(2000, 200, 8));
    CHECK(r2.throughput.at("SINK") == doctest::Approx(2.0).epsilon(0.01));
  }

  TEST_CASE("conveyor transit time defers availability") {
    // One machine behind a 5s conveyor: items cannot reach the sink sooner.
    ModelGraph g;
    Node src;
    src.id = "SRC";
    src.kind = NodeKind::Source;
    src.params["inter_arrival"] = ParamValue::of(2.0);
    g = add_node(std::move(g), std::move(src));
    Node m;
    m.id = "M1";
    m.kind = NodeKind::Machine;
    m.params["delay"] = ParamValue::of(1.0);
    g = add_node(std::move(g), std::move(m));
    Node k;
    k.id = "SINK";
    k.kind = NodeKind::Sink;
    g = add_node(std::move(g), std::move(k));
    Edge b;
    b.id = "B0";
    b.kind = EdgeKind::Buffer;
    b.params["capacity"] = ParamValue::of(1.0);
    g = connect(std::move(g), "SRC", std::move(b), "M1");
    Edge c;
    c.id = "CV";
    c.kind = EdgeKind::Conveyor;
    c.params["capacity"] = ParamValue::of(10.0);
    c.params["transit_delay"] = ParamValue::of(5.0);
    g = connect(std::move(g), "M1", std::move(c), "SINK");
    REQUIRE_FALSE(has_errors(validate(g)));

    SimReport r = simulate(g, cfg(100, 10, 2));
    // Service 1s + conveyor 5s = 6s minimum cycle.
    CHECK(r.cycle_time_mean == doctest::Approx(6.0));
    CHECK(r.throughput.at("SINK") == doctest::Approx(0.5).epsilon(0.02));
  }
}

TEST_SUITE("sim/laws") {
  TEST_CASE("Little's law holds on a stochastic single-server line") {
    ModelGraph g = make_line(1, ParamValue::of(DistSpec::exponential(0.5)),
                             {0.0}, 1);
    // Service is exponential too: replace the deterministic delay.
    for (auto& n : g.nodes)
      if (n.id == "M1") n.params["delay"] = ParamValue::of(DistSpec::exponential(1.0));
    for (auto& e : g.edges)
      e.params["capacity"] = ParamValue::of(10000.0);
    REQUIRE_FALSE(has_errors(validate(g)));

    SimReport r = simulate(g, cfg(50000, 5000, 17));
    LittleCheck lc = little_check(r, 0.5);
    REQUIRE(lc.defined);
    CHECK(lc.rel_err <= 0.05);
    // M/M/1 at rho = 0.5: L = 1, W = 2.
    CHECK(lc.wip == doctest::Approx(1.0).epsilon(0.15));
    CHECK(r.cycle_time_mean == doctest::Approx(2.0).epsilon(0.15));
    CHECK(r.utilization.at("M1") == doctest::Approx(0.5).epsilon(0.05));
  }

  TEST_CASE("little_check is undefined when nothing completes") {
    ModelGraph g = make_line(1, ParamValue::of(50.0), {20.0});
    SimReport r = simulate(g, cfg(10, 0, 1));  // first item still in service
    CHECK(r.completed == 0);
    CHECK_FALSE(r.cycle_stats_defined);
    CHECK_FALSE(little_check(r, 0.02).defined);
  }
}
