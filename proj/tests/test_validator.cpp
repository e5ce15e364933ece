#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "twinforge/validate.hpp"

using namespace twinforge;
using tf_test::make_line;

namespace {

std::size_t count_rule(const std::vector<Diagnostic>& ds, std::string_view rule) {
  return static_cast<std::size_t>(
      std::count_if(ds.begin(), ds.end(),
                    [&](const Diagnostic& d) { return d.rule == rule; }));
}

const Diagnostic* find_rule(const std::vector<Diagnostic>& ds, std::string_view rule) {
  for (const auto& d : ds)
    if (d.rule == rule) return &d;
  return nullptr;
}

Node node_of(const std::string& id, NodeKind kind, ParamMap params = {}) {
  Node n;
  n.id = id;
  n.kind = kind;
  n.params = std::move(params);
  return n;
}

} // namespace

TEST_SUITE("validator") {
  TEST_CASE("a well-formed line validates clean") {
    auto ds = validate(make_line(3, ParamValue::of(2.0)));
    CHECK(ds.empty());
    CHECK_FALSE(has_errors(ds));
  }

  TEST_CASE("the rule catalog names all twelve rules") {
    auto rules = rule_catalog();
    CHECK(rules.size() == 12);
    for (const char* id : {"V-ISOLATED", "V-DANGLING-OUT", "V-DANGLING-IN",
                           "V-DUP-ID", "V-EDGE-REUSE", "V-MISSING-PARAM",
                           "V-BAD-POLICY", "V-SRC-HAS-IN", "V-SINK-HAS-OUT",
                           "V-SPLIT-ARITY", "V-MERGE-ARITY", "V-PARAM-RANGE"}) {
      CHECK(std::any_of(rules.begin(), rules.end(),
                        [&](const RuleInfo& r) { return r.id == std::string_view(id); }));
    }
  }

  TEST_CASE("isolated node severity depends on its kind") {
    ModelGraph g = make_line(1, ParamValue::of(2.0));
    SUBCASE("isolated machine is an error") {
      g = add_node(std::move(g), node_of("LONER", NodeKind::Machine,
                                         {{"delay", ParamValue::of(1.0)}}));
      auto ds = validate(g);
      const Diagnostic* d = find_rule(ds, "V-ISOLATED");
      REQUIRE(d != nullptr);
      CHECK(d->severity == Severity::Error);
      CHECK(d->entity == "LONER");
      CHECK(has_errors(ds));
      // Isolation replaces the dangling findings for the same node.
      CHECK(count_rule(ds, "V-DANGLING-OUT") == 0);
      CHECK(count_rule(ds, "V-DANGLING-IN") == 0);
    }
    SUBCASE("isolated source or sink is only a warning") {
      g = add_node(std::move(g), node_of("SPARE", NodeKind::Sink));
      auto ds = validate(g);
      const Diagnostic* d = find_rule(ds, "V-ISOLATED");
      REQUIRE(d != nullptr);
      CHECK(d->severity == Severity::Warning);
      CHECK_FALSE(has_errors(ds));
    }
    SUBCASE("isolated splitter reports isolation, not arity") {
      g = add_node(std::move(g),
                   node_of("SP", NodeKind::Splitter,
                           {{"policy", ParamValue::of(std::string(kPolicyRoundRobin))}}));
      auto ds = validate(g);
      CHECK(count_rule(ds, "V-ISOLATED") == 1);
      CHECK(count_rule(ds, "V-SPLIT-ARITY") == 0);
      CHECK(count_rule(ds, "V-DANGLING-OUT") == 0);
    }
  }

  TEST_CASE("dangling endpoints") {
    ModelGraph g = make_line(2, ParamValue::of(2.0));
    g.edges.pop_back();  // drop M2 -> SINK; M2 now dangles out, SINK isolates
    auto ds = validate(g);
    const Diagnostic* out = find_rule(ds, "V-DANGLING-OUT");
    REQUIRE(out != nullptr);
    CHECK(out->entity == "M2");
    CHECK(out->severity == Severity::Error);
    CHECK(count_rule(ds, "V-ISOLATED") == 1);  // the sink, as a warning

    ModelGraph h = make_line(2, ParamValue::of(2.0));
    h.edges.erase(h.edges.begin());  // drop SRC -> M1
    auto hs = validate(h);
    const Diagnostic* in = find_rule(hs, "V-DANGLING-IN");
    REQUIRE(in != nullptr);
    CHECK(in->entity == "M1");
  }

  TEST_CASE("duplicate ids and edge reuse") {
    ModelGraph g = make_line(1, ParamValue::of(2.0));
    SUBCASE("duplicate node id") {
      g.nodes.push_back(g.nodes[1]);
      auto ds = validate(g);
      const Diagnostic* d = find_rule(ds, "V-DUP-ID");
      REQUIRE(d != nullptr);
      CHECK(d->entity == "M1");
      CHECK(d->message.find("2 times") != std::string::npos);
    }
    SUBCASE("duplicate edge entry, same endpoints") {
      g.edges.push_back(g.edges[0]);
      auto ds = validate(g);
      CHECK(count_rule(ds, "V-DUP-ID") == 1);
      CHECK(count_rule(ds, "V-EDGE-REUSE") == 0);
    }
    SUBCASE("one edge id between different endpoint pairs") {
      Edge e = g.edges[0];
      e.from = "M1";
      e.to = "SINK";
      g.edges.push_back(e);
      auto ds = validate(g);
      CHECK(count_rule(ds, "V-EDGE-REUSE") == 1);
      CHECK(count_rule(ds, "V-DUP-ID") == 0);
    }
  }

  TEST_CASE("missing mandatory params") {
    ModelGraph g = make_line(1, ParamValue::of(2.0));
    SUBCASE("machine without delay") {
      g.nodes[1].params.clear();
      auto ds = validate(g);
      const Diagnostic* d = find_rule(ds, "V-MISSING-PARAM");
      REQUIRE(d != nullptr);
      CHECK(d->entity == "M1");
      CHECK(d->message.find("delay") != std::string::npos);
    }
    SUBCASE("unset counts as missing") {
      g.nodes[0].params["inter_arrival"] = ParamValue::unset();
      auto ds = validate(g);
      CHECK(count_rule(ds, "V-MISSING-PARAM") == 1);
    }
    SUBCASE("buffer without capacity") {
      g.edges[0].params.clear();
      auto ds = validate(g);
      const Diagnostic* d = find_rule(ds, "V-MISSING-PARAM");
      REQUIRE(d != nullptr);
      CHECK(d->entity == "B0");
    }
  }

  TEST_CASE("policy and arity rules on routers") {
    // SRC -> SP -> {M1, M2} -> MG -> SINK
    ModelGraph g;
    g = add_node(std::move(g), node_of("SRC", NodeKind::Source,
                                       {{"inter_arrival", ParamValue::of(2.0)}}));
    g = add_node(std::move(g), node_of("SP", NodeKind::Splitter,
                                       {{"policy", ParamValue::of(std::string(kPolicyRoundRobin))}}));
    g = add_node(std::move(g), node_of("M1", NodeKind::Machine, {{"delay", ParamValue::of(1.0)}}));
    g = add_node(std::move(g), node_of("M2", NodeKind::Machine, {{"delay", ParamValue::of(1.0)}}));
    g = add_node(std::move(g), node_of("MG", NodeKind::Merger,
                                       {{"policy", ParamValue::of(std::string(kPolicyFirstAvailable))}}));
    g = add_node(std::move(g), node_of("SINK", NodeKind::Sink));
    auto buf = [&](const char* id, const char* from, const char* to) {
      Edge e;
      e.id = id;
      e.kind = EdgeKind::Buffer;
      e.params["capacity"] = ParamValue::of(1.0);
      g = connect(std::move(g), from, std::move(e), to);
    };
    buf("E0", "SRC", "SP");
    buf("E1", "SP", "M1");
    buf("E2", "SP", "M2");
    buf("E3", "M1", "MG");
    buf("E4", "M2", "MG");
    buf("E5", "MG", "SINK");
    REQUIRE(validate(g).empty());

    SUBCASE("unknown policy text") {
      g.nodes[1].params["policy"] = ParamValue::of(std::string("RANDOM"));
      auto ds = validate(g);
      const Diagnostic* d = find_rule(ds, "V-BAD-POLICY");
      REQUIRE(d != nullptr);
      CHECK(d->entity == "SP");
    }
    SUBCASE("splitter narrowed to one branch") {
      g.edges.erase(g.edges.begin() + 2);  // E2
      auto ds = validate(g);
      CHECK(count_rule(ds, "V-SPLIT-ARITY") == 1);
      // M2 lost its input; that is a separate finding.
      CHECK(count_rule(ds, "V-DANGLING-IN") == 1);
    }
    SUBCASE("merger fed by one branch") {
      g.edges.erase(g.edges.begin() + 4);  // E4
      auto ds = validate(g);
      const Diagnostic* d = find_rule(ds, "V-MERGE-ARITY");
      REQUIRE(d != nullptr);
      CHECK(d->entity == "MG");
    }
  }

  TEST_CASE("flow direction at the boundary") {
    ModelGraph g = make_line(1, ParamValue::of(2.0));
    SUBCASE("edge into a source") {
      Edge e;
      e.id = "BAD";
      e.kind = EdgeKind::Buffer;
      e.params["capacity"] = ParamValue::of(1.0);
      g = connect(std::move(g), "M1", std::move(e), "SRC");
      auto ds = validate(g);
      const Diagnostic* d = find_rule(ds, "V-SRC-HAS-IN");
      REQUIRE(d != nullptr);
      CHECK(d->entity == "SRC");
    }
    SUBCASE("edge out of a sink") {
      Edge e;
      e.id = "BAD";
      e.kind = EdgeKind::Buffer;
      e.params["capacity"] = ParamValue::of(1.0);
      g = connect(std::move(g), "SINK", std::move(e), "M1");
      auto ds = validate(g);
      CHECK(find_rule(ds, "V-SINK-HAS-OUT") != nullptr);
    }
  }

  TEST_CASE("parameter range checks") {
    ModelGraph g = make_line(1, ParamValue::of(2.0));
    SUBCASE("capacity must be a positive integer") {
      g.edges[0].params["capacity"] = ParamValue::of(0.0);
      CHECK(count_rule(validate(g), "V-PARAM-RANGE") == 1);
      g.edges[0].params["capacity"] = ParamValue::of(1.5);
      CHECK(count_rule(validate(g), "V-PARAM-RANGE") == 1);
      g.edges[0].params["capacity"] = ParamValue::of(3.0);
      CHECK(count_rule(validate(g), "V-PARAM-RANGE") == 0);
    }
    SUBCASE("negative delay") {
      g.nodes[1].params["delay"] = ParamValue::of(-1.0);
      CHECK(count_rule(validate(g), "V-PARAM-RANGE") == 1);
    }
    SUBCASE("invalid distribution") {
      g.nodes[1].params["delay"] = ParamValue::of(DistSpec::exponential(-2.0));
      const Diagnostic* d = find_rule(validate(g), "V-PARAM-RANGE");
      REQUIRE(d != nullptr);
      CHECK(d->message.find("exp") != std::string::npos);
    }
    SUBCASE("delay must be numeric or a distribution") {
      g.nodes[1].params["delay"] = ParamValue::of(std::string("fast"));
      CHECK(count_rule(validate(g), "V-PARAM-RANGE") == 1);
    }
    SUBCASE("work_capacity of zero") {
      g.nodes[1].params["work_capacity"] = ParamValue::of(0.0);
      CHECK(count_rule(validate(g), "V-PARAM-RANGE") == 1);
    }
  }

  TEST_CASE("diagnostics come out in a stable order") {
    ModelGraph g = make_line(2, ParamValue::of(2.0));
    g.nodes[1].params.clear();
    g.nodes[2].params["delay"] = ParamValue::of(-3.0);
    auto first = validate(g);
    std::reverse(g.nodes.begin(), g.nodes.end());
    std::reverse(g.edges.begin(), g.edges.end());
    auto second = validate(g);
    CHECK(first == second);
    CHECK(first.size() == 2);
  }
}
