#include <doctest.h>

#include <nlohmann/json.hpp>
#include <string>

#include "helpers.hpp"
#include "twinforge/bench.hpp"
#include "twinforge/dsl.hpp"
#include "twinforge/netlist.hpp"

using namespace twinforge;
using tf_test::make_line;
using json = nlohmann::json;

namespace {

// A graph exercising every param value shape plus a hierarchy scope.
ModelGraph kitchen_sink() {
  ModelGraph g = make_line(2, ParamValue::of(DistSpec::exponential(0.5)));
  g.nodes[1].params["delay"] = ParamValue::of(DistSpec::normal(3, 0.5));
  g.nodes[2].params["delay"] = ParamValue::of(DistSpec::gamma(2, 1.5));
  g.nodes[2].params["work_capacity"] = ParamValue::of(2.0);

  Node sp;
  sp.id = "Cell_1/SP";
  sp.kind = NodeKind::Splitter;
  sp.params["policy"] = ParamValue::of(std::string(kPolicyRoundRobin));
  sp.scope = {"Cell_1"};
  g = add_node(std::move(g), std::move(sp));
  g.scopes.insert({"Cell_1"});

  Edge c;
  c.id = "CV";
  c.kind = EdgeKind::Conveyor;
  c.params["capacity"] = ParamValue::of(4.0);
  c.params["transit_delay"] = ParamValue::of(0.25);
  g = connect(std::move(g), "M2", std::move(c), "Cell_1/SP");

  Edge b;
  b.id = "BX";
  b.kind = EdgeKind::Buffer;
  b.params["capacity"] = ParamValue::of(1.0);
  g = connect(std::move(g), "Cell_1/SP", std::move(b), "SINK");

  g.nodes[0].params["label"] = ParamValue::of(std::string("inlet"));
  g.nodes[0].params["tuning"] = ParamValue::of(DistSpec::lognormal(0.1, 0.2));
  g.edges[0].params["note"] = ParamValue::of(DistSpec::uniform(1, 2));
  g.edges[0].params["slot"] = ParamValue::of(DistSpec::deterministic(7));
  return g;
}

} // namespace

TEST_SUITE("netlist/roundtrip") {
  TEST_CASE("write then read recovers the canonical form") {
    ModelGraph g = kitchen_sink();
    const std::string text = write_netlist(g);
    ModelGraph back = read_netlist(text);
    CHECK(back == canonical_form(g));
  }

  TEST_CASE("writer output is canonical and deterministic") {
    ModelGraph g = kitchen_sink();
    ModelGraph shuffled = g;
    std::swap(shuffled.nodes[0], shuffled.nodes[3]);
    std::swap(shuffled.edges[0], shuffled.edges[2]);
    CHECK(write_netlist(g) == write_netlist(shuffled));
    CHECK(write_netlist(g) == write_netlist(read_netlist(write_netlist(g))));
  }

  TEST_CASE("schema id and structure survive") {
    const std::string text = write_netlist(make_line(1, ParamValue::of(2.0)));
    json doc = json::parse(text);
    CHECK(doc["schema"] == kNetlistSchemaId);
    CHECK(doc["nodes"].is_array());
    CHECK(doc["edges"].is_array());
    CHECK_FALSE(doc.contains("hierarchy"));  // flat graph: no hierarchy section
  }

  TEST_CASE("hierarchy section appears only when scoped") {
    ModelGraph g = make_line(1, ParamValue::of(2.0));
    g.nodes[1].scope = {"Zone"};
    g.scopes.insert({"Zone"});
    json doc = json::parse(write_netlist(g));
    REQUIRE(doc.contains("hierarchy"));
    CHECK(doc["hierarchy"][0]["scope"] == "Zone");
    ModelGraph back = read_netlist(write_netlist(g));
    CHECK(back.scopes.contains({"Zone"}));
    CHECK(back.find_node("M1")->scope == ScopePath{"Zone"});
  }

  TEST_CASE("distribution params use family-specific field names") {
    ModelGraph g = make_line(1, ParamValue::of(DistSpec::exponential(0.5)));
    json doc = json::parse(write_netlist(g));
    bool found = false;
    for (const auto& n : doc["nodes"]) {
      if (n["id"] != "SRC") continue;
      found = true;
      CHECK(n["params"]["inter_arrival"]["dist"] == "exp");
      CHECK(n["params"]["inter_arrival"]["rate"] == 0.5);
    }
    CHECK(found);
  }
}

TEST_SUITE("netlist/read-errors") {
  TEST_CASE("non-JSON text is a parse error") {
    try {
      read_netlist("this is not json");
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::Parse);
    }
  }

  TEST_CASE("shape problems are schema errors") {
    auto expect_schema = [](json doc) {
      try {
        read_netlist(doc.dump());
        FAIL_CHECK("expected SchemaError for: " << doc.dump());
      } catch (const Error& e) {
        CHECK(e.code() == Errc::Schema);
      }
    };
    json base = json::parse(write_netlist(make_line(1, ParamValue::of(2.0))));

    SUBCASE("wrong schema id") {
      json doc = base;
      doc["schema"] = "twinforge-netlist/999";
      expect_schema(doc);
    }
    SUBCASE("missing schema id") {
      json doc = base;
      doc.erase("schema");
      expect_schema(doc);
    }
    SUBCASE("unknown node kind") {
      json doc = base;
      doc["nodes"][0]["kind"] = "teleporter";
      expect_schema(doc);
    }
    SUBCASE("node without id") {
      json doc = base;
      doc["nodes"][0].erase("id");
      expect_schema(doc);
    }
    SUBCASE("edge endpoint naming no node") {
      json doc = base;
      doc["edges"][0]["to"] = "GHOST";
      expect_schema(doc);
    }
    SUBCASE("bad param value type") {
      json doc = base;
      doc["nodes"][0]["params"]["inter_arrival"] = json::array({1, 2});
      expect_schema(doc);
    }
    SUBCASE("distribution object without family") {
      json doc = base;
      doc["nodes"][0]["params"]["inter_arrival"] = {{"rate", 2.0}};
      expect_schema(doc);
    }
    SUBCASE("unknown distribution family") {
      json doc = base;
      doc["nodes"][0]["params"]["inter_arrival"] = {{"dist", "cauchy"}, {"rate", 1.0}};
      expect_schema(doc);
    }
  }

  TEST_CASE("duplicate ids and edge reuse pass through for the validator") {
    // Foreign netlists carry these defects; reading must keep the graph.
    json doc = json::parse(write_netlist(make_line(1, ParamValue::of(2.0))));
    json extra_node = doc["nodes"][1];
    doc["nodes"].push_back(extra_node);
    json extra_edge = doc["edges"][0];
    extra_edge["from"] = doc["nodes"][1]["id"];
    doc["edges"].push_back(extra_edge);
    ModelGraph g = read_netlist(doc.dump());
    CHECK(g.nodes.size() == 4);
    CHECK(g.edges.size() == 3);
  }
}

TEST_SUITE("netlist/density") {
  TEST_CASE("netlist entries count nodes plus edges") {
    ModelGraph g = make_line(3, ParamValue::of(2.0));
    const std::string text = write_netlist(g);
    DensityReport r = density(text, IrKind::Netlist, g);
    CHECK(r.ir_kind == IrKind::Netlist);
    CHECK(r.entry_count == 9);  // 5 nodes + 4 edges
    CHECK(r.flat_node_count == 5);
    CHECK(r.flat_edge_count == 4);
    CHECK(r.char_count == text.size());
    CHECK(r.expansion_ratio == doctest::Approx(1.0));
  }

  TEST_CASE("loops give the DSL a strict density advantage") {
    const std::string text = mesh_dsl(4);
    ModelGraph g = elaborate_dsl(text);
    DensityReport r = density(text, IrKind::Dsl, g);
    CHECK(r.ir_kind == IrKind::Dsl);
    CHECK(r.entry_count == 9);
    CHECK(r.flat_node_count == 16);
    CHECK(r.flat_edge_count == 24);
    CHECK(r.expansion_ratio == doctest::Approx(40.0 / 9.0));

    DensityReport flat = density(write_netlist(g), IrKind::Netlist, g);
    CHECK(r.expansion_ratio > 4.0 * flat.expansion_ratio);
  }
}
