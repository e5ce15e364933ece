#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>

#include "helpers.hpp"
#include "twinforge/bench.hpp"
#include "twinforge/diff.hpp"
#include "twinforge/dsl.hpp"
#include "twinforge/netlist.hpp"
#include "twinforge/validate.hpp"

using namespace twinforge;

namespace {

GeneratedModel model_for(const std::string& label) {
  for (const auto& spec : standard_catalog())
    if (spec.label == label) return generate(spec);
  FAIL("no catalog entry " << label);
  return {};
}

InjectionSpec one(const std::string& subkind, std::uint64_t seed) {
  return {{subkind, 1, seed}};
}

} // namespace

TEST_SUITE("bench/generators") {
  TEST_CASE("every catalog entry satisfies its own manifest") {
    for (const auto& spec : standard_catalog()) {
      GeneratedModel m = generate(spec);
      INFO("catalog ", spec.label);
      CHECK(stats(m.graph) == m.manifest.expected);
      CHECK(count_statements(m.dsl_text) == m.manifest.dsl_statements);
      // Netlist entries = flat nodes + flat edges.
      CHECK(m.manifest.netlist_entries ==
            m.manifest.expected.node_count + m.manifest.expected.edge_count);
      CHECK(validate(m.graph).empty());
    }
  }

  TEST_CASE("catalog shape: 35 unique labels, tractable sizes") {
    auto catalog = standard_catalog();
    CHECK(catalog.size() == 35);
    std::set<std::string> labels;
    for (const auto& spec : catalog) labels.insert(spec.label);
    CHECK(labels.size() == 35);
    for (const auto& spec : catalog) {
      GeneratedModel m = generate(spec);
      INFO("catalog ", spec.label);
      CHECK(m.graph.nodes.size() <= 200);
    }
  }

  TEST_CASE("serial family: constant statements, linear entries") {
    std::size_t statements = 0;
    for (std::size_t n : {1, 2, 5, 20, 100}) {
      BenchmarkSpec spec{"serial-" + std::to_string(n), SerialParams{n}};
      GeneratedModel m = generate(spec);
      INFO("serial ", n);
      // SRC + machines + SINK / buffers between them.
      CHECK(m.manifest.expected.node_count == n + 2);
      CHECK(m.manifest.expected.edge_count == n + 1);
      CHECK(m.manifest.netlist_entries == 2 * n + 3);
      if (statements == 0) statements = m.manifest.dsl_statements;
      CHECK(m.manifest.dsl_statements == statements);
    }
  }

  TEST_CASE("grid family handles absent cells and empty rows") {
    SUBCASE("full grid") {
      BenchmarkSpec spec{"grid", GridParams{3, 4, {}}};
      GeneratedModel m = generate(spec);
      // Per row: SRC + 4 machines + SINK; edges: 5 per row horizontally.
      CHECK(stats(m.graph) == m.manifest.expected);
      CHECK(m.manifest.expected.node_count == 3 * 6);
      CHECK(validate(m.graph).empty());
    }
    SUBCASE("absent interior cells shorten their rows") {
      BenchmarkSpec spec{"grid-holes", GridParams{3, 4, {{2, 2}, {2, 3}}}};
      GeneratedModel m = generate(spec);
      CHECK(stats(m.graph) == m.manifest.expected);
      CHECK(m.manifest.expected.node_count == 18 - 2);
      CHECK(validate(m.graph).empty());
      CHECK(canonical_form(elaborate_dsl(m.dsl_text)) == canonical_form(m.graph));
    }
    SUBCASE("a fully absent row still flows source to sink") {
      BenchmarkSpec spec{"grid-gap", GridParams{2, 2, {{1, 1}, {1, 2}}}};
      GeneratedModel m = generate(spec);
      CHECK(stats(m.graph) == m.manifest.expected);
      CHECK(validate(m.graph).empty());
      const Node* src = m.graph.find_node("SRC_1");
      REQUIRE(src != nullptr);
      auto outs = m.graph.out_edges("SRC_1");
      REQUIRE(outs.size() == 1);
      CHECK(outs[0]->to == "SINK_1");
    }
  }

  TEST_CASE("hierarchy family: scope depth equals the requested depth") {
    BenchmarkSpec spec{"hier", HierParams{3, 2}};
    GeneratedModel m = generate(spec);
    CHECK(stats(m.graph) == m.manifest.expected);
    CHECK(m.manifest.expected.max_scope_depth == 3);
    CHECK(validate(m.graph).empty());
    // 2^3 leaf cells of 2 machines each, plus SRC and SINK.
    CHECK(m.manifest.expected.node_count == 16 + 2);
  }

  TEST_CASE("irregular family is seed-deterministic") {
    BenchmarkSpec a{"irr", IrregularParams{77, 20}};
    GeneratedModel m1 = generate(a);
    GeneratedModel m2 = generate(a);
    CHECK(canonical_form(m1.graph) == canonical_form(m2.graph));
    CHECK(m1.netlist_text == m2.netlist_text);
    CHECK(validate(m1.graph).empty());

    BenchmarkSpec b{"irr2", IrregularParams{78, 20}};
    GeneratedModel m3 = generate(b);
    CHECK_FALSE(canonical_form(m1.graph) == canonical_form(m3.graph));
  }

  TEST_CASE("three representations of one model agree") {
    for (const char* label : {"S5", "S8", "S12", "S24", "S28"}) {
      GeneratedModel m = model_for(label);
      INFO("catalog ", label);
      ModelGraph canon = canonical_form(m.graph);
      CHECK(canonical_form(elaborate_dsl(m.dsl_text)) == canon);
      CHECK(read_netlist(m.netlist_text) == canon);
    }
  }

  TEST_CASE("mesh text stays constant-size while the mesh grows") {
    CHECK(count_statements(mesh_dsl(2)) == count_statements(mesh_dsl(50)));
    ModelGraph g = elaborate_dsl(mesh_dsl(5));
    CHECK(g.nodes.size() == 25);
    CHECK(g.edges.size() == 2 * 5 * 4);
    for (const auto& n : g.nodes) CHECK(n.kind == NodeKind::Machine);
  }
}

TEST_SUITE("bench/injection") {
  TEST_CASE("each single mutation matches its own manifest") {
    for (const char* subkind :
         {"T1.case", "T2", "T3.added", "T3.omitted", "T4.added", "T4.omitted",
          "T5", "T8"}) {
      GeneratedModel m = model_for("S5");
      INFO("subkind ", subkind);
      InjectionResult r = inject(m.graph, one(subkind, 11));
      DiffReport d = diff_models(m.graph, r.graph);
      CHECK(d.counts == r.manifest.counts);
      CHECK_FALSE(r.manifest.mutations.empty());
      CHECK_FALSE(r.corrupted_netlist.has_value());
    }
  }

  TEST_CASE("shift needs digit-bearing node ids") {
    GeneratedModel serial = model_for("S5");
    InjectionResult r = inject(serial.graph, one("T1.shift", 3));
    REQUIRE(r.manifest.systematic_shift.has_value());
    DiffReport d = diff_models(serial.graph, r.graph);
    CHECK(d.counts == r.manifest.counts);
    bool saw_systematic = false;
    for (const auto& rec : d.records)
      if (rec.systematic) saw_systematic = true;
    CHECK(saw_systematic);

    // S8's nodes carry no digits, so a shift cannot express itself there.
    GeneratedModel multi = model_for("S8");
    CHECK_THROWS_AS(inject(multi.graph, one("T1.shift", 3)), Error);
  }

  TEST_CASE("flatten needs a hierarchy") {
    GeneratedModel hier = model_for("S12");
    InjectionResult r = inject(hier.graph, one("T6.flattened", 5));
    DiffReport d = diff_models(hier.graph, r.graph);
    CHECK(d.counts == r.manifest.counts);
    CHECK(r.manifest.counts.at(ErrorType::T6HierarchyMismatch) > 0);

    GeneratedModel flat = model_for("S5");
    try {
      inject(flat.graph, one("T6.flattened", 5));
      FAIL("expected Infeasible");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::Infeasible);
    }
  }

  TEST_CASE("artifact corruption replaces the graph-level diff") {
    GeneratedModel m = model_for("S5");
    InjectionResult r = inject(m.graph, one("T7", 2));
    REQUIRE(r.corrupted_netlist.has_value());
    CHECK_THROWS_AS(read_netlist(*r.corrupted_netlist), Error);
    CHECK(r.manifest.counts.at(ErrorType::T7Syntax) == 1);
    std::size_t total = 0;
    for (const auto& [t, n] : r.manifest.counts) total += n;
    CHECK(total == 1);
    // The in-memory graph is untouched; the corruption lives in the text.
    CHECK(diff_models(m.graph, r.graph).total() == 0);
  }

  TEST_CASE("composition rules") {
    GeneratedModel hier = model_for("S12");
    SUBCASE("shift composes with nothing") {
      CHECK_THROWS_AS(inject(hier.graph, {{"T1.shift", 1, 1}, {"T2", 1, 2}}), Error);
    }
    SUBCASE("artifact corruption composes with nothing") {
      CHECK_THROWS_AS(inject(hier.graph, {{"T7", 1, 1}, {"T2", 1, 2}}), Error);
    }
    SUBCASE("flatten tolerates additive company only") {
      CHECK_THROWS_AS(inject(hier.graph, {{"T6.flattened", 1, 1}, {"T3.omitted", 1, 2}}),
                      Error);
      InjectionResult ok =
          inject(hier.graph, {{"T6.flattened", 1, 1}, {"T2", 1, 2}});
      DiffReport d = diff_models(hier.graph, ok.graph);
      CHECK(d.counts == ok.manifest.counts);
      CHECK(ok.manifest.counts.at(ErrorType::T2ParamError) == 1);
    }
    SUBCASE("independent mutations stack and still match") {
      InjectionResult r =
          inject(hier.graph, {{"T2", 2, 3}, {"T5", 1, 4}, {"T3.added", 1, 5}});
      DiffReport d = diff_models(hier.graph, r.graph);
      CHECK(d.counts == r.manifest.counts);
      CHECK(r.manifest.counts.at(ErrorType::T2ParamError) == 2);
      CHECK(r.manifest.counts.at(ErrorType::T5ParamHallucination) == 1);
    }
  }

  TEST_CASE("injection is deterministic per seed") {
    GeneratedModel m = model_for("S21");
    InjectionResult a = inject(m.graph, one("T2", 9));
    InjectionResult b = inject(m.graph, one("T2", 9));
    CHECK(canonical_form(a.graph) == canonical_form(b.graph));
    CHECK(a.manifest.mutations == b.manifest.mutations);
    InjectionResult c = inject(m.graph, one("T2", 10));
    CHECK(a.manifest.mutations != c.manifest.mutations);
  }

  TEST_CASE("unknown subkind is a spec error") {
    GeneratedModel m = model_for("S5");
    try {
      inject(m.graph, one("T9.quantum", 1));
      FAIL("expected SpecError");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::Spec);
    }
  }

  TEST_CASE("manifest json names every counter") {
    GeneratedModel m = model_for("S5");
    InjectionResult r = inject(m.graph, one("T2", 1));
    const std::string text = injection_manifest_json(r.manifest);
    for (const char* key : {"T1", "T2", "T3", "T4", "T5", "T6", "T7", "T8"})
      CHECK(text.find("\"" + std::string(key) + "\"") != std::string::npos);
    CHECK(text.find("mutations") != std::string::npos);
  }

  TEST_CASE("spec json parsing") {
    InjectionSpec spec = parse_injection_spec(
        "[{\"subkind\": \"T2\", \"count\": 2, \"seed\": 9}, {\"subkind\": \"T5\"}]");
    REQUIRE(spec.size() == 2);
    CHECK(spec[0].subkind == "T2");
    CHECK(spec[0].count == 2);
    CHECK(spec[0].seed == 9);
    CHECK(spec[1].count == 1);  // defaults
    CHECK(spec[1].seed == 0);

    CHECK_THROWS_AS(parse_injection_spec("not json"), Error);
    try {
      parse_injection_spec("{\"subkind\": \"T2\"}");
      FAIL("expected SchemaError");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::Schema);
    }
  }
}

TEST_SUITE("bench/campaign") {
  TEST_CASE("a short campaign round-trips with zero mismatches") {
    std::vector<GeneratedModel> models;
    for (const auto& spec : standard_catalog()) models.push_back(generate(spec));
    CampaignResult serial = run_injection_campaign(models, 150, 5, false);
    CHECK(serial.trials == 150);
    CHECK(serial.mismatches == 0);
    CHECK(serial.examples.empty());
    CHECK(serial.total_injected > 150);

    CampaignResult parallel = run_injection_campaign(models, 150, 5, true);
    CHECK(parallel.mismatches == serial.mismatches);
    CHECK(parallel.total_injected == serial.total_injected);

    CampaignResult other_seed = run_injection_campaign(models, 150, 6, false);
    CHECK(other_seed.mismatches == 0);
  }
}
