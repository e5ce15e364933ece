#include "twinforge/bench.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <nlohmann/json.hpp>

#include "twinforge/netlist.hpp"
#include "twinforge/rng.hpp"
#include "text_util.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace twinforge {

namespace {

using json = nlohmann::ordered_json;

std::string str(std::size_t v) { return std::to_string(v); }

ParamValue num(double v) { return ParamValue::of(v); }

// ---- graph construction ----------------------------------------------------

struct Builder {
  ModelGraph g;

  void node(const std::string& id, NodeKind kind, ParamMap params = {},
            ScopePath scope = {}) {
    Node n;
    n.id = id;
    n.kind = kind;
    n.params = std::move(params);
    n.scope = std::move(scope);
    g = add_node(std::move(g), std::move(n));
  }

  void machine(const std::string& id, ScopePath scope = {}) {
    node(id, NodeKind::Machine, {{"delay", num(1.0)}}, std::move(scope));
  }

  void buffer(const std::string& id, const std::string& from, const std::string& to) {
    Edge e;
    e.id = id;
    e.kind = EdgeKind::Buffer;
    e.params = {{"capacity", num(1.0)}};
    g = connect(std::move(g), from, std::move(e), to);
  }

  void conveyor(const std::string& id, const std::string& from, const std::string& to) {
    Edge e;
    e.id = id;
    e.kind = EdgeKind::Conveyor;
    e.params = {{"capacity", num(2.0)}, {"transit_delay", num(0.5)}};
    g = connect(std::move(g), from, std::move(e), to);
  }
};

// ---- DSL emission ----------------------------------------------------------

// Emits statements while counting them the way the parser's recursive
// statement count does: every node/connect/expose/inst line is one statement,
// and a `for`/`subsystem` header is one more on top of its body.
struct DslEmitter {
  std::string text;
  std::size_t statements = 0;
  int depth = 0;

  void line(const std::string& s) {
    text.append(static_cast<std::size_t>(depth) * 2, ' ');
    text += s;
    text += "\n";
    ++statements;
  }
  void open(const std::string& head) {
    line(head + " {");
    ++depth;
  }
  void close() {
    --depth;
    text.append(static_cast<std::size_t>(depth) * 2, ' ');
    text += "}\n";
  }
};

const char* source_decl = "source \"SRC\" { inter_arrival = 2 }";

std::string buffer_connect(const std::string& from, const std::string& to,
                           const std::string& edge) {
  return "connect \"" + from + "\" -> \"" + to + "\" via buffer \"" + edge +
         "\" { capacity = 1 }";
}

// ---- families --------------------------------------------------------------

GeneratedModel finish_model(BenchmarkSpec spec, Builder&& b, DslEmitter&& e,
                            GraphStats expected) {
  GeneratedModel model;
  model.spec = std::move(spec);
  model.graph = std::move(b.g);
  model.dsl_text = std::move(e.text);
  model.netlist_text = write_netlist(model.graph);
  model.manifest.expected = expected;
  model.manifest.netlist_entries = expected.node_count + expected.edge_count;
  model.manifest.dsl_statements = e.statements;
  return model;
}

GeneratedModel gen_serial(BenchmarkSpec spec, const SerialParams& p) {
  if (p.machines < 1) throw Error(Errc::Spec, "serial line needs at least one machine");
  const std::size_t n = p.machines;

  Builder b;
  b.node("SRC", NodeKind::Source, {{"inter_arrival", num(2.0)}});
  for (std::size_t i = 1; i <= n; ++i) b.machine("M" + str(i));
  b.node("SINK", NodeKind::Sink);
  b.buffer("B0", "SRC", "M1");
  for (std::size_t i = 1; i + 1 <= n; ++i) b.buffer("B" + str(i), "M" + str(i), "M" + str(i + 1));
  b.buffer("B" + str(n), "M" + str(n), "SINK");

  DslEmitter e;
  e.line(source_decl);
  e.line("sink \"SINK\"");
  e.open("for i in 1.." + str(n + 1));
  e.line("machine \"M{i}\" { delay = 1 }");
  e.close();
  e.open("for i in 1.." + str(n));
  e.line("connect \"M{i}\" -> \"M{i+1}\" via buffer \"B{i}\" { capacity = 1 }");
  e.close();
  e.line(buffer_connect("SRC", "M1", "B0"));
  e.line(buffer_connect("M" + str(n), "SINK", "B" + str(n)));

  GraphStats expected;
  expected.node_count = n + 2;
  expected.edge_count = n + 1;
  expected.param_count = 2 * n + 2;  // source + n delays + n+1 capacities
  expected.max_scope_depth = 0;
  return finish_model(std::move(spec), std::move(b), std::move(e), expected);
}

GeneratedModel gen_parallel(BenchmarkSpec spec, const ParallelParams& p) {
  if (p.blocks < 1 || p.machines_per_line < 1)
    throw Error(Errc::Spec, "parallel stage sizes must be at least 1");
  if (p.lines < 2)
    throw Error(Errc::Spec, "a split stage needs at least two lines");
  if (p.long_lines > p.blocks * p.lines)
    throw Error(Errc::Spec, "more long lines than lines");
  const std::size_t B = p.blocks, k = p.lines, m = p.machines_per_line;

  // Long lines fill block-major: block b owns lines (b-1)k+1 .. bk.
  auto block_long = [&](std::size_t b) {
    const std::size_t before = (b - 1) * k;
    return p.long_lines > before ? std::min(k, p.long_lines - before) : 0;
  };
  auto mid = [&](std::size_t b, std::size_t l, std::size_t pos) {
    return "M" + str(b) + "_" + str(l) + "_" + str(pos);
  };

  Builder b;
  DslEmitter e;
  b.node("SRC", NodeKind::Source, {{"inter_arrival", num(2.0)}});
  b.node("SINK", NodeKind::Sink);
  e.line(source_decl);
  e.line("sink \"SINK\"");

  for (std::size_t blk = 1; blk <= B; ++blk) {
    const std::size_t L = block_long(blk);
    const std::string sp = "SP" + str(blk), mg = "MG" + str(blk), blk_s = str(blk);
    b.node(sp, NodeKind::Splitter, {{"policy", ParamValue::of(std::string(kPolicyRoundRobin))}});
    b.node(mg, NodeKind::Merger, {{"policy", ParamValue::of(std::string(kPolicyFirstAvailable))}});
    e.line("split \"" + sp + "\" { policy = \"ROUND_ROBIN\" }");
    e.line("merge \"" + mg + "\" { policy = \"FIRST_AVAILABLE\" }");

    for (std::size_t l = 1; l <= k; ++l) {
      const std::size_t len = m + (l <= L ? 1 : 0);
      for (std::size_t pos = 1; pos <= len; ++pos) b.machine(mid(blk, l, pos));
      b.buffer("IN" + blk_s + "_" + str(l), sp, mid(blk, l, 1));
      for (std::size_t pos = 2; pos <= len; ++pos)
        b.buffer("L" + blk_s + "_" + str(l) + "_" + str(pos), mid(blk, l, pos - 1),
                 mid(blk, l, pos));
      b.buffer("OUT" + blk_s + "_" + str(l), mid(blk, l, len), mg);
    }

    e.open("for l in 1.." + str(k + 1));
    e.line("machine \"M" + blk_s + "_{l}_1\" { delay = 1 }");
    e.line("connect \"" + sp + "\" -> \"M" + blk_s + "_{l}_1\" via buffer \"IN" + blk_s +
           "_{l}\" { capacity = 1 }");
    e.close();
    if (m >= 2) {
      e.open("for l in 1.." + str(k + 1));
      e.open("for p in 2.." + str(m + 1));
      e.line("machine \"M" + blk_s + "_{l}_{p}\" { delay = 1 }");
      e.line("connect \"M" + blk_s + "_{l}_{p-1}\" -> \"M" + blk_s +
             "_{l}_{p}\" via buffer \"L" + blk_s + "_{l}_{p}\" { capacity = 1 }");
      e.close();
      e.close();
    }
    if (L > 0) {
      e.open("for l in 1.." + str(L + 1));
      e.line("machine \"M" + blk_s + "_{l}_" + str(m + 1) + "\" { delay = 1 }");
      e.line("connect \"M" + blk_s + "_{l}_" + str(m) + "\" -> \"M" + blk_s + "_{l}_" +
             str(m + 1) + "\" via buffer \"L" + blk_s + "_{l}_" + str(m + 1) +
             "\" { capacity = 1 }");
      e.line("connect \"M" + blk_s + "_{l}_" + str(m + 1) + "\" -> \"" + mg +
             "\" via buffer \"OUT" + blk_s + "_{l}\" { capacity = 1 }");
      e.close();
    }
    if (L < k) {
      e.open("for l in " + str(L + 1) + ".." + str(k + 1));
      e.line("connect \"M" + blk_s + "_{l}_" + str(m) + "\" -> \"" + mg +
             "\" via buffer \"OUT" + blk_s + "_{l}\" { capacity = 1 }");
      e.close();
    }
  }

  b.buffer("BI", "SRC", "SP1");
  e.line(buffer_connect("SRC", "SP1", "BI"));
  for (std::size_t blk = 1; blk + 1 <= B; ++blk) {
    const std::string c = "C" + str(blk);
    b.machine(c);
    b.buffer("X" + str(blk) + "a", "MG" + str(blk), c);
    b.buffer("X" + str(blk) + "b", c, "SP" + str(blk + 1));
    e.line("machine \"" + c + "\" { delay = 1 }");
    e.line(buffer_connect("MG" + str(blk), c, "X" + str(blk) + "a"));
    e.line(buffer_connect(c, "SP" + str(blk + 1), "X" + str(blk) + "b"));
  }
  b.buffer("BO", "MG" + str(B), "SINK");
  e.line(buffer_connect("MG" + str(B), "SINK", "BO"));

  const std::size_t machines = B * k * m + p.long_lines + (B - 1);
  GraphStats expected;
  expected.node_count = machines + 2 * B + 2;
  expected.edge_count = B * k * (m - 1) + p.long_lines + 2 * B * k + 2 * (B - 1) + 2;
  expected.param_count = 1 + machines + 2 * B + expected.edge_count;
  expected.max_scope_depth = 0;
  return finish_model(std::move(spec), std::move(b), std::move(e), expected);
}

GeneratedModel gen_feedback(BenchmarkSpec spec, const FeedbackParams& p) {
  if (p.chain < 1) throw Error(Errc::Spec, "feedback chain needs at least one machine");
  const std::size_t c = p.chain;

  Builder b;
  b.node("SRC", NodeKind::Source, {{"inter_arrival", num(2.0)}});
  b.node("SINK", NodeKind::Sink);
  b.node("MG", NodeKind::Merger, {{"policy", ParamValue::of(std::string(kPolicyFirstAvailable))}});
  b.node("SP", NodeKind::Splitter, {{"policy", ParamValue::of(std::string(kPolicyRoundRobin))}});
  b.machine("MOUT");
  for (std::size_t i = 1; i <= c; ++i) b.machine("M" + str(i));
  b.buffer("BI", "SRC", "MG");
  b.buffer("B0", "MG", "M1");
  for (std::size_t i = 1; i + 1 <= c; ++i) b.buffer("B" + str(i), "M" + str(i), "M" + str(i + 1));
  b.buffer("BS", "M" + str(c), "SP");
  b.buffer("BF", "SP", "MOUT");
  b.buffer("BL", "SP", "MG");
  b.buffer("BO", "MOUT", "SINK");

  DslEmitter e;
  e.line(source_decl);
  e.line("sink \"SINK\"");
  e.line("merge \"MG\" { policy = \"FIRST_AVAILABLE\" }");
  e.line("split \"SP\" { policy = \"ROUND_ROBIN\" }");
  e.line("machine \"MOUT\" { delay = 1 }");
  e.open("for i in 1.." + str(c + 1));
  e.line("machine \"M{i}\" { delay = 1 }");
  e.close();
  e.line(buffer_connect("SRC", "MG", "BI"));
  e.line(buffer_connect("MG", "M1", "B0"));
  e.open("for i in 1.." + str(c));
  e.line("connect \"M{i}\" -> \"M{i+1}\" via buffer \"B{i}\" { capacity = 1 }");
  e.close();
  e.line(buffer_connect("M" + str(c), "SP", "BS"));
  e.line(buffer_connect("SP", "MOUT", "BF"));
  e.line(buffer_connect("SP", "MG", "BL"));
  e.line(buffer_connect("MOUT", "SINK", "BO"));

  GraphStats expected;
  expected.node_count = c + 5;
  expected.edge_count = c + 5;
  expected.param_count = 1 + (c + 1) + 2 + (c + 5);
  expected.max_scope_depth = 0;
  return finish_model(std::move(spec), std::move(b), std::move(e), expected);
}

GeneratedModel gen_multi_edge(BenchmarkSpec spec, const MultiEdgeParams& p) {
  if (p.parallel_edges < 2)
    throw Error(Errc::Spec, "routing bundle needs at least two parallel edges");
  const std::size_t k = p.parallel_edges;

  Builder b;
  b.node("SRC", NodeKind::Source, {{"inter_arrival", num(2.0)}});
  b.node("SINK", NodeKind::Sink);
  b.node("SP", NodeKind::Splitter, {{"policy", ParamValue::of(std::string(kPolicyRoundRobin))}});
  b.node("MG", NodeKind::Merger, {{"policy", ParamValue::of(std::string(kPolicyFirstAvailable))}});
  b.machine("M");
  b.buffer("BI", "SRC", "SP");
  for (std::size_t i = 1; i <= k; ++i) {
    if (p.conveyors)
      b.conveyor("P" + str(i), "SP", "M");
    else
      b.buffer("P" + str(i), "SP", "M");
    b.buffer("Q" + str(i), "M", "MG");
  }
  b.buffer("BO", "MG", "SINK");

  DslEmitter e;
  e.line(source_decl);
  e.line("sink \"SINK\"");
  e.line("split \"SP\" { policy = \"ROUND_ROBIN\" }");
  e.line("merge \"MG\" { policy = \"FIRST_AVAILABLE\" }");
  e.line("machine \"M\" { delay = 1 }");
  e.line(buffer_connect("SRC", "SP", "BI"));
  e.open("for i in 1.." + str(k + 1));
  if (p.conveyors)
    e.line("connect \"SP\" -> \"M\" via conveyor \"P{i}\" { capacity = 2, transit_delay = 0.5 }");
  else
    e.line("connect \"SP\" -> \"M\" via buffer \"P{i}\" { capacity = 1 }");
  e.close();
  e.open("for i in 1.." + str(k + 1));
  e.line("connect \"M\" -> \"MG\" via buffer \"Q{i}\" { capacity = 1 }");
  e.close();
  e.line(buffer_connect("MG", "SINK", "BO"));

  GraphStats expected;
  expected.node_count = 5;
  expected.edge_count = 2 * k + 2;
  expected.param_count = 1 + 1 + 2 + (k + 2) + (p.conveyors ? 2 * k : k);
  expected.max_scope_depth = 0;
  return finish_model(std::move(spec), std::move(b), std::move(e), expected);
}

GeneratedModel gen_grid(BenchmarkSpec spec, const GridParams& p) {
  if (p.rows < 1 || p.cols < 1) throw Error(Errc::Spec, "grid needs at least one cell");
  std::set<std::pair<std::size_t, std::size_t>> absent(p.absent.begin(), p.absent.end());
  for (const auto& [r, c] : absent)
    if (r < 1 || r > p.rows || c < 1 || c > p.cols)
      throw Error(Errc::Spec, "absent cell (" + str(r) + "," + str(c) + ") outside grid");

  auto cell = [](std::size_t r, std::size_t c) { return "M_" + str(r) + "_" + str(c); };

  Builder b;
  std::size_t edge_count = 0;
  for (std::size_t r = 1; r <= p.rows; ++r) {
    b.node("SRC_" + str(r), NodeKind::Source, {{"inter_arrival", num(2.0)}});
    std::vector<std::size_t> present;
    for (std::size_t c = 1; c <= p.cols; ++c)
      if (!absent.count({r, c})) {
        b.machine(cell(r, c));
        present.push_back(c);
      }
    b.node("SINK_" + str(r), NodeKind::Sink);
    if (present.empty()) {
      b.buffer("BI_" + str(r), "SRC_" + str(r), "SINK_" + str(r));
      ++edge_count;
      continue;
    }
    b.buffer("BI_" + str(r), "SRC_" + str(r), cell(r, present.front()));
    for (std::size_t i = 1; i < present.size(); ++i)
      b.buffer("B_" + str(r) + "_" + str(present[i]), cell(r, present[i - 1]),
               cell(r, present[i]));
    b.buffer("BO_" + str(r), cell(r, present.back()), "SINK_" + str(r));
    edge_count += present.size() + 1;
  }

  DslEmitter e;
  if (absent.empty()) {
    e.open("for r in 1.." + str(p.rows + 1));
    e.line("source \"SRC_{r}\" { inter_arrival = 2 }");
    e.line("sink \"SINK_{r}\"");
    e.line("machine \"M_{r}_1\" { delay = 1 }");
    e.line("connect \"SRC_{r}\" -> \"M_{r}_1\" via buffer \"BI_{r}\" { capacity = 1 }");
    e.open("for c in 2.." + str(p.cols + 1));
    e.line("machine \"M_{r}_{c}\" { delay = 1 }");
    e.line("connect \"M_{r}_{c-1}\" -> \"M_{r}_{c}\" via buffer \"B_{r}_{c}\" { capacity = 1 }");
    e.close();
    e.line("connect \"M_{r}_" + str(p.cols) +
           "\" -> \"SINK_{r}\" via buffer \"BO_{r}\" { capacity = 1 }");
    e.close();
  } else {
    // Irregular presence cannot be expressed with loops alone; unroll.
    for (std::size_t r = 1; r <= p.rows; ++r) {
      e.line("source \"SRC_" + str(r) + "\" { inter_arrival = 2 }");
      e.line("sink \"SINK_" + str(r) + "\"");
      std::vector<std::size_t> present;
      for (std::size_t c = 1; c <= p.cols; ++c)
        if (!absent.count({r, c})) present.push_back(c);
      for (std::size_t c : present) e.line("machine \"" + cell(r, c) + "\" { delay = 1 }");
      if (present.empty()) {
        e.line(buffer_connect("SRC_" + str(r), "SINK_" + str(r), "BI_" + str(r)));
        continue;
      }
      e.line(buffer_connect("SRC_" + str(r), cell(r, present.front()), "BI_" + str(r)));
      for (std::size_t i = 1; i < present.size(); ++i)
        e.line(buffer_connect(cell(r, present[i - 1]), cell(r, present[i]),
                              "B_" + str(r) + "_" + str(present[i])));
      e.line(buffer_connect(cell(r, present.back()), "SINK_" + str(r), "BO_" + str(r)));
    }
  }

  GraphStats expected;
  expected.node_count = 2 * p.rows + p.rows * p.cols - absent.size();
  expected.edge_count = edge_count;
  expected.param_count = p.rows + (p.rows * p.cols - absent.size()) + edge_count;
  expected.max_scope_depth = 0;
  return finish_model(std::move(spec), std::move(b), std::move(e), expected);
}

GeneratedModel gen_hier(BenchmarkSpec spec, const HierParams& p) {
  if (p.depth < 1 || p.width < 1) throw Error(Errc::Spec, "hierarchy sizes must be at least 1");
  const std::size_t d = p.depth, w = p.width;

  Builder b;
  b.node("SRC", NodeKind::Source, {{"inter_arrival", num(2.0)}});
  b.node("SINK", NodeKind::Sink);

  auto flat = [](const ScopePath& path, const std::string& local) {
    return path.empty() ? local : scope_to_string(path) + "/" + local;
  };

  // Returns the (input node, output node) flat ids of one instance.
  auto build_level = [&](auto&& self, const ScopePath& path,
                         std::size_t level) -> std::pair<std::string, std::string> {
    if (level == 1) {
      b.node(flat(path, "MA"), NodeKind::Machine, {{"delay", num(1.0)}}, path);
      b.node(flat(path, "MB"), NodeKind::Machine, {{"delay", num(1.0)}}, path);
      b.buffer(flat(path, "LB"), flat(path, "MA"), flat(path, "MB"));
      return {flat(path, "MA"), flat(path, "MB")};
    }
    std::vector<std::pair<std::string, std::string>> ports;
    for (std::size_t i = 1; i <= w; ++i) {
      ScopePath child = path;
      child.push_back("C" + str(i));
      ports.push_back(self(self, child, level - 1));
    }
    for (std::size_t i = 1; i < w; ++i)
      b.buffer(flat(path, "CB" + str(i)), ports[i - 1].second, ports[i].first);
    return {ports.front().first, ports.back().second};
  };

  std::vector<std::pair<std::string, std::string>> top;
  for (std::size_t i = 1; i <= w; ++i)
    top.push_back(build_level(build_level, {"C" + str(i)}, d));
  for (std::size_t i = 1; i < w; ++i)
    b.buffer("CB" + str(i), top[i - 1].second, top[i].first);
  b.buffer("BI", "SRC", top.front().first);
  b.buffer("BO", top.back().second, "SINK");

  DslEmitter e;
  e.open("subsystem Lvl1()");
  e.line("machine \"MA\" { delay = 1 }");
  e.line("machine \"MB\" { delay = 1 }");
  e.line(buffer_connect("MA", "MB", "LB"));
  e.line("expose in \"MA\"");
  e.line("expose out \"MB\"");
  e.close();
  for (std::size_t lvl = 2; lvl <= d; ++lvl) {
    e.open("subsystem Lvl" + str(lvl) + "()");
    e.open("for i in 1.." + str(w + 1));
    e.line("inst \"C{i}\" = Lvl" + str(lvl - 1) + "()");
    e.close();
    e.open("for i in 1.." + str(w));
    e.line("connect \"C{i}\" -> \"C{i+1}\" via buffer \"CB{i}\" { capacity = 1 }");
    e.close();
    e.line("expose in \"C1\"");
    e.line("expose out \"C" + str(w) + "\"");
    e.close();
  }
  e.line(source_decl);
  e.line("sink \"SINK\"");
  e.open("for i in 1.." + str(w + 1));
  e.line("inst \"C{i}\" = Lvl" + str(d) + "()");
  e.close();
  e.open("for i in 1.." + str(w));
  e.line("connect \"C{i}\" -> \"C{i+1}\" via buffer \"CB{i}\" { capacity = 1 }");
  e.close();
  e.line(buffer_connect("SRC", "C1", "BI"));
  e.line("connect \"C" + str(w) + "\" -> \"SINK\" via buffer \"BO\" { capacity = 1 }");

  std::size_t leaves = 1;
  for (std::size_t i = 0; i < d; ++i) leaves *= w;
  std::size_t chain_edges = 0;  // inside non-leaf instances
  std::size_t instances = w;
  for (std::size_t lvl = d; lvl >= 2; --lvl) {
    chain_edges += instances * (w - 1);
    instances *= w;
  }
  GraphStats expected;
  expected.node_count = 2 + 2 * leaves;
  expected.edge_count = leaves + chain_edges + (w + 1);
  expected.param_count = 1 + 2 * leaves + expected.edge_count;
  expected.max_scope_depth = d;
  return finish_model(std::move(spec), std::move(b), std::move(e), expected);
}

GeneratedModel gen_irregular(BenchmarkSpec spec, const IrregularParams& p) {
  if (p.size < 4) throw Error(Errc::Spec, "irregular graph needs at least four machines");

  Rng rng(derive_stream_seed(p.seed, "irregular-topology"));

  // Partition machines into layers of 2..5, never leaving a singleton.
  std::vector<std::vector<std::size_t>> layers;
  std::size_t next_index = 1, remaining = p.size;
  while (remaining > 0) {
    std::size_t take = 2 + rng.next_below(3);
    if (take > remaining) take = remaining;
    if (remaining - take == 1) take = remaining;  // absorb what would be a singleton layer
    std::vector<std::size_t> layer;
    for (std::size_t i = 0; i < take; ++i) layer.push_back(next_index++);
    remaining -= take;
    layers.push_back(std::move(layer));
  }

  Builder b;
  b.node("SRC", NodeKind::Source, {{"inter_arrival", ParamValue::of(DistSpec::exponential(0.5))}});
  b.node("SP0", NodeKind::Splitter,
         {{"policy", ParamValue::of(std::string(kPolicyFirstAvailable))}});
  for (std::size_t i = 1; i <= p.size; ++i) b.machine("M" + str(i));
  b.node("MGF", NodeKind::Merger, {{"policy", ParamValue::of(std::string(kPolicyFirstAvailable))}});
  b.node("SINK", NodeKind::Sink);

  std::size_t edge_no = 0;
  auto link = [&](const std::string& from, const std::string& to) {
    b.buffer("e" + str(++edge_no), from, to);
  };

  link("SRC", "SP0");
  for (std::size_t idx : layers.front()) link("SP0", "M" + str(idx));
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    const auto& cur = layers[l];
    const auto& nxt = layers[l + 1];
    std::vector<std::size_t> indegree(nxt.size(), 0);
    for (std::size_t u : cur) {
      const std::size_t fanout = 1 + rng.next_below(std::min<std::size_t>(2, nxt.size()));
      std::size_t j1 = rng.next_below(nxt.size());
      link("M" + str(u), "M" + str(nxt[j1]));
      ++indegree[j1];
      if (fanout == 2) {
        std::size_t j2 = rng.next_below(nxt.size() - 1);
        if (j2 >= j1) ++j2;
        link("M" + str(u), "M" + str(nxt[j2]));
        ++indegree[j2];
      }
    }
    for (std::size_t j = 0; j < nxt.size(); ++j)
      if (indegree[j] == 0)
        link("M" + str(cur[rng.next_below(cur.size())]), "M" + str(nxt[j]));
  }
  for (std::size_t idx : layers.back()) link("M" + str(idx), "MGF");
  link("MGF", "SINK");

  // Irregular topology has no compact loop form; the DSL enumerates the
  // built graph directly.
  DslEmitter e;
  e.line("source \"SRC\" { inter_arrival = exp(0.5) }");
  e.line("split \"SP0\" { policy = \"FIRST_AVAILABLE\" }");
  for (std::size_t i = 1; i <= p.size; ++i) e.line("machine \"M" + str(i) + "\" { delay = 1 }");
  e.line("merge \"MGF\" { policy = \"FIRST_AVAILABLE\" }");
  e.line("sink \"SINK\"");
  for (const Edge& edge : b.g.edges)
    e.line(buffer_connect(edge.from, edge.to, edge.id));

  GraphStats expected;
  expected.node_count = p.size + 4;
  expected.edge_count = edge_no;  // counted as built; no closed form for seeded wiring
  expected.param_count = 1 + p.size + 2 + edge_no;
  expected.max_scope_depth = 0;
  return finish_model(std::move(spec), std::move(b), std::move(e), expected);
}

} // namespace

GeneratedModel generate(const BenchmarkSpec& spec) {
  return std::visit(
      [&](const auto& family) -> GeneratedModel {
        using T = std::decay_t<decltype(family)>;
        if constexpr (std::is_same_v<T, SerialParams>) return gen_serial(spec, family);
        else if constexpr (std::is_same_v<T, ParallelParams>) return gen_parallel(spec, family);
        else if constexpr (std::is_same_v<T, FeedbackParams>) return gen_feedback(spec, family);
        else if constexpr (std::is_same_v<T, MultiEdgeParams>) return gen_multi_edge(spec, family);
        else if constexpr (std::is_same_v<T, GridParams>) return gen_grid(spec, family);
        else if constexpr (std::is_same_v<T, HierParams>) return gen_hier(spec, family);
        else return gen_irregular(spec, family);
      },
      spec.family);
}

std::vector<BenchmarkSpec> standard_catalog() {
  std::vector<BenchmarkSpec> all;
  auto add = [&](std::string label, FamilySpec f) {
    all.push_back({std::move(label), std::move(f)});
  };
  add("S1", SerialParams{1});
  add("S2", SerialParams{2});
  add("S3", SerialParams{3});
  add("S4", SerialParams{4});
  add("S5", SerialParams{5});
  add("S6", ParallelParams{1, 2, 1, 0});
  add("S7", ParallelParams{1, 3, 1, 0});
  add("S8", MultiEdgeParams{2, false});
  add("S9", ParallelParams{1, 2, 2, 0});
  add("S10", ParallelParams{1, 4, 1, 0});
  add("S11", FeedbackParams{1});
  add("S12", HierParams{2, 2});
  add("S13", HierParams{1, 3});
  add("S14", SerialParams{8});
  add("S15", HierParams{1, 4});
  add("S16", FeedbackParams{3});
  add("S17", MultiEdgeParams{3, false});
  add("S18", HierParams{2, 3});
  add("S19", SerialParams{12});
  add("S20", ParallelParams{2, 3, 1, 0});
  add("S21", IrregularParams{21, 18});
  add("S22", IrregularParams{22, 24});
  add("S23", MultiEdgeParams{2, true});
  add("S24", GridParams{10, 10, {}});
  add("S25", MultiEdgeParams{4, true});
  add("S26", HierParams{2, 4});
  add("S27", MultiEdgeParams{3, true});
  add("S28", GridParams{4, 5, {{1, 2}, {2, 4}, {3, 1}}});
  add("S29", HierParams{3, 2});
  add("S30", HierParams{2, 5});
  add("S31", HierParams{3, 3});
  add("S32", ParallelParams{2, 5, 2, 3});
  add("S33", GridParams{12, 12, {}});
  add("S34", SerialParams{100});
  add("S35", ParallelParams{6, 10, 1, 33});
  return all;
}

std::string mesh_dsl(std::size_t n) {
  if (n < 2) throw Error(Errc::Spec, "mesh needs n >= 2");
  const std::string N = str(n), N1 = str(n + 1);
  DslEmitter e;
  e.open("for i in 1.." + N1);
  e.open("for j in 1.." + N1);
  e.line("machine \"M_{i}_{j}\" { delay = 1 }");
  e.close();
  e.close();
  e.open("for i in 1.." + N1);
  e.open("for j in 1.." + N);
  e.line("connect \"M_{i}_{j}\" -> \"M_{i}_{j+1}\" via buffer \"H_{i}_{j}\" { capacity = 1 }");
  e.close();
  e.close();
  e.open("for i in 1.." + N);
  e.open("for j in 1.." + N1);
  e.line("connect \"M_{i}_{j}\" -> \"M_{i+1}_{j}\" via buffer \"V_{i}_{j}\" { capacity = 1 }");
  e.close();
  e.close();
  return e.text;
}

// ---- fault injection ---------------------------------------------------

namespace {

bool has_alpha(const std::string& s) {
  return std::any_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isalpha(c) != 0; });
}

bool has_digit(const std::string& s) {
  return std::any_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isdigit(c) != 0; });
}

std::string swap_case(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    const unsigned char u = static_cast<unsigned char>(c);
    if (std::islower(u)) c = static_cast<char>(std::toupper(u));
    else if (std::isupper(u)) c = static_cast<char>(std::tolower(u));
  }
  return out;
}

struct Injector {
  ModelGraph g;
  InjectionManifest manifest;
  std::set<std::string> touched_nodes;
  std::set<std::string> touched_edges;
  std::set<std::pair<std::string, std::string>> original_pairs;  // truth endpoints
  Rng rng{0};
  std::size_t fresh_counter = 0;

  explicit Injector(const ModelGraph& truth) : g(canonical_form(truth)) {
    for (ErrorType t :
         {ErrorType::T1Naming, ErrorType::T2ParamError, ErrorType::T3NodeHallucination,
          ErrorType::T4EdgeHallucination, ErrorType::T5ParamHallucination,
          ErrorType::T6HierarchyMismatch, ErrorType::T7Syntax,
          ErrorType::T8FrameworkViolation})
      manifest.counts[t] = 0;
    for (const Edge& e : g.edges) original_pairs.insert({e.from, e.to});
  }

  bool node_id_exists(const std::string& id) const {
    return std::any_of(g.nodes.begin(), g.nodes.end(),
                       [&](const Node& n) { return n.id == id; });
  }
  bool edge_id_exists(const std::string& id) const {
    return std::any_of(g.edges.begin(), g.edges.end(),
                       [&](const Edge& e) { return e.id == id; });
  }

  void rename_node(const std::string& old_id, const std::string& new_id) {
    for (Node& n : g.nodes)
      if (n.id == old_id) n.id = new_id;
    for (Edge& e : g.edges) {
      if (e.from == old_id) e.from = new_id;
      if (e.to == old_id) e.to = new_id;
    }
  }

  void infeasible(const std::string& what) {
    throw Error(Errc::Infeasible, what);
  }

  // -- T1.case ---------------------------------------------------------
  void apply_case(std::size_t count) {
    for (std::size_t pick = 0; pick < count; ++pick) {
      std::vector<std::pair<bool, std::string>> pool;  // (is_node, id)
      for (const Node& n : g.nodes) {
        const std::string flipped = swap_case(n.id);
        if (has_alpha(n.id) && !touched_nodes.count(n.id) && flipped != n.id &&
            !node_id_exists(flipped))
          pool.push_back({true, n.id});
      }
      for (const Edge& e : g.edges) {
        const std::string flipped = swap_case(e.id);
        if (has_alpha(e.id) && !touched_edges.count(e.id) && flipped != e.id &&
            !edge_id_exists(flipped))
          pool.push_back({false, e.id});
      }
      if (pool.empty()) infeasible("no case-flippable identifiers left");
      const auto [is_node, id] = pool[rng.next_below(pool.size())];
      const std::string flipped = swap_case(id);
      if (is_node) {
        rename_node(id, flipped);
        touched_nodes.insert(flipped);
        touched_nodes.insert(id);
      } else {
        for (Edge& e : g.edges)
          if (e.id == id) e.id = flipped;
        touched_edges.insert(flipped);
        touched_edges.insert(id);
      }
      ++manifest.counts[ErrorType::T1Naming];
      manifest.mutations.push_back("T1.case " + std::string(is_node ? "node " : "edge ") +
                                   id + " -> " + flipped);
    }
  }

  // -- T1.shift ----------------------------------------------------------
  void apply_shift() {
    for (int s : {1, -1, 2, -2}) {
      std::vector<std::pair<std::string, std::string>> node_renames, edge_renames;
      bool ok = true;
      for (const Node& n : g.nodes) {
        if (!has_digit(n.id)) continue;
        auto shifted = shift_integers(n.id, s);
        if (!shifted) { ok = false; break; }
        node_renames.push_back({n.id, *shifted});
      }
      if (ok) {
        for (const Edge& e : g.edges) {
          if (!has_digit(e.id)) continue;
          auto shifted = shift_integers(e.id, s);
          if (!shifted) { ok = false; break; }
          edge_renames.push_back({e.id, *shifted});
        }
      }
      // Without at least one shifted node id the classifier has no node
      // evidence for a global-shift hypothesis and would report the edge
      // renames individually, so the prediction would not hold.
      if (!ok || node_renames.empty()) continue;
      std::set<std::string> final_nodes, final_edges;
      for (const Node& n : g.nodes)
        if (!has_digit(n.id)) final_nodes.insert(n.id);
      for (const auto& [from, to] : node_renames) final_nodes.insert(to);
      for (const Edge& e : g.edges)
        if (!has_digit(e.id)) final_edges.insert(e.id);
      for (const auto& [from, to] : edge_renames) final_edges.insert(to);
      if (final_nodes.size() != g.nodes.size() || final_edges.size() != g.edges.size())
        continue;  // shifted ids collide; try the next offset

      std::map<std::string, std::string> node_map;
      for (const auto& [from, to] : node_renames) node_map[from] = to;
      for (Node& n : g.nodes)
        if (auto it = node_map.find(n.id); it != node_map.end()) n.id = it->second;
      for (Edge& e : g.edges) {
        if (auto it = node_map.find(e.from); it != node_map.end()) e.from = it->second;
        if (auto it = node_map.find(e.to); it != node_map.end()) e.to = it->second;
        if (has_digit(e.id)) e.id = *shift_integers(e.id, s);
      }
      manifest.counts[ErrorType::T1Naming] += node_renames.size() + edge_renames.size();
      manifest.systematic_shift = s;
      manifest.mutations.push_back("T1.shift every embedded index by " + std::to_string(s) +
                                   " (" + str(node_renames.size() + edge_renames.size()) +
                                   " ids)");
      return;
    }
    infeasible("no feasible global index shift");
  }

  // -- T2 -----------------------------------------------------------------
  static ParamValue tweak(const std::string& name, const ParamValue& v) {
    switch (v.type) {
      case ParamValue::Type::Number:
        if (name == "capacity" || name == "work_capacity") return ParamValue::of(v.number + 1.0);
        return ParamValue::of(v.number + 0.5);
      case ParamValue::Type::Text:
        return ParamValue::of(std::string(v.text == kPolicyRoundRobin
                                              ? kPolicyFirstAvailable
                                              : kPolicyRoundRobin));
      case ParamValue::Type::Dist: {
        DistSpec d = v.dist;
        if (d.family == DistFamily::Uniform) d.b += 1.0;
        else d.a += 1.0;
        return ParamValue::of(d);
      }
      case ParamValue::Type::Unset:
        break;
    }
    return v;
  }

  void apply_param_change(std::size_t count) {
    for (std::size_t pick = 0; pick < count; ++pick) {
      std::vector<std::tuple<bool, std::string, std::string>> pool;  // (is_node, id, param)
      for (const Node& n : g.nodes) {
        if (touched_nodes.count(n.id)) continue;
        for (const auto& [name, value] : n.params)
          if (value.is_set()) pool.push_back({true, n.id, name});
      }
      for (const Edge& e : g.edges) {
        if (touched_edges.count(e.id)) continue;
        for (const auto& [name, value] : e.params)
          if (value.is_set()) pool.push_back({false, e.id, name});
      }
      if (pool.empty()) infeasible("no parameters left to perturb");
      const auto [is_node, id, name] = pool[rng.next_below(pool.size())];
      if (is_node) {
        for (Node& n : g.nodes)
          if (n.id == id) n.params[name] = tweak(name, n.params[name]);
        touched_nodes.insert(id);
      } else {
        for (Edge& e : g.edges)
          if (e.id == id) e.params[name] = tweak(name, e.params[name]);
        touched_edges.insert(id);
      }
      ++manifest.counts[ErrorType::T2ParamError];
      manifest.mutations.push_back("T2 perturb " + id + "." + name);
    }
  }

  // -- T3 -----------------------------------------------------------------
  void apply_node_added(std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      std::string id;
      do id = "inj_n" + str(++fresh_counter);
      while (node_id_exists(id));
      Node n;
      n.id = id;
      n.kind = NodeKind::Machine;
      n.params = {{"delay", num(1.0)}};
      g.nodes.push_back(std::move(n));
      touched_nodes.insert(id);
      ++manifest.counts[ErrorType::T3NodeHallucination];
      manifest.mutations.push_back("T3.added isolated machine " + id);
    }
  }

  void apply_node_omitted(std::size_t count) {
    for (std::size_t pick = 0; pick < count; ++pick) {
      std::vector<std::string> pool;
      for (const Node& n : g.nodes) {
        if (n.kind != NodeKind::Machine || touched_nodes.count(n.id)) continue;
        bool clean = true;
        for (const Edge& e : g.edges)
          if ((e.from == n.id || e.to == n.id) && touched_edges.count(e.id)) clean = false;
        if (clean) pool.push_back(n.id);
      }
      if (pool.empty()) infeasible("no removable machines left");
      const std::string id = pool[rng.next_below(pool.size())];
      std::size_t removed_edges = 0;
      for (auto it = g.edges.begin(); it != g.edges.end();) {
        if (it->from == id || it->to == id) {
          touched_edges.insert(it->id);
          touched_nodes.insert(it->from);
          touched_nodes.insert(it->to);
          it = g.edges.erase(it);
          ++removed_edges;
        } else {
          ++it;
        }
      }
      g.nodes.erase(std::remove_if(g.nodes.begin(), g.nodes.end(),
                                   [&](const Node& n) { return n.id == id; }),
                    g.nodes.end());
      touched_nodes.insert(id);
      ++manifest.counts[ErrorType::T3NodeHallucination];
      manifest.counts[ErrorType::T4EdgeHallucination] += removed_edges;
      manifest.mutations.push_back("T3.omitted machine " + id + " (+" + str(removed_edges) +
                                   " incident edges)");
    }
  }

  // -- T4 -----------------------------------------------------------------
  void apply_edge_added(std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      bool placed = false;
      for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
        const Node& from = g.nodes[rng.next_below(g.nodes.size())];
        const Node& to = g.nodes[rng.next_below(g.nodes.size())];
        if (from.id == to.id || from.kind == NodeKind::Sink || to.kind == NodeKind::Source)
          continue;
        if (touched_nodes.count(from.id) || touched_nodes.count(to.id)) continue;
        if (original_pairs.count({from.id, to.id})) continue;
        bool exists = false;
        for (const Edge& e : g.edges)
          if (e.from == from.id && e.to == to.id) exists = true;
        if (exists) continue;
        std::string id;
        do id = "inj_e" + str(++fresh_counter);
        while (edge_id_exists(id));
        Edge e;
        e.id = id;
        e.kind = EdgeKind::Buffer;
        e.params = {{"capacity", num(1.0)}};
        e.from = from.id;
        e.to = to.id;
        g.edges.push_back(std::move(e));
        touched_edges.insert(id);
        touched_nodes.insert(from.id);
        touched_nodes.insert(to.id);
        ++manifest.counts[ErrorType::T4EdgeHallucination];
        manifest.mutations.push_back("T4.added " + id + ": " + from.id + " -> " + to.id);
        placed = true;
      }
      if (!placed) infeasible("no endpoint pair available for a spurious edge");
    }
  }

  void apply_edge_omitted(std::size_t count) {
    for (std::size_t pick = 0; pick < count; ++pick) {
      std::vector<std::string> pool;
      for (const Edge& e : g.edges)
        if (!touched_edges.count(e.id) && !touched_nodes.count(e.from) &&
            !touched_nodes.count(e.to))
          pool.push_back(e.id);
      if (pool.empty()) infeasible("no removable edges left");
      const std::string id = pool[rng.next_below(pool.size())];
      remove_edge(id, "T4.omitted");
    }
  }

  void remove_edge(const std::string& id, const std::string& label) {
    for (auto it = g.edges.begin(); it != g.edges.end(); ++it) {
      if (it->id != id) continue;
      touched_edges.insert(id);
      touched_nodes.insert(it->from);
      touched_nodes.insert(it->to);
      manifest.mutations.push_back(label + " edge " + id + ": " + it->from + " -> " + it->to);
      g.edges.erase(it);
      ++manifest.counts[ErrorType::T4EdgeHallucination];
      return;
    }
  }

  // -- T5 -----------------------------------------------------------------
  void apply_param_added(std::size_t count) {
    for (std::size_t pick = 0; pick < count; ++pick) {
      std::vector<std::string> pool;
      for (const Node& n : g.nodes) {
        if (n.kind != NodeKind::Machine || touched_nodes.count(n.id)) continue;
        auto it = n.params.find("work_capacity");
        if (it == n.params.end() || !it->second.is_set()) pool.push_back(n.id);
      }
      if (pool.empty()) infeasible("every machine already sets work_capacity");
      const std::string id = pool[rng.next_below(pool.size())];
      for (Node& n : g.nodes)
        if (n.id == id) n.params["work_capacity"] = num(2.0);
      touched_nodes.insert(id);
      ++manifest.counts[ErrorType::T5ParamHallucination];
      manifest.mutations.push_back("T5 set " + id + ".work_capacity");
    }
  }

  // -- T6 -----------------------------------------------------------------
  void apply_flatten() {
    std::size_t affected = 0;
    for (Node& n : g.nodes)
      if (!n.scope.empty()) {
        n.scope.clear();
        ++affected;
      }
    if (affected == 0) infeasible("graph has no subsystem scopes to flatten");
    g.scopes = {};
    manifest.counts[ErrorType::T6HierarchyMismatch] += affected;
    manifest.mutations.push_back("T6.flattened all " + str(affected) + " scoped nodes");
  }

  // -- T8 -----------------------------------------------------------------
  void apply_rule_violation(std::size_t count) {
    for (std::size_t pick = 0; pick < count; ++pick) {
      std::vector<std::string> pool;  // removable single-out machine edges
      for (const Node& n : g.nodes) {
        if (n.kind != NodeKind::Machine || touched_nodes.count(n.id)) continue;
        const Edge* only = nullptr;
        std::size_t outs = 0;
        for (const Edge& e : g.edges)
          if (e.from == n.id) {
            ++outs;
            only = &e;
          }
        if (outs == 1 && !touched_edges.count(only->id) && !touched_nodes.count(only->to))
          pool.push_back(only->id);
      }
      if (pool.empty()) infeasible("no single-exit machine available");
      remove_edge(pool[rng.next_below(pool.size())], "T8 (severed exit)");
    }
  }

  // Predicted Error-severity diagnostics of the final graph, from degree
  // analysis alone: the injector never calls the validator, so the oracle
  // stays independent of the code it checks.
  std::size_t predicted_framework_violations() const {
    std::map<std::string, std::pair<std::size_t, std::size_t>> degree;  // id -> (in, out)
    for (const Node& n : g.nodes) degree[n.id];
    for (const Edge& e : g.edges) {
      ++degree[e.to].first;
      ++degree[e.from].second;
    }
    std::size_t total = 0;
    for (const Node& n : g.nodes) {
      const auto [in, out] = degree[n.id];
      if (in == 0 && out == 0) {
        if (n.kind == NodeKind::Machine || n.kind == NodeKind::Splitter ||
            n.kind == NodeKind::Merger)
          ++total;
        continue;
      }
      if (out == 0 && n.kind != NodeKind::Sink) ++total;
      if (in == 0 && n.kind != NodeKind::Source) ++total;
      if (n.kind == NodeKind::Splitter && out == 1) ++total;
      if (n.kind == NodeKind::Merger && in == 1) ++total;
    }
    return total;
  }
};

const std::set<std::string> kAdditiveSubkinds = {"T2", "T5", "T3.added", "T4.added"};
const std::set<std::string> kKnownSubkinds = {
    "T1.case", "T1.shift", "T2",  "T3.added", "T3.omitted", "T4.added",
    "T4.omitted", "T5",    "T6.flattened", "T7", "T8"};

} // namespace

InjectionResult inject(const ModelGraph& graph, const InjectionSpec& spec) {
  if (spec.empty()) throw Error(Errc::Infeasible, "empty injection spec");
  bool has_shift = false, has_t7 = false, has_flatten = false;
  for (const InjectionItem& item : spec) {
    if (!kKnownSubkinds.count(item.subkind))
      throw Error(Errc::Spec, "unknown injection subkind '" + item.subkind + "'");
    if (item.subkind == "T1.shift") has_shift = true;
    if (item.subkind == "T7") has_t7 = true;
    if (item.subkind == "T6.flattened") has_flatten = true;
  }
  if ((has_shift || has_t7) && spec.size() > 1)
    throw Error(Errc::Infeasible, "T1.shift and T7 injections compose with nothing else");
  if (has_flatten)
    for (const InjectionItem& item : spec)
      if (item.subkind != "T6.flattened" && !kAdditiveSubkinds.count(item.subkind))
        throw Error(Errc::Infeasible,
                    "T6.flattened composes only with additive or parameter injections");

  Injector inj(graph);

  for (const InjectionItem& item : spec) {
    if (item.count == 0) continue;
    inj.rng = Rng(derive_stream_seed(item.seed, "inject-" + item.subkind));
    if (item.subkind == "T1.case") inj.apply_case(item.count);
    else if (item.subkind == "T1.shift") inj.apply_shift();
    else if (item.subkind == "T2") inj.apply_param_change(item.count);
    else if (item.subkind == "T3.added") inj.apply_node_added(item.count);
    else if (item.subkind == "T3.omitted") inj.apply_node_omitted(item.count);
    else if (item.subkind == "T4.added") inj.apply_edge_added(item.count);
    else if (item.subkind == "T4.omitted") inj.apply_edge_omitted(item.count);
    else if (item.subkind == "T5") inj.apply_param_added(item.count);
    else if (item.subkind == "T6.flattened") inj.apply_flatten();
    else if (item.subkind == "T8") inj.apply_rule_violation(item.count);
  }

  InjectionResult result;
  if (has_t7) {
    std::string text = write_netlist(inj.g);
    const std::size_t brace = text.rfind('}');
    if (brace != std::string::npos) text.erase(brace, 1);
    result.corrupted_netlist = std::move(text);
    inj.manifest.counts[ErrorType::T7Syntax] = 1;
    inj.manifest.mutations.push_back("T7 removed a closing brace from the netlist");
  } else {
    inj.manifest.counts[ErrorType::T8FrameworkViolation] +=
        inj.predicted_framework_violations();
  }
  result.graph = std::move(inj.g);
  result.manifest = std::move(inj.manifest);
  return result;
}

InjectionSpec parse_injection_spec(const std::string& json_text) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded())
    throw Error(Errc::Parse, "injection spec is not well-formed JSON");
  if (!doc.is_array()) throw Error(Errc::Schema, "injection spec must be a JSON array");
  InjectionSpec spec;
  for (const json& entry : doc) {
    if (!entry.is_object() || !entry.contains("subkind") || !entry["subkind"].is_string())
      throw Error(Errc::Schema, "each injection needs a string 'subkind'");
    InjectionItem item;
    item.subkind = entry["subkind"].get<std::string>();
    if (entry.contains("count")) {
      if (!entry["count"].is_number_unsigned())
        throw Error(Errc::Schema, "'count' must be a non-negative integer", item.subkind);
      item.count = entry["count"].get<std::size_t>();
    }
    if (entry.contains("seed")) {
      if (!entry["seed"].is_number_unsigned())
        throw Error(Errc::Schema, "'seed' must be a non-negative integer", item.subkind);
      item.seed = entry["seed"].get<std::uint64_t>();
    }
    spec.push_back(std::move(item));
  }
  return spec;
}

std::string injection_manifest_json(const InjectionManifest& manifest) {
  json j;
  json counts = json::object();
  std::size_t total = 0;
  for (const auto& [type, count] : manifest.counts) {
    counts[error_type_label(type)] = count;
    total += count;
  }
  j["counts"] = std::move(counts);
  j["total"] = total;
  if (manifest.systematic_shift) j["systematic_shift"] = *manifest.systematic_shift;
  j["mutations"] = manifest.mutations;
  return j.dump(1) + "\n";
}

CampaignResult run_injection_campaign(const std::vector<GeneratedModel>& models,
                                      std::size_t trials, std::uint64_t master_seed,
                                      bool parallel) {
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < models.size(); ++i)
    if (models[i].graph.nodes.size() <= 200) eligible.push_back(i);
  if (eligible.empty())
    throw Error(Errc::PreconditionFailed, "no benchmark graph within the 200-node budget");

  static const std::vector<std::vector<const char*>> kMenu = {
      {"T1.case"},    {"T1.shift"},   {"T2"},          {"T3.added"},
      {"T3.omitted"}, {"T4.added"},   {"T4.omitted"},  {"T5"},
      {"T6.flattened"}, {"T8"},       {"T2", "T5"},    {"T3.added", "T4.added"},
      {"T1.case", "T2"}};

  struct TrialOut {
    bool mismatch = false;
    CampaignMismatch detail;
    std::size_t injected = 0;
  };
  std::vector<TrialOut> outs(trials);

  auto run_trial_impl = [&](std::size_t t) {
    Rng rng(derive_stream_seed(master_seed, "trial-" + std::to_string(t)));
    const GeneratedModel& model = models[eligible[rng.next_below(eligible.size())]];
    const auto& combo = kMenu[rng.next_below(kMenu.size())];
    InjectionSpec spec;
    std::string subkinds;
    for (const char* subkind : combo) {
      InjectionItem item;
      item.subkind = subkind;
      const bool single = item.subkind == "T1.shift" || item.subkind == "T6.flattened";
      item.count = single ? 1 : 1 + rng.next_below(3);
      item.seed = rng.next_u64();
      if (!subkinds.empty()) subkinds += "+";
      subkinds += subkind;
      spec.push_back(std::move(item));
    }

    InjectionResult result;
    try {
      result = inject(model.graph, spec);
    } catch (const Error& e) {
      if (e.code() != Errc::Infeasible) throw;
      // This graph cannot host the drawn mutation; fall back to a parameter
      // perturbation, which every benchmark supports.
      spec = {{"T2", 1, rng.next_u64()}};
      subkinds += "->T2";
      result = inject(model.graph, spec);
    }

    const DiffReport report = diff_models(model.graph, result.graph);
    TrialOut out;
    for (const auto& [type, expected] : result.manifest.counts) {
      const std::size_t got = report.counts.at(type);
      out.injected += expected;
      if (got != expected && !out.mismatch) {
        out.mismatch = true;
        out.detail = {t, model.spec.label, subkinds,
                      std::string(error_type_label(type)) + " expected " + str(expected) +
                          ", classified " + str(got)};
      }
    }
    outs[t] = std::move(out);
  };

  // Exceptions must not escape an OpenMP region; any failure becomes a
  // recorded mismatch instead.
  auto run_trial = [&](std::size_t t) noexcept {
    try {
      run_trial_impl(t);
    } catch (const std::exception& e) {
      outs[t].mismatch = true;
      outs[t].detail = {t, "", "", std::string("trial raised: ") + e.what()};
    }
  };

#ifdef _OPENMP
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long long t = 0; t < static_cast<long long>(trials); ++t)
      run_trial(static_cast<std::size_t>(t));
  } else {
    for (std::size_t t = 0; t < trials; ++t) run_trial(t);
  }
#else
  (void)parallel;
  for (std::size_t t = 0; t < trials; ++t) run_trial(t);
#endif

  CampaignResult result;
  result.trials = trials;
  for (const TrialOut& out : outs) {
    result.total_injected += out.injected;
    if (out.mismatch) {
      ++result.mismatches;
      if (result.examples.size() < 5) result.examples.push_back(out.detail);
    }
  }
  return result;
}

} // namespace twinforge
