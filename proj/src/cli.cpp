#include "twinforge/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "twinforge/bench.hpp"
#include "twinforge/bridge.hpp"
#include "twinforge/diff.hpp"
#include "twinforge/dsl.hpp"
#include "twinforge/error.hpp"
#include "twinforge/fit.hpp"
#include "twinforge/netlist.hpp"
#include "twinforge/sim.hpp"
#include "twinforge/validate.hpp"
#include "text_util.hpp"

namespace twinforge {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

int exit_code_for(const Error& err) {
  switch (err.code()) {
    // Defects found in user-supplied artifacts, and analysis outcomes: the
    // tool worked, the input has findings.
    case Errc::Syntax:
    case Errc::UndefinedName:
    case Errc::Elaboration:
    case Errc::Parse:
    case Errc::Schema:
    case Errc::DuplicateId:
    case Errc::DuplicateEdgeId:
    case Errc::EdgeReuse:
    case Errc::UnknownEndpoint:
    case Errc::DegenerateData:
    case Errc::InsufficientData:
    case Errc::UnsupportedData:
    case Errc::NoViableFit:
    case Errc::UnknownFamily:
    case Errc::BindConflict:
    case Errc::Infeasible:
      return 1;
    // Environment and usage trouble: nothing was analyzed.
    case Errc::Io:
    case Errc::Config:
    case Errc::Spec:
    case Errc::Transport:
    case Errc::Protocol:
    case Errc::Replay:
      return 2;
    case Errc::PreconditionFailed:
    default:
      return 3;
  }
}

// True for error codes that mean "the model text itself is defective", the
// cases the diff classifier folds into T7.
bool is_artifact_defect(Errc code) {
  switch (code) {
    case Errc::Syntax:
    case Errc::UndefinedName:
    case Errc::Elaboration:
    case Errc::Parse:
    case Errc::Schema:
    case Errc::DuplicateId:
    case Errc::DuplicateEdgeId:
    case Errc::EdgeReuse:
    case Errc::UnknownEndpoint:
      return true;
    default:
      return false;
  }
}

ModelGraph load_model(const std::string& path) {
  const std::string text = read_file(path);
  if (path.size() >= 4 && path.ends_with(".fdl")) return elaborate_dsl(text);
  return read_netlist(text);
}

// Empty or "-" writes to stdout.
void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty() || out_path == "-")
    std::cout << content;
  else
    write_file(out_path, content);
}

std::string dist_label(const DistSpec& d) {
  std::string out = dist_family_name(d.family);
  out += "(" + format_double(d.a);
  if (d.param_count() == 2) out += ", " + format_double(d.b);
  return out + ")";
}

json dist_json(const DistSpec& d) {
  json j;
  j["dist"] = dist_family_name(d.family);
  switch (d.family) {
    case DistFamily::Deterministic: j["value"] = d.a; break;
    case DistFamily::Exponential: j["rate"] = d.a; break;
    case DistFamily::Normal: j["mean"] = d.a; j["std"] = d.b; break;
    case DistFamily::Lognormal: j["mu"] = d.a; j["sigma"] = d.b; break;
    case DistFamily::Uniform: j["min"] = d.a; j["max"] = d.b; break;
    case DistFamily::Gamma: j["shape"] = d.a; j["scale"] = d.b; break;
  }
  return j;
}

// ---- render ---------------------------------------------------------------

std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string render_dot(const ModelGraph& g) {
  std::ostringstream out;
  out << "digraph " << dot_quote(g.name.empty() ? "model" : g.name) << " {\n";
  out << "  rankdir=LR;\n  node [shape=box];\n";

  // Scope tree: immediate children of `prefix` among all node scopes.
  std::vector<ScopePath> all_scopes;
  for (const Node& n : g.nodes)
    if (!n.scope.empty()) all_scopes.push_back(n.scope);
  std::sort(all_scopes.begin(), all_scopes.end());
  all_scopes.erase(std::unique(all_scopes.begin(), all_scopes.end()), all_scopes.end());

  std::size_t cluster_no = 0;
  auto emit_scope = [&](auto&& self, const ScopePath& prefix, int depth) -> void {
    const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
    for (const Node& n : g.nodes)
      if (n.scope == prefix)
        out << pad << dot_quote(n.id) << " [label="
            << dot_quote(n.id + ":" + node_kind_name(n.kind)) << "];\n";
    std::vector<std::string> children;
    for (const ScopePath& s : all_scopes)
      if (s.size() > prefix.size() &&
          std::equal(prefix.begin(), prefix.end(), s.begin()))
        if (std::find(children.begin(), children.end(), s[prefix.size()]) == children.end())
          children.push_back(s[prefix.size()]);
    for (const std::string& child : children) {
      ScopePath next = prefix;
      next.push_back(child);
      out << pad << "subgraph cluster_" << cluster_no++ << " {\n";
      out << pad << "  label=" << dot_quote(child) << ";\n";
      self(self, next, depth + 1);
      out << pad << "}\n";
    }
  };
  emit_scope(emit_scope, {}, 1);

  for (const Edge& e : g.edges)
    out << "  " << dot_quote(e.from) << " -> " << dot_quote(e.to) << " [label="
        << dot_quote(e.id + ":" + edge_kind_name(e.kind)) << "];\n";
  out << "}\n";
  return out.str();
}

// ---- shared printing -------------------------------------------------------

void print_diagnostics(const std::vector<Diagnostic>& diagnostics) {
  std::size_t errors = 0, warnings = 0;
  for (const Diagnostic& d : diagnostics) {
    const bool is_error = d.severity == Severity::Error;
    (is_error ? errors : warnings) += 1;
    std::cout << (is_error ? "error " : "warning ") << d.rule << " [" << d.entity
              << "]: " << d.message << "\n";
  }
  std::cout << diagnostics.size() << " finding(s): " << errors << " error(s), "
            << warnings << " warning(s)\n";
}

json diagnostics_json(const std::vector<Diagnostic>& diagnostics) {
  json arr = json::array();
  for (const Diagnostic& d : diagnostics)
    arr.push_back({{"rule", d.rule},
                   {"severity", d.severity == Severity::Error ? "error" : "warning"},
                   {"entity", d.entity},
                   {"message", d.message}});
  return arr;
}

void print_diff_report(const DiffReport& report) {
  std::cout << "counts:";
  for (const auto& [type, count] : report.counts)
    std::cout << " " << error_type_label(type) << "=" << count;
  std::cout << " total=" << report.total() << "\n";
  for (const ErrorRecord& r : report.records) {
    std::cout << "  " << error_type_label(r.type);
    if (!r.subkind.empty()) std::cout << " (" << r.subkind << ")";
    if (r.truth_ref) std::cout << " truth=" << *r.truth_ref;
    if (r.cand_ref) std::cout << " cand=" << *r.cand_ref;
    if (!r.detail.empty()) std::cout << ": " << r.detail;
    if (r.systematic) std::cout << " [systematic]";
    std::cout << "\n";
  }
}

// ---- subcommands -----------------------------------------------------------

struct ElaborateOpts {
  std::string input;
  std::string out;
};

int cmd_elaborate(const ElaborateOpts& o) {
  const std::string text = read_file(o.input);
  const ModelGraph graph = elaborate_dsl(text);
  const std::string netlist = write_netlist(graph);
  emit(o.out, netlist);
  if (!o.out.empty() && o.out != "-") {
    const DensityReport d = density(text, IrKind::Dsl, graph);
    const GraphStats s = stats(graph);
    std::cout << "elaborated " << s.node_count << " nodes, " << s.edge_count
              << " edges (scope depth " << s.max_scope_depth << ") from "
              << d.entry_count << " statements; expansion x"
              << format_double(d.expansion_ratio) << "\n";
    std::cout << "wrote " << o.out << "\n";
  }
  return 0;
}

struct ValidateOpts {
  std::string input;
  std::string json_out;
};

int cmd_validate(const ValidateOpts& o) {
  const ModelGraph graph = load_model(o.input);
  const std::vector<Diagnostic> diagnostics = validate(graph);
  print_diagnostics(diagnostics);
  if (!o.json_out.empty()) emit(o.json_out, diagnostics_json(diagnostics).dump(1) + "\n");
  return has_errors(diagnostics) ? 1 : 0;
}

struct RenderOpts {
  std::string input;
  std::string out;
};

int cmd_render(const RenderOpts& o) {
  emit(o.out, render_dot(load_model(o.input)));
  return 0;
}

struct SimulateOpts {
  std::string input;
  double horizon = 0.0;
  double warmup = 0.0;
  std::uint64_t seed = 0;
  std::size_t runs = 1;
  bool parallel = false;
  std::string trace_out;
  std::string json_out;
};

void print_map_line(const char* label, const std::map<std::string, double>& m) {
  std::cout << label;
  std::size_t shown = 0;
  for (const auto& [k, v] : m) {
    if (shown++ == 12) {
      std::cout << " (+" << m.size() - 12 << " more)";
      break;
    }
    std::cout << " " << k << "=" << format_double(v);
  }
  std::cout << "\n";
}

int cmd_simulate(const SimulateOpts& o) {
  const ModelGraph graph = load_model(o.input);
  const std::vector<Diagnostic> diagnostics = validate(graph);
  if (has_errors(diagnostics)) {
    print_diagnostics(diagnostics);
    std::cout << "model does not validate; not simulating\n";
    return 1;
  }

  SimConfig base;
  base.horizon = o.horizon;
  base.warmup = o.warmup;
  base.record_trace = !o.trace_out.empty();

  if (o.runs <= 1) {
    base.seed = o.seed;
    const SimReport report = simulate(graph, base);
    double total = 0.0;
    for (const auto& [sink, rate] : report.throughput) total += rate;
    std::cout << "seed=" << report.seed << " horizon=" << format_double(report.horizon)
              << " warmup=" << format_double(report.warmup) << "\n";
    std::cout << "created=" << report.created << " completed=" << report.completed
              << " throughput=" << format_double(total)
              << " wip=" << format_double(report.wip) << "\n";
    if (report.cycle_stats_defined)
      std::cout << "cycle_time mean=" << format_double(report.cycle_time_mean)
                << " p95=" << format_double(report.cycle_time_p95) << "\n";
    print_map_line("throughput:", report.throughput);
    print_map_line("utilization:", report.utilization);
    if (!o.trace_out.empty()) emit(o.trace_out, trace_csv(report.trace));
    if (!o.json_out.empty()) emit(o.json_out, report_json(report));
    return 0;
  }

  std::vector<SimReport> reports(o.runs);
  auto run_one = [&](std::size_t r) {
    SimConfig c = base;
    c.record_trace = false;
    c.seed = o.seed + r;
    reports[r] = simulate(graph, c);
  };
#ifdef _OPENMP
  if (o.parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long long r = 0; r < static_cast<long long>(o.runs); ++r)
      run_one(static_cast<std::size_t>(r));
  } else {
    for (std::size_t r = 0; r < o.runs; ++r) run_one(r);
  }
#else
  for (std::size_t r = 0; r < o.runs; ++r) run_one(r);
#endif

  double sum = 0.0, sumsq = 0.0;
  json runs_json = json::array();
  for (const SimReport& rep : reports) {
    double total = 0.0;
    for (const auto& [sink, rate] : rep.throughput) total += rate;
    std::cout << "seed=" << rep.seed << " throughput=" << format_double(total)
              << " completed=" << rep.completed << " wip=" << format_double(rep.wip)
              << "\n";
    sum += total;
    sumsq += total * total;
    runs_json.push_back({{"seed", rep.seed},
                         {"throughput", total},
                         {"completed", rep.completed},
                         {"wip", rep.wip}});
  }
  const double mean = sum / static_cast<double>(o.runs);
  const double var = sumsq / static_cast<double>(o.runs) - mean * mean;
  std::cout << "runs=" << o.runs << " mean_throughput=" << format_double(mean)
            << " std=" << format_double(std::sqrt(std::max(0.0, var))) << "\n";
  if (!o.json_out.empty()) {
    json j;
    j["runs"] = std::move(runs_json);
    j["mean_throughput"] = mean;
    emit(o.json_out, j.dump(1) + "\n");
  }
  return 0;
}

struct FitOpts {
  std::string input;
  std::string default_name = "samples";
  std::string family;
  std::string criterion = "aic";
  std::string json_out;
};

int cmd_fit(const FitOpts& o) {
  const auto sets = parse_samples_csv(read_file(o.input), o.default_name);
  if (sets.empty()) throw Error(Errc::InsufficientData, "no samples in input");

  std::optional<DistFamily> only;
  if (!o.family.empty()) {
    for (DistFamily f : all_families())
      if (o.family == dist_family_name(f)) only = f;
    if (!only) throw Error(Errc::UnknownFamily, "unknown family '" + o.family + "'");
  }
  const FitCriterion criterion =
      o.criterion == "ks" ? FitCriterion::Ks : FitCriterion::Aic;

  json out = json::object();
  for (const auto& [name, samples] : sets) {
    const FitResult fit = only ? fit_family(samples, *only)
                               : select_fit(samples, all_families(), criterion);
    std::cout << name << ": " << dist_label(fit.spec) << " n=" << fit.n
              << " loglik=" << format_double(fit.loglik)
              << " aic=" << format_double(fit.aic)
              << " ks=" << format_double(fit.ks_stat)
              << (fit.degenerate ? " (degenerate: zero spread)" : "") << "\n";
    json entry = dist_json(fit.spec);
    entry["loglik"] = fit.loglik;
    entry["aic"] = fit.aic;
    entry["ks"] = fit.ks_stat;
    entry["n"] = fit.n;
    entry["degenerate"] = fit.degenerate;
    out[name] = std::move(entry);
  }
  if (!o.json_out.empty()) emit(o.json_out, out.dump(1) + "\n");
  return 0;
}

struct BindOpts {
  std::string model;
  std::string samples;
  std::vector<std::string> maps;
  std::string criterion = "aic";
  std::string out;
};

int cmd_bind(const BindOpts& o) {
  const ModelGraph graph = load_model(o.model);
  const auto sets = parse_samples_csv(read_file(o.samples), "samples");
  const FitCriterion criterion =
      o.criterion == "ks" ? FitCriterion::Ks : FitCriterion::Aic;

  std::map<std::string, FitResult> fits;
  for (const auto& [name, samples] : sets)
    fits[name] = select_fit(samples, all_families(), criterion);

  std::map<std::string, std::string> overrides;
  for (const std::string& m : o.maps) {
    const std::size_t eq = m.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == m.size())
      throw Error(Errc::Config, "--map expects source=node.param, got '" + m + "'");
    overrides[m.substr(0, eq)] = m.substr(eq + 1);
  }

  const auto [bound, plan] = twinforge::bind(graph, fits, overrides);
  emit(o.out, write_netlist(bound));
  if (!o.out.empty() && o.out != "-") {
    for (const BindingPlan::Entry& e : plan.entries)
      std::cout << e.source_name << " -> " << e.node_id << "." << e.param_name << " = "
                << dist_label(fits.at(e.source_name).spec) << "\n";
    for (const std::string& name : plan.unmatched)
      std::cout << name << " -> (unmatched)\n";
    std::cout << "bound " << plan.entries.size() << " parameter(s), "
              << plan.unmatched.size() << " unmatched source(s); wrote " << o.out << "\n";
  }
  return 0;
}

struct DiffOpts {
  std::string truth;
  std::string cand;
  std::string mode = "coarse";
  std::string label;
  std::string csv_out;
  std::string json_out;
};

int cmd_diff(const DiffOpts& o) {
  const ModelGraph truth = load_model(o.truth);
  const DescriptionMode mode =
      o.mode == "detailed" ? DescriptionMode::Detailed : DescriptionMode::Coarse;

  DiffReport report;
  try {
    const ModelGraph cand = load_model(o.cand);
    report = diff_models(truth, cand, {}, mode);
  } catch (const Error& err) {
    if (!is_artifact_defect(err.code())) throw;
    // An unreadable candidate is itself the finding.
    ParseOutcome outcome;
    outcome.ok = false;
    outcome.message = err.what();
    report = classify(truth, ModelGraph{}, Correspondence{}, {}, outcome, mode);
  }

  print_diff_report(report);
  if (!o.csv_out.empty())
    emit(o.csv_out, report_csv({report}, {o.label.empty() ? o.cand : o.label}));
  if (!o.json_out.empty()) emit(o.json_out, report_json(report));
  return report.total() > 0 ? 1 : 0;
}

struct BenchOpts {
  std::vector<std::string> labels;
  std::string out_dir;
  bool campaign = false;
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool parallel = false;
  std::size_t mesh = 0;
  std::string mesh_out;
};

int cmd_bench(const BenchOpts& o) {
  if (o.mesh > 0) {
    const std::string text = mesh_dsl(o.mesh);
    emit(o.mesh_out, text);
    if (!o.mesh_out.empty() && o.mesh_out != "-") {
      const ModelGraph graph = elaborate_dsl(text);
      const GraphStats s = stats(graph);
      std::cout << "mesh " << o.mesh << ": " << count_statements(text)
                << " statements elaborate to " << s.node_count << " nodes, "
                << s.edge_count << " edges\n";
    }
    return 0;
  }

  std::vector<GeneratedModel> models;
  for (const BenchmarkSpec& spec : standard_catalog()) {
    if (!o.labels.empty() &&
        std::find(o.labels.begin(), o.labels.end(), spec.label) == o.labels.end())
      continue;
    models.push_back(generate(spec));
  }
  if (models.empty()) throw Error(Errc::Config, "no benchmark matches the label filter");

  std::cout << "label nodes edges dsl_statements netlist_entries expansion\n";
  for (const GeneratedModel& m : models) {
    const GraphStats& s = m.manifest.expected;
    const double expansion =
        static_cast<double>(s.node_count + s.edge_count) /
        static_cast<double>(m.manifest.dsl_statements);
    std::cout << m.spec.label << " " << s.node_count << " " << s.edge_count << " "
              << m.manifest.dsl_statements << " " << m.manifest.netlist_entries << " "
              << format_double(expansion) << "\n";
  }

  if (!o.out_dir.empty()) {
    fs::create_directories(o.out_dir);
    for (const GeneratedModel& m : models) {
      write_file((fs::path(o.out_dir) / (m.spec.label + ".fdl")).string(), m.dsl_text);
      write_file((fs::path(o.out_dir) / (m.spec.label + ".json")).string(),
                 m.netlist_text);
    }
    std::cout << "wrote " << models.size() << " model pair(s) to " << o.out_dir << "\n";
  }

  if (o.campaign) {
    const CampaignResult result =
        run_injection_campaign(models, o.trials, o.seed, o.parallel);
    std::cout << "campaign: trials=" << result.trials
              << " injected=" << result.total_injected
              << " mismatches=" << result.mismatches << "\n";
    for (const CampaignMismatch& m : result.examples)
      std::cout << "  trial " << m.trial << " [" << m.label << " " << m.subkinds
                << "]: " << m.detail << "\n";
    return result.mismatches > 0 ? 1 : 0;
  }
  return 0;
}

struct GenerateOpts {
  std::string describe;
  std::string describe_file;
  std::vector<std::string> assume;
  std::string replay_dir;
  bool strict = false;
  std::string out;
  bool check = false;
  std::string truth;
  std::string mode = "coarse";
  std::string json_out;
};

int cmd_generate(const GenerateOpts& o) {
  std::string description = o.describe;
  if (!o.describe_file.empty()) description = read_file(o.describe_file);

  std::unique_ptr<Endpoint> endpoint =
      o.replay_dir.empty() ? endpoint_from_env()
                           : std::make_unique<ReplayEndpoint>(o.replay_dir, o.strict);

  GenRequest request;
  request.description = description;
  request.prior_assumptions = o.assume;

  const GenResponse reasoned = reason(*endpoint, request);
  for (const std::string& a : reasoned.assumptions) std::cout << "assumption: " << a << "\n";

  request.prior_assumptions.insert(request.prior_assumptions.end(),
                                   reasoned.assumptions.begin(),
                                   reasoned.assumptions.end());
  const GenResponse generated = generate_ir(*endpoint, request);
  std::cout << "generated " << generated.ir_kind << " (" << generated.ir_text.size()
            << " bytes)\n";
  if (!o.out.empty()) emit(o.out, generated.ir_text);

  if (!o.check && o.truth.empty()) return 0;

  // Downstream checking: never trust generated IR, always re-derive.
  std::optional<ModelGraph> cand;
  std::string defect;
  try {
    cand = generated.ir_kind == "dsl" ? elaborate_dsl(generated.ir_text)
                                      : read_netlist(generated.ir_text);
  } catch (const Error& err) {
    if (!is_artifact_defect(err.code())) throw;
    defect = err.what();
  }

  int code = 0;
  if (cand) {
    const std::vector<Diagnostic> diagnostics = validate(*cand);
    print_diagnostics(diagnostics);
    if (has_errors(diagnostics)) code = 1;
  } else {
    std::cout << "generated IR does not parse: " << defect << "\n";
    code = 1;
  }

  if (!o.truth.empty()) {
    const ModelGraph truth = load_model(o.truth);
    const DescriptionMode mode =
        o.mode == "detailed" ? DescriptionMode::Detailed : DescriptionMode::Coarse;
    DiffReport report;
    if (cand) {
      report = diff_models(truth, *cand, {}, mode);
    } else {
      ParseOutcome outcome;
      outcome.ok = false;
      outcome.message = defect;
      report = classify(truth, ModelGraph{}, Correspondence{}, {}, outcome, mode);
    }
    print_diff_report(report);
    if (!o.json_out.empty()) emit(o.json_out, report_json(report));
    if (report.total() > 0) code = 1;
  }
  return code;
}

} // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"factory model IR, validation, simulation, and diff toolkit"};
  app.require_subcommand(1);

  ElaborateOpts elaborate_o;
  ValidateOpts validate_o;
  RenderOpts render_o;
  SimulateOpts simulate_o;
  FitOpts fit_o;
  BindOpts bind_o;
  DiffOpts diff_o;
  BenchOpts bench_o;
  GenerateOpts generate_o;
  std::function<int()> action;

  CLI::App* elab = app.add_subcommand("elaborate", "expand DSL text to a flat netlist");
  elab->add_option("input", elaborate_o.input, "DSL file (.fdl)")->required();
  elab->add_option("-o,--out", elaborate_o.out, "netlist output path (default stdout)");
  elab->callback([&] { action = [&] { return cmd_elaborate(elaborate_o); }; });

  CLI::App* val = app.add_subcommand("validate", "run structural checks on a model");
  val->add_option("input", validate_o.input, "model file (.fdl or netlist JSON)")
      ->required();
  val->add_option("--json", validate_o.json_out, "write diagnostics as JSON");
  val->callback([&] { action = [&] { return cmd_validate(validate_o); }; });

  CLI::App* ren = app.add_subcommand("render", "emit a DOT block diagram");
  ren->add_option("input", render_o.input, "model file (.fdl or netlist JSON)")
      ->required();
  ren->add_option("-o,--out", render_o.out, "DOT output path (default stdout)");
  ren->callback([&] { action = [&] { return cmd_render(render_o); }; });

  CLI::App* sim = app.add_subcommand("simulate", "run the discrete-event engine");
  sim->add_option("input", simulate_o.input, "model file (.fdl or netlist JSON)")
      ->required();
  sim->add_option("--horizon", simulate_o.horizon, "simulated time to run")->required();
  sim->add_option("--warmup", simulate_o.warmup, "KPI warmup cutoff");
  sim->add_option("--seed", simulate_o.seed, "RNG seed (explicit for reproducibility)")
      ->required();
  sim->add_option("--runs", simulate_o.runs, "independent seeds starting at --seed");
  sim->add_flag("--parallel", simulate_o.parallel, "fan multi-run out across threads");
  sim->add_option("--trace", simulate_o.trace_out, "write the event trace CSV (single run)");
  sim->add_option("--json", simulate_o.json_out, "write the report as JSON");
  sim->callback([&] { action = [&] { return cmd_simulate(simulate_o); }; });

  CLI::App* fit = app.add_subcommand("fit", "fit distributions to sample data");
  fit->add_option("input", fit_o.input, "CSV of source_name,value rows")->required();
  fit->add_option("--name", fit_o.default_name, "source name for bare value rows");
  fit->add_option("--family", fit_o.family, "fit only this family (det, exp, normal, lognormal, uniform, gamma)");
  fit->add_option("--criterion", fit_o.criterion, "selection criterion")
      ->check(CLI::IsMember({"aic", "ks"}));
  fit->add_option("--json", fit_o.json_out, "write fits as JSON");
  fit->callback([&] { action = [&] { return cmd_fit(fit_o); }; });

  CLI::App* bnd = app.add_subcommand("bind", "fit samples and attach them to model parameters");
  bnd->add_option("model", bind_o.model, "model file (.fdl or netlist JSON)")->required();
  bnd->add_option("samples", bind_o.samples, "CSV of source_name,value rows")->required();
  bnd->add_option("--map", bind_o.maps, "override: source=node.param (repeatable)");
  bnd->add_option("--criterion", bind_o.criterion, "selection criterion")
      ->check(CLI::IsMember({"aic", "ks"}));
  bnd->add_option("-o,--out", bind_o.out, "bound netlist output path (default stdout)");
  bnd->callback([&] { action = [&] { return cmd_bind(bind_o); }; });

  CLI::App* dif = app.add_subcommand("diff", "classify differences against a ground truth");
  dif->add_option("truth", diff_o.truth, "ground-truth model file")->required();
  dif->add_option("candidate", diff_o.cand, "candidate model file")->required();
  dif->add_option("--mode", diff_o.mode, "report description granularity")
      ->check(CLI::IsMember({"coarse", "detailed"}));
  dif->add_option("--label", diff_o.label, "row label for the CSV report");
  dif->add_option("--csv", diff_o.csv_out, "write the one-row CSV report");
  dif->add_option("--json", diff_o.json_out, "write the full report as JSON");
  dif->callback([&] { action = [&] { return cmd_diff(diff_o); }; });

  CLI::App* ben = app.add_subcommand("bench", "generate benchmark models and run injection campaigns");
  ben->add_option("--labels", bench_o.labels, "only these catalog labels (repeatable)");
  ben->add_option("--out", bench_o.out_dir, "write .fdl/.json pairs to this directory");
  ben->add_flag("--campaign", bench_o.campaign, "run the seeded injection campaign");
  ben->add_option("--trials", bench_o.trials, "campaign trial count");
  ben->add_option("--seed", bench_o.seed, "campaign master seed")
      ->each([&](const std::string&) { bench_o.seed_set = true; });
  ben->add_flag("--parallel", bench_o.parallel, "fan campaign trials out across threads");
  ben->add_option("--mesh", bench_o.mesh, "emit the n x n mesh DSL instead of the catalog");
  ben->add_option("--mesh-out", bench_o.mesh_out, "mesh DSL output path (default stdout)");
  ben->callback([&] { action = [&] { return cmd_bench(bench_o); }; });

  CLI::App* gen = app.add_subcommand("generate", "drive the two-step generation endpoint");
  gen->add_option("--describe", generate_o.describe, "system description text");
  gen->add_option("--describe-file", generate_o.describe_file, "read the description from a file");
  gen->add_option("--assume", generate_o.assume, "extra assumption (repeatable)");
  gen->add_option("--replay", generate_o.replay_dir, "serve replies from this fixture directory");
  gen->add_flag("--strict", generate_o.strict, "replay only on exact request-hash matches");
  gen->add_option("-o,--out", generate_o.out, "write the generated IR here");
  gen->add_flag("--check", generate_o.check, "parse and validate the generated IR");
  gen->add_option("--truth", generate_o.truth, "diff the generated IR against this model");
  gen->add_option("--mode", generate_o.mode, "diff description granularity")
      ->check(CLI::IsMember({"coarse", "detailed"}));
  gen->add_option("--json", generate_o.json_out, "write the diff report as JSON");
  gen->callback([&] { action = [&] { return cmd_generate(generate_o); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (bench_o.campaign && !bench_o.seed_set) {
    std::cerr << "bench --campaign needs an explicit --seed\n";
    return 2;
  }
  if (generate_o.describe.empty() && generate_o.describe_file.empty() &&
      app.got_subcommand("generate")) {
    std::cerr << "generate needs --describe or --describe-file\n";
    return 2;
  }

  try {
    return action ? action() : 2;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return exit_code_for(err);
  } catch (const std::exception& err) {
    std::cerr << "internal error: " << err.what() << "\n";
    return 3;
  }
}

} // namespace twinforge
