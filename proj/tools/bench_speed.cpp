// Serial vs parallel comparison for the fan-out paths: the injection
// campaign and multi-seed simulation. The parallel paths must produce the
// same results as the serial reference; this binary measures both and, with
// --check, fails when they disagree.

#include <chrono>
#include <cstdint>
#include <cstring>
#include <iostream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "twinforge/bench.hpp"
#include "twinforge/sim.hpp"

using namespace twinforge;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct CampaignSummary {
  std::size_t mismatches = 0;
  std::size_t injected = 0;
  double elapsed = 0.0;
};

CampaignSummary run_campaign(const std::vector<GeneratedModel>& models,
                             std::size_t trials, std::uint64_t seed, bool parallel) {
  const auto start = Clock::now();
  const CampaignResult result = run_injection_campaign(models, trials, seed, parallel);
  return {result.mismatches, result.total_injected, seconds_since(start)};
}

struct SimSummary {
  double total_throughput = 0.0;
  double elapsed = 0.0;
};

SimSummary run_sims(const ModelGraph& graph, std::size_t runs, std::uint64_t seed,
                    bool parallel) {
  const auto start = Clock::now();
  std::vector<double> totals(runs, 0.0);
  auto one = [&](std::size_t r) {
    SimConfig config;
    config.horizon = 5000.0;
    config.warmup = 500.0;
    config.seed = seed + r;
    const SimReport report = simulate(graph, config);
    double total = 0.0;
    for (const auto& [sink, rate] : report.throughput) total += rate;
    totals[r] = total;
  };
#ifdef _OPENMP
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long long r = 0; r < static_cast<long long>(runs); ++r)
      one(static_cast<std::size_t>(r));
  } else {
    for (std::size_t r = 0; r < runs; ++r) one(r);
  }
#else
  (void)parallel;
  for (std::size_t r = 0; r < runs; ++r) one(r);
#endif
  SimSummary s;
  for (double t : totals) s.total_throughput += t;
  s.elapsed = seconds_since(start);
  return s;
}

} // namespace

int main(int argc, char** argv) {
  std::size_t trials = 400;
  std::size_t sim_runs = 32;
  bool check = false;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--trials") == 0 && i + 1 < argc)
      trials = static_cast<std::size_t>(std::stoull(argv[++i]));
    else if (std::strcmp(argv[i], "--sim-runs") == 0 && i + 1 < argc)
      sim_runs = static_cast<std::size_t>(std::stoull(argv[++i]));
    else if (std::strcmp(argv[i], "--check") == 0)
      check = true;
    else {
      std::cerr << "usage: bench_speed [--trials N] [--sim-runs N] [--check]\n";
      return 2;
    }
  }

#ifdef _OPENMP
  std::cout << "openmp threads: " << omp_get_max_threads() << "\n";
#else
  std::cout << "openmp: not built in; parallel paths run serially\n";
#endif

  std::vector<GeneratedModel> models;
  for (const BenchmarkSpec& spec : standard_catalog()) models.push_back(generate(spec));

  const CampaignSummary cs = run_campaign(models, trials, 2026, false);
  const CampaignSummary cp = run_campaign(models, trials, 2026, true);
  std::cout << "campaign trials=" << trials << " serial=" << cs.elapsed << "s"
            << " parallel=" << cp.elapsed << "s"
            << " speedup=" << (cp.elapsed > 0 ? cs.elapsed / cp.elapsed : 0.0) << "\n";

  const GeneratedModel& line = models[33];  // the 100-machine serial line
  const SimSummary ss = run_sims(line.graph, sim_runs, 7, false);
  const SimSummary sp = run_sims(line.graph, sim_runs, 7, true);
  std::cout << "simulate runs=" << sim_runs << " serial=" << ss.elapsed << "s"
            << " parallel=" << sp.elapsed << "s"
            << " speedup=" << (sp.elapsed > 0 ? ss.elapsed / sp.elapsed : 0.0) << "\n";

  if (check) {
    bool ok = true;
    if (cs.mismatches != cp.mismatches || cs.injected != cp.injected) {
      std::cout << "MISMATCH: campaign serial (" << cs.mismatches << "/" << cs.injected
                << ") vs parallel (" << cp.mismatches << "/" << cp.injected << ")\n";
      ok = false;
    }
    if (cs.mismatches != 0) {
      std::cout << "MISMATCH: campaign reported " << cs.mismatches
                << " classification mismatches\n";
      ok = false;
    }
    if (ss.total_throughput != sp.total_throughput) {
      std::cout << "MISMATCH: simulate serial throughput sum " << ss.total_throughput
                << " vs parallel " << sp.total_throughput << "\n";
      ok = false;
    }
    std::cout << (ok ? "check passed: parallel results identical to serial\n"
                     : "check failed\n");
    return ok ? 0 : 1;
  }
  return 0;
}
