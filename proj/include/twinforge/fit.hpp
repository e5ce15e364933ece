#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "twinforge/model.hpp"

namespace twinforge {

struct SampleSet {
  std::vector<double> values;
  std::string source_name;
  // Carried provenance. The CSV ingestion path has no timestamps, so the
  // window is applied only through apply_window on timestamped series.
  std::optional<std::pair<double, double>> window;
};

// Pre-filter a (time, value) series to [t0, t1]; the fit itself is windowless.
SampleSet apply_window(const std::vector<std::pair<double, double>>& timed,
                       double t0, double t1, std::string source_name);

// Rows are `source_name,value`, or bare `value` rows collected under
// `default_name`. A leading `source_name,value` header row is skipped.
std::map<std::string, SampleSet> parse_samples_csv(const std::string& text,
                                                   const std::string& default_name);

struct FitResult {
  DistFamily family = DistFamily::Deterministic;
  DistSpec spec;
  double loglik = 0.0;
  double aic = 0.0;      // 2k - 2 loglik, k = family parameter count
  double ks_stat = 0.0;  // sup-distance between empirical and fitted CDF
  std::size_t n = 0;
  bool degenerate = false;  // zero-variance collapse to Deterministic
};

// Maximum-likelihood fit of one family. Gamma solves its shape equation by
// Newton iteration (tolerance 1e-8, at most 100 steps) from a
// method-of-moments start. Zero-variance samples collapse to a flagged
// Deterministic fit for families that need spread. Throws InsufficientData
// (n = 0, or n < 2 for two-parameter families) and UnsupportedData (values
// outside the family's support).
FitResult fit_family(const SampleSet& samples, DistFamily family);

enum class FitCriterion { Aic, Ks };

std::span<const DistFamily> all_families();  // the six, canonical order

// Best fit under the criterion; ties go to fewer parameters, then canonical
// family order. Families whose fit throws are skipped; NoViableFit if all do.
FitResult select_fit(const SampleSet& samples, std::span<const DistFamily> families,
                     FitCriterion criterion = FitCriterion::Aic);

struct BindingPlan {
  struct Entry {
    std::string source_name;
    std::string node_id;
    std::string param_name;

    bool operator==(const Entry&) const = default;
  };
  std::vector<Entry> entries;
  std::vector<std::string> unmatched;  // sources with no usable target
};

// Attach fitted distributions to graph parameters. A source named
// `<node_id>.<param>` (split at the last dot) binds to that node's param when
// the node exists and the param belongs to its kind's schema; `overrides`
// maps source names to replacement `<node_id>.<param>` targets and wins over
// the name rule. Everything else about the graph is untouched. Two sources
// resolving to one param is a BindConflict.
std::pair<ModelGraph, BindingPlan> bind(ModelGraph graph,
                                        const std::map<std::string, FitResult>& fits,
                                        const std::map<std::string, std::string>& overrides = {});

} // namespace twinforge
