#include "twinforge/fit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

namespace twinforge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;

// Digamma via upward recurrence into the asymptotic region, then the
// standard series in 1/x^2.
double digamma(double x) {
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)));
  return result;
}

double trigamma(double x) {
  double result = 0.0;
  while (x < 6.0) {
    result += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += inv * (1.0 + 0.5 * inv +
                   inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 / 30.0))));
  return result;
}

// Regularized lower incomplete gamma P(a, x): series expansion below a+1,
// Lentz continued fraction above.
double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  const double log_gamma_a = std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - log_gamma_a);
  }
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-15) break;
  }
  const double q = std::exp(-x + a * std::log(x) - log_gamma_a) * h;
  return 1.0 - q;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double cdf(const DistSpec& spec, double x) {
  switch (spec.family) {
    case DistFamily::Deterministic:
      return x < spec.a ? 0.0 : 1.0;
    case DistFamily::Exponential:
      return x <= 0.0 ? 0.0 : 1.0 - std::exp(-spec.a * x);
    case DistFamily::Normal:
      return spec.b > 0.0 ? normal_cdf((x - spec.a) / spec.b) : (x < spec.a ? 0.0 : 1.0);
    case DistFamily::Lognormal:
      if (x <= 0.0) return 0.0;
      return spec.b > 0.0 ? normal_cdf((std::log(x) - spec.a) / spec.b)
                          : (std::log(x) < spec.a ? 0.0 : 1.0);
    case DistFamily::Uniform:
      if (x <= spec.a) return 0.0;
      if (x >= spec.b) return 1.0;
      return (x - spec.a) / (spec.b - spec.a);
    case DistFamily::Gamma:
      return x <= 0.0 ? 0.0 : gamma_p(spec.a, x / spec.b);
  }
  return 0.0;
}

double ks_statistic(std::vector<double> sorted, const DistSpec& spec) {
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(spec, sorted[i]);
    d = std::max(d, std::abs((static_cast<double>(i) + 1.0) / n - f));
    d = std::max(d, std::abs(static_cast<double>(i) / n - f));
  }
  return d;
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;  // biased (divide by n), matching the MLE convention
  double min = 0.0;
  double max = 0.0;
  double log_mean = 0.0;   // valid only for positive samples
  double log_var = 0.0;
  bool all_positive = true;
  bool all_nonnegative = true;
};

Moments moments(const std::vector<double>& values) {
  Moments m;
  m.min = m.max = values[0];
  double sum = 0.0;
  for (double v : values) {
    sum += v;
    m.min = std::min(m.min, v);
    m.max = std::max(m.max, v);
    if (v <= 0.0) m.all_positive = false;
    if (v < 0.0) m.all_nonnegative = false;
  }
  const double n = static_cast<double>(values.size());
  m.mean = sum / n;
  double sq = 0.0;
  for (double v : values) sq += (v - m.mean) * (v - m.mean);
  m.var = sq / n;
  if (m.all_positive) {
    double lsum = 0.0;
    for (double v : values) lsum += std::log(v);
    m.log_mean = lsum / n;
    double lsq = 0.0;
    for (double v : values) lsq += (std::log(v) - m.log_mean) * (std::log(v) - m.log_mean);
    m.log_var = lsq / n;
  }
  return m;
}

FitResult finish(DistFamily family, DistSpec spec, double loglik,
                 const std::vector<double>& sorted) {
  FitResult r;
  r.family = family;
  r.spec = spec;
  r.loglik = loglik;
  r.aic = 2.0 * static_cast<double>(spec.param_count()) - 2.0 * loglik;
  r.ks_stat = ks_statistic(sorted, spec);
  r.n = sorted.size();
  return r;
}

FitResult degenerate_fit(double value, std::size_t n) {
  FitResult r;
  r.family = DistFamily::Deterministic;
  r.spec = DistSpec::deterministic(value);
  r.loglik = kInf;   // a point mass reproduces constant data exactly
  r.aic = -kInf;
  r.ks_stat = 0.0;
  r.n = n;
  r.degenerate = true;
  return r;
}

double gamma_shape_mle(double s, double init) {
  // Solve ln k - digamma(k) = s by Newton; s > 0 by Jensen on non-constant data.
  double k = std::max(init, 1e-8);
  for (int iter = 0; iter < 100; ++iter) {
    const double f = std::log(k) - digamma(k) - s;
    const double fprime = 1.0 / k - trigamma(k);
    const double step = f / fprime;
    double next = k - step;
    if (next <= 0.0) next = k / 2.0;  // keep the iterate in the domain
    if (std::abs(next - k) <= 1e-8 * std::max(1.0, std::abs(k))) return next;
    k = next;
  }
  return k;
}

} // namespace

SampleSet apply_window(const std::vector<std::pair<double, double>>& timed,
                       double t0, double t1, std::string source_name) {
  SampleSet set;
  set.source_name = std::move(source_name);
  set.window = {t0, t1};
  for (const auto& [t, v] : timed)
    if (t >= t0 && t <= t1) set.values.push_back(v);
  return set;
}

std::map<std::string, SampleSet> parse_samples_csv(const std::string& text,
                                                   const std::string& default_name) {
  std::map<std::string, SampleSet> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line == "source_name,value") continue;
    const std::size_t comma = line.find(',');
    std::string name = comma == std::string::npos ? default_name : line.substr(0, comma);
    const std::string value_text = comma == std::string::npos ? line : line.substr(comma + 1);
    char* end = nullptr;
    const double value = std::strtod(value_text.c_str(), &end);
    if (end == value_text.c_str() || *end != '\0' || !std::isfinite(value))
      throw Error(Errc::Parse,
                  "line " + std::to_string(line_no) + ": '" + value_text +
                      "' is not a finite number");
    auto& set = out[name];
    set.source_name = name;
    set.values.push_back(value);
  }
  return out;
}

FitResult fit_family(const SampleSet& samples, DistFamily family) {
  const std::vector<double>& xs = samples.values;
  if (xs.empty()) throw Error(Errc::InsufficientData, "no samples", samples.source_name);
  const std::size_t two_param_min = 2;
  const bool two_param = DistSpec{family, 0, 0}.param_count() == 2;
  if (two_param && xs.size() < two_param_min)
    throw Error(Errc::InsufficientData,
                std::string(dist_family_name(family)) + " needs at least 2 samples",
                samples.source_name);

  const Moments m = moments(xs);
  const double n = static_cast<double>(xs.size());
  std::vector<double> sorted = xs;
  std::sort(sorted.begin(), sorted.end());

  switch (family) {
    case DistFamily::Deterministic: {
      if (m.var > 0.0) {
        // A point mass cannot explain spread; report it as an (always
        // losing) candidate rather than failing the family.
        FitResult r = finish(family, DistSpec::deterministic(m.mean), -kInf, sorted);
        return r;
      }
      FitResult r = degenerate_fit(m.mean, xs.size());
      r.degenerate = false;  // constant data and a point mass is the honest fit
      return r;
    }
    case DistFamily::Exponential: {
      if (!m.all_nonnegative)
        throw Error(Errc::UnsupportedData, "exponential needs non-negative samples",
                    samples.source_name);
      if (m.mean <= 0.0) return degenerate_fit(m.mean, xs.size());
      const double rate = 1.0 / m.mean;
      const double loglik = n * std::log(rate) - rate * m.mean * n;
      return finish(family, DistSpec::exponential(rate), loglik, sorted);
    }
    case DistFamily::Normal: {
      if (m.var <= 0.0) return degenerate_fit(m.mean, xs.size());
      const double sigma = std::sqrt(m.var);
      const double loglik = -0.5 * n * (std::log(2.0 * kPi * m.var) + 1.0);
      return finish(family, DistSpec::normal(m.mean, sigma), loglik, sorted);
    }
    case DistFamily::Lognormal: {
      if (!m.all_positive)
        throw Error(Errc::UnsupportedData, "lognormal needs positive samples",
                    samples.source_name);
      if (m.log_var <= 0.0) return degenerate_fit(m.mean, xs.size());
      const double sigma = std::sqrt(m.log_var);
      double loglik = -0.5 * n * (std::log(2.0 * kPi * m.log_var) + 1.0);
      loglik -= n * m.log_mean;  // Jacobian: subtract sum of log x
      return finish(family, DistSpec::lognormal(m.log_mean, sigma), loglik, sorted);
    }
    case DistFamily::Uniform: {
      if (m.var <= 0.0) return degenerate_fit(m.mean, xs.size());
      const double loglik = -n * std::log(m.max - m.min);
      return finish(family, DistSpec::uniform(m.min, m.max), loglik, sorted);
    }
    case DistFamily::Gamma: {
      if (!m.all_positive)
        throw Error(Errc::UnsupportedData, "gamma needs positive samples",
                    samples.source_name);
      if (m.var <= 0.0) return degenerate_fit(m.mean, xs.size());
      const double s = std::log(m.mean) - m.log_mean;
      const double init = m.mean * m.mean / m.var;  // method of moments
      const double shape = gamma_shape_mle(s, init);
      const double scale = m.mean / shape;
      double loglik = 0.0;
      loglik += (shape - 1.0) * m.log_mean * n;
      loglik -= m.mean * n / scale;
      loglik -= n * (shape * std::log(scale) + std::lgamma(shape));
      return finish(family, DistSpec::gamma(shape, scale), loglik, sorted);
    }
  }
  throw Error(Errc::UnknownFamily, "unhandled family");
}

std::span<const DistFamily> all_families() {
  static constexpr DistFamily kAll[] = {
      DistFamily::Deterministic, DistFamily::Exponential, DistFamily::Normal,
      DistFamily::Lognormal,     DistFamily::Uniform,     DistFamily::Gamma,
  };
  return kAll;
}

FitResult select_fit(const SampleSet& samples, std::span<const DistFamily> families,
                     FitCriterion criterion) {
  if (families.empty())
    throw Error(Errc::NoViableFit, "no candidate families", samples.source_name);

  std::optional<FitResult> best;
  for (DistFamily family : families) {
    FitResult fit;
    try {
      fit = fit_family(samples, family);
    } catch (const Error&) {
      continue;  // family not applicable to this data
    }
    if (!best) {
      best = fit;
      continue;
    }
    const double score = criterion == FitCriterion::Aic ? fit.aic : fit.ks_stat;
    const double best_score = criterion == FitCriterion::Aic ? best->aic : best->ks_stat;
    if (score < best_score ||
        (score == best_score && fit.spec.param_count() < best->spec.param_count()))
      best = fit;
  }
  if (!best)
    throw Error(Errc::NoViableFit, "every candidate family was skipped",
                samples.source_name);
  return *best;
}

std::pair<ModelGraph, BindingPlan> bind(ModelGraph graph,
                                        const std::map<std::string, FitResult>& fits,
                                        const std::map<std::string, std::string>& overrides) {
  BindingPlan plan;
  std::map<std::pair<std::string, std::string>, std::string> claimed;  // target -> source

  for (const auto& [source, fit] : fits) {
    std::string target = source;
    if (auto it = overrides.find(source); it != overrides.end()) target = it->second;

    const std::size_t dot = target.rfind('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == target.size()) {
      plan.unmatched.push_back(source);
      continue;
    }
    const std::string node_id = target.substr(0, dot);
    const std::string param = target.substr(dot + 1);
    const Node* node = graph.find_node(node_id);
    if (!node || !is_known_param(node->kind, param)) {
      plan.unmatched.push_back(source);
      continue;
    }
    auto [it, inserted] = claimed.emplace(std::make_pair(node_id, param), source);
    if (!inserted)
      throw Error(Errc::BindConflict,
                  "sources '" + it->second + "' and '" + source + "' both target " +
                      node_id + "." + param,
                  node_id);
    for (auto& n : graph.nodes) {
      if (n.id != node_id) continue;
      n.params[param] = ParamValue::of(fit.spec);
      break;
    }
    plan.entries.push_back({source, node_id, param});
  }
  return {std::move(graph), std::move(plan)};
}

} // namespace twinforge
