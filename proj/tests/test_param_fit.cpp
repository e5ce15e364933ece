#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "helpers.hpp"
#include "twinforge/fit.hpp"
#include "twinforge/rng.hpp"

using namespace twinforge;
using tf_test::make_line;

namespace {

SampleSet samples(std::vector<double> values) {
  SampleSet s;
  s.values = std::move(values);
  s.source_name = "test";
  return s;
}

SampleSet draw(const DistSpec& spec, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  SampleSet s;
  s.source_name = "drawn";
  s.values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) s.values.push_back(sample(spec, rng));
  return s;
}

// Reference digamma, written independently of the fitting code: recurrence up
// to x >= 8, then the asymptotic series.
double ref_digamma(double x) {
  double acc = 0.0;
  while (x < 8.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x, inv2 = inv * inv;
  return acc + std::log(x) - 0.5 * inv -
         inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0));
}

} // namespace

TEST_SUITE("fit/csv") {
  TEST_CASE("named rows, bare rows, header, CRLF") {
    const std::string text =
        "source_name,value\r\n"
        "M1.delay,1.5\n"
        "M1.delay,2.5\r\n"
        "3.75\n"
        "SRC.inter_arrival,0.5\n";
    auto sets = parse_samples_csv(text, "default");
    REQUIRE(sets.count("M1.delay") == 1);
    REQUIRE(sets.count("default") == 1);
    REQUIRE(sets.count("SRC.inter_arrival") == 1);
    CHECK(sets.at("M1.delay").values == std::vector<double>{1.5, 2.5});
    CHECK(sets.at("default").values == std::vector<double>{3.75});
    CHECK(sets.at("M1.delay").source_name == "M1.delay");
  }

  TEST_CASE("bad numbers carry the line number") {
    try {
      parse_samples_csv("M1.delay,1.0\nM1.delay,fast\n", "d");
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::Parse);
      REQUIRE(e.span().has_value());
      CHECK(e.span()->line == 2);
    }
  }

  TEST_CASE("empty text yields no sample sets") {
    CHECK(parse_samples_csv("", "d").empty());
    CHECK(parse_samples_csv("source_name,value\n", "d").empty());
  }
}

TEST_SUITE("fit/window") {
  TEST_CASE("keeps values inside [t0, t1] and records the window") {
    std::vector<std::pair<double, double>> timed = {
        {0.0, 10.0}, {1.0, 11.0}, {2.0, 12.0}, {3.0, 13.0}, {4.0, 14.0}};
    SampleSet s = apply_window(timed, 1.0, 3.0, "w");
    CHECK(s.values == std::vector<double>{11.0, 12.0, 13.0});
    CHECK(s.source_name == "w");
    REQUIRE(s.window.has_value());
    CHECK(s.window->first == 1.0);
    CHECK(s.window->second == 3.0);
  }
}

TEST_SUITE("fit/mle-closed-forms") {
  TEST_CASE("deterministic") {
    FitResult r = fit_family(samples({2.5, 2.5, 2.5}), DistFamily::Deterministic);
    CHECK(r.spec == DistSpec::deterministic(2.5));
    CHECK(r.loglik == 0.0);
    CHECK(r.aic == 2.0);
    CHECK(r.ks_stat == 0.0);
    CHECK_FALSE(r.degenerate);

    // Non-constant data cannot be explained by a point mass.
    FitResult bad = fit_family(samples({1.0, 2.0}), DistFamily::Deterministic);
    CHECK(bad.loglik == -std::numeric_limits<double>::infinity());
    CHECK(bad.aic == std::numeric_limits<double>::infinity());
  }

  TEST_CASE("exponential: rate is 1/mean") {
    FitResult r = fit_family(samples({1.0, 3.0}), DistFamily::Exponential);
    CHECK(r.spec.a == doctest::Approx(0.5));
    // loglik = n ln(rate) - rate * sum = 2 ln 0.5 - 2
    CHECK(r.loglik == doctest::Approx(2.0 * std::log(0.5) - 2.0));
    CHECK(r.aic == doctest::Approx(2.0 - 2.0 * r.loglik));
    CHECK(r.n == 2);
  }

  TEST_CASE("normal: mean and biased sigma") {
    FitResult r = fit_family(samples({1.0, 2.0, 3.0}), DistFamily::Normal);
    CHECK(r.spec.a == doctest::Approx(2.0));
    CHECK(r.spec.b == doctest::Approx(std::sqrt(2.0 / 3.0)));
    const double ll = -1.5 * (std::log(2.0 * M_PI * 2.0 / 3.0) + 1.0);
    CHECK(r.loglik == doctest::Approx(ll));
    CHECK(r.aic == doctest::Approx(4.0 - 2.0 * ll));
  }

  TEST_CASE("lognormal: moments of the logs") {
    FitResult r = fit_family(samples({std::exp(1.0), std::exp(2.0)}),
                             DistFamily::Lognormal);
    CHECK(r.spec.a == doctest::Approx(1.5));
    CHECK(r.spec.b == doctest::Approx(0.5));
    const double ll = -3.0 - (std::log(2.0 * M_PI * 0.25) + 1.0);
    CHECK(r.loglik == doctest::Approx(ll));
  }

  TEST_CASE("uniform: sample extremes") {
    FitResult r = fit_family(samples({1.0, 2.0, 3.0, 4.0}), DistFamily::Uniform);
    CHECK(r.spec == DistSpec::uniform(1.0, 4.0));
    CHECK(r.loglik == doctest::Approx(-4.0 * std::log(3.0)));
    // Exact sup-distance for this sample against Uniform(1, 4).
    CHECK(r.ks_stat == doctest::Approx(0.25));
  }

  TEST_CASE("gamma: the shape equation is actually solved") {
    SampleSet s = draw(DistSpec::gamma(3.0, 2.0), 20000, 404);
    FitResult r = fit_family(s, DistFamily::Gamma);
    CHECK(r.spec.a == doctest::Approx(3.0).epsilon(0.05));
    CHECK(r.spec.b == doctest::Approx(2.0).epsilon(0.05));

    // MLE stationarity: ln(k) - psi(k) = ln(mean) - mean(ln x), checked with
    // an independently written digamma.
    double mean = 0.0, log_mean = 0.0;
    for (double v : s.values) {
      mean += v;
      log_mean += std::log(v);
    }
    mean /= static_cast<double>(s.values.size());
    log_mean /= static_cast<double>(s.values.size());
    const double target = std::log(mean) - log_mean;
    const double residual =
        std::log(r.spec.a) - ref_digamma(r.spec.a) - target;
    CHECK(std::abs(residual) <= 1e-7);
    // Scale follows from the solved shape.
    CHECK(r.spec.b == doctest::Approx(mean / r.spec.a));
  }
}

TEST_SUITE("fit/guards") {
  TEST_CASE("insufficient data") {
    CHECK_THROWS_AS(fit_family(samples({}), DistFamily::Exponential), Error);
    CHECK_THROWS_AS(fit_family(samples({1.0}), DistFamily::Normal), Error);
    CHECK_THROWS_AS(fit_family(samples({1.0}), DistFamily::Gamma), Error);
    try {
      fit_family(samples({1.0}), DistFamily::Uniform);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::InsufficientData);
    }
    // One sample is enough for the one-parameter families.
    CHECK(fit_family(samples({2.0}), DistFamily::Deterministic).spec.a == 2.0);
    CHECK(fit_family(samples({2.0}), DistFamily::Exponential).spec.a ==
          doctest::Approx(0.5));
  }

  TEST_CASE("unsupported data") {
    try {
      fit_family(samples({1.0, -2.0}), DistFamily::Exponential);
      FAIL("expected UnsupportedData");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::UnsupportedData);
    }
    CHECK_THROWS_AS(fit_family(samples({0.0, 1.0}), DistFamily::Lognormal), Error);
    CHECK_THROWS_AS(fit_family(samples({0.0, 1.0}), DistFamily::Gamma), Error);
    // Normal and uniform take any finite reals.
    CHECK_NOTHROW(fit_family(samples({-5.0, 5.0}), DistFamily::Normal));
    CHECK_NOTHROW(fit_family(samples({-5.0, 5.0}), DistFamily::Uniform));
  }

  TEST_CASE("zero variance collapses spread families to a point mass") {
    for (DistFamily f : {DistFamily::Normal, DistFamily::Lognormal,
                         DistFamily::Uniform, DistFamily::Gamma}) {
      FitResult r = fit_family(samples({3.0, 3.0, 3.0}), f);
      INFO("family ", dist_family_name(f));
      CHECK(r.degenerate);
      CHECK(r.spec == DistSpec::deterministic(3.0));
    }
    // Exponential handles constants without collapsing.
    FitResult e = fit_family(samples({3.0, 3.0, 3.0}), DistFamily::Exponential);
    CHECK_FALSE(e.degenerate);
    CHECK(e.spec.a == doctest::Approx(1.0 / 3.0));
  }
}

TEST_SUITE("fit/selection") {
  TEST_CASE("AIC picks the generating family on separated data") {
    SampleSet s = draw(DistSpec::normal(10.0, 2.0), 4000, 7);
    FitResult r = select_fit(s, all_families());
    CHECK(r.family == DistFamily::Normal);

    SampleSet u = draw(DistSpec::uniform(2.0, 6.0), 4000, 8);
    CHECK(select_fit(u, all_families()).family == DistFamily::Uniform);
  }

  TEST_CASE("KS criterion is available") {
    SampleSet s = draw(DistSpec::exponential(0.5), 4000, 9);
    FitResult r = select_fit(s, all_families(), FitCriterion::Ks);
    // Exponential data: the winner must at least describe the data well.
    CHECK(r.ks_stat < 0.02);
  }

  TEST_CASE("constant data selects the point mass") {
    FitResult r = select_fit(samples({4.0, 4.0, 4.0, 4.0}), all_families());
    CHECK(r.family == DistFamily::Deterministic);
    CHECK(r.spec == DistSpec::deterministic(4.0));
  }

  TEST_CASE("families whose fit throws are skipped, not fatal") {
    // Negative values knock out exp/lognormal/gamma; normal still fits.
    SampleSet s = draw(DistSpec::normal(0.0, 1.0), 2000, 10);
    FitResult r = select_fit(s, all_families());
    CHECK(r.family == DistFamily::Normal);
  }

  TEST_CASE("no viable family at all") {
    CHECK_THROWS_AS(select_fit(samples({}), all_families()), Error);
    try {
      select_fit(samples({1.0, 2.0}), {});
    } catch (const Error& e) {
      CHECK(e.code() == Errc::NoViableFit);
    }
  }

  TEST_CASE("AIC is 2k minus twice the log-likelihood") {
    SampleSet s = draw(DistSpec::gamma(2.0, 1.0), 500, 11);
    for (DistFamily f : {DistFamily::Exponential, DistFamily::Normal,
                         DistFamily::Gamma}) {
      FitResult r = fit_family(s, f);
      CHECK(r.aic == doctest::Approx(
                         2.0 * static_cast<double>(r.spec.param_count()) -
                         2.0 * r.loglik));
    }
  }
}

TEST_SUITE("fit/bind") {
  TEST_CASE("sources bind to node params by dotted name") {
    ModelGraph g = make_line(2, ParamValue::of(2.0));
    std::map<std::string, FitResult> fits;
    fits["M1.delay"] = fit_family(draw(DistSpec::exponential(1.0), 100, 1),
                                  DistFamily::Exponential);
    fits["SRC.inter_arrival"] =
        fit_family(draw(DistSpec::gamma(2.0, 1.0), 100, 2), DistFamily::Gamma);
    fits["GHOST.delay"] = fits["M1.delay"];
    fits["M2.mystery"] = fits["M1.delay"];

    auto [bound, plan] = twinforge::bind(g, fits);
    REQUIRE(plan.entries.size() == 2);
    CHECK(plan.unmatched == std::vector<std::string>{"GHOST.delay", "M2.mystery"});

    const Node* m1 = bound.find_node("M1");
    REQUIRE(m1 != nullptr);
    CHECK(m1->params.at("delay").type == ParamValue::Type::Dist);
    CHECK(m1->params.at("delay").dist.family == DistFamily::Exponential);
    const Node* src = bound.find_node("SRC");
    CHECK(src->params.at("inter_arrival").dist.family == DistFamily::Gamma);
    // Untouched elsewhere.
    CHECK(bound.find_node("M2")->params.at("delay") == ParamValue::of(1.0));
  }

  TEST_CASE("split happens at the last dot") {
    ModelGraph g = make_line(1, ParamValue::of(2.0));
    for (auto& n : g.nodes)
      if (n.id == "M1") n.id = "cell.M1";
    for (auto& e : g.edges) {
      if (e.from == "M1") e.from = "cell.M1";
      if (e.to == "M1") e.to = "cell.M1";
    }
    std::map<std::string, FitResult> fits;
    fits["cell.M1.delay"] =
        fit_family(draw(DistSpec::exponential(2.0), 50, 3), DistFamily::Exponential);
    auto [bound, plan] = twinforge::bind(g, fits);
    REQUIRE(plan.entries.size() == 1);
    CHECK(plan.entries[0].node_id == "cell.M1");
    CHECK(plan.entries[0].param_name == "delay");
  }

  TEST_CASE("overrides beat the name rule") {
    ModelGraph g = make_line(1, ParamValue::of(2.0));
    std::map<std::string, FitResult> fits;
    fits["station_timings"] =
        fit_family(draw(DistSpec::normal(4.0, 0.5), 50, 4), DistFamily::Normal);
    std::map<std::string, std::string> overrides;
    overrides["station_timings"] = "M1.delay";
    auto [bound, plan] = twinforge::bind(g, fits, overrides);
    REQUIRE(plan.entries.size() == 1);
    CHECK(plan.entries[0].node_id == "M1");
    CHECK(bound.find_node("M1")->params.at("delay").dist.family == DistFamily::Normal);
    CHECK(plan.unmatched.empty());
  }

  TEST_CASE("two sources on one param conflict") {
    ModelGraph g = make_line(1, ParamValue::of(2.0));
    std::map<std::string, FitResult> fits;
    fits["M1.delay"] =
        fit_family(draw(DistSpec::exponential(1.0), 50, 5), DistFamily::Exponential);
    fits["other"] = fits["M1.delay"];
    std::map<std::string, std::string> overrides;
    overrides["other"] = "M1.delay";
    try {
      twinforge::bind(g, fits, overrides);
      FAIL("expected BindConflict");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::BindConflict);
      CHECK(e.entity() == "M1");
      CHECK(std::string(e.what()).find("M1.delay") != std::string::npos);
    }
  }
}
