#include "core/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "core/errors.hpp"
#include "core/estimate.hpp"
#include "core/rng.hpp"

namespace dpdglm {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

const char* test_function_name(TestFunction id) {
  return id == TestFunction::g1 ? "g1" : "g2";
}

TestFunction test_function_from_name(const std::string& name) {
  if (name == "g1") return TestFunction::g1;
  if (name == "g2") return TestFunction::g2;
  fail(ErrorCode::invalid_argument, "unknown test function: " + name);
}

double test_function(TestFunction id, double t) {
  switch (id) {
    case TestFunction::g1: return -std::sin(25.0 * t / 6.0) / 0.8 - 1.0;
    case TestFunction::g2: return 1.8 * std::sin(3.4 * t * t);
  }
  return 0.0;
}

void validate(const Scenario& s) {
  if (s.family == FamilyKind::exponential)
    fail(ErrorCode::invalid_argument,
         "benchmark scenarios cover gaussian, bernoulli and poisson responses");
  if (!(s.eps >= 0.0 && s.eps < 0.5))
    fail(ErrorCode::invalid_argument, "contamination fraction must lie in [0, 0.5)");
  if (s.n < 20) fail(ErrorCode::invalid_argument, "scenario needs n >= 20");
}

namespace {

Dataset generate_with(const Scenario& s, Rng rng) {
  Dataset ds;
  ds.t.resize(s.n);
  ds.y.resize(s.n);
  FamilyPtr fam = make_family(s.family);
  for (int i = 0; i < s.n; ++i) {
    const double t = (i + 1.0) / (s.n + 1.0);
    const double g = test_function(s.test_fn, t);
    ds.t[i] = t;
    switch (s.family) {
      case FamilyKind::gaussian: {
        const double sd = rng.bernoulli(s.eps) ? 9.0 : 1.0;
        ds.y[i] = g + sd * rng.normal();
        break;
      }
      case FamilyKind::bernoulli: {
        const double p = fam->b_derivatives(g).b1;
        double v = rng.bernoulli(p) ? 1.0 : 0.0;
        if (rng.bernoulli(s.eps)) v = 1.0 - v;  // misclassification
        ds.y[i] = v;
        break;
      }
      case FamilyKind::poisson: {
        const double mu = std::exp(g);
        double v = rng.poisson(mu);
        if (rng.bernoulli(s.eps)) v = rng.poisson(3.0 * mu);  // overdispersed
        ds.y[i] = v;
        break;
      }
      default:
        fail(ErrorCode::invalid_argument, "unsupported scenario family");
    }
  }
  return ds;
}

}  // namespace

Dataset generate(const Scenario& s) {
  if (!(s.eps >= 0.0 && s.eps <= 1.0))
    fail(ErrorCode::invalid_argument, "contamination fraction must lie in [0,1]");
  return generate_with(s, Rng(Rng::mix(s.seed)));
}

Dataset generate_replicate(const Scenario& s, std::uint64_t replicate) {
  return generate_with(s, Rng::for_replicate(s.seed, replicate));
}

const char* estimator_name(Estimator e) {
  switch (e) {
    case Estimator::dpd_adaptive: return "dpd_adaptive";
    case Estimator::dpd_l2: return "dpd_l2";
    case Estimator::gam: return "gam";
  }
  return "unknown";
}

std::vector<Estimator> default_roster() {
  return {Estimator::dpd_adaptive, Estimator::dpd_l2, Estimator::gam};
}

namespace {

double aggregate_mean(const std::vector<double>& v) {
  double acc = 0.0;
  int count = 0;
  for (double x : v)
    if (std::isfinite(x)) {
      acc += x;
      ++count;
    }
  return count ? acc / count : kNaN;
}

double aggregate_median(const std::vector<double>& v) {
  std::vector<double> ok;
  for (double x : v)
    if (std::isfinite(x)) ok.push_back(x);
  if (ok.empty()) return kNaN;
  std::sort(ok.begin(), ok.end());
  const size_t m = ok.size();
  return m % 2 == 1 ? ok[m / 2] : 0.5 * (ok[m / 2 - 1] + ok[m / 2]);
}

}  // namespace

BenchReport run_benchmark(const Scenario& s, int reps,
                          const std::vector<Estimator>& roster) {
  validate(s);
  if (reps < 1) fail(ErrorCode::invalid_argument, "reps must be >= 1");
  const auto start = std::chrono::steady_clock::now();

  BenchReport report;
  report.scenario = s;
  report.reps = reps;
  report.estimators.resize(roster.size());
  for (size_t e = 0; e < roster.size(); ++e) {
    report.estimators[e].which = roster[e];
    report.estimators[e].replicate_mse.assign(reps, kNaN);
    report.estimators[e].alpha_hat.assign(reps, kNaN);
  }

  std::vector<double> mu_true(s.n);
  FamilyPtr plain = make_family(s.family);
  for (int i = 0; i < s.n; ++i)
    mu_true[i] = plain
                     ->b_derivatives(test_function(s.test_fn, (i + 1.0) / (s.n + 1.0)))
                     .b1;

  for (int rep = 0; rep < reps; ++rep) {
    const Dataset ds = generate_replicate(s, static_cast<std::uint64_t>(rep));
    for (size_t e = 0; e < roster.size(); ++e) {
      EstimateConfig cfg;
      cfg.family = s.family;
      switch (roster[e]) {
        case Estimator::dpd_adaptive: cfg.alpha = -1.0; break;
        case Estimator::dpd_l2: cfg.alpha = 1.0; break;
        case Estimator::gam: cfg.alpha = 0.0; break;
      }
      try {
        const EstimateOutput out = estimate(ds.t, ds.y, cfg);
        double mse = 0.0;
        for (int i = 0; i < s.n; ++i) {
          const double diff = out.fit.mu_hat[i] - mu_true[static_cast<size_t>(i)];
          mse += diff * diff;
        }
        report.estimators[e].replicate_mse[static_cast<size_t>(rep)] =
            mse / s.n;
        if (roster[e] == Estimator::dpd_adaptive)
          report.estimators[e].alpha_hat[static_cast<size_t>(rep)] =
              out.selection ? out.selection->alpha_hat : cfg.alpha;
      } catch (const Error&) {
        ++report.estimators[e].failures;
      }
    }
  }

  for (auto& stats : report.estimators) {
    stats.mean_mse = aggregate_mean(stats.replicate_mse);
    stats.median_mse = aggregate_median(stats.replicate_mse);
    stats.all_failed = stats.failures == reps;
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

std::string format_table(const BenchReport& report) {
  auto label = [](Estimator e) -> const char* {
    switch (e) {
      case Estimator::dpd_adaptive: return "DPD(ahat)";
      case Estimator::dpd_l2: return "DPD(1)";
      case Estimator::gam: return "GAM";
    }
    return "?";
  };
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "family=%s  g=%s  n=%d  eps=%.2f  reps=%d\n",
                family_name(report.scenario.family),
                test_function_name(report.scenario.test_fn), report.scenario.n,
                report.scenario.eps, report.reps);
  out += line;
  out += "                ";
  for (const auto& stats : report.estimators) {
    std::snprintf(line, sizeof(line), "%-20s", label(stats.which));
    out += line;
  }
  out += "\n                ";
  for (size_t e = 0; e < report.estimators.size(); ++e) {
    std::snprintf(line, sizeof(line), "%-10s%-10s", "Mean", "Median");
    out += line;
  }
  out += "\nMSE x100        ";
  for (const auto& stats : report.estimators) {
    std::snprintf(line, sizeof(line), "%-10.3f%-10.3f", 100.0 * stats.mean_mse,
                  100.0 * stats.median_mse);
    out += line;
  }
  out += "\n";
  bool any_failures = false;
  for (const auto& stats : report.estimators) any_failures |= stats.failures > 0;
  if (any_failures) {
    out += "failures        ";
    for (const auto& stats : report.estimators) {
      std::snprintf(line, sizeof(line), "%-20d", stats.failures);
      out += line;
    }
    out += "\n";
  }
  return out;
}

}  // namespace dpdglm
