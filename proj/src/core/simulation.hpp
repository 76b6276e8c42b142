#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/family.hpp"

namespace dpdglm {

enum class TestFunction { g1, g2 };

const char* test_function_name(TestFunction id);
TestFunction test_function_from_name(const std::string& name);

// Canonical-scale test signals on [0,1].
double test_function(TestFunction id, double t);

struct Scenario {
  FamilyKind family = FamilyKind::gaussian;  // gaussian | bernoulli | poisson
  TestFunction test_fn = TestFunction::g1;
  int n = 200;
  double eps = 0.0;  // contamination fraction in [0, 0.5)
  std::uint64_t seed = 0;
};

void validate(const Scenario& s);

struct Dataset {
  std::vector<double> t;
  std::vector<double> y;
};

// Deterministic draw: t_i = i/(n+1); gaussian responses come from the scale
// mixture (1-eps) N(g, 1) + eps N(g, 81); bernoulli responses are flipped and
// poisson responses redrawn at triple mean on an iid eps-subset.
Dataset generate(const Scenario& s);
Dataset generate_replicate(const Scenario& s, std::uint64_t replicate);

enum class Estimator { dpd_adaptive, dpd_l2, gam };

const char* estimator_name(Estimator e);

struct EstimatorStats {
  Estimator which = Estimator::dpd_adaptive;
  std::vector<double> replicate_mse;  // NaN where the fit failed
  std::vector<double> alpha_hat;      // adaptive estimator only, NaN otherwise
  double mean_mse = 0.0;
  double median_mse = 0.0;
  int failures = 0;
  bool all_failed = false;
};

struct BenchReport {
  Scenario scenario;
  int reps = 0;
  std::vector<EstimatorStats> estimators;
  double wall_seconds = 0.0;
};

std::vector<Estimator> default_roster();

// Replicated fits of the estimator roster with mean-scale MSE aggregation.
// Failed replicates are excluded from the aggregates and counted.
BenchReport run_benchmark(const Scenario& s, int reps,
                          const std::vector<Estimator>& roster = default_roster());

// Aligned text table of the report in the mean/median-per-estimator layout,
// values scaled by 100.
std::string format_table(const BenchReport& report);

}  // namespace dpdglm
