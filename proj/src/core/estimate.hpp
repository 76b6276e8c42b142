#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "core/diagnostics.hpp"
#include "core/family.hpp"
#include "core/pirls.hpp"
#include "core/selection.hpp"
#include "core/spline_basis.hpp"

namespace dpdglm {

// End-to-end fitting request on unit-interval design points.
struct EstimateConfig {
  FamilyKind family = FamilyKind::gaussian;
  double alpha = -1.0;    // negative: select by iterated AMISE
  double lambda = -1.0;   // non-positive: select by AIC
  int m = 2;              // penalty order
  int p = 0;              // spline order; 0 means 2m
  int knots = 0;          // explicit interior knot count; 0 = automatic rule
  double cutoff = 2.6;    // residual flagging threshold
  SolverOptions solver;
  std::vector<double> alpha_grid;   // empty: 20 equidistant on [0,1]
  std::vector<double> lambda_grid;  // empty: 40 log-spaced, scaled by n
};

struct EstimateOutput {
  FitResult fit;  // theta_hat / mu_hat in the caller's observation order
  std::optional<SelectionReport> selection;                  // alpha = auto
  std::vector<std::pair<double, double>> aic_curve;          // lambda = auto
  ResidualReport residuals;
  double dispersion = 1.0;
  KnotVector knots;
  int m = 2;
  int p = 4;
};

// Sorts by t internally, estimates the Gaussian dispersion robustly, builds
// the basis, and dispatches on fixed/automatic alpha and lambda.
EstimateOutput estimate(std::span<const double> t_unit,
                        std::span<const double> y, const EstimateConfig& cfg);

}  // namespace dpdglm
