#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "core/family.hpp"
#include "core/pirls.hpp"
#include "core/spline_basis.hpp"

namespace dpdglm {

// 20 equidistant values on [0,1], maximum likelihood through L2-distance.
std::vector<double> default_alpha_grid();

// 40 log-spaced values spanning [1e-6 n, 1e3 n] on the unnormalized
// objective scale.
std::vector<double> default_lambda_grid(std::size_t n);

struct LambdaSelection {
  double lambda_hat = 0.0;
  FitResult fit;  // fit at lambda_hat
  std::vector<std::pair<double, double>> aic_curve;  // (lambda, aic), ascending
};

// AIC(lambda) = 2 sum_i l_alpha(y_i, g(t_i)) + 2 edf over the grid, fits
// warm-started along ascending lambda. Failed grid points are skipped; all
// points failing raises selection-failed.
LambdaSelection select_lambda(std::span<const double> y,
                              const SplineBasis& basis, const Family& fam,
                              double alpha, std::span<const double> lambda_grid,
                              const SolverOptions& opts = {},
                              const Eigen::VectorXd* warm_start = nullptr);

// Plug-in approximation of the integrated mean squared error of fit_alpha
// against the pilot: coefficient-difference bias form in H plus a sandwich
// variance trace at the fit.
double amise(const FitResult& fit_alpha, const FitResult& pilot,
             const SplineBasis& basis, const Family& fam,
             std::span<const double> y, bool* ridge_flag = nullptr);

struct SelectionReport {
  double alpha_hat = 0.0;
  std::vector<double> alpha_grid;
  std::vector<double> lambda_hat;              // per alpha; NaN when failed
  std::vector<double> amise_curve;             // final iteration; NaN when failed
  std::vector<double> pilot_trace;             // pilot alpha values, starts at 1
  std::vector<std::vector<std::pair<double, double>>> aic_curves;  // per alpha
  int iterations = 0;
  FitResult best_fit;                          // fit at (alpha_hat, lambda_hat)
};

// Iterated AMISE minimization with the L2-distance fit as initial pilot.
// Stops when the argmin reappears in the pilot trace or after 10 iterations;
// ties break toward larger alpha.
SelectionReport select_alpha(std::span<const double> y,
                             const SplineBasis& basis, const Family& fam,
                             std::span<const double> alpha_grid,
                             std::span<const double> lambda_grid,
                             const SolverOptions& opts = {});

}  // namespace dpdglm
