#include "core/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/errors.hpp"
#include "core/loss.hpp"

namespace dpdglm {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid(20);
  for (int i = 0; i < 20; ++i) grid[i] = i / 19.0;
  return grid;
}

std::vector<double> default_lambda_grid(std::size_t n) {
  const double lo = 1e-6 * static_cast<double>(n);
  const double hi = 1e3 * static_cast<double>(n);
  std::vector<double> grid(40);
  for (int i = 0; i < 40; ++i)
    grid[i] = std::exp(std::log(lo) + i / 39.0 * (std::log(hi) - std::log(lo)));
  return grid;
}

LambdaSelection select_lambda(std::span<const double> y,
                              const SplineBasis& basis, const Family& fam,
                              double alpha, std::span<const double> lambda_grid,
                              const SolverOptions& opts,
                              const Eigen::VectorXd* warm_start) {
  if (lambda_grid.empty())
    fail(ErrorCode::invalid_argument, "lambda grid must not be empty");
  for (size_t i = 0; i + 1 < lambda_grid.size(); ++i)
    if (!(lambda_grid[i] > 0.0 && lambda_grid[i] < lambda_grid[i + 1]))
      fail(ErrorCode::invalid_argument, "lambda grid must be positive ascending");

  LambdaSelection out;
  Eigen::VectorXd warm;
  bool have_warm = false;
  if (warm_start) {
    warm = *warm_start;
    have_warm = true;
  }
  double best_aic = std::numeric_limits<double>::infinity();
  std::string first_error;
  for (double lambda : lambda_grid) {
    std::optional<FitResult> r;
    if (have_warm) {
      try {
        r = fit(y, basis, fam, alpha, lambda, warm, opts);
      } catch (const Error& e) {
        if (first_error.empty()) first_error = e.what();
      }
    }
    if (!r) {
      try {
        r = fit(y, basis, fam, alpha, lambda,
                initialize(y, basis, fam, alpha, lambda, opts), opts);
      } catch (const Error& e) {
        if (first_error.empty()) first_error = e.what();
        continue;  // skip this grid point
      }
    }
    const double penalty = lambda * r->coefs.dot(basis.P * r->coefs);
    const double aic = 2.0 * (r->objective - penalty) + 2.0 * r->edf;
    out.aic_curve.emplace_back(lambda, aic);
    warm = r->coefs;
    have_warm = true;
    if (aic < best_aic) {
      best_aic = aic;
      out.lambda_hat = lambda;
      out.fit = std::move(*r);
    }
  }
  if (out.aic_curve.empty())
    fail(ErrorCode::selection_failed,
         "lambda selection failed on every grid point: " + first_error);
  return out;
}

double amise(const FitResult& fit_alpha, const FitResult& pilot,
             const SplineBasis& basis, const Family& fam,
             std::span<const double> y, bool* ridge_flag) {
  if (fit_alpha.coefs.size() != basis.dim() ||
      pilot.coefs.size() != basis.dim())
    fail(ErrorCode::invalid_argument, "fits must live on the given basis");

  const Eigen::VectorXd diff = fit_alpha.coefs - pilot.coefs;
  const double bias = diff.dot(basis.H * diff);

  Eigen::VectorXd d(fit_alpha.theta_hat.size()), c2(fit_alpha.theta_hat.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const LossEval l =
        loss(fam, fit_alpha.alpha, y[static_cast<size_t>(i)], fit_alpha.theta_hat[i]);
    d[i] = l.hess;
    c2[i] = l.grad * l.grad;
  }
  Eigen::MatrixXd m = basis.B.transpose() * d.asDiagonal() * basis.B +
                      2.0 * fit_alpha.lambda * basis.P;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
  bool jittered = false;
  double jitter = 1e-10 * (1.0 + m.diagonal().cwiseAbs().maxCoeff());
  while (ldlt.info() != Eigen::Success ||
         (ldlt.vectorD().array() <= 0.0).any()) {
    m.diagonal().array() += jitter;
    jitter *= 10.0;
    jittered = true;
    ldlt.compute(m);
    if (jitter > 1e6 * (1.0 + m.diagonal().cwiseAbs().maxCoeff()))
      fail(ErrorCode::singular_system, "variance system not positive definite");
  }
  if (ridge_flag) *ridge_flag = jittered;

  const Eigen::MatrixXd k = basis.B.transpose() * c2.asDiagonal() * basis.B;
  const Eigen::MatrixXd inner = ldlt.solve(ldlt.solve(k).transpose());
  const double variance = (basis.H * inner).trace();
  return bias + variance;
}

SelectionReport select_alpha(std::span<const double> y,
                             const SplineBasis& basis, const Family& fam,
                             std::span<const double> alpha_grid,
                             std::span<const double> lambda_grid,
                             const SolverOptions& opts) {
  if (alpha_grid.empty())
    fail(ErrorCode::invalid_argument, "alpha grid must not be empty");
  for (size_t i = 0; i + 1 < alpha_grid.size(); ++i)
    if (!(alpha_grid[i] < alpha_grid[i + 1]))
      fail(ErrorCode::invalid_argument, "alpha grid must be ascending");

  SelectionReport report;
  report.alpha_grid.assign(alpha_grid.begin(), alpha_grid.end());
  report.lambda_hat.assign(alpha_grid.size(), kNaN);
  report.amise_curve.assign(alpha_grid.size(), kNaN);
  report.aic_curves.resize(alpha_grid.size());

  // Per-alpha lambda selection does not involve the pilot, so the sweep is
  // run once and reused across pilot iterations.
  std::vector<std::optional<LambdaSelection>> per_alpha(alpha_grid.size());
  std::string first_error;
  const Eigen::VectorXd* warm = nullptr;
  for (size_t i = 0; i < alpha_grid.size(); ++i) {
    try {
      per_alpha[i] = select_lambda(y, basis, fam, alpha_grid[i], lambda_grid,
                                   opts, warm);
      report.lambda_hat[i] = per_alpha[i]->lambda_hat;
      report.aic_curves[i] = per_alpha[i]->aic_curve;
      warm = &per_alpha[i]->fit.coefs;
    } catch (const Error& e) {
      if (first_error.empty()) first_error = e.what();
    }
  }
  if (std::none_of(per_alpha.begin(), per_alpha.end(),
                   [](const auto& s) { return s.has_value(); }))
    fail(ErrorCode::selection_failed,
         "every alpha grid point failed: " + first_error);

  // Initial pilot: the L2-distance fit with its own AIC-selected lambda.
  const FitResult* pilot = nullptr;
  std::optional<LambdaSelection> pilot_store;
  auto l2_pos = std::find_if(alpha_grid.begin(), alpha_grid.end(),
                             [](double a) { return a == 1.0; });
  if (l2_pos != alpha_grid.end() &&
      per_alpha[static_cast<size_t>(l2_pos - alpha_grid.begin())]) {
    pilot = &per_alpha[static_cast<size_t>(l2_pos - alpha_grid.begin())]->fit;
  } else {
    pilot_store = select_lambda(y, basis, fam, 1.0, lambda_grid, opts, warm);
    pilot = &pilot_store->fit;
  }
  report.pilot_trace.push_back(1.0);

  size_t chosen = 0;
  for (int iteration = 1; iteration <= 10; ++iteration) {
    report.iterations = iteration;
    double best = std::numeric_limits<double>::infinity();
    size_t argmin = 0;
    bool any = false;
    for (size_t i = 0; i < alpha_grid.size(); ++i) {
      if (!per_alpha[i]) continue;
      const double value = amise(per_alpha[i]->fit, *pilot, basis, fam, y);
      report.amise_curve[i] = value;
      if (value <= best) {  // ties break toward larger alpha
        best = value;
        argmin = i;
        any = true;
      }
    }
    if (!any)
      fail(ErrorCode::selection_failed, "AMISE evaluation failed on the grid");
    chosen = argmin;
    const double alpha_star = alpha_grid[argmin];
    const bool seen =
        std::find(report.pilot_trace.begin(), report.pilot_trace.end(),
                  alpha_star) != report.pilot_trace.end();
    if (seen || iteration == 10) break;
    report.pilot_trace.push_back(alpha_star);
    pilot = &per_alpha[argmin]->fit;
  }

  report.alpha_hat = alpha_grid[chosen];
  report.best_fit = per_alpha[chosen]->fit;
  return report;
}

}  // namespace dpdglm
