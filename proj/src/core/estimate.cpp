#include "core/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/errors.hpp"

namespace dpdglm {

EstimateOutput estimate(std::span<const double> t_unit,
                        std::span<const double> y, const EstimateConfig& cfg) {
  const size_t n = t_unit.size();
  if (n != y.size())
    fail(ErrorCode::invalid_argument, "t and y must have equal length");
  if (cfg.m < 1) fail(ErrorCode::invalid_argument, "penalty order must be >= 1");
  const int p = cfg.p > 0 ? cfg.p : 2 * cfg.m;
  if (p <= cfg.m)
    fail(ErrorCode::invalid_argument, "spline order must exceed the penalty order");
  if (n < static_cast<size_t>(p))
    fail(ErrorCode::invalid_design, "need at least p observations");

  for (size_t i = 0; i < n; ++i) {
    if (!(t_unit[i] >= 0.0 && t_unit[i] <= 1.0))
      fail(ErrorCode::invalid_design, "design points must lie in [0,1]");
    if (!std::isfinite(y[i]))
      fail(ErrorCode::invalid_argument, "non-finite response");
  }

  // stable t-order so the running-median initialization and the robust scale
  // see neighbours; results are mapped back to the caller's order
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return t_unit[a] < t_unit[b]; });
  std::vector<double> ts(n), ys(n);
  for (size_t i = 0; i < n; ++i) {
    ts[i] = t_unit[order[i]];
    ys[i] = y[order[i]];
  }

  double dispersion = 1.0;
  if (cfg.family == FamilyKind::gaussian) dispersion = robust_scale_gaussian(ys);
  FamilyPtr fam = make_family(cfg.family, dispersion);
  for (double yi : ys)
    if (!fam->in_support(yi))
      fail(ErrorCode::domain_error,
           std::string("response outside the ") + fam->name() + " support");

  KnotStrategy strategy = KnotStrategy::explicit_k;
  int explicit_k = cfg.knots;
  if (cfg.knots <= 0) {
    strategy = n <= 50 ? KnotStrategy::all_points : KnotStrategy::thinned;
    explicit_k = -1;
  }
  KnotVector kv = build_knots(ts, p, cfg.m, strategy, explicit_k);
  SplineBasis basis = assemble(kv, ts, cfg.m);

  const std::vector<double> alpha_grid =
      cfg.alpha_grid.empty() ? default_alpha_grid() : cfg.alpha_grid;
  const std::vector<double> lambda_grid =
      cfg.lambda > 0.0 ? std::vector<double>{cfg.lambda}
      : cfg.lambda_grid.empty() ? default_lambda_grid(n)
                                : cfg.lambda_grid;

  EstimateOutput out;
  out.dispersion = dispersion;
  out.knots = kv;
  out.m = cfg.m;
  out.p = p;

  if (cfg.alpha < 0.0) {
    SelectionReport report =
        select_alpha(ys, basis, *fam, alpha_grid, lambda_grid, cfg.solver);
    out.fit = report.best_fit;
    out.selection = std::move(report);
  } else if (cfg.lambda <= 0.0) {
    LambdaSelection sel =
        select_lambda(ys, basis, *fam, cfg.alpha, lambda_grid, cfg.solver);
    out.fit = std::move(sel.fit);
    out.aic_curve = std::move(sel.aic_curve);
  } else {
    out.fit = fit(ys, basis, *fam, cfg.alpha, cfg.lambda,
                  initialize(ys, basis, *fam, cfg.alpha, cfg.lambda, cfg.solver),
                  cfg.solver);
  }

  // back to the caller's observation order
  Eigen::VectorXd theta(n), mu(n);
  for (size_t i = 0; i < n; ++i) {
    theta[static_cast<Eigen::Index>(order[i])] =
        out.fit.theta_hat[static_cast<Eigen::Index>(i)];
    mu[static_cast<Eigen::Index>(order[i])] =
        out.fit.mu_hat[static_cast<Eigen::Index>(i)];
  }
  out.fit.theta_hat = theta;
  out.fit.mu_hat = mu;

  std::vector<double> mu_vec(mu.data(), mu.data() + mu.size());
  out.residuals = anscombe_residuals(*fam, y, mu_vec, cfg.cutoff);
  return out;
}

}  // namespace dpdglm
