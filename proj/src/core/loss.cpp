#include "core/loss.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace dpdglm {

LossEval loss(const Family& fam, double alpha, double y, double theta) {
  const double kappa = 1.0 / fam.dispersion();  // 1 except Gaussian
  const BDerivatives d = fam.b_derivatives(theta);
  const double u = y - d.b1;
  if (alpha == 0.0) {
    const double logf = fam.log_density(y, theta);
    return {-logf, -kappa * u, kappa * d.b2};
  }
  const DpdTerms t = fam.dpd_terms(theta, alpha);
  const double fa = std::exp(alpha * fam.log_density(y, theta));
  const double a1 = 1.0 + alpha;
  const double value = t.i0 - (1.0 + 1.0 / alpha) * fa;
  const double grad = a1 * kappa * (t.i1 - fa * u);
  const double hess =
      a1 * (a1 * kappa * kappa * t.i2 - d.b2 * kappa * (t.i0 - fa) -
            alpha * kappa * kappa * fa * u * u);
  return {value, grad, hess};
}

double loss_sum(const Family& fam, double alpha, std::span<const double> y,
                const Eigen::VectorXd& g) {
  double total = 0.0;
  for (size_t i = 0; i < y.size(); ++i)
    total += loss(fam, alpha, y[i], g[static_cast<Eigen::Index>(i)]).value;
  return total;
}

double penalized_objective(const Eigen::VectorXd& coefs,
                           const SplineBasis& basis, const Family& fam,
                           double alpha, double lambda,
                           std::span<const double> y) {
  const Eigen::VectorXd g = basis.B * coefs;
  return loss_sum(fam, alpha, y, g) + lambda * coefs.dot(basis.P * coefs);
}

Eigen::VectorXd penalized_gradient(const Eigen::VectorXd& coefs,
                                   const SplineBasis& basis, const Family& fam,
                                   double alpha, double lambda,
                                   std::span<const double> y) {
  const Eigen::VectorXd g = basis.B * coefs;
  Eigen::VectorXd score(y.size());
  for (size_t i = 0; i < y.size(); ++i)
    score[static_cast<Eigen::Index>(i)] =
        loss(fam, alpha, y[i], g[static_cast<Eigen::Index>(i)]).grad;
  return basis.B.transpose() * score + 2.0 * lambda * (basis.P * coefs);
}

double fisher_weight(const Family& fam, double alpha, double theta) {
  const double kappa = 1.0 / fam.dispersion();
  if (alpha == 0.0) return kappa * fam.b_derivatives(theta).b2;
  return (1.0 + alpha) * kappa * kappa * fam.dpd_terms(theta, alpha).i2;
}

IrlsStepData irls_step_data(const Family& fam, double alpha,
                            std::span<const double> y,
                            const Eigen::VectorXd& g, WeightMode mode) {
  const auto n = static_cast<Eigen::Index>(y.size());
  IrlsStepData out;
  out.w.resize(n);
  out.z.resize(n);
  out.mode = mode;
  out.degenerate.assign(y.size(), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(g[i]))
      fail(ErrorCode::domain_error, "non-finite linear predictor");
    const LossEval l = loss(fam, alpha, y[static_cast<size_t>(i)], g[i]);
    double w = (mode == WeightMode::newton)
                   ? l.hess
                   : fisher_weight(fam, alpha, g[i]);
    if (mode == WeightMode::newton && std::abs(w) < 1e-12) {
      out.degenerate[static_cast<size_t>(i)] = 1;
      w = fisher_weight(fam, alpha, g[i]);
    }
    out.w[i] = w;
    out.z[i] = g[i] - l.grad / w;
  }
  return out;
}

}  // namespace dpdglm
