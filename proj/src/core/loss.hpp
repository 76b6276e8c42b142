#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "core/family.hpp"
#include "core/spline_basis.hpp"

namespace dpdglm {

// Per-observation density power divergence loss and its derivatives in the
// canonical parameter. alpha = 0 is the negative log-likelihood branch.
struct LossEval {
  double value;
  double grad;
  double hess;
};

LossEval loss(const Family& fam, double alpha, double y, double theta);

// Sum of loss values over the sample at linear predictor g = B * coefs.
double loss_sum(const Family& fam, double alpha, std::span<const double> y,
                const Eigen::VectorXd& g);

// Penalized objective: sum_i loss(y_i, g_i) + lambda * coefs' P coefs.
double penalized_objective(const Eigen::VectorXd& coefs,
                           const SplineBasis& basis, const Family& fam,
                           double alpha, double lambda,
                           std::span<const double> y);

// Gradient of the penalized objective in the coefficients.
Eigen::VectorXd penalized_gradient(const Eigen::VectorXd& coefs,
                                   const SplineBasis& basis, const Family& fam,
                                   double alpha, double lambda,
                                   std::span<const double> y);

enum class WeightMode { newton, fisher };

struct IrlsStepData {
  Eigen::VectorXd w;  // per-observation weights
  Eigen::VectorXd z;  // working responses, w_i (z_i - g_i) = -loss.grad_i
  WeightMode mode;
  std::vector<std::uint8_t> degenerate;  // near-zero newton weights replaced
};

IrlsStepData irls_step_data(const Family& fam, double alpha,
                            std::span<const double> y,
                            const Eigen::VectorXd& g, WeightMode mode);

// Expectation of the newton weight under Y ~ f_theta; also the fisher weight.
double fisher_weight(const Family& fam, double alpha, double theta);

}  // namespace dpdglm
