#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "core/family.hpp"
#include "core/loss.hpp"
#include "core/spline_basis.hpp"

namespace dpdglm {

struct SolverOptions {
  int max_iter = 100;
  double tol_coef = 1e-8;   // relative coefficient change
  double tol_obj = 1e-10;   // relative objective change
  int max_halvings = 30;
  double ridge = 1e-10;     // diagonal jitter on singular systems
};

enum class SolveMode { newton, fisher, mixed };

const char* solve_mode_name(SolveMode mode);

struct FitResult {
  Eigen::VectorXd coefs;
  double alpha = 0.0;
  double lambda = 0.0;
  Eigen::VectorXd theta_hat;  // B(t_i)' coefs
  Eigen::VectorXd mu_hat;     // b'(theta_hat_i)
  double objective = 0.0;
  double edf = 0.0;
  int iterations = 0;
  bool converged = false;
  SolveMode mode_used = SolveMode::newton;
  bool ridge_used = false;
  std::vector<double> objective_trace;  // accepted iterates, non-increasing
};

// Minimize the penalized divergence objective at fixed (alpha, lambda) by
// penalized iteratively reweighted least squares with step halving.
FitResult fit(std::span<const double> y, const SplineBasis& basis,
              const Family& fam, double alpha, double lambda,
              const Eigen::VectorXd& init, const SolverOptions& opts = {});

// Two data-driven starting vectors: a likelihood fit on winsorized responses
// and a penalized least-squares fit to the link-transformed running median.
struct StartPair {
  Eigen::VectorXd huberized;
  Eigen::VectorXd median;
};
StartPair initial_starts(std::span<const double> y, const SplineBasis& basis,
                         const Family& fam, double lambda,
                         const SolverOptions& opts = {});

// The start with the lower penalized objective at the target (alpha, lambda).
Eigen::VectorXd initialize(std::span<const double> y, const SplineBasis& basis,
                           const Family& fam, double alpha, double lambda,
                           const SolverOptions& opts = {});

// One fit per alpha, each warm-started from the previous solution and from
// initialize(), keeping the better objective.
std::vector<FitResult> fit_alpha_path(std::span<const double> y,
                                      const SplineBasis& basis,
                                      const Family& fam,
                                      std::span<const double> alpha_grid,
                                      double lambda,
                                      const SolverOptions& opts = {});

// Tr{ [B' D B + 2 lambda P]^{-1} B' D B } with D the per-observation loss
// curvature at the fit. ridge_flag is set when the system needed jitter.
double effective_df(const SplineBasis& basis, const Family& fam, double alpha,
                    double lambda, const FitResult& fit,
                    std::span<const double> y, bool* ridge_flag = nullptr);

}  // namespace dpdglm
