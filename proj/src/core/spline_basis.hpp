#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace dpdglm {

enum class KnotStrategy {
  all_points,  // every distinct interior design point becomes a knot
  thinned,     // K = max(ceil(n^(1/(2m+1))), 10) equidistant interior knots
  explicit_k,  // caller-specified number of equidistant interior knots
};

// Clamped B-spline knot vector on [0,1] with p-fold boundary replication.
struct KnotVector {
  std::vector<double> interior;  // strictly ascending, in (0,1)
  int p = 0;                     // spline order (degree p-1)
  std::vector<double> full;      // length K + 2p

  int dim() const { return static_cast<int>(interior.size()) + p; }
};

// B-spline design with exact Gram and derivative-penalty matrices.
struct SplineBasis {
  KnotVector knots;
  int m = 0;          // penalty order, m < p
  Eigen::MatrixXd B;  // n x dim design matrix, B(i,j) = B_j(t_i)
  Eigen::MatrixXd H;  // dim x dim Gram matrix <B_i, B_j>
  Eigen::MatrixXd P;  // dim x dim penalty matrix <B_i^(m), B_j^(m)>

  int dim() const { return knots.dim(); }
};

KnotVector build_knots(std::span<const double> t, int p, int m,
                       KnotStrategy strategy, int explicit_k = -1);

// All dim basis derivative values (d/dt)^deriv B_j(t); at most p are nonzero.
Eigen::VectorXd eval_basis(const KnotVector& kv, double t, int deriv = 0);

// The p nonzero basis derivative values at t; `first` is the index of the
// first nonzero function.
struct LocalBasis {
  int first = 0;
  Eigen::VectorXd values;
};
LocalBasis local_basis(const KnotVector& kv, double t, int deriv = 0);

// Assemble B, H, P for the design points t. H and P are integrated exactly
// with a p-point Gauss-Legendre rule per inter-knot interval.
SplineBasis assemble(const KnotVector& kv, std::span<const double> t, int m);

// D_m^T D_m where D_m is the m-th backward difference operator.
Eigen::MatrixXd difference_penalty(int dim, int m);

// B(x)^T (H + lambda P)^{-1} B(y).
double reproducing_kernel(const SplineBasis& basis, double lambda, double x,
                          double y);

}  // namespace dpdglm
