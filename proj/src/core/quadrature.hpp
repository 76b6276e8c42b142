#pragma once

#include <functional>
#include <vector>

namespace dpdglm {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;  // sum to 2
};

// Gauss-Legendre rule with n points, exact for polynomials of degree 2n-1.
// Rules are computed once per n and cached.
const GaussRule& gauss_legendre(int n);

// Integrate f over [a, b] with the n-point Gauss-Legendre rule.
double gauss_integrate(const std::function<double(double)>& f, double a,
                       double b, int n);

// Adaptive Simpson quadrature with absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth = 50);

}  // namespace dpdglm
