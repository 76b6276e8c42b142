#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/family.hpp"

namespace dpdglm {

// Unnormalized incomplete beta integral IB(x,a,b) = int_0^x t^(a-1)(1-t)^(b-1) dt
// for a, b > 1/3, evaluated with the cubic substitution t = s^3 against the
// endpoint singularities (mirrored near 1). Absolute error below 1e-10.
double incomplete_beta(double x, double a = 2.0 / 3.0, double b = 2.0 / 3.0);

struct ResidualReport {
  std::vector<double> residuals;
  std::vector<std::uint8_t> flags;  // |r| >= cutoff
  double cutoff = 2.6;
};

// Anscombe residuals on the mean scale; the Gaussian case divides by the
// square root of the family dispersion. Means are clamped away from the
// boundary of the mean domain before the transforms.
ResidualReport anscombe_residuals(const Family& fam, std::span<const double> y,
                                  std::span<const double> mu,
                                  double cutoff = 2.6);

}  // namespace dpdglm
