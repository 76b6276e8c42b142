#include "core/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"
#include "core/quadrature.hpp"

namespace dpdglm {

namespace {

// int_0^z t^(a-1)(1-t)^(b-1) dt for z <= 1/2 via t = s^3, which removes the
// left endpoint singularity for a > 1/3.
double left_integral(double z, double a, double b) {
  if (z <= 0.0) return 0.0;
  const double s_hi = std::cbrt(z);
  return adaptive_simpson(
      [a, b](double s) {
        return 3.0 * std::pow(s, 3.0 * a - 1.0) *
               std::pow(1.0 - s * s * s, b - 1.0);
      },
      0.0, s_hi, 1e-12);
}

}  // namespace

double incomplete_beta(double x, double a, double b) {
  if (!(x >= 0.0 && x <= 1.0))
    fail(ErrorCode::domain_error, "incomplete beta requires x in [0,1]");
  if (!(a > 1.0 / 3.0 && b > 1.0 / 3.0))
    fail(ErrorCode::invalid_argument,
         "incomplete beta implemented for a, b > 1/3");
  if (x <= 0.5) return left_integral(x, a, b);
  // reflect: int_x^1 t^(a-1)(1-t)^(b-1) dt = int_0^(1-x) u^(b-1)(1-u)^(a-1) du
  return left_integral(0.5, a, b) + left_integral(0.5, b, a) -
         left_integral(1.0 - x, b, a);
}

ResidualReport anscombe_residuals(const Family& fam, std::span<const double> y,
                                  std::span<const double> mu, double cutoff) {
  if (y.size() != mu.size())
    fail(ErrorCode::invalid_argument, "response/mean size mismatch");
  ResidualReport report;
  report.cutoff = cutoff;
  report.residuals.resize(y.size());
  report.flags.resize(y.size());

  const double ib_one = fam.kind() == FamilyKind::bernoulli
                            ? incomplete_beta(1.0)
                            : 0.0;
  for (size_t i = 0; i < y.size(); ++i) {
    double r = 0.0;
    switch (fam.kind()) {
      case FamilyKind::gaussian:
        r = (y[i] - mu[i]) / std::sqrt(fam.dispersion());
        break;
      case FamilyKind::bernoulli: {
        const double m = std::clamp(mu[i], 1e-8, 1.0 - 1e-8);
        const double ib_y = y[i] >= 1.0 ? ib_one : incomplete_beta(y[i]);
        r = (ib_y - incomplete_beta(m)) /
            std::pow(m * (1.0 - m), 1.0 / 6.0);
        break;
      }
      case FamilyKind::poisson: {
        const double m = std::max(mu[i], 1e-8);
        r = 1.5 * (std::pow(y[i], 2.0 / 3.0) - std::pow(m, 2.0 / 3.0)) /
            std::pow(m, 1.0 / 6.0);
        break;
      }
      case FamilyKind::exponential: {
        const double m = std::max(mu[i], 1e-8);
        r = 3.0 * (std::cbrt(y[i]) - std::cbrt(m)) / std::cbrt(m);
        break;
      }
    }
    report.residuals[i] = r;
    report.flags[i] = std::abs(r) >= cutoff ? 1 : 0;
  }
  return report;
}

}  // namespace dpdglm
