#pragma once

#include <memory>
#include <span>
#include <string>

namespace dpdglm {

enum class FamilyKind { gaussian, bernoulli, poisson, exponential };

const char* family_name(FamilyKind kind);
FamilyKind family_from_name(const std::string& name);

struct BDerivatives {
  double b;   // cumulant b(theta)
  double b1;  // mean b'(theta)
  double b2;  // variance function b''(theta)
};

// Moment integrals of the alpha-tilted density with u(y) = y - b'(theta):
//   i0 = int f^{1+alpha},  i1 = int f^{1+alpha} u,  i2 = int f^{1+alpha} u^2
// (sums for discrete support).
struct DpdTerms {
  double i0;
  double i1;
  double i2;
};

// Exponential-family descriptor under the canonical parameterization.
// dispersion() is 1 for all families except Gaussian, where the N(theta, phi)
// density is used directly with theta the mean.
class Family {
 public:
  virtual ~Family() = default;

  virtual FamilyKind kind() const = 0;
  virtual double dispersion() const { return 1.0; }

  virtual BDerivatives b_derivatives(double theta) const = 0;
  virtual double density(double y, double theta) const = 0;
  virtual double log_density(double y, double theta) const = 0;
  virtual DpdTerms dpd_terms(double theta, double alpha) const = 0;

  virtual bool in_support(double y) const = 0;
  // Canonical link G = (b')^{-1}, mapping a mean to the canonical parameter.
  virtual double link(double mu) const = 0;
  // Clamp a tentative mean into the open mean domain before applying link().
  virtual double clamp_mean(double mu) const = 0;

  double mean(double theta) const { return b_derivatives(theta).b1; }
  const char* name() const { return family_name(kind()); }

 protected:
  void require_theta(double theta) const;
  void require_support(double y) const;
};

using FamilyPtr = std::shared_ptr<const Family>;

FamilyPtr make_family(FamilyKind kind, double dispersion = 1.0);

// Difference-based robust variance estimate for Gaussian responses ordered by
// the covariate: (1.4826 * median |y_{i+1} - y_i| / sqrt(2))^2.
double robust_scale_gaussian(std::span<const double> y);

}  // namespace dpdglm
