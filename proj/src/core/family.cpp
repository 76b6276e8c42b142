#include "core/family.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "core/errors.hpp"

namespace dpdglm {

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;
}

const char* family_name(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::gaussian: return "gaussian";
    case FamilyKind::bernoulli: return "bernoulli";
    case FamilyKind::poisson: return "poisson";
    case FamilyKind::exponential: return "exponential";
  }
  return "unknown";
}

FamilyKind family_from_name(const std::string& name) {
  if (name == "gaussian") return FamilyKind::gaussian;
  if (name == "bernoulli") return FamilyKind::bernoulli;
  if (name == "poisson") return FamilyKind::poisson;
  if (name == "exponential") return FamilyKind::exponential;
  fail(ErrorCode::invalid_argument, "unknown family: " + name);
}

void Family::require_theta(double theta) const {
  if (!std::isfinite(theta))
    fail(ErrorCode::domain_error, "non-finite canonical parameter");
  if (kind() == FamilyKind::exponential && theta >= 0.0)
    fail(ErrorCode::domain_error,
         "exponential family requires a negative canonical parameter");
}

void Family::require_support(double y) const {
  if (!in_support(y))
    fail(ErrorCode::domain_error, std::string("response outside the ") +
                                      name() + " support");
}

namespace {

class GaussianFamily final : public Family {
 public:
  explicit GaussianFamily(double phi) : phi_(phi) {
    if (!(phi > 0.0))
      fail(ErrorCode::invalid_argument, "gaussian dispersion must be > 0");
  }

  FamilyKind kind() const override { return FamilyKind::gaussian; }
  double dispersion() const override { return phi_; }

  BDerivatives b_derivatives(double theta) const override {
    require_theta(theta);
    return {0.5 * theta * theta, theta, 1.0};
  }

  double log_density(double y, double theta) const override {
    require_theta(theta);
    const double u = y - theta;
    return -0.5 * std::log(kTwoPi * phi_) - 0.5 * u * u / phi_;
  }

  double density(double y, double theta) const override {
    return std::exp(log_density(y, theta));
  }

  DpdTerms dpd_terms(double theta, double alpha) const override {
    require_theta(theta);
    if (!(alpha > 0.0))
      fail(ErrorCode::invalid_argument, "dpd_terms requires alpha > 0");
    // f^{1+alpha} is proportional to a N(theta, phi/(1+alpha)) density.
    const double i0 =
        std::pow(kTwoPi * phi_, -0.5 * alpha) / std::sqrt(1.0 + alpha);
    return {i0, 0.0, i0 * phi_ / (1.0 + alpha)};
  }

  bool in_support(double y) const override { return std::isfinite(y); }
  double link(double mu) const override { return mu; }
  double clamp_mean(double mu) const override { return mu; }

 private:
  double phi_;
};

class BernoulliFamily final : public Family {
 public:
  FamilyKind kind() const override { return FamilyKind::bernoulli; }

  BDerivatives b_derivatives(double theta) const override {
    require_theta(theta);
    const double p = logistic(theta);
    // log(1 + e^theta) without overflow
    const double b = theta > 0.0 ? theta + std::log1p(std::exp(-theta))
                                 : std::log1p(std::exp(theta));
    return {b, p, p * (1.0 - p)};
  }

  double log_density(double y, double theta) const override {
    require_theta(theta);
    require_support(y);
    const BDerivatives d = b_derivatives(theta);
    return y * theta - d.b;
  }

  double density(double y, double theta) const override {
    return std::exp(log_density(y, theta));
  }

  DpdTerms dpd_terms(double theta, double alpha) const override {
    require_theta(theta);
    if (!(alpha > 0.0))
      fail(ErrorCode::invalid_argument, "dpd_terms requires alpha > 0");
    const double p = logistic(theta);
    const double q = 1.0 - p;
    const double pa = std::pow(p, 1.0 + alpha);
    const double qa = std::pow(q, 1.0 + alpha);
    return {pa + qa, pa * q - qa * p, pa * q * q + qa * p * p};
  }

  bool in_support(double y) const override { return y == 0.0 || y == 1.0; }
  double link(double mu) const override { return std::log(mu / (1.0 - mu)); }
  double clamp_mean(double mu) const override {
    return std::clamp(mu, 0.01, 0.99);
  }

 private:
  static double logistic(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                    : std::exp(x) / (1.0 + std::exp(x));
  }
};

class PoissonFamily final : public Family {
 public:
  FamilyKind kind() const override { return FamilyKind::poisson; }

  BDerivatives b_derivatives(double theta) const override {
    require_theta(theta);
    const double rate = std::exp(theta);
    return {rate, rate, rate};
  }

  double log_density(double y, double theta) const override {
    require_theta(theta);
    require_support(y);
    return y * theta - std::exp(theta) - std::lgamma(y + 1.0);
  }

  double density(double y, double theta) const override {
    return std::exp(log_density(y, theta));
  }

  DpdTerms dpd_terms(double theta, double alpha) const override {
    require_theta(theta);
    if (!(alpha > 0.0))
      fail(ErrorCode::invalid_argument, "dpd_terms requires alpha > 0");
    const double rate = std::exp(theta);
    const int y_max = truncation_point(rate);
    // Single pass over the truncated support; log pmf updated incrementally.
    double logf = -rate;  // log pmf at y = 0
    const double a1 = 1.0 + alpha;
    DpdTerms terms{0.0, 0.0, 0.0};
    for (int y = 0; y <= y_max; ++y) {
      if (y > 0) logf += theta - std::log(static_cast<double>(y));
      const double w = std::exp(a1 * logf);
      const double u = y - rate;
      terms.i0 += w;
      terms.i1 += w * u;
      terms.i2 += w * u * u;
    }
    return terms;
  }

  static int truncation_point(double rate) {
    return static_cast<int>(std::ceil(rate + 12.0 * std::sqrt(rate) + 30.0));
  }

  bool in_support(double y) const override {
    return y >= 0.0 && y == std::floor(y);
  }
  double link(double mu) const override { return std::log(mu); }
  double clamp_mean(double mu) const override { return std::max(mu, 0.01); }
};

class ExponentialFamily final : public Family {
 public:
  FamilyKind kind() const override { return FamilyKind::exponential; }

  BDerivatives b_derivatives(double theta) const override {
    require_theta(theta);
    return {-std::log(-theta), -1.0 / theta, 1.0 / (theta * theta)};
  }

  double log_density(double y, double theta) const override {
    require_theta(theta);
    require_support(y);
    return std::log(-theta) + theta * y;
  }

  double density(double y, double theta) const override {
    return std::exp(log_density(y, theta));
  }

  DpdTerms dpd_terms(double theta, double alpha) const override {
    require_theta(theta);
    if (!(alpha > 0.0))
      fail(ErrorCode::invalid_argument, "dpd_terms requires alpha > 0");
    const double rate = -theta;
    const double a1 = 1.0 + alpha;
    const double i0 = std::pow(rate, alpha) / a1;
    const double i1 = -alpha * std::pow(rate, alpha - 1.0) / (a1 * a1);
    const double i2 =
        (1.0 + alpha * alpha) * std::pow(rate, alpha - 2.0) / (a1 * a1 * a1);
    return {i0, i1, i2};
  }

  bool in_support(double y) const override { return y > 0.0; }
  double link(double mu) const override { return -1.0 / mu; }
  double clamp_mean(double mu) const override { return std::max(mu, 0.01); }
};

}  // namespace

FamilyPtr make_family(FamilyKind kind, double dispersion) {
  switch (kind) {
    case FamilyKind::gaussian:
      return std::make_shared<GaussianFamily>(dispersion);
    case FamilyKind::bernoulli:
      return std::make_shared<BernoulliFamily>();
    case FamilyKind::poisson:
      return std::make_shared<PoissonFamily>();
    case FamilyKind::exponential:
      return std::make_shared<ExponentialFamily>();
  }
  fail(ErrorCode::invalid_argument, "unknown family kind");
}

double robust_scale_gaussian(std::span<const double> y) {
  if (y.size() < 3)
    fail(ErrorCode::invalid_argument,
         "robust scale estimation needs at least 3 observations");
  std::vector<double> diffs(y.size() - 1);
  for (size_t i = 0; i + 1 < y.size(); ++i) diffs[i] = std::abs(y[i + 1] - y[i]);
  std::sort(diffs.begin(), diffs.end());
  const size_t m = diffs.size();
  const double med = (m % 2 == 1)
                         ? diffs[m / 2]
                         : 0.5 * (diffs[m / 2 - 1] + diffs[m / 2]);
  const double scale = 1.4826 * med / std::sqrt(2.0);
  const double phi = scale * scale;
  if (!(phi > 0.0))
    fail(ErrorCode::degenerate_data,
         "degenerate data: more than half of all successive differences vanish");
  return phi;
}

}  // namespace dpdglm
