#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "core/diagnostics.hpp"
#include "core/errors.hpp"
#include "core/family.hpp"

using namespace dpdglm;

namespace {

// Brute-force oracle: composite midpoint rule on the raw integrand with a
// graded mesh toward both endpoints, no substitution shared with the
// implementation.
double ib_oracle(double x, double a, double b) {
  const int panels = 400000;
  double total = 0.0;
  // graded nodes u^3 cluster toward 0; integrate over [0, x] in u-space
  // using plain midpoints of t = x * u^3 ... use uniform midpoints on a
  // cube-graded map so the singular ends are resolved.
  for (int i = 0; i < panels; ++i) {
    const double u0 = static_cast<double>(i) / panels;
    const double u1 = static_cast<double>(i + 1) / panels;
    const double t0 = x * u0 * u0 * u0;
    const double t1 = x * u1 * u1 * u1;
    const double tm = 0.5 * (t0 + t1);
    if (t1 <= t0) continue;
    total += std::pow(tm, a - 1.0) * std::pow(1.0 - tm, b - 1.0) * (t1 - t0);
  }
  return total;
}

}  // namespace

TEST_CASE("incomplete beta endpoints and symmetry") {
  CHECK(incomplete_beta(0.0) == 0.0);
  const double full = incomplete_beta(1.0);
  // complete beta via the gamma function: B(2/3,2/3)
  const double closed =
      std::exp(2.0 * std::lgamma(2.0 / 3.0) - std::lgamma(4.0 / 3.0));
  CHECK(full == doctest::Approx(closed).epsilon(1e-11));
  for (double x = 0.1; x < 0.95; x += 0.1)
    CHECK(std::abs(incomplete_beta(x) + incomplete_beta(1.0 - x) - full) <
          1e-10);
  CHECK_THROWS_AS(incomplete_beta(-0.1), Error);
  CHECK_THROWS_AS(incomplete_beta(1.2), Error);
}

TEST_CASE("incomplete beta matches the brute-force oracle") {
  // x = 0.5 equals half the complete integral by symmetry as well
  const double half = incomplete_beta(0.5);
  CHECK(std::abs(half - 0.5 * incomplete_beta(1.0)) < 1e-11);
  CHECK(std::abs(half - ib_oracle(0.5, 2.0 / 3.0, 2.0 / 3.0)) < 1e-9);
  for (double x : {0.05, 0.3, 0.77})
    CHECK(std::abs(incomplete_beta(x) - ib_oracle(x, 2.0 / 3.0, 2.0 / 3.0)) <
          1e-9);
  // asymmetric parameters through the reflection path
  CHECK(std::abs(incomplete_beta(0.8, 0.9, 0.6) - ib_oracle(0.8, 0.9, 0.6)) <
        1e-9);
}

TEST_CASE("anscombe residual values") {
  auto pois = make_family(FamilyKind::poisson);
  {
    std::vector<double> y{4.0}, mu{4.0};
    ResidualReport rep = anscombe_residuals(*pois, y, mu);
    CHECK(rep.residuals[0] == 0.0);
    CHECK(rep.flags[0] == 0);
  }
  {
    // a nine-fold mean count must flag at the 2.6 cutoff
    std::vector<double> y{36.0}, mu{4.0};
    ResidualReport rep = anscombe_residuals(*pois, y, mu);
    const double expected = 1.5 *
                            (std::pow(36.0, 2.0 / 3.0) - std::pow(4.0, 2.0 / 3.0)) /
                            std::pow(4.0, 1.0 / 6.0);
    CHECK(rep.residuals[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(rep.residuals[0] > 2.6);
    CHECK(rep.flags[0] == 1);
  }

  auto bern = make_family(FamilyKind::bernoulli);
  {
    std::vector<double> y{1.0}, mu{0.5};
    ResidualReport rep = anscombe_residuals(*bern, y, mu);
    const double expected = (incomplete_beta(1.0) - incomplete_beta(0.5)) /
                            std::pow(0.25, 1.0 / 6.0);
    CHECK(rep.residuals[0] == doctest::Approx(expected).epsilon(1e-10));
  }

  auto gauss = make_family(FamilyKind::gaussian, 4.0);
  {
    std::vector<double> y{3.0}, mu{1.0};
    ResidualReport rep = anscombe_residuals(*gauss, y, mu);
    CHECK(rep.residuals[0] == doctest::Approx(1.0).epsilon(1e-14));
  }

  auto expf = make_family(FamilyKind::exponential);
  {
    std::vector<double> y{8.0}, mu{1.0};
    ResidualReport rep = anscombe_residuals(*expf, y, mu);
    CHECK(rep.residuals[0] == doctest::Approx(3.0).epsilon(1e-12));
  }
}

TEST_CASE("bernoulli residuals are antisymmetric") {
  auto bern = make_family(FamilyKind::bernoulli);
  for (double mu : {0.05, 0.2, 0.5, 0.8}) {
    std::vector<double> y1{1.0}, m1{mu};
    std::vector<double> y0{0.0}, m0{1.0 - mu};
    const double r1 = anscombe_residuals(*bern, y1, m1).residuals[0];
    const double r0 = anscombe_residuals(*bern, y0, m0).residuals[0];
    CHECK(std::abs(r1 + r0) < 1e-10);
  }
}

TEST_CASE("residuals increase strictly in the response") {
  for (auto kind : {FamilyKind::gaussian, FamilyKind::poisson,
                    FamilyKind::exponential}) {
    auto fam = make_family(kind);
    double prev = -1e300;
    for (double y = 0.5; y < 20.0; y += 0.7) {
      std::vector<double> yy{y}, mm{3.0};
      const double r = anscombe_residuals(*fam, yy, mm).residuals[0];
      CHECK(r > prev);
      prev = r;
    }
  }
  auto bern = make_family(FamilyKind::bernoulli);
  std::vector<double> m{0.3};
  std::vector<double> y0{0.0}, y1{1.0};
  CHECK(anscombe_residuals(*bern, y0, m).residuals[0] <
        anscombe_residuals(*bern, y1, m).residuals[0]);
}

TEST_CASE("clean data rarely flags at the 2.6 cutoff") {
  int flagged = 0, total = 0;
  for (int seed = 0; seed < 50; ++seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    auto gauss = make_family(FamilyKind::gaussian);
    std::vector<double> y(200), mu(200);
    for (int i = 0; i < 200; ++i) {
      mu[i] = std::sin(6.0 * i / 200.0);
      y[i] = mu[i] + noise(gen);
    }
    ResidualReport rep = anscombe_residuals(*gauss, y, mu);
    for (auto f : rep.flags) flagged += f;
    total += 200;

    auto pois = make_family(FamilyKind::poisson);
    std::vector<double> yp(200), mp(200);
    for (int i = 0; i < 200; ++i) {
      mp[i] = 3.0 + 2.0 * std::sin(6.0 * i / 200.0);
      std::poisson_distribution<int> draw(mp[i]);
      yp[i] = draw(gen);
    }
    ResidualReport repp = anscombe_residuals(*pois, yp, mp);
    for (auto f : repp.flags) flagged += f;
    total += 200;
  }
  CHECK(static_cast<double>(flagged) / total < 0.03);
}
