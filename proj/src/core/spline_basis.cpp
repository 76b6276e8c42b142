#include "core/spline_basis.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "core/errors.hpp"
#include "core/quadrature.hpp"

namespace dpdglm {

namespace {

void validate_orders(int p, int m) {
  if (p < 2) fail(ErrorCode::invalid_argument, "spline order p must be >= 2");
  if (m < 1 || m >= p)
    fail(ErrorCode::invalid_argument, "penalty order m must satisfy 1 <= m < p");
}

std::vector<double> equidistant(int k) {
  std::vector<double> knots(k);
  for (int i = 0; i < k; ++i) knots[i] = (i + 1.0) / (k + 1.0);
  return knots;
}

KnotVector finish(std::vector<double> interior, int p) {
  KnotVector kv;
  kv.p = p;
  kv.full.assign(p, 0.0);
  kv.full.insert(kv.full.end(), interior.begin(), interior.end());
  kv.full.insert(kv.full.end(), p, 1.0);
  kv.interior = std::move(interior);
  return kv;
}

// Index s with full[s] <= t < full[s+1], restricted to nonempty spans.
int find_span(const KnotVector& kv, double t) {
  const int dim = kv.dim();
  const int p = kv.p;
  if (t >= 1.0) return dim - 1;
  int lo = p - 1, hi = dim;
  while (hi - lo > 1) {
    int mid = (lo + hi) / 2;
    if (t < kv.full[mid])
      hi = mid;
    else
      lo = mid;
  }
  return lo;
}

}  // namespace

KnotVector build_knots(std::span<const double> t, int p, int m,
                       KnotStrategy strategy, int explicit_k) {
  validate_orders(p, m);
  const int n = static_cast<int>(t.size());
  if (n < p) fail(ErrorCode::invalid_design, "need at least p design points");
  for (double ti : t)
    if (!(ti >= 0.0 && ti <= 1.0))
      fail(ErrorCode::invalid_design, "design points must lie in [0,1]");

  std::vector<double> distinct(t.begin(), t.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const int n_distinct = static_cast<int>(distinct.size());
  if (n_distinct < p)
    fail(ErrorCode::invalid_design,
         "fewer than p distinct design points after collapsing duplicates");

  switch (strategy) {
    case KnotStrategy::all_points: {
      // Interior design points only: drop the smallest and largest.
      std::vector<double> interior(distinct.begin() + 1, distinct.end() - 1);
      std::erase_if(interior, [](double x) { return x <= 0.0 || x >= 1.0; });
      return finish(std::move(interior), p);
    }
    case KnotStrategy::thinned: {
      int k = std::max<int>(
          static_cast<int>(std::ceil(std::pow(n, 1.0 / (2.0 * m + 1.0)))), 10);
      k = std::min(k, n_distinct);
      return finish(equidistant(k), p);
    }
    case KnotStrategy::explicit_k: {
      if (explicit_k < 0)
        fail(ErrorCode::invalid_argument, "explicit knot count must be >= 0");
      return finish(equidistant(explicit_k), p);
    }
  }
  fail(ErrorCode::invalid_argument, "unknown knot strategy");
}

LocalBasis local_basis(const KnotVector& kv, double t, int deriv) {
  const int p = kv.p;
  const int q = p - 1;  // polynomial degree
  if (!(t >= 0.0 && t <= 1.0))
    fail(ErrorCode::domain_error, "evaluation point outside [0,1]");
  if (deriv < 0 || deriv >= p)
    fail(ErrorCode::invalid_argument, "derivative order must satisfy 0 <= deriv < p");

  const int s = find_span(kv, t);
  const auto& tau = kv.full;

  // Basis functions and knot differences via the triangular table.
  Eigen::MatrixXd ndu(p, p);
  std::vector<double> left(p), right(p);
  ndu(0, 0) = 1.0;
  for (int j = 1; j <= q; ++j) {
    left[j] = t - tau[s + 1 - j];
    right[j] = tau[s + j] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu(j, r) = right[r + 1] + left[j - r];
      const double temp = ndu(r, j - 1) / ndu(j, r);
      ndu(r, j) = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu(j, j) = saved;
  }

  LocalBasis out;
  out.first = s - q;
  out.values.resize(p);
  if (deriv == 0) {
    for (int r = 0; r <= q; ++r) out.values[r] = ndu(r, q);
    return out;
  }

  // Derivative of order `deriv` for each of the p nonzero functions.
  Eigen::MatrixXd a(2, p);
  for (int r = 0; r <= q; ++r) {
    int s1 = 0, s2 = 1;
    a(0, 0) = 1.0;
    double d = 0.0;
    for (int k = 1; k <= deriv; ++k) {
      d = 0.0;
      const int rk = r - k;
      const int pk = q - k;
      if (r >= k) {
        a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
        d = a(s2, 0) * ndu(rk, pk);
      }
      const int j1 = (rk >= -1) ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : q - r;
      for (int j = j1; j <= j2; ++j) {
        a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
        d += a(s2, j) * ndu(rk + j, pk);
      }
      if (r <= pk) {
        a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
        d += a(s2, k) * ndu(r, pk);
      }
      std::swap(s1, s2);
    }
    out.values[r] = d;
  }
  double factor = q;
  for (int k = 2; k <= deriv; ++k) factor *= (q - k + 1);
  out.values *= factor;
  return out;
}

Eigen::VectorXd eval_basis(const KnotVector& kv, double t, int deriv) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(kv.dim());
  const LocalBasis lb = local_basis(kv, t, deriv);
  v.segment(lb.first, kv.p) = lb.values;
  return v;
}

namespace {

// Accumulate the Gram matrix of the deriv-th basis derivatives, integrating
// interval by interval. The integrands are piecewise polynomials of degree
// at most 2(p-1), so a p-point rule is exact.
Eigen::MatrixXd gram(const KnotVector& kv, int deriv) {
  const int dim = kv.dim();
  const int p = kv.p;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(dim, dim);
  std::vector<double> breaks;
  breaks.push_back(0.0);
  for (double x : kv.interior) breaks.push_back(x);
  breaks.push_back(1.0);
  const GaussRule& rule = gauss_legendre(p);
  for (size_t iv = 0; iv + 1 < breaks.size(); ++iv) {
    const double a = breaks[iv], b = breaks[iv + 1];
    const double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
    for (int q = 0; q < p; ++q) {
      const double x = mid + hw * rule.nodes[q];
      const double w = hw * rule.weights[q];
      const LocalBasis lb = local_basis(kv, x, deriv);
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
          g(lb.first + i, lb.first + j) += w * lb.values[i] * lb.values[j];
    }
  }
  return g;
}

}  // namespace

SplineBasis assemble(const KnotVector& kv, std::span<const double> t, int m) {
  validate_orders(kv.p, m);
  SplineBasis basis;
  basis.knots = kv;
  basis.m = m;
  const int n = static_cast<int>(t.size());
  const int dim = kv.dim();
  basis.B = Eigen::MatrixXd::Zero(n, dim);
  for (int i = 0; i < n; ++i) {
    const LocalBasis lb = local_basis(kv, t[i], 0);
    basis.B.row(i).segment(lb.first, kv.p) = lb.values.transpose();
  }
  basis.H = gram(kv, 0);
  basis.P = gram(kv, m);
  return basis;
}

Eigen::MatrixXd difference_penalty(int dim, int m) {
  if (dim <= m)
    fail(ErrorCode::invalid_argument,
         "difference penalty requires dim > m (invalid order)");
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(dim - m, dim);
  std::vector<double> coef(m + 1);
  coef[0] = 1.0;
  for (int i = 1; i <= m; ++i)
    for (int j = i; j >= 1; --j) coef[j] += coef[j - 1];  // binomials
  for (int r = 0; r < dim - m; ++r)
    for (int i = 0; i <= m; ++i)
      d(r, r + i) = ((m - i) % 2 == 0 ? 1.0 : -1.0) * coef[i];
  return d.transpose() * d;
}

double reproducing_kernel(const SplineBasis& basis, double lambda, double x,
                          double y) {
  if (lambda < 0.0) fail(ErrorCode::invalid_argument, "lambda must be >= 0");
  const Eigen::MatrixXd g = basis.H + lambda * basis.P;
  const Eigen::VectorXd bx = eval_basis(basis.knots, x);
  const Eigen::VectorXd by = eval_basis(basis.knots, y);
  return bx.dot(g.ldlt().solve(by));
}

}  // namespace dpdglm
