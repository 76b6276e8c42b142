#include "core/pirls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/errors.hpp"

namespace dpdglm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Canonical-parameter box outside which an evaluation is treated as
// infeasible; keeps Poisson rates and logistic odds in a numerically sane
// range so rejected trial steps cannot stall the series evaluations.
void theta_box(const Family& fam, double* lo, double* hi) {
  switch (fam.kind()) {
    case FamilyKind::poisson: *lo = -30.0; *hi = 30.0; return;
    case FamilyKind::bernoulli: *lo = -35.0; *hi = 35.0; return;
    case FamilyKind::exponential: *lo = -1e8; *hi = -1e-8; return;
    default: *lo = -1e8; *hi = 1e8; return;
  }
}

double safe_objective(const Eigen::VectorXd& coefs, const SplineBasis& basis,
                      const Family& fam, double alpha, double lambda,
                      std::span<const double> y) {
  double lo, hi;
  theta_box(fam, &lo, &hi);
  const Eigen::VectorXd g = basis.B * coefs;
  for (Eigen::Index i = 0; i < g.size(); ++i)
    if (!(g[i] >= lo && g[i] <= hi)) return kInf;
  try {
    const double obj =
        loss_sum(fam, alpha, y, g) + lambda * coefs.dot(basis.P * coefs);
    return std::isfinite(obj) ? obj : kInf;
  } catch (const Error&) {
    return kInf;
  }
}

Eigen::MatrixXd weighted_system(const SplineBasis& basis,
                                const Eigen::VectorXd& w, double lambda) {
  return basis.B.transpose() * w.asDiagonal() * basis.B + 2.0 * lambda * basis.P;
}

bool factor_spd(const Eigen::MatrixXd& m, Eigen::LLT<Eigen::MatrixXd>* llt) {
  llt->compute(m);
  return llt->info() == Eigen::Success;
}

// Median of values[lo..hi] without reordering the input.
double window_median(std::span<const double> values, size_t lo, size_t hi) {
  std::vector<double> buf(values.begin() + lo, values.begin() + hi + 1);
  std::sort(buf.begin(), buf.end());
  const size_t m = buf.size();
  return m % 2 == 1 ? buf[m / 2] : 0.5 * (buf[m / 2 - 1] + buf[m / 2]);
}

std::vector<double> running_median(std::span<const double> y, size_t window) {
  const size_t n = y.size();
  const size_t half = window / 2;
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) {
    const size_t lo = i >= half ? i - half : 0;
    const size_t hi = std::min(i + half, n - 1);
    out[i] = window_median(y, lo, hi);
  }
  return out;
}

// Penalized likelihood fit of winsorized (possibly non-integer) responses:
// Newton steps on sum_i [b(g_i) - yw_i g_i] + lambda c'Pc, which is the
// likelihood branch up to response-only terms and accepts any response in the
// mean domain.
Eigen::VectorXd quasi_likelihood_fit(std::span<const double> yw,
                                     const SplineBasis& basis,
                                     const Family& fam, double lambda,
                                     const Eigen::VectorXd& start,
                                     const SolverOptions& opts) {
  double lo, hi;
  theta_box(fam, &lo, &hi);
  auto objective = [&](const Eigen::VectorXd& c) -> double {
    const Eigen::VectorXd g = basis.B * c;
    double total = 0.0;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      if (!(g[i] >= lo && g[i] <= hi)) return kInf;
      const BDerivatives d = fam.b_derivatives(g[i]);
      total += d.b - yw[static_cast<size_t>(i)] * g[i];
    }
    return total + lambda * c.dot(basis.P * c);
  };

  Eigen::VectorXd c = start;
  double obj = objective(c);
  if (!std::isfinite(obj)) return start;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    const Eigen::VectorXd g = basis.B * c;
    Eigen::VectorXd w(g.size()), z(g.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      const BDerivatives d = fam.b_derivatives(g[i]);
      const double wi = std::max(d.b2, 1e-12);
      w[i] = wi;
      z[i] = g[i] + (yw[static_cast<size_t>(i)] - d.b1) / wi;
    }
    Eigen::MatrixXd m = weighted_system(basis, w, lambda);
    Eigen::LLT<Eigen::MatrixXd> llt;
    if (!factor_spd(m, &llt)) {
      m.diagonal().array() += opts.ridge * (1.0 + m.diagonal().cwiseAbs().maxCoeff());
      if (!factor_spd(m, &llt)) break;
    }
    const Eigen::VectorXd target = llt.solve(basis.B.transpose() * (w.asDiagonal() * z));
    const Eigen::VectorXd d = target - c;
    double step = 1.0;
    bool accepted = false;
    for (int half = 0; half <= opts.max_halvings; ++half) {
      const Eigen::VectorXd trial = c + step * d;
      const double tobj = objective(trial);
      if (tobj <= obj) {
        const double delta = obj - tobj;
        c = trial;
        obj = tobj;
        accepted = true;
        if (delta <= opts.tol_obj * (1.0 + std::abs(obj))) iter = opts.max_iter;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  return c;
}

}  // namespace

const char* solve_mode_name(SolveMode mode) {
  switch (mode) {
    case SolveMode::newton: return "newton";
    case SolveMode::fisher: return "fisher";
    case SolveMode::mixed: return "mixed";
  }
  return "unknown";
}

StartPair initial_starts(std::span<const double> y, const SplineBasis& basis,
                         const Family& fam, double lambda,
                         const SolverOptions& opts) {
  const size_t n = y.size();
  const std::vector<double> med = running_median(y, 7);

  // start (b): penalized least squares on the link-transformed running median
  Eigen::VectorXd theta_target(n);
  for (size_t i = 0; i < n; ++i)
    theta_target[static_cast<Eigen::Index>(i)] =
        fam.link(fam.clamp_mean(med[i]));
  Eigen::MatrixXd m =
      basis.B.transpose() * basis.B + 2.0 * lambda * basis.P;
  m.diagonal().array() += 1e-10;
  Eigen::VectorXd median_start =
      m.ldlt().solve(basis.B.transpose() * theta_target);

  // fall back to the representable constant fit when the projection leaves
  // the admissible parameter region (possible for the exponential family)
  if (!std::isfinite(
          safe_objective(median_start, basis, fam, 0.0, lambda, y)) ||
      !std::isfinite(safe_objective(median_start, basis, fam, 1.0, lambda, y))) {
    const double theta0 = fam.link(fam.clamp_mean(
        window_median(std::span<const double>(med.data(), med.size()), 0,
                      med.size() - 1)));
    median_start = Eigen::VectorXd::Constant(basis.dim(), theta0);
  }

  // start (a): likelihood fit on winsorized responses
  std::vector<double> yw(y.begin(), y.end());
  switch (fam.kind()) {
    case FamilyKind::gaussian: {
      const double width = 3.0 * std::sqrt(fam.dispersion());
      for (size_t i = 0; i < n; ++i)
        yw[i] = std::clamp(yw[i], med[i] - width, med[i] + width);
      break;
    }
    case FamilyKind::bernoulli:
      break;  // raw responses
    case FamilyKind::poisson: {
      for (size_t i = 0; i < n; ++i) {
        const double mu = fam.clamp_mean(med[i]);
        const double width = 3.0 * std::sqrt(mu);
        yw[i] = std::round(std::clamp(yw[i], std::max(0.0, mu - width), mu + width));
      }
      break;
    }
    case FamilyKind::exponential: {
      for (size_t i = 0; i < n; ++i) {
        const double mu = fam.clamp_mean(med[i]);
        yw[i] = std::clamp(yw[i], 0.25 * mu, 4.0 * mu);
      }
      break;
    }
  }
  Eigen::VectorXd huber_start =
      quasi_likelihood_fit(yw, basis, fam, lambda, median_start, opts);

  return {huber_start, median_start};
}

Eigen::VectorXd initialize(std::span<const double> y, const SplineBasis& basis,
                           const Family& fam, double alpha, double lambda,
                           const SolverOptions& opts) {
  const StartPair starts = initial_starts(y, basis, fam, lambda, opts);
  const double obj_a =
      safe_objective(starts.huberized, basis, fam, alpha, lambda, y);
  const double obj_b =
      safe_objective(starts.median, basis, fam, alpha, lambda, y);
  return obj_a <= obj_b ? starts.huberized : starts.median;
}

FitResult fit(std::span<const double> y, const SplineBasis& basis,
              const Family& fam, double alpha, double lambda,
              const Eigen::VectorXd& init, const SolverOptions& opts) {
  if (lambda < 0.0) fail(ErrorCode::invalid_argument, "lambda must be >= 0");
  if (alpha < 0.0) fail(ErrorCode::invalid_argument, "alpha must be >= 0");
  if (init.size() != basis.dim())
    fail(ErrorCode::invalid_argument, "initial coefficient size mismatch");
  if (static_cast<Eigen::Index>(y.size()) != basis.B.rows())
    fail(ErrorCode::invalid_argument, "response/design size mismatch");

  auto objective = [&](const Eigen::VectorXd& c) {
    return safe_objective(c, basis, fam, alpha, lambda, y);
  };

  Eigen::VectorXd c = init;
  double obj = objective(c);
  if (!std::isfinite(obj))
    fail(ErrorCode::bad_init, "non-finite objective at the initial value");

  FitResult result;
  result.alpha = alpha;
  result.lambda = lambda;
  result.objective_trace.push_back(obj);

  bool saw_newton = false, saw_fisher = false;

  auto try_direction = [&](const IrlsStepData& sd, bool* ridge_used,
                           Eigen::VectorXd* accepted,
                           double* accepted_obj) -> bool {
    Eigen::VectorXd w = sd.w;
    Eigen::MatrixXd m = weighted_system(basis, w, lambda);
    Eigen::LLT<Eigen::MatrixXd> llt;
    if (!factor_spd(m, &llt)) {
      // negative curvature: swap those observations to fisher weights
      bool changed = false;
      Eigen::VectorXd z = sd.z;
      const Eigen::VectorXd g = basis.B * c;
      for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (w[i] <= 0.0) {
          const double fw = fisher_weight(fam, alpha, g[i]);
          const double score =
              loss(fam, alpha, y[static_cast<size_t>(i)], g[i]).grad;
          w[i] = fw;
          z[i] = g[i] - score / fw;
          changed = true;
        }
      }
      if (changed) {
        m = weighted_system(basis, w, lambda);
        saw_fisher = true;
      }
      if (!factor_spd(m, &llt)) {
        m.diagonal().array() +=
            opts.ridge * (1.0 + m.diagonal().cwiseAbs().maxCoeff());
        *ridge_used = true;
        if (!factor_spd(m, &llt))
          fail(ErrorCode::singular_system,
               "weighted system singular after ridge jitter");
      }
      const Eigen::VectorXd rhs = basis.B.transpose() * (w.asDiagonal() * z);
      const Eigen::VectorXd target = llt.solve(rhs);
      const Eigen::VectorXd dir = target - c;
      double step = 1.0;
      for (int half = 0; half <= opts.max_halvings; ++half) {
        const Eigen::VectorXd trial = c + step * dir;
        const double tobj = objective(trial);
        if (tobj <= obj) {
          *accepted = trial;
          *accepted_obj = tobj;
          return true;
        }
        step *= 0.5;
      }
      return false;
    }
    const Eigen::VectorXd rhs = basis.B.transpose() * (w.asDiagonal() * sd.z);
    const Eigen::VectorXd target = llt.solve(rhs);
    const Eigen::VectorXd dir = target - c;
    double step = 1.0;
    for (int half = 0; half <= opts.max_halvings; ++half) {
      const Eigen::VectorXd trial = c + step * dir;
      const double tobj = objective(trial);
      if (tobj <= obj) {
        *accepted = trial;
        *accepted_obj = tobj;
        return true;
      }
      step *= 0.5;
    }
    return false;
  };

  int iter = 0;
  for (iter = 1; iter <= opts.max_iter; ++iter) {
    const Eigen::VectorXd g = basis.B * c;
    IrlsStepData sd = irls_step_data(fam, alpha, y, g, WeightMode::newton);
    const bool degenerate =
        std::any_of(sd.degenerate.begin(), sd.degenerate.end(),
                    [](std::uint8_t f) { return f != 0; });

    Eigen::VectorXd accepted;
    double accepted_obj = obj;
    bool ok = try_direction(sd, &result.ridge_used, &accepted, &accepted_obj);
    if (ok) {
      saw_newton = true;
      if (degenerate) saw_fisher = true;
    } else {
      IrlsStepData fd = irls_step_data(fam, alpha, y, g, WeightMode::fisher);
      ok = try_direction(fd, &result.ridge_used, &accepted, &accepted_obj);
      if (ok) saw_fisher = true;
    }
    if (!ok) break;  // no descent direction made progress

    const double prev_obj = obj;
    const Eigen::VectorXd prev_c = c;
    c = accepted;
    obj = accepted_obj;
    result.objective_trace.push_back(obj);

    const double grad_inf =
        penalized_gradient(c, basis, fam, alpha, lambda, y)
            .cwiseAbs()
            .maxCoeff();
    if (grad_inf < 1e-6 * (1.0 + std::abs(obj))) break;
    const double coef_change = (c - prev_c).cwiseAbs().maxCoeff();
    if (coef_change <= opts.tol_coef * (1.0 + c.cwiseAbs().maxCoeff())) break;
    if (prev_obj - obj <= opts.tol_obj * (1.0 + std::abs(obj))) break;
  }

  result.iterations = std::min(iter, opts.max_iter);
  result.coefs = c;
  result.objective = obj;
  result.theta_hat = basis.B * c;
  result.mu_hat.resize(result.theta_hat.size());
  for (Eigen::Index i = 0; i < result.theta_hat.size(); ++i)
    result.mu_hat[i] = fam.b_derivatives(result.theta_hat[i]).b1;
  const double grad_inf =
      penalized_gradient(c, basis, fam, alpha, lambda, y).cwiseAbs().maxCoeff();
  result.converged = grad_inf < 1e-6 * (1.0 + std::abs(obj));
  if (saw_newton && saw_fisher)
    result.mode_used = SolveMode::mixed;
  else if (saw_fisher)
    result.mode_used = SolveMode::fisher;
  else
    result.mode_used = SolveMode::newton;
  result.edf = effective_df(basis, fam, alpha, lambda, result, y, nullptr);
  return result;
}

std::vector<FitResult> fit_alpha_path(std::span<const double> y,
                                      const SplineBasis& basis,
                                      const Family& fam,
                                      std::span<const double> alpha_grid,
                                      double lambda,
                                      const SolverOptions& opts) {
  for (size_t i = 0; i + 1 < alpha_grid.size(); ++i)
    if (!(alpha_grid[i] < alpha_grid[i + 1]))
      fail(ErrorCode::invalid_argument, "alpha grid must be ascending");

  std::vector<FitResult> path;
  path.reserve(alpha_grid.size());
  Eigen::VectorXd warm;
  bool have_warm = false;
  std::string first_error;
  for (double alpha : alpha_grid) {
    const Eigen::VectorXd cold = initialize(y, basis, fam, alpha, lambda, opts);
    FitResult best;
    bool have_best = false;
    for (int which = 0; which < (have_warm ? 2 : 1); ++which) {
      const Eigen::VectorXd& start = which == 0 ? cold : warm;
      try {
        FitResult r = fit(y, basis, fam, alpha, lambda, start, opts);
        if (!have_best || r.objective < best.objective) {
          best = std::move(r);
          have_best = true;
        }
      } catch (const Error& e) {
        if (first_error.empty()) first_error = e.what();
      }
    }
    if (!have_best)
      fail(ErrorCode::fit_failed,
           "all starts failed on the alpha path: " + first_error);
    warm = best.coefs;
    have_warm = true;
    path.push_back(std::move(best));
  }
  return path;
}

double effective_df(const SplineBasis& basis, const Family& fam, double alpha,
                    double lambda, const FitResult& fit,
                    std::span<const double> y, bool* ridge_flag) {
  Eigen::VectorXd d(fit.theta_hat.size());
  for (Eigen::Index i = 0; i < d.size(); ++i)
    d[i] = loss(fam, alpha, y[static_cast<size_t>(i)], fit.theta_hat[i]).hess;
  const Eigen::MatrixXd a = basis.B.transpose() * d.asDiagonal() * basis.B;

  // Work in the eigenbasis of P with its m null eigenvalues clamped to an
  // exact zero. Assembling A + 2*lambda*P directly loses the curvature on
  // the null space once lambda dwarfs the data term.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(basis.P);
  Eigen::VectorXd evals = es.eigenvalues();
  const double cutoff = 1e-12 * evals.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < evals.size(); ++i)
    if (evals[i] < cutoff) evals[i] = 0.0;
  const Eigen::MatrixXd at = es.eigenvectors().transpose() * a * es.eigenvectors();
  Eigen::MatrixXd m = at;
  m.diagonal() += 2.0 * lambda * evals;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
  bool jittered = false;
  double jitter = 1e-10 * (1.0 + m.diagonal().cwiseAbs().maxCoeff());
  while (ldlt.info() != Eigen::Success ||
         (ldlt.vectorD().array() <= 0.0).any()) {
    m.diagonal().array() += jitter;
    jitter *= 10.0;
    jittered = true;
    ldlt.compute(m);
    if (jitter > 1e6 * (1.0 + m.diagonal().cwiseAbs().maxCoeff()))
      fail(ErrorCode::singular_system, "curvature system not positive definite");
  }
  if (ridge_flag) *ridge_flag = jittered;
  return ldlt.solve(at).trace();
}

}  // namespace dpdglm
