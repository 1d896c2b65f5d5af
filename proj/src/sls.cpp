#include "glmscale/sls.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "glmscale/errors.hpp"
#include "glmscale/timer.hpp"

namespace glmscale {
namespace {

constexpr double kMinDerivative = 1e-14;
constexpr int kMaxHalvings = 1100;  // 2^-1100 underflows any positive double

struct Probe {
  double c;
  double value;
  double derivative;
};

// Overflow of Psi'' only happens upward (Psi'' >= 0), so a probe that
// overflows is on the positive side of the root.
Probe probe(double c, std::span<const double> yhat, const LossFamily& family, double target) {
  try {
    const auto r = scale_residual(c, yhat, family, target);
    return {c, r.value, r.derivative};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::CurvatureOverflow) throw;
    const double inf = std::numeric_limits<double>::infinity();
    return {c, inf, inf};
  }
}

double sample_variance(std::span<const double> y) {
  if (y.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(y.size() - 1);
}

[[noreturn]] void throw_no_root(double bracket_max, double last) {
  Error err(ErrorKind::NoRoot, "solve_scale: residual does not change sign on (0, " +
                                   std::to_string(bracket_max) + "]");
  err.last_residual = last;
  throw err;
}

}  // namespace

void ScaleSolveConfig::validate() const {
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "scale solve: tol must be > 0");
  if (max_iters < 1) {
    throw Error(ErrorKind::InvalidArgument, "scale solve: max_iters must be >= 1");
  }
  if (!(bracket_max > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "scale solve: bracket_max must be > 0");
  }
  if (const auto* fixed = std::get_if<FixedInit>(&init)) {
    if (!(fixed->value > 0.0) || !std::isfinite(fixed->value)) {
      throw Error(ErrorKind::InvalidArgument, "scale solve: fixed init must be positive");
    }
  }
}

ScaleResidual scale_residual(double c, std::span<const double> yhat, const LossFamily& family,
                             double target) {
  if (!std::isfinite(c)) throw Error(ErrorKind::InvalidArgument, "scale_residual: c not finite");
  if (yhat.empty()) throw Error(ErrorKind::InvalidArgument, "scale_residual: yhat is empty");
  double sum2 = 0.0;
  double sum3 = 0.0;
  std::size_t i = 0;
  try {
    for (; i < yhat.size(); ++i) {
      const double z = c * yhat[i];
      const double d2 = family.d2(z);
      if (!std::isfinite(d2)) {
        throw Error(ErrorKind::Domain, "curvature is not finite");
      }
      sum2 += d2;
      sum3 += z * family.d3(z);
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument && !std::isfinite(yhat[i])) throw;
    Error err(ErrorKind::CurvatureOverflow,
              "scale_residual: Psi'' overflows at observation " + std::to_string(i) + " (c = " +
                  std::to_string(c) + ", yhat = " + std::to_string(yhat[i]) + ")");
    err.index = i;
    throw err;
  }
  const double n = static_cast<double>(yhat.size());
  return {c * sum2 / n - target, (sum2 + sum3) / n};
}

double initial_scale(const ScaleSolveConfig& cfg, std::optional<std::span<const double>> y) {
  if (const auto* fixed = std::get_if<FixedInit>(&cfg.init)) return fixed->value;
  if (!y) {
    throw Error(ErrorKind::InvalidArgument,
                "solve_scale: the variance rule needs the responses for initialization");
  }
  const double var = sample_variance(*y);
  return var > 0.0 ? 2.0 / var : 1.0;
}

ScaleSolution solve_scale(std::span<const double> yhat, const LossFamily& family,
                          const ScaleSolveConfig& cfg,
                          std::optional<std::span<const double>> y_for_init, double target) {
  cfg.validate();
  if (yhat.empty()) throw Error(ErrorKind::InvalidArgument, "solve_scale: yhat is empty");
  if (!(target > 0.0)) {
    throw Error(ErrorKind::Domain, "solve_scale: target must be positive");
  }
  ScaleSolution out;
  auto record = [&](const Probe& pr, RootStep::Kind kind) {
    out.trace.push_back({pr.c, pr.value, kind});
  };
  auto finish = [&](const Probe& pr) {
    out.c = pr.c;
    return out;
  };

  Probe cur = probe(initial_scale(cfg, y_for_init), yhat, family, target);
  record(cur, RootStep::Kind::Init);
  if (std::abs(cur.value) <= cfg.tol) return finish(cur);

  // Bracket [lo, hi] with residual(lo) < 0 < residual(hi).
  Probe lo{}, hi{};
  if (cur.value < 0.0) {
    lo = cur;
    for (;;) {
      if (lo.c >= cfg.bracket_max) throw_no_root(cfg.bracket_max, lo.value);
      Probe next = probe(std::min(2.0 * lo.c, cfg.bracket_max), yhat, family, target);
      record(next, RootStep::Kind::Bracket);
      if (std::abs(next.value) <= cfg.tol) return finish(next);
      if (next.value > 0.0) {
        hi = next;
        break;
      }
      lo = next;
    }
  } else {
    hi = cur;
    for (int k = 0;; ++k) {
      if (k == kMaxHalvings) throw_no_root(cfg.bracket_max, hi.value);
      Probe next = probe(0.5 * hi.c, yhat, family, target);
      record(next, RootStep::Kind::Bracket);
      if (std::abs(next.value) <= cfg.tol) return finish(next);
      if (next.value < 0.0) {
        lo = next;
        break;
      }
      hi = next;
    }
  }

  cur = std::abs(lo.value) <= std::abs(hi.value) ? lo : hi;
  while (out.iterations < cfg.max_iters) {
    double cand = 0.0;
    RootStep::Kind kind = RootStep::Kind::Newton;
    if (std::isfinite(cur.value) && std::abs(cur.derivative) >= kMinDerivative) {
      cand = cur.c - cur.value / cur.derivative;
    }
    if (!(cand > lo.c && cand < hi.c)) {
      cand = 0.5 * (lo.c + hi.c);
      kind = RootStep::Kind::Bisection;
    }
    cur = probe(cand, yhat, family, target);
    ++out.iterations;
    record(cur, kind);
    if (std::abs(cur.value) <= cfg.tol) return finish(cur);
    (cur.value < 0.0 ? lo : hi) = cur;
    if (hi.c - lo.c <= 4.0 * std::numeric_limits<double>::epsilon() * hi.c) break;
  }
  Error err(ErrorKind::NonConvergence,
            "solve_scale: no convergence after " + std::to_string(out.iterations) +
                " iterations (last residual " + std::to_string(cur.value) + ")");
  err.last_residual = cur.value;
  throw err;
}

SlsResult fit_sls(const Dataset& data, const LossFamily& family, const Subsample& subsample,
                  const ScaleSolveConfig& cfg, std::uint64_t seed) {
  data.validate();
  return fit_sls(TrainTestView(data), family, subsample, cfg, seed);
}

SlsResult fit_sls(const TrainTestView& view, const LossFamily& family, const Subsample& subsample,
                  const ScaleSolveConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Stopwatch watch;
  OlsFit ols = fit_ols(view, subsample, seed);
  const double ols_seconds = watch.seconds();

  const VectorXd yhat = view.X_train() * ols.beta;
  const VectorXd& y = view.y_train();
  ScaleSolution sol =
      solve_scale(std::span<const double>(yhat.data(), static_cast<std::size_t>(yhat.size())),
                  family, cfg,
                  std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));

  SlsResult res;
  res.beta_sls = sol.c * ols.beta;
  res.beta_ols = std::move(ols.beta);
  res.c = sol.c;
  res.root_trace = std::move(sol.trace);
  res.root_iterations = sol.iterations;
  res.subsample_indices = std::move(ols.subsample_indices);
  res.ols_seconds = ols_seconds;
  res.wall_time_seconds = watch.seconds();
  return res;
}

SlsRidgeResult fit_sls_ridge(const Dataset& data, const LossFamily& family, double lambda,
                             const ScaleSolveConfig& cfg) {
  data.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorKind::InvalidArgument, "fit_sls_ridge: lambda must be finite and >= 0");
  }
  Stopwatch watch;
  const TrainTestView view(data);
  SlsRidgeResult res;
  static_cast<SlsResult&>(res) = fit_sls(view, family, FullSample{}, cfg);
  if (lambda == 0.0) {
    res.wall_time_seconds = watch.seconds();
    return res;
  }
  const VectorXd& y = view.y_train();
  const std::span<const double> yspan(y.data(), static_cast<std::size_t>(y.size()));
  double c = res.c;
  for (int k = 0; k < kRidgeMaxOuterIterations; ++k) {
    const double gamma = lambda * c;
    OlsFit ridge = fit_ridge(view, gamma);
    const VectorXd yhat = view.X_train() * ridge.beta;
    ScaleSolution sol = solve_scale(
        std::span<const double>(yhat.data(), static_cast<std::size_t>(yhat.size())), family, cfg,
        yspan);
    const double next = sol.c;
    res.root_trace.insert(res.root_trace.end(), sol.trace.begin(), sol.trace.end());
    res.root_iterations += sol.iterations;
    res.outer_iterations = k + 1;
    res.beta_ols = std::move(ridge.beta);
    res.beta_sls = next * res.beta_ols;
    res.c = next;
    res.gamma = gamma;
    if (std::abs(next - c) <= cfg.tol * (1.0 + c)) {
      res.wall_time_seconds = watch.seconds();
      return res;
    }
    c = next;
  }
  throw Error(ErrorKind::NonConvergence,
              "fit_sls_ridge: fixed point not reached after " +
                  std::to_string(kRidgeMaxOuterIterations) + " rounds");
}

}  // namespace glmscale
