#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "glmscale/dataset.hpp"
#include "glmscale/losses.hpp"
#include "glmscale/regression.hpp"

namespace glmscale {

// c0 = 2 / Var(y); falls back to 1 when the sample variance is zero.
struct VarianceRule {};
struct FixedInit {
  double value;
};
using ScaleInit = std::variant<VarianceRule, FixedInit>;

struct ScaleSolveConfig {
  ScaleInit init = VarianceRule{};
  double tol = 1e-10;  // absolute residual
  int max_iters = 100;
  double bracket_max = 1e6;

  void validate() const;
};

struct RootStep {
  enum class Kind { Init, Bracket, Newton, Bisection };
  double c;
  double residual;
  Kind kind;
};

struct ScaleSolution {
  double c = 0.0;
  std::vector<RootStep> trace;
  // Newton and bisection updates; bracket probes are not counted.
  int iterations = 0;
};

struct ScaleResidual {
  double value;
  double derivative;
};

// value = (c/n) sum Psi''(c yhat_i) - target, derivative =
// (1/n) sum {Psi''(c yhat_i) + c yhat_i Psi'''(c yhat_i)}.
// Throws CurvatureOverflow naming the observation when Psi'' is not finite.
ScaleResidual scale_residual(double c, std::span<const double> yhat, const LossFamily& family,
                             double target = 1.0);

// Newton on the scale equation with a bisection safeguard. The bracket is
// found by doubling (residual negative at the start) or halving (positive)
// from the initial value, so the root nearest zero along that walk is the
// one returned. `target` is 1 for SLS and kappa for GLM conversion.
ScaleSolution solve_scale(std::span<const double> yhat, const LossFamily& family,
                          const ScaleSolveConfig& cfg,
                          std::optional<std::span<const double>> y_for_init = std::nullopt,
                          double target = 1.0);

// Initial value the config resolves to for the given responses.
double initial_scale(const ScaleSolveConfig& cfg, std::optional<std::span<const double>> y);

struct SlsResult {
  VectorXd beta_sls;
  VectorXd beta_ols;
  double c = 0.0;
  std::vector<RootStep> root_trace;
  int root_iterations = 0;
  std::optional<std::vector<std::size_t>> subsample_indices;
  double ols_seconds = 0.0;
  double wall_time_seconds = 0.0;
};

SlsResult fit_sls(const Dataset& data, const LossFamily& family,
                  const Subsample& subsample = FullSample{}, const ScaleSolveConfig& cfg = {},
                  std::uint64_t seed = 0);
SlsResult fit_sls(const TrainTestView& view, const LossFamily& family,
                  const Subsample& subsample = FullSample{}, const ScaleSolveConfig& cfg = {},
                  std::uint64_t seed = 0);

struct SlsRidgeResult : SlsResult {
  double gamma = 0.0;  // ridge penalty of the final OLS solve, lambda * c
  int outer_iterations = 0;
};

// Alternates ridge OLS at gamma = lambda c with re-solving the scale
// equation until |c_{k+1} - c_k| <= tol (1 + c_k); at most 50 rounds.
SlsRidgeResult fit_sls_ridge(const Dataset& data, const LossFamily& family, double lambda,
                             const ScaleSolveConfig& cfg = {});

inline constexpr int kRidgeMaxOuterIterations = 50;

}  // namespace glmscale
