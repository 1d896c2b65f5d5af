#include "glmscale/convert.hpp"

#include <cmath>
#include <span>
#include <string>

#include "glmscale/errors.hpp"

namespace glmscale {

ConversionResult convert_glm(const MatrixXd& X, const VectorXd& beta_source,
                             const LossFamily& source, const LossFamily& target,
                             const ScaleSolveConfig& cfg) {
  if (beta_source.size() != X.cols()) {
    throw Error(ErrorKind::InvalidArgument,
                "convert_glm: beta has " + std::to_string(beta_source.size()) +
                    " entries, X has " + std::to_string(X.cols()) + " columns");
  }
  if (X.rows() == 0) throw Error(ErrorKind::InvalidArgument, "convert_glm: X has no rows");
  if (!X.allFinite() || !beta_source.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "convert_glm: inputs must be finite");
  }
  const VectorXd yhat = X * beta_source;
  const std::span<const double> fitted(yhat.data(), static_cast<std::size_t>(yhat.size()));

  double kappa = 0.0;
  for (std::size_t i = 0; i < fitted.size(); ++i) kappa += source.d2(fitted[i]);
  kappa /= static_cast<double>(fitted.size());
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw Error(ErrorKind::Domain,
                "convert_glm: kappa = " + std::to_string(kappa) + " is not positive");
  }

  ScaleSolveConfig rho_cfg = cfg;
  rho_cfg.init = FixedInit{1.0};
  ScaleSolution sol = solve_scale(fitted, target, rho_cfg, std::nullopt, kappa);

  ConversionResult out;
  out.rho = sol.c;
  out.kappa = kappa;
  out.beta_target = sol.c * beta_source;
  out.trace = std::move(sol.trace);
  out.iterations = sol.iterations;
  return out;
}

}  // namespace glmscale
