#pragma once

#include <vector>

#include "glmscale/dataset.hpp"
#include "glmscale/losses.hpp"
#include "glmscale/sls.hpp"

namespace glmscale {

struct ConversionResult {
  VectorXd beta_target;
  double rho = 0.0;
  double kappa = 0.0;
  std::vector<RootStep> trace;
  int iterations = 0;
};

// Rescales coefficients fitted under `source` into coefficients for
// `target` by solving kappa = (rho/n) sum Psi_target''(rho yhat_i), where
// yhat = X beta_source and kappa = (1/n) sum Psi_source''(yhat_i). The
// root search starts at rho = 1; the init field of `cfg` is ignored.
ConversionResult convert_glm(const MatrixXd& X, const VectorXd& beta_source,
                             const LossFamily& source, const LossFamily& target,
                             const ScaleSolveConfig& cfg = {});

}  // namespace glmscale
