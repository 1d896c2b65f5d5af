#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "glmscale/dataset.hpp"

namespace glmscale {

struct FullSample {};
// Sub-sample of the default size, see default_subsample_size().
struct DefaultSubsample {};
struct SubsampleSize {
  std::size_t size;
};
// Explicit dataset row indices; they must be distinct training rows.
struct SubsampleRows {
  std::vector<std::size_t> rows;
};

using Subsample = std::variant<FullSample, DefaultSubsample, SubsampleSize, SubsampleRows>;

struct OlsFit {
  VectorXd beta;
  // Dataset row indices used for the Gram matrix; empty optional = all training rows.
  std::optional<std::vector<std::size_t>> subsample_indices;
  double gram_condition_estimate = 0.0;
};

// min(n, ceil(4 p ln(max(p, 2)))).
std::size_t default_subsample_size(std::size_t n, std::size_t p);

// Solves ((1/|S|) X_S^T X_S) b = (1/n) X^T y over training rows with a
// Cholesky factorization. Throws SingularDesign (with the condition
// estimate attached) when the Gram matrix is numerically singular.
OlsFit fit_ols(const Dataset& data, const Subsample& subsample = FullSample{},
               std::uint64_t seed = 0);
OlsFit fit_ols(const TrainTestView& view, const Subsample& subsample = FullSample{},
               std::uint64_t seed = 0);

// Solves ((1/n) X^T X + lambda I) b = (1/n) X^T y. lambda = 0 is exactly the
// full-sample fit_ols. For lambda > 0 a failed factorization falls back to
// an eigenvalue-floored solve.
OlsFit fit_ridge(const Dataset& data, double lambda);
OlsFit fit_ridge(const TrainTestView& view, double lambda);

}  // namespace glmscale
