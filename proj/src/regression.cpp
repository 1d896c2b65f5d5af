#include "glmscale/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>

#include "glmscale/errors.hpp"
#include "glmscale/random.hpp"

namespace glmscale {
namespace {

// Reciprocal condition numbers below this are treated as singular.
double singular_rcond(std::size_t p) {
  return 10.0 * static_cast<double>(p) * std::numeric_limits<double>::epsilon();
}

MatrixXd scaled_gram(const MatrixXd& rows, double scale) {
  const Eigen::Index p = rows.cols();
  MatrixXd gram = MatrixXd::Zero(p, p);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(rows.transpose(), scale);
  return gram.selfadjointView<Eigen::Lower>();
}

double eigen_condition(const MatrixXd& gram) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

[[noreturn]] void throw_singular(const MatrixXd& gram, const char* who) {
  const double cond = eigen_condition(gram);
  Error err(ErrorKind::SingularDesign, std::string(who) +
                                           ": Gram matrix is numerically singular (condition "
                                           "estimate " +
                                           std::to_string(cond) + ")");
  err.condition_estimate = cond;
  throw err;
}

// Cholesky solve; nullopt when the factorization fails or is too ill-conditioned.
std::optional<std::pair<VectorXd, double>> cholesky_solve(const MatrixXd& gram,
                                                          const VectorXd& rhs) {
  Eigen::LLT<MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const double rcond = llt.rcond();
  if (!(rcond > singular_rcond(static_cast<std::size_t>(gram.rows())))) return std::nullopt;
  return std::make_pair(VectorXd(llt.solve(rhs)), 1.0 / rcond);
}

std::vector<std::size_t> resolve_rows(const TrainTestView& view, const Subsample& subsample,
                                      std::uint64_t seed, bool& full) {
  const std::size_t n = view.n_train();
  const std::size_t p = view.p();
  full = false;
  if (std::holds_alternative<FullSample>(subsample)) {
    full = true;
    return {};
  }
  if (const auto* given = std::get_if<SubsampleRows>(&subsample)) {
    const Dataset& data = view.dataset();
    std::unordered_set<std::size_t> seen;
    for (std::size_t r : given->rows) {
      if (r >= data.n()) {
        throw Error(ErrorKind::InvalidArgument,
                    "fit_ols: sub-sample row " + std::to_string(r) + " out of range");
      }
      if (data.is_test(r)) {
        throw Error(ErrorKind::InvalidArgument,
                    "fit_ols: sub-sample row " + std::to_string(r) + " is a test row");
      }
      if (!seen.insert(r).second) {
        throw Error(ErrorKind::InvalidArgument,
                    "fit_ols: sub-sample row " + std::to_string(r) + " repeated");
      }
    }
    if (given->rows.size() <= p) {
      throw Error(ErrorKind::InvalidArgument, "fit_ols: sub-sample must have more than p rows");
    }
    return given->rows;
  }
  std::size_t size = default_subsample_size(n, p);
  if (const auto* s = std::get_if<SubsampleSize>(&subsample)) size = s->size;
  if (size <= p || size > n) {
    throw Error(ErrorKind::InvalidArgument, "fit_ols: sub-sample size " + std::to_string(size) +
                                                " must satisfy p < s <= n (p = " +
                                                std::to_string(p) + ", n = " +
                                                std::to_string(n) + ")");
  }
  Philox4x32 rng(seed, streams::kSubsample);
  auto positions = sample_without_replacement(n, size, rng);
  std::vector<std::size_t> rows;
  rows.reserve(size);
  for (std::size_t pos : positions) rows.push_back(view.train_index()[pos]);
  return rows;
}

}  // namespace

std::size_t default_subsample_size(std::size_t n, std::size_t p) {
  const double pd = static_cast<double>(p);
  const auto s =
      static_cast<std::size_t>(std::ceil(4.0 * pd * std::log(std::max(pd, 2.0))));
  return std::min(n, s);
}

OlsFit fit_ols(const Dataset& data, const Subsample& subsample, std::uint64_t seed) {
  data.validate();
  return fit_ols(TrainTestView(data), subsample, seed);
}

OlsFit fit_ols(const TrainTestView& view, const Subsample& subsample, std::uint64_t seed) {
  const MatrixXd& X = view.X_train();
  const double n = static_cast<double>(view.n_train());
  bool full = false;
  auto rows = resolve_rows(view, subsample, seed, full);

  MatrixXd gram;
  if (full) {
    gram = scaled_gram(X, 1.0 / n);
  } else {
    const Dataset& data = view.dataset();
    MatrixXd Xs(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      Xs.row(static_cast<Eigen::Index>(i)) = data.X.row(static_cast<Eigen::Index>(rows[i]));
    }
    gram = scaled_gram(Xs, 1.0 / static_cast<double>(rows.size()));
  }
  const VectorXd moment = X.transpose() * view.y_train() / n;

  auto solved = cholesky_solve(gram, moment);
  if (!solved) throw_singular(gram, "fit_ols");
  OlsFit fit;
  fit.beta = std::move(solved->first);
  fit.gram_condition_estimate = solved->second;
  if (!full) fit.subsample_indices = std::move(rows);
  return fit;
}

OlsFit fit_ridge(const Dataset& data, double lambda) {
  data.validate();
  return fit_ridge(TrainTestView(data), lambda);
}

OlsFit fit_ridge(const TrainTestView& view, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorKind::InvalidArgument, "fit_ridge: lambda must be finite and >= 0");
  }
  if (lambda == 0.0) return fit_ols(view, FullSample{});

  const MatrixXd& X = view.X_train();
  const double n = static_cast<double>(view.n_train());
  MatrixXd gram = scaled_gram(X, 1.0 / n);
  gram.diagonal().array() += lambda;
  const VectorXd moment = X.transpose() * view.y_train() / n;

  OlsFit fit;
  if (auto solved = cholesky_solve(gram, moment)) {
    fit.beta = std::move(solved->first);
    fit.gram_condition_estimate = solved->second;
    return fit;
  }
  // Eigenvalue-floored solve: clamp the spectrum at lambda.
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
  VectorXd vals = eig.eigenvalues().cwiseMax(lambda);
  fit.beta = eig.eigenvectors() *
             (eig.eigenvectors().transpose() * moment).cwiseQuotient(vals);
  fit.gram_condition_estimate = vals.maxCoeff() / vals.minCoeff();
  return fit;
}

}  // namespace glmscale
