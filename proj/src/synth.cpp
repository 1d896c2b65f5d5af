#include "glmscale/synth.hpp"

#include <cmath>
#include <string>

#include "glmscale/errors.hpp"

namespace glmscale {
namespace {

double draw(BaseDistribution dist, Philox4x32& rng) {
  switch (dist) {
    case BaseDistribution::Gaussian01:
      return rng.normal();
    case BaseDistribution::Rademacher:
      return rng.rademacher();
    case BaseDistribution::ExpMinusOne:
      return rng.exponential() - 1.0;
  }
  return 0.0;
}

double logistic_mean(double eta) {
  return eta >= 0.0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
}

}  // namespace

void DesignSpec::validate() const {
  if (p < 1 || n <= p) {
    throw Error(ErrorKind::InvalidArgument, "design: need n > p >= 1");
  }
  if (const auto* cov = std::get_if<RandomSpdCovariance>(&covariance)) {
    if (!(cov->condition >= 1.0) || !std::isfinite(cov->condition)) {
      throw Error(ErrorKind::InvalidArgument, "design: condition must be >= 1");
    }
  }
  if (const auto* ws = std::get_if<WellSpread>(&beta_pop)) {
    if (!(ws->norm > 0.0) || !std::isfinite(ws->norm)) {
      throw Error(ErrorKind::InvalidArgument, "design: well-spread norm must be > 0");
    }
  } else {
    const auto& b = std::get<ExplicitBeta>(beta_pop).beta;
    if (static_cast<std::size_t>(b.size()) != p || !b.allFinite()) {
      throw Error(ErrorKind::InvalidArgument, "design: explicit beta must have p finite entries");
    }
  }
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "design: test fraction must be in [0, 1)");
  }
}

MatrixXd random_orthogonal(std::size_t p, Philox4x32& rng) {
  const auto pi = static_cast<Eigen::Index>(p);
  MatrixXd g(pi, pi);
  for (Eigen::Index i = 0; i < pi; ++i) {
    for (Eigen::Index j = 0; j < pi; ++j) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<MatrixXd> qr(g);
  MatrixXd q = qr.householderQ();
  const MatrixXd& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < pi; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

MatrixXd random_spd_root(std::size_t p, double condition, std::uint64_t seed) {
  if (p < 1) throw Error(ErrorKind::InvalidArgument, "random_spd_root: p must be >= 1");
  if (!(condition >= 1.0) || !std::isfinite(condition)) {
    throw Error(ErrorKind::InvalidArgument, "random_spd_root: condition must be >= 1");
  }
  Philox4x32 rng(seed, streams::kCovariance);
  const MatrixXd q = random_orthogonal(p, rng);
  VectorXd root_eig(static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < p; ++i) {
    const double frac = p == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(p - 1);
    root_eig(static_cast<Eigen::Index>(i)) = std::sqrt(std::pow(condition, frac));
  }
  MatrixXd root = q * root_eig.asDiagonal() * q.transpose();
  // exact symmetry
  return 0.5 * (root + root.transpose());
}

std::vector<bool> random_test_mask(std::size_t n, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "test fraction must be in [0, 1)");
  }
  const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (count == 0) return {};
  Philox4x32 rng(seed, streams::kSplit);
  std::vector<bool> mask(n, false);
  for (std::size_t r : sample_without_replacement(n, count, rng)) mask[r] = true;
  return mask;
}

SyntheticSample sample_dataset(const DesignSpec& spec) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(spec.n);
  const auto p = static_cast<Eigen::Index>(spec.p);

  SyntheticSample out;
  if (const auto* ws = std::get_if<WellSpread>(&spec.beta_pop)) {
    Philox4x32 rng(spec.seed, streams::kCoefficients);
    out.beta_pop.resize(p);
    const double mag = ws->norm / std::sqrt(static_cast<double>(spec.p));
    for (Eigen::Index j = 0; j < p; ++j) out.beta_pop(j) = mag * rng.rademacher();
  } else {
    out.beta_pop = std::get<ExplicitBeta>(spec.beta_pop).beta;
  }

  Dataset& data = out.data;
  {
    Philox4x32 rng(spec.seed, streams::kDesign);
    MatrixXd w(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < p; ++j) w(i, j) = draw(spec.base, rng);
    }
    if (const auto* cov = std::get_if<RandomSpdCovariance>(&spec.covariance)) {
      data.X = w * random_spd_root(spec.p, cov->condition, cov->seed);
    } else {
      data.X = std::move(w);
    }
  }

  data.y = VectorXd::Zero(n);
  if (spec.response != ResponseKind::None) {
    const VectorXd eta = data.X * out.beta_pop;
    Philox4x32 rng(spec.seed, streams::kResponse);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (spec.response == ResponseKind::LogisticBernoulli) {
        data.y(i) = rng.bernoulli(logistic_mean(eta(i))) ? 1.0 : 0.0;
      } else {
        double e = eta(i);
        if (e > kPoissonPredictorClamp) {
          e = kPoissonPredictorClamp;
          ++data.info.clamped_rows;
        }
        data.y(i) = static_cast<double>(rng.poisson(std::exp(e)));
      }
    }
    if (spec.response == ResponseKind::PoissonCounts) {
      data.info.predictor_clamp = kPoissonPredictorClamp;
    }
  }
  data.test_mask = random_test_mask(spec.n, spec.test_fraction, spec.seed);
  data.info.source = "synthetic:" + to_string(spec.base) + ":" + to_string(spec.response);
  return out;
}

std::string to_string(BaseDistribution dist) {
  switch (dist) {
    case BaseDistribution::Gaussian01:
      return "gaussian";
    case BaseDistribution::Rademacher:
      return "rademacher";
    case BaseDistribution::ExpMinusOne:
      return "exp-minus-one";
  }
  return "unknown";
}

std::string to_string(ResponseKind kind) {
  switch (kind) {
    case ResponseKind::LogisticBernoulli:
      return "logistic";
    case ResponseKind::PoissonCounts:
      return "poisson";
    case ResponseKind::None:
      return "none";
  }
  return "unknown";
}

}  // namespace glmscale
