#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "glmscale/dataset.hpp"
#include "glmscale/random.hpp"

namespace glmscale {

enum class BaseDistribution { Gaussian01, Rademacher, ExpMinusOne };

struct IdentityCovariance {};
struct RandomSpdCovariance {
  double condition = 10.0;
  std::uint64_t seed = 0;
};
using CovarianceSpec = std::variant<IdentityCovariance, RandomSpdCovariance>;

// Entries +-norm/sqrt(p) with seeded signs.
struct WellSpread {
  double norm = 1.0;
};
struct ExplicitBeta {
  VectorXd beta;
};
using BetaSpec = std::variant<WellSpread, ExplicitBeta>;

enum class ResponseKind { LogisticBernoulli, PoissonCounts, None };

struct DesignSpec {
  std::size_t n = 0;
  std::size_t p = 0;
  BaseDistribution base = BaseDistribution::Gaussian01;
  CovarianceSpec covariance = IdentityCovariance{};
  BetaSpec beta_pop = WellSpread{};
  ResponseKind response = ResponseKind::LogisticBernoulli;
  std::uint64_t seed = 0;
  double test_fraction = 0.10;

  void validate() const;
};

struct SyntheticSample {
  Dataset data;
  VectorXd beta_pop;
};

// Poisson linear predictors are clamped to this value before drawing counts.
inline constexpr double kPoissonPredictorClamp = 10.0;

// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
// signs of R's diagonal folded into Q.
MatrixXd random_orthogonal(std::size_t p, Philox4x32& rng);

// Q D^{1/2} Q^T with D log-uniformly spaced on [1, condition].
MatrixXd random_spd_root(std::size_t p, double condition, std::uint64_t seed);

// round(fraction * n) rows chosen uniformly; empty when fraction is 0.
std::vector<bool> random_test_mask(std::size_t n, double fraction, std::uint64_t seed);

// X = W Sigma^{1/2} with iid standardized W, responses drawn from the
// declared model, and a seeded held-out split.
SyntheticSample sample_dataset(const DesignSpec& spec);

std::string to_string(BaseDistribution dist);
std::string to_string(ResponseKind kind);

// --- CSV ---

using ColumnRef = std::variant<std::string, std::size_t>;

struct CsvOptions {
  char delimiter = ',';
  bool header = true;
  double test_fraction = 0.10;
  std::uint64_t seed = 0;
};

struct CsvTable {
  std::vector<std::string> header;  // empty without a header row
  MatrixXd values;
};

// Parse failures report the 1-based file line and column.
CsvTable read_csv_table(const std::filesystem::path& path, char delimiter, bool header);

// The response column becomes y, the rest X in file order.
Dataset load_csv(const std::filesystem::path& path, const ColumnRef& response,
                 const CsvOptions& options = {});

// Columns x1..xp then y, with a header row. Values use round-trip precision.
void write_csv(const std::filesystem::path& path, const Dataset& data, char delimiter = ',');

}  // namespace glmscale
