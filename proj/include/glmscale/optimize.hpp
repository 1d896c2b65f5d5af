#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "glmscale/dataset.hpp"
#include "glmscale/losses.hpp"

namespace glmscale {

// Empirical risk (1/n) sum [Psi(<x_i,b>) - y_i <x_i,b>] over training rows.
double empirical_risk(const Dataset& data, const LossFamily& family, const VectorXd& beta);
// (1/n) sum x_i (Psi'(<x_i,b>) - y_i)
VectorXd risk_gradient(const Dataset& data, const LossFamily& family, const VectorXd& beta);
// (1/n) sum Psi''(<x_i,b>) x_i x_i^T
MatrixXd risk_hessian(const Dataset& data, const LossFamily& family, const VectorXd& beta);

// Mean squared error of the estimated mean Psi'(<x,b>) on the given rows;
// NaN when there are no rows.
double mean_prediction_error(const MatrixXd& X, const VectorXd& y, const LossFamily& family,
                             const VectorXd& beta);

enum class Method { NewtonRaphson, NewtonStein, BFGS, LBFGS, GD, AGD };

std::string to_string(Method method);
std::optional<Method> parse_method(const std::string& name);

// iid uniform on [-1/sqrt(p), 1/sqrt(p)].
struct RandomInit {
  std::uint64_t seed = 0;
};
struct FromVector {
  VectorXd beta;
};
using OptimizerInit = std::variant<RandomInit, FromVector>;

VectorXd random_initial_point(std::size_t p, std::uint64_t seed);

struct OptimizerConfig {
  Method method = Method::NewtonRaphson;
  int lbfgs_memory = 10;
  OptimizerInit init = RandomInit{};
  double grad_tol = 1e-8;
  int max_iters = 500;
  double linesearch_alpha = 0.3;
  double linesearch_beta = 0.8;
  // Rows used for the Newton-Stein covariance; default 4 p ln p.
  std::optional<std::size_t> ns_subsample;
  std::uint64_t ns_seed = 0;

  void validate() const;
};

// One entry per iteration; entry 0 is the initial point.
struct OptimizerTrace {
  Method method = Method::NewtonRaphson;
  std::vector<int> iteration;
  std::vector<VectorXd> iterates;
  std::vector<double> objective;
  std::vector<double> grad_norm;
  std::vector<double> cum_time_seconds;
  std::vector<double> test_error;
  // Iterations where the method fell back to a cheaper direction
  // (Hessian factorization failure, non-PD Stein approximation, non-descent).
  std::vector<bool> fallback;

  bool converged = false;
  bool hit_max_iters = false;
  int skipped_updates = 0;  // BFGS/LBFGS pairs failing the curvature test
  int restarts = 0;         // AGD momentum resets

  std::size_t size() const { return objective.size(); }
  const VectorXd& final_beta() const { return iterates.back(); }
};

// Minimizes the empirical risk over training rows with the configured
// method and backtracking line search. Test error is evaluated on held-out
// rows each iteration, outside the timed region.
OptimizerTrace minimize(const Dataset& data, const LossFamily& family, const OptimizerConfig& cfg);
OptimizerTrace minimize(const TrainTestView& view, const LossFamily& family,
                        const OptimizerConfig& cfg);

inline constexpr int kMaxLineSearchShrinks = 60;

}  // namespace glmscale
