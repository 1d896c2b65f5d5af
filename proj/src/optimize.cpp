#include "glmscale/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "glmscale/errors.hpp"
#include "glmscale/random.hpp"
#include "glmscale/regression.hpp"
#include "glmscale/timer.hpp"

namespace glmscale {
namespace {

[[noreturn]] void throw_overflow(const char* who, std::size_t i, double z) {
  Error err(ErrorKind::CurvatureOverflow, std::string(who) + ": loss overflows at observation " +
                                              std::to_string(i) + " (<x,b> = " +
                                              std::to_string(z) + ")");
  err.index = i;
  throw err;
}

// Psi^(order) applied elementwise; overflow is reported with the row index.
VectorXd apply(const LossFamily& family, const VectorXd& eta, int order, const char* who) {
  VectorXd out(eta.size());
  Eigen::Index i = 0;
  try {
    for (; i < eta.size(); ++i) {
      out(i) = family.eval(eta(i), order);
      if (!std::isfinite(out(i))) throw Error(ErrorKind::Domain, "not finite");
    }
  } catch (const Error&) {
    throw_overflow(who, static_cast<std::size_t>(i), eta(i));
  }
  return out;
}

// Loss restricted to the training rows; all evaluations go through the
// linear predictor eta = X b so line searches cost O(n) per trial.
class GlmObjective {
 public:
  GlmObjective(const MatrixXd& X, const VectorXd& y, const LossFamily& family)
      : X_(X), y_(y), family_(family), n_(static_cast<double>(X.rows())) {}

  const MatrixXd& X() const { return X_; }

  double value(const VectorXd& eta) const {
    return (apply(family_, eta, 0, "empirical_risk").sum() - y_.dot(eta)) / n_;
  }

  VectorXd gradient(const VectorXd& eta) const {
    return X_.transpose() * (apply(family_, eta, 1, "risk_gradient") - y_) / n_;
  }

  MatrixXd hessian(const VectorXd& eta) const {
    const VectorXd w = apply(family_, eta, 2, "risk_hessian");
    const Eigen::Index p = X_.cols();
    if ((w.array() >= 0.0).all()) {
      const MatrixXd scaled = X_.array().colwise() * w.array().sqrt();
      MatrixXd h = MatrixXd::Zero(p, p);
      h.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose(), 1.0 / n_);
      return h.selfadjointView<Eigen::Lower>();
    }
    const MatrixXd weighted = X_.array().colwise() * w.array();
    return X_.transpose() * weighted / n_;
  }

  // (1/n) sum [Psi(eta_i + s_i) - Psi(eta_i) - y_i s_i] with its rounding
  // scale. Small moves use a fourth-order expansion so the change stays
  // accurate long after f(new) - f(old) has dropped below the rounding of f.
  std::pair<double, double> change(const VectorXd& eta, const VectorXd& s) const {
    double sum = 0.0, mag = 0.0;
    Eigen::Index i = 0;
    try {
      for (; i < eta.size(); ++i) {
        const double h = s(i);
        double d;
        if (std::abs(h) <= 1e-3) {
          d = h * (family_.d1(eta(i)) +
                   0.5 * h * (family_.d2(eta(i)) +
                              h / 3.0 * (family_.d3(eta(i)) + 0.25 * h * family_.d4(eta(i)))));
        } else {
          d = family_.psi(eta(i) + h) - family_.psi(eta(i));
          mag += std::abs(family_.psi(eta(i)));
        }
        if (!std::isfinite(d)) throw Error(ErrorKind::Domain, "not finite");
        const double term = d - y_(i) * h;
        sum += term;
        mag += std::abs(d) + std::abs(y_(i) * h);
      }
    } catch (const Error&) {
      throw_overflow("line_search", static_cast<std::size_t>(i), eta(i) + s(i));
    }
    return {sum / n_, mag / n_};
  }

  double mean_derivative(const VectorXd& eta, int order) const {
    return apply(family_, eta, order, "newton_stein").sum() / n_;
  }

 private:
  const MatrixXd& X_;
  const VectorXd& y_;
  const LossFamily& family_;
  double n_;
};

struct StepResult {
  double t;
  double f;
  VectorXd eta;
};

// Armijo backtracking along eta + t Xd, tested on the accurately computed
// change in the objective. Trials that overflow are rejected.
StepResult backtrack(const GlmObjective& obj, const VectorXd& eta, const VectorXd& Xd,
                     double slope, double t0, const OptimizerConfig& cfg) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  double t = t0;
  for (int k = 0; k <= kMaxLineSearchShrinks; ++k) {
    const VectorXd move = t * Xd;
    try {
      const auto [delta, mag] = obj.change(eta, move);
      if (delta <= cfg.linesearch_alpha * t * slope + 16.0 * eps * mag) {
        VectorXd trial = eta + move;
        const double fv = obj.value(trial);
        return {t, fv, std::move(trial)};
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::CurvatureOverflow) throw;
    }
    t *= cfg.linesearch_beta;
  }
  throw Error(ErrorKind::StalledLineSearch,
              "line search made no progress after " + std::to_string(kMaxLineSearchShrinks) +
                  " step reductions");
}

class TraceRecorder {
 public:
  TraceRecorder(OptimizerTrace& trace, Stopwatch& watch, const TrainTestView& view,
                const LossFamily& family)
      : trace_(trace), watch_(watch), view_(view), family_(family) {}

  void record(int it, const VectorXd& beta, double f, const VectorXd& g, bool fallback) {
    trace_.cum_time_seconds.push_back(watch_.seconds());
    watch_.pause();
    trace_.iteration.push_back(it);
    trace_.iterates.push_back(beta);
    trace_.objective.push_back(f);
    trace_.grad_norm.push_back(g.norm());
    trace_.fallback.push_back(fallback);
    trace_.test_error.push_back(
        mean_prediction_error(view_.X_test(), view_.y_test(), family_, beta));
    watch_.resume();
  }

 private:
  OptimizerTrace& trace_;
  Stopwatch& watch_;
  const TrainTestView& view_;
  const LossFamily& family_;
};

struct CurvaturePair {
  VectorXd s;
  VectorXd y;
  double rho;
};

bool curvature_ok(const VectorXd& s, const VectorXd& y) {
  return s.dot(y) > 1e-12 * s.norm() * y.norm();
}

VectorXd lbfgs_direction(const std::deque<CurvaturePair>& pairs, const VectorXd& g) {
  VectorXd q = g;
  std::vector<double> alpha(pairs.size());
  for (std::size_t i = pairs.size(); i-- > 0;) {
    alpha[i] = pairs[i].rho * pairs[i].s.dot(q);
    q -= alpha[i] * pairs[i].y;
  }
  if (!pairs.empty()) {
    const auto& last = pairs.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double b = pairs[i].rho * pairs[i].y.dot(q);
    q += (alpha[i] - b) * pairs[i].s;
  }
  return -q;
}

// Sub-sampled second-moment matrix for the Stein Hessian, factorized once.
Eigen::LLT<MatrixXd> stein_covariance(const MatrixXd& X, const OptimizerConfig& cfg,
                                      MatrixXd& sigma) {
  const auto n = static_cast<std::size_t>(X.rows());
  const auto p = static_cast<std::size_t>(X.cols());
  const std::size_t size = cfg.ns_subsample.value_or(default_subsample_size(n, p));
  if (size <= p || size > n) {
    throw Error(ErrorKind::InvalidArgument, "newton-stein: sub-sample size " +
                                                std::to_string(size) + " must be in (p, n]");
  }
  Philox4x32 rng(cfg.ns_seed, streams::kSubsample);
  const auto rows = sample_without_replacement(n, size, rng);
  MatrixXd Xs(static_cast<Eigen::Index>(size), X.cols());
  for (std::size_t i = 0; i < size; ++i) {
    Xs.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows[i]));
  }
  sigma = Xs.transpose() * Xs / static_cast<double>(size);
  Eigen::LLT<MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::SingularDesign, "newton-stein: sub-sampled covariance is singular");
  }
  return llt;
}

void finish(OptimizerTrace& trace, double grad_tol) {
  trace.converged = trace.grad_norm.back() <= grad_tol;
  trace.hit_max_iters = !trace.converged;
}

void run_agd(const GlmObjective& obj, const OptimizerConfig& cfg, VectorXd x,
             OptimizerTrace& trace, TraceRecorder& rec) {
  const MatrixXd& X = obj.X();
  VectorXd eta = X * x;
  double f = obj.value(eta);
  VectorXd g = obj.gradient(eta);
  rec.record(0, x, f, g, false);

  VectorXd x_prev = x;
  VectorXd eta_prev = eta;
  int k = 1;
  double t = 1.0;
  for (int it = 1; it <= cfg.max_iters && g.norm() > cfg.grad_tol; ++it) {
    const double mom = static_cast<double>(k - 1) / static_cast<double>(k + 2);
    VectorXd yv = x + mom * (x - x_prev);
    VectorXd eta_y = eta + mom * (eta - eta_prev);
    VectorXd g_y = mom > 0.0 ? obj.gradient(eta_y) : g;
    const VectorXd Xd = -(X * g_y);
    StepResult step = backtrack(obj, eta_y, Xd, -g_y.squaredNorm(),
                                std::min(1.0, t / cfg.linesearch_beta), cfg);
    t = step.t;
    x_prev = std::move(x);
    eta_prev = std::move(eta);
    x = yv - t * g_y;
    eta = std::move(step.eta);
    const bool increased = step.f > f;
    f = step.f;
    g = obj.gradient(eta);
    if (increased) {
      k = 1;
      ++trace.restarts;
    } else {
      ++k;
    }
    rec.record(it, x, f, g, false);
  }
  finish(trace, cfg.grad_tol);
}

}  // namespace

double mean_prediction_error(const MatrixXd& X, const VectorXd& y, const LossFamily& family,
                             const VectorXd& beta) {
  if (X.rows() == 0) return std::numeric_limits<double>::quiet_NaN();
  const VectorXd mean = apply(family, X * beta, 1, "test_error");
  return (mean - y).squaredNorm() / static_cast<double>(X.rows());
}

double empirical_risk(const Dataset& data, const LossFamily& family, const VectorXd& beta) {
  data.validate();
  const TrainTestView view(data);
  if (beta.size() != view.X_train().cols()) {
    throw Error(ErrorKind::InvalidArgument, "empirical_risk: beta length differs from p");
  }
  const GlmObjective obj(view.X_train(), view.y_train(), family);
  return obj.value(view.X_train() * beta);
}

VectorXd risk_gradient(const Dataset& data, const LossFamily& family, const VectorXd& beta) {
  data.validate();
  const TrainTestView view(data);
  if (beta.size() != view.X_train().cols()) {
    throw Error(ErrorKind::InvalidArgument, "risk_gradient: beta length differs from p");
  }
  const GlmObjective obj(view.X_train(), view.y_train(), family);
  return obj.gradient(view.X_train() * beta);
}

MatrixXd risk_hessian(const Dataset& data, const LossFamily& family, const VectorXd& beta) {
  data.validate();
  const TrainTestView view(data);
  if (beta.size() != view.X_train().cols()) {
    throw Error(ErrorKind::InvalidArgument, "risk_hessian: beta length differs from p");
  }
  const GlmObjective obj(view.X_train(), view.y_train(), family);
  return obj.hessian(view.X_train() * beta);
}

std::string to_string(Method method) {
  switch (method) {
    case Method::NewtonRaphson:
      return "nr";
    case Method::NewtonStein:
      return "ns";
    case Method::BFGS:
      return "bfgs";
    case Method::LBFGS:
      return "lbfgs";
    case Method::GD:
      return "gd";
    case Method::AGD:
      return "agd";
  }
  return "unknown";
}

std::optional<Method> parse_method(const std::string& name) {
  for (Method m : {Method::NewtonRaphson, Method::NewtonStein, Method::BFGS, Method::LBFGS,
                   Method::GD, Method::AGD}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

VectorXd random_initial_point(std::size_t p, std::uint64_t seed) {
  Philox4x32 rng(seed, streams::kInit);
  const double half_width = 1.0 / std::sqrt(static_cast<double>(p));
  VectorXd beta(static_cast<Eigen::Index>(p));
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    beta(j) = half_width * (2.0 * rng.uniform() - 1.0);
  }
  return beta;
}

void OptimizerConfig::validate() const {
  if (!(linesearch_alpha > 0.0 && linesearch_alpha < 0.5)) {
    throw Error(ErrorKind::InvalidArgument, "optimizer: linesearch_alpha must be in (0, 0.5)");
  }
  if (!(linesearch_beta > 0.0 && linesearch_beta < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "optimizer: linesearch_beta must be in (0, 1)");
  }
  if (!(grad_tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "optimizer: grad_tol must be > 0");
  if (max_iters < 1) throw Error(ErrorKind::InvalidArgument, "optimizer: max_iters must be >= 1");
  if (lbfgs_memory < 1) {
    throw Error(ErrorKind::InvalidArgument, "optimizer: lbfgs memory must be >= 1");
  }
}

OptimizerTrace minimize(const Dataset& data, const LossFamily& family,
                        const OptimizerConfig& cfg) {
  data.validate();
  return minimize(TrainTestView(data), family, cfg);
}

OptimizerTrace minimize(const TrainTestView& view, const LossFamily& family,
                        const OptimizerConfig& cfg) {
  cfg.validate();
  const MatrixXd& X = view.X_train();
  const auto p = static_cast<std::size_t>(X.cols());
  VectorXd beta;
  if (const auto* from = std::get_if<FromVector>(&cfg.init)) {
    if (static_cast<std::size_t>(from->beta.size()) != p) {
      throw Error(ErrorKind::InvalidArgument, "minimize: initial vector length differs from p");
    }
    beta = from->beta;
  } else {
    beta = random_initial_point(p, std::get<RandomInit>(cfg.init).seed);
  }

  OptimizerTrace trace;
  trace.method = cfg.method;
  Stopwatch watch;
  TraceRecorder rec(trace, watch, view, family);
  const GlmObjective obj(X, view.y_train(), family);

  if (cfg.method == Method::AGD) {
    run_agd(obj, cfg, std::move(beta), trace, rec);
    return trace;
  }

  MatrixXd sigma;
  std::optional<Eigen::LLT<MatrixXd>> sigma_llt;
  if (cfg.method == Method::NewtonStein) sigma_llt = stein_covariance(X, cfg, sigma);

  VectorXd eta = X * beta;
  double f = obj.value(eta);
  VectorXd g = obj.gradient(eta);
  rec.record(0, beta, f, g, false);

  const auto pi = static_cast<Eigen::Index>(p);
  MatrixXd inv_hessian = MatrixXd::Identity(pi, pi);
  bool inv_hessian_scaled = false;
  std::deque<CurvaturePair> pairs;
  double t = 1.0;

  for (int it = 1; it <= cfg.max_iters && g.norm() > cfg.grad_tol; ++it) {
    VectorXd d;
    bool fallback = false;
    switch (cfg.method) {
      case Method::NewtonRaphson: {
        Eigen::LLT<MatrixXd> llt(obj.hessian(eta));
        if (llt.info() == Eigen::Success) {
          d = -llt.solve(g);
        }
        if (d.size() == 0 || !d.allFinite()) {
          d = -g;
          fallback = true;
        }
        break;
      }
      case Method::NewtonStein: {
        // H = mu2 S + mu4 (S b)(S b)^T, inverted with Sherman-Morrison.
        const double mu2 = obj.mean_derivative(eta, 2);
        const double mu4 = obj.mean_derivative(eta, 4);
        if (mu2 > 0.0) {
          const VectorXd sg = sigma_llt->solve(g);
          const double ratio = mu4 / mu2;
          const double denom = 1.0 + ratio * beta.dot(sigma * beta);
          if (denom > 1e-12) {
            d = -(sg - (ratio * beta.dot(g) / denom) * beta) / mu2;
          } else {
            d = -sg / mu2;
            fallback = true;
          }
        } else {
          d = -g;
          fallback = true;
        }
        break;
      }
      case Method::BFGS:
        d = -(inv_hessian * g);
        break;
      case Method::LBFGS:
        d = lbfgs_direction(pairs, g);
        break;
      case Method::GD:
      case Method::AGD:
        d = -g;
        break;
    }
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      d = -g;
      slope = -g.squaredNorm();
      fallback = true;
      inv_hessian.setIdentity();
      inv_hessian_scaled = false;
      pairs.clear();
    }

    const double t0 = cfg.method == Method::GD ? std::min(1.0, t / cfg.linesearch_beta) : 1.0;
    const VectorXd Xd = X * d;
    StepResult step = backtrack(obj, eta, Xd, slope, t0, cfg);
    t = step.t;
    const VectorXd s = t * d;
    beta += s;
    eta = std::move(step.eta);
    f = step.f;
    VectorXd g_new = obj.gradient(eta);
    const VectorXd yk = g_new - g;
    g = std::move(g_new);

    if (cfg.method == Method::BFGS) {
      if (curvature_ok(s, yk)) {
        const double sy = s.dot(yk);
        if (!inv_hessian_scaled) {
          inv_hessian *= sy / yk.squaredNorm();
          inv_hessian_scaled = true;
        }
        const double rho = 1.0 / sy;
        const VectorXd hy = inv_hessian * yk;
        // (I - rho s y^T) H (I - rho y s^T) + rho s s^T, expanded.
        inv_hessian += (rho * rho * yk.dot(hy) + rho) * (s * s.transpose()) -
                       rho * (hy * s.transpose() + s * hy.transpose());
      } else {
        ++trace.skipped_updates;
      }
    } else if (cfg.method == Method::LBFGS) {
      if (curvature_ok(s, yk)) {
        pairs.push_back({s, yk, 1.0 / s.dot(yk)});
        if (static_cast<int>(pairs.size()) > cfg.lbfgs_memory) pairs.pop_front();
      } else {
        ++trace.skipped_updates;
      }
    }
    rec.record(it, beta, f, g, fallback);
  }
  finish(trace, cfg.grad_tol);
  return trace;
}

}  // namespace glmscale
