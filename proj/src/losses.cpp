#include "glmscale/losses.hpp"

#include <cmath>
#include <string>

#include "glmscale/errors.hpp"

namespace glmscale {
namespace {

void require_finite(double z, const char* what) {
  if (!std::isfinite(z)) {
    throw Error(ErrorKind::InvalidArgument, std::string(what) + ": argument is not finite");
  }
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// sigma(z) (1 - sigma(z)), evaluated through exp(-|z|) so it never overflows.
double sigmoid_slope(double z) {
  const double e = std::exp(-std::abs(z));
  const double d = 1.0 + e;
  return e / (d * d);
}

double logistic_eval(double z, int order) {
  switch (order) {
    case 0:
      return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
    case 1:
      return sigmoid(z);
    case 2:
      return sigmoid_slope(z);
    case 3:
      // 1 - 2 sigma(z) = -tanh(z/2)
      return -sigmoid_slope(z) * std::tanh(0.5 * z);
    default: {
      const double s = sigmoid_slope(z);
      return s * (1.0 - 6.0 * s);
    }
  }
}

// Boosting link: q(z) = 1/2 + (z/4) (z^2/4 + 1)^{-1/2}.
double boosting_eval(double z, int order) {
  const double s2 = 0.25 * z * z + 1.0;
  const double s = std::sqrt(s2);
  switch (order) {
    case 0:
      return 0.5 * z + s;
    case 1:
      return 0.5 + 0.25 * z / s;
    case 2:
      return 0.25 / (s2 * s);
    case 3:
      return -(3.0 / 16.0) * z / (s2 * s2 * s);
    default:
      return -(3.0 / 16.0) / (s2 * s2 * s) + (15.0 / 64.0) * z * z / (s2 * s2 * s2 * s);
  }
}

double square_score_eval(double z, int order) {
  switch (order) {
    case 0:
      return 0.5 * z + 0.25 * z * z;
    case 1:
      return 0.5 * (1.0 + z);
    case 2:
      return 0.5;
    default:
      return 0.0;
  }
}

double scoring_eval(ScoringRule rule, double z, int order) {
  switch (rule) {
    case ScoringRule::LogLoss:
      return logistic_eval(z, order);
    case ScoringRule::BoostingLoss:
      return boosting_eval(z, order);
    case ScoringRule::SquareLoss:
      return square_score_eval(z, order);
  }
  return 0.0;
}

void require_open_unit(ScoringRule rule, double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw Error(ErrorKind::Domain,
                to_string(rule) + ": q = " + std::to_string(q) + " is outside (0,1)");
  }
}

}  // namespace

LossFamily LossFamily::linear() { return LossFamily(Kind::Linear, 1.0); }

LossFamily LossFamily::logistic() { return LossFamily(Kind::Logistic, 0.25); }

LossFamily LossFamily::poisson() { return LossFamily(Kind::Poisson, std::nullopt); }

LossFamily LossFamily::scoring_rule(ScoringRule rule) {
  // max_z q'(z): 1/4 at z = 0 for log and boosting links, 1/2 for the affine link
  LossFamily fam(Kind::ScoringRule, rule == ScoringRule::SquareLoss ? 0.5 : 0.25);
  fam.rule_ = rule;
  return fam;
}

std::string LossFamily::name() const {
  switch (kind_) {
    case Kind::Linear:
      return "linear";
    case Kind::Logistic:
      return "logistic";
    case Kind::Poisson:
      return "poisson";
    case Kind::ScoringRule:
      return "score-" + to_string(rule_);
    case Kind::CanonicalizedSquare:
      return "canonicalized-square";
  }
  return "unknown";
}

double LossFamily::eval(double z, int order) const {
  if (order < 0 || order > 4) {
    throw Error(ErrorKind::InvalidArgument,
                "derivative order " + std::to_string(order) + " not in 0..4");
  }
  require_finite(z, "LossFamily::eval");
  switch (kind_) {
    case Kind::Linear:
      if (order == 0) return 0.5 * z * z;
      if (order == 1) return z;
      return order == 2 ? 1.0 : 0.0;
    case Kind::Logistic:
      return logistic_eval(z, order);
    case Kind::Poisson:
      if (std::abs(z) > kPoissonArgumentCap) {
        Error err(ErrorKind::Domain,
                  "poisson: |z| = " + std::to_string(std::abs(z)) + " exceeds the exp cap 700");
        throw err;
      }
      return std::exp(z);
    case Kind::ScoringRule:
      return scoring_eval(rule_, z, order);
    case Kind::CanonicalizedSquare:
      return eval_canonicalized(z, order);
  }
  return 0.0;
}

double LossFamily::eval_canonicalized(double z, int order) const {
  const Canonicalized& c = *canon_;
  const auto& act = c.activation;
  auto second = [&](double t) {
    const double fp = act.df(t);
    double fpp;
    if (act.d2f) {
      fpp = act.d2f(t);
    } else {
      const double h = kCanonicalizedStep;
      fpp = (act.df(t + h) - act.df(t - h)) / (2.0 * h);
    }
    return 2.0 * c.scale * (fp * fp + act.f(t) * fpp);
  };
  const double h = kCanonicalizedStep;
  switch (order) {
    case 0: {
      const double f = act.f(z);
      return c.scale * f * f;
    }
    case 1:
      return 2.0 * c.scale * act.f(z) * act.df(z);
    case 2:
      return second(z);
    case 3:
      return (second(z + h) - second(z - h)) / (2.0 * h);
    default:
      return (second(z + h) - 2.0 * second(z) + second(z - h)) / (h * h);
  }
}

double glm_eval(const LossFamily& family, double z, int order) { return family.eval(z, order); }

LinkValue scoring_link(ScoringRule rule, double z) {
  require_finite(z, "scoring_link");
  return {scoring_eval(rule, z, 1), scoring_eval(rule, z, 2)};
}

double scoring_link_d2(ScoringRule rule, double z) {
  require_finite(z, "scoring_link_d2");
  return scoring_eval(rule, z, 3);
}

double scoring_link_d3(ScoringRule rule, double z) {
  require_finite(z, "scoring_link_d3");
  return scoring_eval(rule, z, 4);
}

double scoring_weight(ScoringRule rule, double q) {
  require_finite(q, "scoring_weight");
  switch (rule) {
    case ScoringRule::LogLoss:
      require_open_unit(rule, q);
      return 1.0 / (q * (1.0 - q));
    case ScoringRule::BoostingLoss: {
      require_open_unit(rule, q);
      const double v = q * (1.0 - q);
      return 1.0 / (v * std::sqrt(v));
    }
    case ScoringRule::SquareLoss:
      return 1.0;
  }
  return 0.0;
}

double canonical_link_constant(ScoringRule rule) {
  switch (rule) {
    case ScoringRule::LogLoss:
      return 1.0;
    case ScoringRule::BoostingLoss:
      return 2.0;
    case ScoringRule::SquareLoss:
      return 0.5;
  }
  return 0.0;
}

PartialLosses scoring_partial_losses(ScoringRule rule, double q) {
  require_finite(q, "scoring_partial_losses");
  switch (rule) {
    case ScoringRule::LogLoss:
      require_open_unit(rule, q);
      return {-std::log1p(-q), -std::log(q)};
    case ScoringRule::BoostingLoss: {
      require_open_unit(rule, q);
      const double odds = 1.0 / q - 1.0;
      return {1.0 / std::sqrt(odds), std::sqrt(odds)};
    }
    case ScoringRule::SquareLoss:
      return {q * q, (1.0 - q) * (1.0 - q)};
  }
  return {0.0, 0.0};
}

LossFamily canonicalize_square_loss(Activation activation, double theta) {
  if (!activation.f || !activation.df) {
    throw Error(ErrorKind::InvalidArgument, "canonicalize_square_loss: f and f' are required");
  }
  require_finite(theta, "canonicalize_square_loss");
  const double slope = activation.df(theta);
  if (slope == 0.0 || !std::isfinite(slope)) {
    throw Error(ErrorKind::DegenerateCanonicalization,
                "canonicalize_square_loss: f'(theta) = " + std::to_string(slope) +
                    " cannot normalize the loss");
  }
  LossFamily fam(LossFamily::Kind::CanonicalizedSquare, std::nullopt);
  fam.canon_ = std::make_shared<const LossFamily::Canonicalized>(
      LossFamily::Canonicalized{std::move(activation), theta, 0.5 / slope});
  return fam;
}

std::string to_string(ScoringRule rule) {
  switch (rule) {
    case ScoringRule::LogLoss:
      return "log";
    case ScoringRule::BoostingLoss:
      return "boosting";
    case ScoringRule::SquareLoss:
      return "square";
  }
  return "unknown";
}

}  // namespace glmscale
