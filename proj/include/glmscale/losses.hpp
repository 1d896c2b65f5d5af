#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace glmscale {

enum class ScoringRule { LogLoss, BoostingLoss, SquareLoss };

// Scalar activation for square-loss canonicalization. `d2f` is optional;
// when absent the second derivative is taken by central differences of `df`.
struct Activation {
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> d2f;
};

// A generalized linear loss Psi(<x,b>) - y<x,b>, identified by its cumulant
// function Psi. Scoring-rule families use the antiderivative of the canonical
// link as Psi, so Psi' = q and Psi'' = q'.
class LossFamily {
 public:
  enum class Kind { Linear, Logistic, Poisson, ScoringRule, CanonicalizedSquare };

  static LossFamily linear();
  static LossFamily logistic();
  static LossFamily poisson();
  static LossFamily scoring_rule(ScoringRule rule);

  Kind kind() const noexcept { return kind_; }
  // Only meaningful when kind() == Kind::ScoringRule.
  ScoringRule rule() const noexcept { return rule_; }
  // Upper bound on Psi'' when it is bounded.
  std::optional<double> curvature_bound_hint() const noexcept { return curvature_bound_; }
  std::string name() const;

  // Psi^(order)(z), order in 0..4. Throws InvalidArgument for bad order or
  // non-finite z, Domain for Poisson arguments beyond the overflow cap.
  double eval(double z, int order) const;

  double psi(double z) const { return eval(z, 0); }
  double d1(double z) const { return eval(z, 1); }
  double d2(double z) const { return eval(z, 2); }
  double d3(double z) const { return eval(z, 3); }
  double d4(double z) const { return eval(z, 4); }

 private:
  friend LossFamily canonicalize_square_loss(Activation activation, double theta);

  struct Canonicalized {
    Activation activation;
    double theta;
    double scale;  // 1 / (2 f'(theta))
  };

  LossFamily(Kind kind, std::optional<double> bound) : kind_(kind), curvature_bound_(bound) {}

  double eval_canonicalized(double z, int order) const;

  Kind kind_;
  ScoringRule rule_ = ScoringRule::LogLoss;
  std::optional<double> curvature_bound_;
  std::shared_ptr<const Canonicalized> canon_;
};

// Largest |z| accepted by the Poisson family (exp overflows past ~709).
inline constexpr double kPoissonArgumentCap = 700.0;

// Step used for the finite-difference derivatives of canonicalized families.
inline constexpr double kCanonicalizedStep = 1e-4;

double glm_eval(const LossFamily& family, double z, int order);

struct LinkValue {
  double q;
  double q1;
};

LinkValue scoring_link(ScoringRule rule, double z);

// Second and third derivatives of the canonical link.
double scoring_link_d2(ScoringRule rule, double z);
double scoring_link_d3(ScoringRule rule, double z);

// Weight function w(q) of the rule.
double scoring_weight(ScoringRule rule, double q);

// The constant value of w(q(z)) q'(z) for each rule's canonical link.
double canonical_link_constant(ScoringRule rule);

struct PartialLosses {
  double l0;
  double l1;
};

// Partial losses l0(q) = l(y=0; q) and l1(q) = l(y=1; q). The square loss is
// a polynomial and accepts any finite q; the others require q in (0,1).
PartialLosses scoring_partial_losses(ScoringRule rule, double q);

// Psi(z) = f(z)^2 / (2 f'(theta)).
LossFamily canonicalize_square_loss(Activation activation, double theta);

std::string to_string(ScoringRule rule);

}  // namespace glmscale
