#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "glmscale/errors.hpp"
#include "glmscale/losses.hpp"
#include "oracles.hpp"

using namespace glmscale;

namespace {

std::vector<LossFamily> all_families() {
  return {LossFamily::linear(),
          LossFamily::logistic(),
          LossFamily::poisson(),
          LossFamily::scoring_rule(ScoringRule::LogLoss),
          LossFamily::scoring_rule(ScoringRule::BoostingLoss),
          LossFamily::scoring_rule(ScoringRule::SquareLoss)};
}

double sig(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Activation sigmoid_activation(bool with_second) {
  Activation a;
  a.f = sig;
  a.df = [](double z) { return sig(z) * (1.0 - sig(z)); };
  if (with_second) {
    a.d2f = [](double z) {
      const double s = sig(z);
      return s * (1.0 - s) * (1.0 - 2.0 * s);
    };
  }
  return a;
}

const ScoringRule kRules[] = {ScoringRule::LogLoss, ScoringRule::BoostingLoss,
                              ScoringRule::SquareLoss};

}  // namespace

TEST_CASE("glm_eval reference values") {
  CHECK(glm_eval(LossFamily::logistic(), 0.0, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(glm_eval(LossFamily::logistic(), 0.0, 2) == 0.25);
  CHECK(glm_eval(LossFamily::linear(), 7.3, 2) == 1.0);
  for (int k = 0; k <= 4; ++k) {
    CHECK(glm_eval(LossFamily::poisson(), 1.0, k) == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
  }
}

TEST_CASE("logistic evaluation stays finite far from zero") {
  const auto fam = LossFamily::logistic();
  for (double z : {-800.0, -40.0, 40.0, 800.0}) {
    for (int k = 0; k <= 4; ++k) CHECK(std::isfinite(fam.eval(z, k)));
  }
  CHECK(fam.psi(800.0) == doctest::Approx(800.0));
  CHECK(fam.psi(-800.0) == 0.0);
  CHECK(fam.d1(-800.0) == 0.0);
}

TEST_CASE("poisson argument cap") {
  const auto fam = LossFamily::poisson();
  CHECK_NOTHROW(fam.eval(kPoissonArgumentCap, 2));
  try {
    fam.eval(kPoissonArgumentCap + 1.0, 2);
    FAIL("expected a domain error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Domain);
  }
}

TEST_CASE("bad order and non-finite arguments") {
  const auto fam = LossFamily::linear();
  CHECK_THROWS_AS(fam.eval(0.0, 5), Error);
  CHECK_THROWS_AS(fam.eval(0.0, -1), Error);
  CHECK_THROWS_AS(fam.eval(std::nan(""), 0), Error);
}

TEST_CASE("derivative ladder on [-5, 5]") {
  const double h = 1e-5;
  for (const auto& fam : all_families()) {
    CAPTURE(fam.name());
    for (int i = -50; i <= 50; ++i) {
      const double z = 0.1 * i;
      for (int k = 0; k <= 3; ++k) {
        const double fd = oracle::central_diff([&](double t) { return fam.eval(t, k); }, z, h);
        const double exact = fam.eval(z, k + 1);
        CAPTURE(z);
        CAPTURE(k);
        CHECK(std::abs(fd - exact) <= 1e-5 * (1.0 + std::abs(exact)));
      }
    }
  }
}

TEST_CASE("log-loss link equals logistic curvature") {
  const auto logistic = LossFamily::logistic();
  for (int i = -60; i <= 60; ++i) {
    const double z = 0.1 * i;
    CHECK(std::abs(scoring_link(ScoringRule::LogLoss, z).q1 - logistic.d2(z)) <= 1e-12);
  }
}

TEST_CASE("scoring_link reference values") {
  auto check = [](ScoringRule r, double q, double q1) {
    const auto v = scoring_link(r, 0.0);
    CHECK(v.q == doctest::Approx(q).epsilon(1e-15));
    CHECK(v.q1 == doctest::Approx(q1).epsilon(1e-15));
  };
  check(ScoringRule::LogLoss, 0.5, 0.25);
  check(ScoringRule::SquareLoss, 0.5, 0.5);
  check(ScoringRule::BoostingLoss, 0.5, 0.25);
}

TEST_CASE("boosting link derivative matches its closed form and finite differences") {
  for (int i = -40; i <= 40; ++i) {
    const double z = 0.25 * i;
    const double closed = 0.25 * std::pow(z * z / 4.0 + 1.0, -1.5);
    const double fd = oracle::central_diff(
        [](double t) { return scoring_link(ScoringRule::BoostingLoss, t).q; }, z, 1e-5);
    CHECK(scoring_link(ScoringRule::BoostingLoss, z).q1 == doctest::Approx(closed).epsilon(1e-14));
    CHECK(std::abs(fd - closed) <= 1e-9);
  }
}

TEST_CASE("link derivatives of every order agree with finite differences") {
  for (ScoringRule r : kRules) {
    for (int i = -30; i <= 30; ++i) {
      const double z = 0.1 * i;
      const double d2 = oracle::central_diff([&](double t) { return scoring_link(r, t).q1; }, z, 1e-5);
      const double d3 = oracle::central_diff([&](double t) { return scoring_link_d2(r, t); }, z, 1e-5);
      CHECK(std::abs(d2 - scoring_link_d2(r, z)) <= 1e-8);
      CHECK(std::abs(d3 - scoring_link_d3(r, z)) <= 1e-8);
    }
  }
}

TEST_CASE("canonical link constancy") {
  for (ScoringRule r : kRules) {
    CAPTURE(to_string(r));
    const double k = canonical_link_constant(r);
    double lo = 1e300, hi = -1e300;
    for (int i = -300; i <= 300; ++i) {
      const double z = 0.01 * i;
      const auto v = scoring_link(r, z);
      if (r == ScoringRule::SquareLoss && (v.q <= 0.0 || v.q >= 1.0)) continue;
      const double prod = scoring_weight(r, v.q) * v.q1;
      lo = std::min(lo, prod);
      hi = std::max(hi, prod);
    }
    CHECK((hi - lo) / k <= 1e-8);
    CHECK(lo == doctest::Approx(k).epsilon(1e-12));
  }
  CHECK(canonical_link_constant(ScoringRule::LogLoss) == 1.0);
  CHECK(canonical_link_constant(ScoringRule::SquareLoss) == 0.5);
  CHECK(canonical_link_constant(ScoringRule::BoostingLoss) == 2.0);
}

TEST_CASE("partial loss reference values") {
  auto sq = scoring_partial_losses(ScoringRule::SquareLoss, 0.5);
  CHECK(sq.l0 == 0.25);
  CHECK(sq.l1 == 0.25);
  auto lg = scoring_partial_losses(ScoringRule::LogLoss, 0.5);
  CHECK(lg.l0 == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(lg.l1 == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  auto bo = scoring_partial_losses(ScoringRule::BoostingLoss, 0.2);
  CHECK(bo.l0 == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(bo.l1 == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("boosting partial losses agree with the weight-integral construction") {
  // l0(q) = int_0^q t w(t) dt, l1(q) = int_q^1 (1-t) w(t) dt with
  // w(t) = [t(1-t)]^{-3/2} / 2. The tabulated closed forms carry this factor
  // 1/2 relative to the bare weight.
  auto w = [](long double t) { return 0.5L * std::pow(t * (1.0L - t), -1.5L); };
  for (double q : {0.05, 0.2, 0.5, 0.7, 0.93}) {
    CAPTURE(q);
    const long double l0 =
        oracle::simpson_left_singular([&](long double t) { return t * w(t); }, 0.0L, q, 4000);
    // Mirror t -> 1 - t so the singular endpoint sits on the left.
    const long double l1 = oracle::simpson_left_singular(
        [&](long double s) { return s * w(1.0L - s); }, 0.0L, 1.0L - q, 4000);
    const auto closed = scoring_partial_losses(ScoringRule::BoostingLoss, q);
    CHECK(static_cast<double>(l0) == doctest::Approx(closed.l0).epsilon(1e-7));
    CHECK(static_cast<double>(l1) == doctest::Approx(closed.l1).epsilon(1e-7));
  }
}

TEST_CASE("partial-loss slope matches the weight up to the rule's constant") {
  // l0'(q) = k q w(q) and l1'(q) = -k (1-q) w(q).
  const double ks[] = {1.0, 0.5, 2.0};
  int idx = 0;
  for (ScoringRule r : kRules) {
    const double k = ks[idx++];
    for (double q = 0.05; q < 0.96; q += 0.05) {
      const double d0 = oracle::central_diff(
          [&](double t) { return scoring_partial_losses(r, t).l0; }, q, 1e-6);
      const double d1 = oracle::central_diff(
          [&](double t) { return scoring_partial_losses(r, t).l1; }, q, 1e-6);
      CHECK(d0 == doctest::Approx(k * q * scoring_weight(r, q)).epsilon(1e-6));
      CHECK(d1 == doctest::Approx(-k * (1.0 - q) * scoring_weight(r, q)).epsilon(1e-6));
    }
  }
}

TEST_CASE("proper scoring: expected loss minimized at the true probability") {
  for (ScoringRule r : kRules) {
    for (double eta : {0.1, 0.3, 0.5, 0.9}) {
      double best_q = 0.0, best = 1e300;
      for (int i = 1; i < 100000; ++i) {
        const double q = i * 1e-5;
        const auto l = scoring_partial_losses(r, q);
        const double risk = eta * l.l1 + (1.0 - eta) * l.l0;
        if (risk < best) {
          best = risk;
          best_q = q;
        }
      }
      CAPTURE(to_string(r));
      CHECK(std::abs(best_q - eta) <= 1e-3);
    }
  }
}

TEST_CASE("partial loss domain") {
  CHECK_THROWS_AS(scoring_partial_losses(ScoringRule::LogLoss, 0.0), Error);
  CHECK_THROWS_AS(scoring_partial_losses(ScoringRule::BoostingLoss, 1.0), Error);
  CHECK_NOTHROW(scoring_partial_losses(ScoringRule::SquareLoss, 1.5));
  CHECK(scoring_partial_losses(ScoringRule::SquareLoss, 1.5).l1 == 0.25);
}

TEST_CASE("scoring-rule families use the link as first derivative") {
  for (ScoringRule r : kRules) {
    const auto fam = LossFamily::scoring_rule(r);
    for (double z : {-2.0, -0.3, 0.0, 0.7, 2.5}) {
      CHECK(fam.d1(z) == doctest::Approx(scoring_link(r, z).q).epsilon(1e-14));
      CHECK(fam.d2(z) == doctest::Approx(scoring_link(r, z).q1).epsilon(1e-14));
    }
  }
}

TEST_CASE("canonicalized identity is the linear family") {
  Activation id{[](double z) { return z; }, [](double) { return 1.0; }, {}};
  for (double theta : {0.0, -2.0, 3.5}) {
    const auto fam = canonicalize_square_loss(id, theta);
    const auto lin = LossFamily::linear();
    for (double z : {-3.0, -0.5, 0.0, 1.0, 4.0}) {
      CHECK(fam.psi(z) == doctest::Approx(lin.psi(z)).epsilon(1e-14));
      CHECK(fam.d1(z) == doctest::Approx(lin.d1(z)).epsilon(1e-12));
      CHECK(fam.d2(z) == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("canonicalized sigmoid at theta = 0") {
  const auto fam = canonicalize_square_loss(sigmoid_activation(false), 0.0);
  // Psi = 2 sigma^2
  for (double z : {-1.0, 0.0, 0.5}) CHECK(fam.psi(z) == doctest::Approx(2.0 * sig(z) * sig(z)));
  const double fd2 = (fam.psi(1e-4) - 2.0 * fam.psi(0.0) + fam.psi(-1e-4)) / 1e-8;
  CHECK(fam.d2(0.0) == doctest::Approx(fd2).epsilon(1e-6));
  // 4 sigma' sigma (2 - 3 sigma) at 0 = 4 * 1/4 * 1/2 * 1/2
  CHECK(fam.d2(0.0) == doctest::Approx(0.25).epsilon(1e-8));
}

TEST_CASE("canonicalized sigmoid ladder with an analytic second derivative") {
  const auto fam = canonicalize_square_loss(sigmoid_activation(true), 0.0);
  for (int i = -50; i <= 50; ++i) {
    const double z = 0.1 * i;
    for (int k = 0; k <= 3; ++k) {
      const double fd = oracle::central_diff([&](double t) { return fam.eval(t, k); }, z, 1e-5);
      const double exact = fam.eval(z, k + 1);
      CAPTURE(z);
      CAPTURE(k);
      CHECK(std::abs(fd - exact) <= 1e-5 * (1.0 + std::abs(exact)));
    }
  }
}

TEST_CASE("canonicalization rejects a flat activation") {
  Activation flat{[](double) { return 1.0; }, [](double) { return 0.0; }, {}};
  try {
    canonicalize_square_loss(flat, 0.0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateCanonicalization);
  }
}

TEST_CASE("curvature bound hints hold on a grid") {
  for (const auto& fam : all_families()) {
    const auto bound = fam.curvature_bound_hint();
    if (!bound) continue;
    for (int i = -100; i <= 100; ++i) CHECK(fam.d2(0.1 * i) <= *bound + 1e-15);
  }
}
