#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "glmscale/errors.hpp"
#include "glmscale/optimize.hpp"
#include "glmscale/random.hpp"
#include "glmscale/sls.hpp"
#include "glmscale/synth.hpp"
#include "oracles.hpp"

using namespace glmscale;

namespace {

std::vector<double> uniform_vec(std::size_t n, double half_width, std::uint64_t seed) {
  Philox4x32 rng(seed, 77);
  std::vector<double> v(n);
  for (auto& x : v) x = half_width * (2.0 * rng.uniform() - 1.0);
  return v;
}

SyntheticSample logistic_instance(std::size_t n, std::size_t p, std::uint64_t seed,
                                  double test_fraction = 0.0) {
  DesignSpec spec;
  spec.n = n;
  spec.p = p;
  spec.seed = seed;
  spec.test_fraction = test_fraction;
  return sample_dataset(spec);
}

double cosine(const VectorXd& a, const VectorXd& b) { return a.dot(b) / (a.norm() * b.norm()); }

}  // namespace

TEST_CASE("scale residual examples") {
  const std::vector<double> yhat{0.3, -1.2, 2.0};
  for (double c : {0.5, 1.0, 3.0}) {
    const auto r = scale_residual(c, yhat, LossFamily::linear());
    CHECK(r.value == doctest::Approx(c - 1.0).epsilon(1e-15));
    CHECK(r.derivative == doctest::Approx(1.0).epsilon(1e-15));
  }
  const std::vector<double> zeros(5, 0.0);
  const auto z = scale_residual(4.0, zeros, LossFamily::logistic());
  CHECK(z.value == 0.0);
  CHECK(z.derivative == 0.25);
}

TEST_CASE("scale residual matches extended-precision summation") {
  const std::vector<double> yhat{1.0, -1.0, 0.5};
  const double c = 2.0;
  std::vector<long double> terms, dterms;
  for (double v : yhat) {
    const long double t = c * static_cast<long double>(v);
    const long double s = oracle::sigmoid(t);
    const long double d2 = s * (1 - s);
    const long double d3 = d2 * (1 - 2 * s);
    terms.push_back(c * d2 / 3.0L);
    dterms.push_back((d2 + t * d3) / 3.0L);
  }
  const auto r = scale_residual(c, yhat, LossFamily::logistic());
  CHECK(std::abs(r.value - static_cast<double>(oracle::sum(terms) - 1.0L)) <= 1e-14);
  CHECK(std::abs(r.derivative - static_cast<double>(oracle::sum(dterms))) <= 1e-14);
}

TEST_CASE("exact roots") {
  const auto yhat = uniform_vec(50, 2.0, 1);
  ScaleSolveConfig cfg;
  cfg.init = FixedInit{0.37};
  const auto lin = solve_scale(yhat, LossFamily::linear(), cfg);
  CHECK(std::abs(lin.c - 1.0) <= 1e-12);
  CHECK(lin.iterations <= 2);

  const std::vector<double> zeros(10, 0.0);
  const std::vector<double> y{0, 1, 1, 0, 1, 0, 0, 1, 1, 1};
  const auto lg = solve_scale(zeros, LossFamily::logistic(), ScaleSolveConfig{}, std::span<const double>(y));
  CHECK(std::abs(lg.c - 4.0) <= 1e-10);

  const auto sq = solve_scale(yhat, LossFamily::scoring_rule(ScoringRule::SquareLoss), cfg);
  CHECK(std::abs(sq.c - 2.0) <= 1e-12);
}

TEST_CASE("poisson root matches bisection") {
  const std::vector<double> yhat{0.1, -0.2, 0.05, 0.0};
  ScaleSolveConfig cfg;
  cfg.init = FixedInit{1.0};
  const auto sol = solve_scale(yhat, LossFamily::poisson(), cfg);
  const double ref = oracle::bisect(
      [&](long double c) {
        long double s = 0;
        for (double v : yhat) s += std::exp(c * v);
        return c * s / yhat.size() - 1.0L;
      },
      1e-6, 10.0);
  CHECK(std::abs(sol.c - ref) <= 1e-9);
}

TEST_CASE("newton speed on logistic fixtures") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto fit = logistic_instance(3000, 5, seed);
    const VectorXd yhat_v = fit.data.X * fit_ols(fit.data).beta;
    std::vector<double> yhat(yhat_v.data(), yhat_v.data() + yhat_v.size());
    for (auto& v : yhat) v = std::clamp(v, -3.0, 3.0);
    std::span<const double> y(fit.data.y.data(), static_cast<std::size_t>(fit.data.y.size()));
    const auto sol = solve_scale(yhat, LossFamily::logistic(), ScaleSolveConfig{}, y);
    CHECK(std::abs(scale_residual(sol.c, yhat, LossFamily::logistic()).value) <= 1e-10);
    CHECK(sol.iterations <= 20);
    CHECK(sol.trace.front().kind == RootStep::Kind::Init);
    CHECK(sol.trace.front().c == doctest::Approx(initial_scale(ScaleSolveConfig{}, y)));
  }
}

TEST_CASE("variance rule init") {
  const std::vector<double> y{1, 1, 1};
  CHECK(initial_scale(ScaleSolveConfig{}, std::span<const double>(y)) == 1.0);
  const std::vector<double> y2{0, 1, 0, 1};
  // sample variance 1/3
  CHECK(initial_scale(ScaleSolveConfig{}, std::span<const double>(y2)) == doctest::Approx(6.0));
  ScaleSolveConfig fixed;
  fixed.init = FixedInit{2.5};
  CHECK(initial_scale(fixed, std::nullopt) == 2.5);
}

TEST_CASE("no root is reported") {
  // c mean sigma'(c yhat) <= 1/6 for yhat uniform on [-3, 3], so no root
  const std::vector<double> wide = uniform_vec(100, 3.0, 5);
  ScaleSolveConfig cfg;
  cfg.init = FixedInit{1.0};
  cfg.bracket_max = 1e3;
  try {
    solve_scale(wide, LossFamily::logistic(), cfg);
    FAIL("expected no root");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoRoot);
    CHECK(e.last_residual.has_value());
  }
  CHECK_THROWS_AS(solve_scale(std::vector<double>{}, LossFamily::logistic(), cfg), Error);
}

TEST_CASE("curvature overflow names the observation") {
  const std::vector<double> yhat{0.1, 0.2, 400.0, 0.0};
  try {
    scale_residual(2.0, yhat, LossFamily::poisson());
    FAIL("expected overflow");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CurvatureOverflow);
    REQUIRE(e.index.has_value());
    CHECK(*e.index == 2);
  }
}

TEST_CASE("config validation") {
  ScaleSolveConfig cfg;
  cfg.tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.init = FixedInit{-1.0};
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.max_iters = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("linear family leaves OLS unchanged") {
  auto s = logistic_instance(500, 4, 2);
  const auto r = fit_sls(s.data, LossFamily::linear());
  CHECK(std::abs(r.c - 1.0) <= 1e-12);
  CHECK((r.beta_sls - r.beta_ols).norm() <= 1e-12 * r.beta_ols.norm());
}

TEST_CASE("scaling consistency and accuracy against the MLE") {
  const auto s = logistic_instance(50000, 20, 7);
  const auto fam = LossFamily::logistic();
  const auto r = fit_sls(s.data, fam);
  CHECK((r.beta_sls - r.c * r.beta_ols).norm() <= 1e-14 * r.beta_sls.norm());
  const VectorXd yhat = s.data.X * r.beta_ols;
  CHECK(std::abs(scale_residual(r.c, {yhat.data(), static_cast<std::size_t>(yhat.size())}, fam).value) <= 1e-10);
  CHECK(r.root_trace.size() >= 2);
  CHECK(r.wall_time_seconds >= r.ols_seconds);

  OptimizerConfig oc;
  oc.method = Method::NewtonRaphson;
  oc.init = FromVector{r.beta_ols};
  oc.grad_tol = 1e-10;
  const VectorXd mle = minimize(s.data, fam, oc).final_beta();
  CHECK(cosine(r.beta_sls, s.beta_pop) > 0.99);
  // Without an intercept the OLS residual carries the constant part of E[y],
  // so the SLS noise exceeds the MLE noise. Predicted rms of the relative
  // distance here is about 0.05; allow 1.6x that.
  CHECK((r.beta_sls - mle).norm() / mle.norm() <= 0.08);
}

TEST_CASE("default sub-sample tracks the full-sample fit at the sqrt(p/|S|) rate") {
  const auto s = logistic_instance(50000, 20, 7);
  const auto fam = LossFamily::logistic();
  const auto full = fit_sls(s.data, fam);
  const double rate = std::sqrt(20.0 / static_cast<double>(default_subsample_size(50000, 20)));
  std::vector<double> rel;
  for (std::uint64_t seed = 1; seed <= 11; ++seed) {
    const auto sub = fit_sls(s.data, fam, DefaultSubsample{}, {}, seed);
    REQUIRE(sub.subsample_indices.has_value());
    rel.push_back((sub.beta_sls - full.beta_sls).norm() / full.beta_sls.norm());
  }
  std::sort(rel.begin(), rel.end());
  CHECK(rel[5] <= 2.0 * rate);
}

TEST_CASE("scale equation never sees test rows") {
  auto s = logistic_instance(2000, 5, 4, 0.1);
  const auto r = fit_sls(s.data, LossFamily::logistic());
  const TrainTestView view(s.data);
  const VectorXd yhat = view.X_train() * r.beta_ols;
  CHECK(std::abs(scale_residual(r.c, {yhat.data(), static_cast<std::size_t>(yhat.size())}, LossFamily::logistic()).value) <= 1e-10);
  const auto via_view = fit_sls(view, LossFamily::logistic());
  CHECK(via_view.c == r.c);
}

TEST_CASE("ridge SLS") {
  auto s = logistic_instance(2000, 5, 9);
  const auto fam = LossFamily::logistic();
  const auto plain = fit_sls(s.data, fam);
  const auto r0 = fit_sls_ridge(s.data, fam, 0.0);
  CHECK(std::abs(r0.c - plain.c) <= 1e-10);
  CHECK((r0.beta_sls - plain.beta_sls).norm() <= 1e-10);

  const auto lin = fit_sls_ridge(s.data, LossFamily::linear(), 0.4);
  CHECK(std::abs(lin.c - 1.0) <= 1e-12);
  CHECK((lin.beta_sls - fit_ridge(s.data, 0.4).beta).norm() <= 1e-10);

  const double lambda = 0.1;
  const auto r = fit_sls_ridge(s.data, fam, lambda);
  const double n = 2000.0;
  const MatrixXd A = s.data.X.transpose() * s.data.X / n + lambda * r.c * MatrixXd::Identity(5, 5);
  const VectorXd normal_resid = A * r.beta_ols - s.data.X.transpose() * s.data.y / n;
  CHECK(normal_resid.norm() <= 1e-8);
  // gamma comes from the last ridge solve, one scale update behind c
  CHECK(std::abs(r.gamma - lambda * r.c) <= 1e-9);
  const VectorXd yhat = s.data.X * r.beta_ols;
  CHECK(std::abs(scale_residual(r.c, {yhat.data(), static_cast<std::size_t>(yhat.size())}, fam).value) <= 1e-8);
  CHECK(r.outer_iterations >= 1);
  CHECK(r.outer_iterations <= kRidgeMaxOuterIterations);
}
