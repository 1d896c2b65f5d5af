#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "glmscale/bench.hpp"
#include "glmscale/errors.hpp"

using namespace glmscale;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir(const std::string& name) {
  fs::path d = fs::path(GLMSCALE_TEST_TMP) / "bench" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

OptimizerTrace fake(std::vector<double> errs) {
  OptimizerTrace t;
  for (std::size_t k = 0; k < errs.size(); ++k) {
    t.iteration.push_back(static_cast<int>(k));
    t.iterates.push_back(VectorXd::Zero(1));
    t.objective.push_back(0.0);
    t.grad_norm.push_back(0.0);
    t.cum_time_seconds.push_back(0.1 * static_cast<double>(k));
    t.test_error.push_back(errs[k]);
    t.fallback.push_back(false);
  }
  return t;
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

BenchConfig small_config(std::vector<BenchMethod> methods) {
  BenchConfig cfg;
  DesignSpec spec;
  spec.n = 3000;
  spec.p = 8;
  cfg.dataset = spec;
  cfg.family = LossFamily::logistic();
  cfg.methods = std::move(methods);
  cfg.repetitions = 2;
  cfg.optimizer.max_iters = 2000;
  return cfg;
}

}  // namespace

TEST_CASE("threshold: max of final errors, first crossing") {
  const auto a = fake({0.9, 0.7, 0.5});
  const auto b = fake({0.8, 0.6, 0.45, 0.4});
  const auto st = threshold_stats({{&a}, {&b}});
  CHECK(st.min_achievable_err == 0.5);
  CHECK(st.crossings[0].index == 2);
  CHECK(st.crossings[1].index == 2);
  CHECK(st.crossings[1].crossed);
  CHECK(st.crossings[1].time_seconds == doctest::Approx(0.2));
}

TEST_CASE("threshold: single trace") {
  const auto a = fake({0.9, 0.3, 0.4, 0.3});
  const auto st = threshold_stats({{&a}});
  CHECK(st.min_achievable_err == 0.3);
  CHECK(st.crossings[0].index == 1);
}

TEST_CASE("threshold: A at 0.30 and B at 0.25 both use 0.30") {
  const auto a = fake({0.5, 0.30});
  const auto b = fake({0.5, 0.31, 0.29, 0.25});
  const auto st = threshold_stats({{&a}, {&b}});
  CHECK(st.min_achievable_err == 0.30);
  CHECK(st.crossings[0].index == 1);
  CHECK(st.crossings[1].index == 2);
}

TEST_CASE("threshold: hand-built fixture crossing at 2, 5, 1") {
  // final errors 0.40, 0.35, 0.20 -> threshold 0.40
  const auto a = fake({0.9, 0.5, 0.40, 0.41, 0.40});
  const auto b = fake({0.9, 0.8, 0.7, 0.6, 0.45, 0.38, 0.35});
  const auto c = fake({0.6, 0.39, 0.3, 0.2});
  const auto st = threshold_stats({{&a}, {&b}, {&c}});
  CHECK(st.min_achievable_err == 0.40);
  CHECK(st.crossings[0].index == 2);
  CHECK(st.crossings[1].index == 5);
  CHECK(st.crossings[2].index == 1);
}

TEST_CASE("threshold: first candidate skips the OLS entry") {
  const auto sls = fake({0.2, 0.3});
  const auto other = fake({0.9, 0.25});
  const auto st = threshold_stats({{&sls, 1}, {&other}});
  CHECK(st.crossings[0].index == 1);
}

TEST_CASE("threshold: the worst method crosses at its last entry") {
  const auto a = fake({0.5});
  const auto b = fake({0.9, 0.7, 0.6});
  const auto st = threshold_stats({{&a}, {&b}});
  CHECK(st.min_achievable_err == 0.6);
  CHECK(st.crossings[1].crossed);
  CHECK(st.crossings[1].index == 2);
  CHECK(st.crossings[0].index == 0);
}

TEST_CASE("adding a method never lowers the threshold") {
  const auto a = fake({0.9, 0.4});
  const auto b = fake({0.9, 0.45});
  const auto c = fake({0.9, 0.3});
  const auto d = fake({0.1});
  const double two = threshold_stats({{&a}, {&c}}).min_achievable_err;
  CHECK(threshold_stats({{&a}, {&c}, {&b}}).min_achievable_err >= two);
  CHECK(threshold_stats({{&a}, {&c}, {&d}}).min_achievable_err >= two);
}

TEST_CASE("single-method SLS run on the linear family") {
  BenchConfig cfg;
  DesignSpec spec;
  spec.n = 2000;
  spec.p = 5;
  cfg.dataset = spec;
  cfg.family = LossFamily::linear();
  cfg.methods = {BenchMethod::SLS};
  const auto r = run_bench(cfg);
  REQUIRE(r.runs.size() == 1);
  const auto& m = r.runs[0].methods[0].second;
  CHECK_FALSE(m.failed);
  CHECK(m.time_to_min_err == m.total_time);
  CHECK(m.iters_to_min_err <= 2);
  CHECK(m.final_test_err == r.runs[0].min_achievable_err);
  const auto& trace = r.traces[0].at("sls");
  CHECK(trace.size() == 2);
}

TEST_CASE("failures are recorded without aborting other methods") {
  auto cfg = small_config({BenchMethod::SLS, BenchMethod::NS, BenchMethod::LBFGS});
  cfg.optimizer.ns_subsample = 1000000;  // larger than n
  const auto r = run_bench(cfg);
  CHECK(r.per_method[1].first == "ns");
  CHECK(r.per_method[1].second.failed);
  CHECK_FALSE(r.per_method[1].second.error.empty());
  CHECK_FALSE(r.per_method[0].second.failed);
  CHECK_FALSE(r.per_method[2].second.failed);
}

TEST_CASE("reports are deterministic apart from times") {
  const auto cfg = small_config({BenchMethod::SLS, BenchMethod::NR, BenchMethod::GD});
  const auto a = run_bench(cfg);
  const auto b = run_bench(cfg);
  REQUIRE(a.runs.size() == b.runs.size());
  for (std::size_t r = 0; r < a.runs.size(); ++r) {
    CHECK(a.runs[r].seed == b.runs[r].seed);
    CHECK(a.runs[r].min_achievable_err == b.runs[r].min_achievable_err);
    for (std::size_t m = 0; m < a.runs[r].methods.size(); ++m) {
      const auto& x = a.runs[r].methods[m].second;
      const auto& y = b.runs[r].methods[m].second;
      CHECK(x.iters_to_min_err == y.iters_to_min_err);
      CHECK(x.final_test_err == y.final_test_err);
      CHECK(x.never_crossed == y.never_crossed);
      CHECK(x.trace_file == y.trace_file);
    }
  }
  CHECK(a.environment == b.environment);
}

TEST_CASE("json round trip and emitted files") {
  const auto cfg = small_config({BenchMethod::SLS, BenchMethod::LBFGS});
  const auto r = run_bench(cfg);
  const auto text = report_to_json(r);
  const auto back = report_from_json(text);
  CHECK(report_to_json(back) == text);
  CHECK(back.family == "logistic");
  CHECK(back.per_method.size() == 2);

  const auto dir = tmp_dir("emit");
  const auto files = emit_report(r, dir);
  CHECK(fs::exists(dir / "report.json"));
  CHECK(line_count(dir / "report.csv") == 3);
  CHECK(fs::exists(dir / "trace_sls_seed1.csv"));
  CHECK(fs::exists(dir / "trace_lbfgs_seed2.csv"));
  CHECK(files.size() == 2 + 4);
  std::ifstream in(dir / "trace_lbfgs_seed1.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "iter,cum_time_s,objective,grad_norm,test_err");
  CHECK(line_count(dir / "trace_lbfgs_seed1.csv") == r.traces[0].at("lbfgs").size() + 1);
}

TEST_CASE("empty report gives a header-only csv") {
  BenchReport r;
  const auto dir = tmp_dir("empty");
  emit_report(r, dir, {true, false});
  CHECK(line_count(dir / "report.csv") == 1);
  CHECK_FALSE(fs::exists(dir / "report.json"));
}

TEST_CASE("config parsing") {
  const auto dir = tmp_dir("config");
  {
    std::ofstream(dir / "ok.ini") << "[dataset]\nsource = synthetic\nn = 1000\np = 5\n"
                                     "covariance = random_spd\ncondition = 10\n"
                                     "[run]\nfamily = logistic\nmethods = sls, nr, lbfgs\n"
                                     "init = random\nseeds = 3, 4\noutput = out\nformats = csv\n"
                                     "[sls]\nsubsample = 200\n[optimizer]\ngrad_tol = 1e-7\n";
  }
  const auto cfg = load_bench_config(dir / "ok.ini");
  CHECK(cfg.methods == std::vector<BenchMethod>{BenchMethod::SLS, BenchMethod::NR, BenchMethod::LBFGS});
  CHECK(cfg.init_mode == InitMode::Random);
  CHECK(cfg.resolved_seeds() == std::vector<std::uint64_t>{3, 4});
  CHECK(cfg.write_csv);
  CHECK_FALSE(cfg.write_json);
  CHECK(std::get<SubsampleSize>(cfg.sls_subsample).size == 200);
  CHECK(cfg.optimizer.grad_tol == 1e-7);
  const auto& spec = std::get<DesignSpec>(cfg.dataset);
  CHECK(spec.n == 1000);
  CHECK(std::get<RandomSpdCovariance>(spec.covariance).condition == 10.0);

  auto expect_config_error = [&](const std::string& body) {
    std::ofstream(dir / "bad.ini") << body;
    try {
      load_bench_config(dir / "bad.ini");
      FAIL("expected a config error for: " << body);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Config);
    }
  };
  expect_config_error("[dataset]\nn = 1000\np = 5\ncolour = red\n[run]\nmethods = sls\n");
  expect_config_error("[dataset]\nn = 1000\np = 5\n[run]\nmethods = sls, sgd\n");
  expect_config_error("[dataset]\nn = 1000\np = 5\n[run]\nmethods = sls\nrepetitions = 3\nseeds = 1\n");
  expect_config_error("[dataset]\nn = ten\np = 5\n[run]\nmethods = sls\n");
  expect_config_error("[dataset]\nn = 1000\np = 5\ntest_fraction = 0\n[run]\nmethods = sls\n");
  expect_config_error("[extra]\nx = 1\n");
  try {
    load_bench_config(dir / "missing.ini");
    FAIL("expected io error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
}

TEST_CASE("family names") {
  CHECK(parse_family("poisson").kind() == LossFamily::Kind::Poisson);
  CHECK(parse_family("score-boosting").rule() == ScoringRule::BoostingLoss);
  CHECK_THROWS_AS(parse_family("probit"), Error);
  CHECK(parse_bench_method("agd") == BenchMethod::AGD);
}
