#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "glmscale/losses.hpp"
#include "glmscale/optimize.hpp"
#include "glmscale/regression.hpp"
#include "glmscale/sls.hpp"
#include "glmscale/synth.hpp"

namespace glmscale {

enum class BenchMethod { SLS, NR, NS, BFGS, LBFGS, GD, AGD };

std::string to_string(BenchMethod method);
std::optional<BenchMethod> parse_bench_method(const std::string& name);

// logistic | poisson | linear | score-log | score-boosting | score-square
LossFamily parse_family(const std::string& name);

struct CsvSource {
  std::filesystem::path path;
  ColumnRef response = std::string("y");
  CsvOptions options;
};
using DataSource = std::variant<DesignSpec, CsvSource>;

enum class InitMode { Ols, Random };

struct BenchConfig {
  DataSource dataset = DesignSpec{};
  LossFamily family = LossFamily::logistic();
  std::vector<BenchMethod> methods;
  InitMode init_mode = InitMode::Ols;
  std::uint64_t init_seed = 0;
  int repetitions = 1;
  // Empty: seeds 1..repetitions.
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output = "bench-out";
  bool write_csv = true;
  bool write_json = true;

  Subsample sls_subsample = DefaultSubsample{};
  ScaleSolveConfig scale;
  OptimizerConfig optimizer;  // method and init are set per run

  void validate() const;
  std::vector<std::uint64_t> resolved_seeds() const;
};

// INI-style key/value file with [dataset], [run], [sls] and [optimizer]
// sections. Unknown sections or keys are rejected.
BenchConfig load_bench_config(const std::filesystem::path& path);

struct ThresholdCrossing {
  std::size_t index = 0;
  int iteration = 0;
  double time_seconds = 0.0;
  bool crossed = false;  // false: index is the final entry, flagged
};

struct ThresholdStats {
  double min_achievable_err = 0.0;
  std::vector<ThresholdCrossing> crossings;
};

// Trace entries a method can be judged at start at `first_candidate`.
struct TraceRef {
  const OptimizerTrace* trace;
  std::size_t first_candidate = 0;
};

// Threshold = max over traces of the final test error; per trace, the first
// candidate entry whose test error is <= threshold.
ThresholdStats threshold_stats(const std::vector<TraceRef>& traces);

struct MethodOutcome {
  bool failed = false;
  std::string error;
  double time_to_min_err = 0.0;
  double iters_to_min_err = 0.0;
  double final_test_err = 0.0;
  double total_time = 0.0;
  bool never_crossed = false;
  std::string trace_file;
};

struct SeedRun {
  std::uint64_t seed = 0;
  double min_achievable_err = 0.0;
  std::vector<std::pair<std::string, MethodOutcome>> methods;
};

struct BenchReport {
  std::string family;
  std::string init_mode;
  // Medians over seeds of the successful runs.
  std::vector<std::pair<std::string, MethodOutcome>> per_method;
  double min_achievable_err = 0.0;
  std::vector<SeedRun> runs;
  std::map<std::string, std::string> environment;

  // Traces of each run keyed by method name; written by emit_report but not
  // part of the serialized report.
  std::vector<std::map<std::string, OptimizerTrace>> traces;
};

BenchReport run_bench(const BenchConfig& cfg);

// SLS as a two-entry trace: after the OLS solve and after scaling.
OptimizerTrace sls_trace(const TrainTestView& view, const LossFamily& family,
                         const SlsResult& fit);

std::string report_to_json(const BenchReport& report);
BenchReport report_from_json(const std::string& text);

struct ReportFormats {
  bool csv = true;
  bool json = true;
};

// Writes report.json / report.csv and one trace_<method>.csv per method
// and run under `dir`. Returns the paths written.
std::vector<std::filesystem::path> emit_report(const BenchReport& report,
                                               const std::filesystem::path& dir,
                                               ReportFormats formats = {});

}  // namespace glmscale
