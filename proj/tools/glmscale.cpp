#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "glmscale/bench.hpp"
#include "glmscale/convert.hpp"
#include "glmscale/errors.hpp"
#include "glmscale/optimize.hpp"
#include "glmscale/regression.hpp"
#include "glmscale/sls.hpp"
#include "glmscale/synth.hpp"

using namespace glmscale;
using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json vector_json(const VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

int report_error(std::string_view kind, const std::string& message,
                 const ordered_json& extra = ordered_json::object()) {
  ordered_json body;
  body["kind"] = kind;
  body["message"] = message;
  for (const auto& [k, v] : extra.items()) body[k] = v;
  ordered_json out;
  out["error"] = body;
  std::cerr << out.dump() << '\n';
  return 1;
}

int report_error(const Error& e) {
  ordered_json extra = ordered_json::object();
  if (e.row) extra["row"] = *e.row;
  if (e.column) extra["column"] = *e.column;
  if (e.index) extra["index"] = *e.index;
  if (e.condition_estimate) extra["condition_estimate"] = *e.condition_estimate;
  if (e.last_residual) extra["last_residual"] = *e.last_residual;
  return report_error(to_string(e.kind()), e.what(), extra);
}

ColumnRef column_ref(const std::string& s) {
  if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos) {
    return static_cast<std::size_t>(std::stoull(s));
  }
  return s;
}

Subsample parse_subsample(const std::string& s) {
  if (s.empty() || s == "full") return FullSample{};
  if (s == "default") return DefaultSubsample{};
  if (s.find_first_not_of("0123456789") != std::string::npos) {
    throw Error(ErrorKind::InvalidArgument, "--subsample: expected full, default or a row count");
  }
  return SubsampleSize{static_cast<std::size_t>(std::stoull(s))};
}

// Accepts a JSON array, an object with "coefficients", or a file holding either.
VectorXd parse_beta(const std::string& arg) {
  std::string text = arg;
  std::error_code ec;
  if (std::filesystem::is_regular_file(arg, ec)) {
    std::ifstream in(arg);
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  ordered_json j;
  try {
    j = ordered_json::parse(text);
    if (j.is_object()) j = j.at("coefficients");
    if (!j.is_array()) throw Error(ErrorKind::Parse, "--beta: expected a JSON array");
    VectorXd beta(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) beta(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return beta;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("--beta: ") + e.what());
  }
}

// Predictor matrix of a CSV: every column except the response, if present.
MatrixXd predictors_from_csv(const std::string& path, const std::string& response, bool explicit_response) {
  CsvTable table = read_csv_table(path, ',', true);
  const auto it = std::find(table.header.begin(), table.header.end(), response);
  if (it == table.header.end()) {
    if (explicit_response) {
      throw Error(ErrorKind::MissingColumn, path + ": no column named '" + response + "'");
    }
    return table.values;
  }
  const auto drop = static_cast<Eigen::Index>(it - table.header.begin());
  MatrixXd X(table.values.rows(), table.values.cols() - 1);
  Eigen::Index out = 0;
  for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
    if (c != drop) X.col(out++) = table.values.col(c);
  }
  return X;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scaled least squares estimation and GLM optimizer benchmarks"};
  app.require_subcommand(1);

  // bench
  auto* bench = app.add_subcommand("bench", "Benchmark harness");
  bench->require_subcommand(1);
  auto* bench_run = bench->add_subcommand("run", "Run a benchmark from a config file");
  std::string config_path;
  std::optional<std::string> output_override;
  bench_run->add_option("--config", config_path, "Benchmark config (INI)")->required();
  bench_run->add_option("--output", output_override, "Override the output directory");

  auto* bench_synth = bench->add_subcommand("synth", "Write a synthetic dataset as CSV");
  DesignSpec spec;
  spec.n = 1000;
  spec.p = 10;
  std::string dist = "gaussian", response = "logistic", out_path;
  double condition = 1.0, beta_norm = 1.0;
  std::uint64_t cov_seed = 0;
  bench_synth->add_option("--n", spec.n, "Rows")->capture_default_str();
  bench_synth->add_option("--p", spec.p, "Predictors")->capture_default_str();
  bench_synth->add_option("--distribution", dist, "gaussian | rademacher | exp-minus-one")
      ->capture_default_str();
  bench_synth->add_option("--condition", condition, "Covariance condition number; 1 = identity")
      ->capture_default_str();
  bench_synth->add_option("--covariance-seed", cov_seed, "Seed of the random covariance");
  bench_synth->add_option("--beta-norm", beta_norm, "Norm of the well-spread coefficients")
      ->capture_default_str();
  bench_synth->add_option("--response", response, "logistic | poisson | none")
      ->capture_default_str();
  bench_synth->add_option("--seed", spec.seed, "Dataset seed")->capture_default_str();
  bench_synth->add_option("--out", out_path, "Output CSV")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a GLM to a CSV file");
  std::string fit_method, family_name = "logistic", data_path, response_col = "y";
  std::string subsample_arg = "full";
  std::uint64_t seed = 0;
  fit->add_option("method", fit_method, "sls | mle")
      ->required()
      ->check(CLI::IsMember({"sls", "mle"}));
  fit->add_option("--family", family_name, "logistic | poisson | linear")->capture_default_str();
  fit->add_option("--data", data_path, "CSV with a header row")->required();
  fit->add_option("--response", response_col, "Response column name or index")
      ->capture_default_str();
  fit->add_option("--subsample", subsample_arg, "full | default | row count (sls only)")
      ->capture_default_str();
  fit->add_option("--seed", seed, "Sub-sampling seed")->capture_default_str();

  // convert
  auto* convert = app.add_subcommand("convert", "Convert coefficients between GLM families");
  std::string from_name, to_name, beta_arg, conv_data, conv_response = "y";
  convert->add_option("--from", from_name, "Source family")->required();
  convert->add_option("--to", to_name, "Target family")->required();
  convert->add_option("--beta", beta_arg, "JSON array, or a file holding one")->required();
  convert->add_option("--data", conv_data, "CSV with the predictors")->required();
  auto* conv_resp_opt =
      convert->add_option("--response", conv_response, "Column to drop if present")
          ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("usage", e.what());
    return 2;
  }

  try {
    if (bench_run->parsed()) {
      BenchConfig cfg = load_bench_config(config_path);
      if (output_override) cfg.output = *output_override;
      const BenchReport report = run_bench(cfg);
      emit_report(report, cfg.output, {cfg.write_csv, cfg.write_json});
      std::cout << report_to_json(report) << '\n';
    } else if (bench_synth->parsed()) {
      if (dist == "gaussian") {
        spec.base = BaseDistribution::Gaussian01;
      } else if (dist == "rademacher") {
        spec.base = BaseDistribution::Rademacher;
      } else if (dist == "exp-minus-one") {
        spec.base = BaseDistribution::ExpMinusOne;
      } else {
        throw Error(ErrorKind::InvalidArgument, "--distribution: unknown '" + dist + "'");
      }
      if (response == "logistic") {
        spec.response = ResponseKind::LogisticBernoulli;
      } else if (response == "poisson") {
        spec.response = ResponseKind::PoissonCounts;
      } else if (response == "none") {
        spec.response = ResponseKind::None;
      } else {
        throw Error(ErrorKind::InvalidArgument, "--response: unknown '" + response + "'");
      }
      if (condition != 1.0) spec.covariance = RandomSpdCovariance{condition, cov_seed};
      spec.beta_pop = WellSpread{beta_norm};
      spec.test_fraction = 0.0;
      const SyntheticSample sample = sample_dataset(spec);
      write_csv(out_path, sample.data);
      ordered_json out;
      out["path"] = out_path;
      out["n"] = spec.n;
      out["p"] = spec.p;
      out["beta_pop"] = vector_json(sample.beta_pop);
      out["clamped_rows"] = sample.data.info.clamped_rows;
      std::cout << out.dump(2) << '\n';
    } else if (fit->parsed()) {
      const LossFamily family = parse_family(family_name);
      CsvOptions opts;
      opts.test_fraction = 0.0;
      opts.seed = seed;
      const Dataset data = load_csv(data_path, column_ref(response_col), opts);
      ordered_json out;
      out["method"] = fit_method;
      out["family"] = family.name();
      if (fit_method == "sls") {
        const SlsResult r = fit_sls(data, family, parse_subsample(subsample_arg), {}, seed);
        out["coefficients"] = vector_json(r.beta_sls);
        out["c"] = r.c;
        out["ols_coefficients"] = vector_json(r.beta_ols);
        out["root_iterations"] = r.root_iterations;
        if (r.subsample_indices) out["subsample_size"] = r.subsample_indices->size();
      } else {
        OptimizerConfig oc;
        oc.method = Method::NewtonRaphson;
        oc.init = FromVector{fit_ols(data).beta};
        oc.grad_tol = 1e-10;
        const OptimizerTrace t = minimize(data, family, oc);
        out["coefficients"] = vector_json(t.final_beta());
        out["iterations"] = t.iteration.back();
        out["grad_norm"] = t.grad_norm.back();
        out["converged"] = t.converged;
      }
      std::cout << out.dump(2) << '\n';
    } else if (convert->parsed()) {
      const LossFamily source = parse_family(from_name);
      const LossFamily target = parse_family(to_name);
      const VectorXd beta = parse_beta(beta_arg);
      const MatrixXd X = predictors_from_csv(conv_data, conv_response, conv_resp_opt->count() > 0);
      if (X.cols() != beta.size()) {
        throw Error(ErrorKind::InvalidArgument,
                    "--beta has " + std::to_string(beta.size()) + " entries but the data has " +
                        std::to_string(X.cols()) + " predictors");
      }
      const ConversionResult r = convert_glm(X, beta, source, target);
      ordered_json out;
      out["from"] = source.name();
      out["to"] = target.name();
      out["coefficients"] = vector_json(r.beta_target);
      out["rho"] = r.rho;
      out["kappa"] = r.kappa;
      out["iterations"] = r.iterations;
      std::cout << out.dump(2) << '\n';
    }
  } catch (const Error& e) {
    return report_error(e);
  } catch (const std::exception& e) {
    return report_error("internal", e.what());
  }
  return 0;
}
