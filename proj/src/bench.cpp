#include "glmscale/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include "json.hpp"

#include "glmscale/errors.hpp"
#include "glmscale/version.hpp"

namespace glmscale {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double median(std::vector<double> v) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::Config, msg); }

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    if (a == std::string::npos) continue;
    const auto b = item.find_last_not_of(" \t");
    out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

template <typename T>
T get_number(const boost::property_tree::ptree& section, const std::string& key, T fallback,
             const std::string& where) {
  const auto raw = section.get_optional<std::string>(key);
  if (!raw) return fallback;
  std::istringstream in(*raw);
  T value{};
  in >> value;
  if (!in || !(in >> std::ws).eof()) {
    config_error(where + "." + key + ": cannot parse '" + *raw + "'");
  }
  return value;
}

bool get_bool(const boost::property_tree::ptree& section, const std::string& key, bool fallback,
              const std::string& where) {
  const auto raw = section.get_optional<std::string>(key);
  if (!raw) return fallback;
  if (*raw == "true" || *raw == "yes" || *raw == "1") return true;
  if (*raw == "false" || *raw == "no" || *raw == "0") return false;
  config_error(where + "." + key + ": expected true or false, got '" + *raw + "'");
}

void check_keys(const boost::property_tree::ptree& section, const std::string& where,
                const std::set<std::string>& allowed) {
  for (const auto& [key, value] : section) {
    if (!allowed.count(key)) config_error("unknown key '" + where + "." + key + "'");
  }
}

DesignSpec parse_design(const boost::property_tree::ptree& ds) {
  DesignSpec spec;
  spec.n = get_number<std::size_t>(ds, "n", 0, "dataset");
  spec.p = get_number<std::size_t>(ds, "p", 0, "dataset");
  const std::string dist = ds.get<std::string>("distribution", "gaussian");
  if (dist == "gaussian") {
    spec.base = BaseDistribution::Gaussian01;
  } else if (dist == "rademacher") {
    spec.base = BaseDistribution::Rademacher;
  } else if (dist == "exp-minus-one") {
    spec.base = BaseDistribution::ExpMinusOne;
  } else {
    config_error("dataset.distribution: unknown '" + dist + "'");
  }
  const std::string cov = ds.get<std::string>("covariance", "identity");
  if (cov == "identity") {
    spec.covariance = IdentityCovariance{};
  } else if (cov == "random_spd") {
    spec.covariance = RandomSpdCovariance{get_number<double>(ds, "condition", 10.0, "dataset"),
                                          get_number<std::uint64_t>(ds, "covariance_seed", 0,
                                                                    "dataset")};
  } else {
    config_error("dataset.covariance: unknown '" + cov + "'");
  }
  spec.beta_pop = WellSpread{get_number<double>(ds, "beta_norm", 1.0, "dataset")};
  const std::string resp = ds.get<std::string>("response", "logistic");
  if (resp == "logistic") {
    spec.response = ResponseKind::LogisticBernoulli;
  } else if (resp == "poisson") {
    spec.response = ResponseKind::PoissonCounts;
  } else {
    config_error("dataset.response: unknown '" + resp + "'");
  }
  spec.test_fraction = get_number<double>(ds, "test_fraction", 0.10, "dataset");
  return spec;
}

Dataset build_dataset(const DataSource& source, std::uint64_t seed) {
  if (const auto* spec = std::get_if<DesignSpec>(&source)) {
    DesignSpec s = *spec;
    s.seed = seed;
    return sample_dataset(s).data;
  }
  const auto& csv = std::get<CsvSource>(source);
  CsvOptions opts = csv.options;
  opts.seed = seed;
  return load_csv(csv.path, csv.response, opts);
}

ordered_json outcome_to_json(const MethodOutcome& m) {
  ordered_json j;
  j["failed"] = m.failed;
  if (m.failed) j["error"] = m.error;
  j["time_to_min_err"] = m.time_to_min_err;
  j["iters_to_min_err"] = m.iters_to_min_err;
  j["final_test_err"] = m.final_test_err;
  j["total_time"] = m.total_time;
  j["never_crossed"] = m.never_crossed;
  j["trace_file"] = m.trace_file;
  return j;
}

double number_or_nan(const ordered_json& j) { return j.is_null() ? kNaN : j.get<double>(); }

MethodOutcome outcome_from_json(const ordered_json& j) {
  MethodOutcome m;
  m.failed = j.at("failed").get<bool>();
  if (j.contains("error")) m.error = j.at("error").get<std::string>();
  m.time_to_min_err = number_or_nan(j.at("time_to_min_err"));
  m.iters_to_min_err = number_or_nan(j.at("iters_to_min_err"));
  m.final_test_err = number_or_nan(j.at("final_test_err"));
  m.total_time = number_or_nan(j.at("total_time"));
  m.never_crossed = j.at("never_crossed").get<bool>();
  m.trace_file = j.at("trace_file").get<std::string>();
  return m;
}

std::map<std::string, std::string> environment_info() {
  return {
      {"library", std::string("glmscale ") + kVersion},
      {"compiler", __VERSION__},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                    "." + std::to_string(EIGEN_MINOR_VERSION)},
      {"hardware_threads", std::to_string(std::thread::hardware_concurrency())},
  };
}

void write_trace_csv(const std::filesystem::path& path, const OptimizerTrace& trace) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << "iter,cum_time_s,objective,grad_norm,test_err\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t k = 0; k < trace.size(); ++k) {
    out << trace.iteration[k] << ',' << trace.cum_time_seconds[k] << ',' << trace.objective[k]
        << ',' << trace.grad_norm[k] << ',' << trace.test_error[k] << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace

std::string to_string(BenchMethod method) {
  switch (method) {
    case BenchMethod::SLS:
      return "sls";
    case BenchMethod::NR:
      return "nr";
    case BenchMethod::NS:
      return "ns";
    case BenchMethod::BFGS:
      return "bfgs";
    case BenchMethod::LBFGS:
      return "lbfgs";
    case BenchMethod::GD:
      return "gd";
    case BenchMethod::AGD:
      return "agd";
  }
  return "unknown";
}

std::optional<BenchMethod> parse_bench_method(const std::string& name) {
  for (BenchMethod m : {BenchMethod::SLS, BenchMethod::NR, BenchMethod::NS, BenchMethod::BFGS,
                        BenchMethod::LBFGS, BenchMethod::GD, BenchMethod::AGD}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

LossFamily parse_family(const std::string& name) {
  if (name == "logistic") return LossFamily::logistic();
  if (name == "poisson") return LossFamily::poisson();
  if (name == "linear") return LossFamily::linear();
  if (name == "score-log") return LossFamily::scoring_rule(ScoringRule::LogLoss);
  if (name == "score-boosting") return LossFamily::scoring_rule(ScoringRule::BoostingLoss);
  if (name == "score-square") return LossFamily::scoring_rule(ScoringRule::SquareLoss);
  throw Error(ErrorKind::InvalidArgument, "unknown family '" + name + "'");
}

void BenchConfig::validate() const {
  if (methods.empty()) config_error("bench: methods must be nonempty");
  if (repetitions < 1) config_error("bench: repetitions must be >= 1");
  if (!seeds.empty() && static_cast<int>(seeds.size()) != repetitions) {
    config_error("bench: " + std::to_string(seeds.size()) + " seeds listed for " +
                 std::to_string(repetitions) + " repetitions");
  }
  if (const auto* spec = std::get_if<DesignSpec>(&dataset)) {
    spec->validate();
    if (spec->test_fraction <= 0.0) config_error("bench: a held-out test fraction is required");
  } else if (std::get<CsvSource>(dataset).options.test_fraction <= 0.0) {
    config_error("bench: a held-out test fraction is required");
  }
  scale.validate();
  optimizer.validate();
}

std::vector<std::uint64_t> BenchConfig::resolved_seeds() const {
  if (!seeds.empty()) return seeds;
  std::vector<std::uint64_t> out;
  for (int r = 1; r <= repetitions; ++r) out.push_back(static_cast<std::uint64_t>(r));
  return out;
}

BenchConfig load_bench_config(const std::filesystem::path& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    if (!std::filesystem::exists(path)) throw Error(ErrorKind::Io, "cannot open " + path.string());
    config_error(e.what());
  }
  for (const auto& [name, section] : tree) {
    if (name != "dataset" && name != "run" && name != "sls" && name != "optimizer") {
      config_error("unknown section [" + name + "]");
    }
    if (!section.data().empty()) config_error("keys must be inside a section: '" + name + "'");
  }
  const boost::property_tree::ptree empty;
  const auto& ds = tree.get_child("dataset", empty);
  const auto& run = tree.get_child("run", empty);
  const auto& sls = tree.get_child("sls", empty);
  const auto& opt = tree.get_child("optimizer", empty);
  check_keys(ds, "dataset",
             {"source", "n", "p", "distribution", "covariance", "condition", "covariance_seed",
              "beta_norm", "response", "test_fraction", "path", "response_column", "delimiter",
              "header"});
  check_keys(run, "run",
             {"family", "methods", "init", "init_seed", "repetitions", "seeds", "output",
              "formats"});
  check_keys(sls, "sls", {"subsample", "tol", "max_iters", "bracket_max", "init"});
  check_keys(opt, "optimizer",
             {"grad_tol", "max_iters", "linesearch_alpha", "linesearch_beta", "lbfgs_memory",
              "ns_subsample"});

  BenchConfig cfg;
  const std::string source = ds.get<std::string>("source", "synthetic");
  if (source == "synthetic") {
    cfg.dataset = parse_design(ds);
  } else if (source == "csv") {
    CsvSource csv;
    const auto p = ds.get_optional<std::string>("path");
    if (!p) config_error("dataset.path is required for csv sources");
    csv.path = *p;
    if (csv.path.is_relative()) csv.path = path.parent_path() / csv.path;
    const std::string col = ds.get<std::string>("response_column", "y");
    if (!col.empty() && std::all_of(col.begin(), col.end(), ::isdigit)) {
      csv.response = static_cast<std::size_t>(std::stoull(col));
    } else {
      csv.response = col;
    }
    const std::string delim = ds.get<std::string>("delimiter", ",");
    if (delim.size() != 1) config_error("dataset.delimiter must be one character");
    csv.options.delimiter = delim[0];
    csv.options.header = get_bool(ds, "header", true, "dataset");
    csv.options.test_fraction = get_number<double>(ds, "test_fraction", 0.10, "dataset");
    cfg.dataset = csv;
  } else {
    config_error("dataset.source: expected synthetic or csv, got '" + source + "'");
  }

  try {
    cfg.family = parse_family(run.get<std::string>("family", "logistic"));
  } catch (const Error& e) {
    config_error(std::string("run.family: ") + e.what());
  }
  for (const auto& name : split_list(run.get<std::string>("methods", "sls"))) {
    const auto m = parse_bench_method(name);
    if (!m) config_error("run.methods: unknown method '" + name + "'");
    if (std::find(cfg.methods.begin(), cfg.methods.end(), *m) != cfg.methods.end()) {
      config_error("run.methods: '" + name + "' listed twice");
    }
    cfg.methods.push_back(*m);
  }
  const std::string init = run.get<std::string>("init", "ols");
  if (init == "ols") {
    cfg.init_mode = InitMode::Ols;
  } else if (init == "random") {
    cfg.init_mode = InitMode::Random;
  } else {
    config_error("run.init: expected ols or random, got '" + init + "'");
  }
  cfg.init_seed = get_number<std::uint64_t>(run, "init_seed", 0, "run");
  for (const auto& s : split_list(run.get<std::string>("seeds", ""))) {
    try {
      cfg.seeds.push_back(std::stoull(s));
    } catch (const std::exception&) {
      config_error("run.seeds: cannot parse '" + s + "'");
    }
  }
  cfg.repetitions = get_number<int>(run, "repetitions",
                                    cfg.seeds.empty() ? 1 : static_cast<int>(cfg.seeds.size()),
                                    "run");
  cfg.output = run.get<std::string>("output", "bench-out");
  if (cfg.output.is_relative()) cfg.output = path.parent_path() / cfg.output;
  if (const auto formats = run.get_optional<std::string>("formats")) {
    cfg.write_csv = cfg.write_json = false;
    for (const auto& f : split_list(*formats)) {
      if (f == "csv") {
        cfg.write_csv = true;
      } else if (f == "json") {
        cfg.write_json = true;
      } else {
        config_error("run.formats: unknown format '" + f + "'");
      }
    }
  }

  const std::string sub = sls.get<std::string>("subsample", "default");
  if (sub == "default") {
    cfg.sls_subsample = DefaultSubsample{};
  } else if (sub == "full") {
    cfg.sls_subsample = FullSample{};
  } else {
    cfg.sls_subsample = SubsampleSize{get_number<std::size_t>(sls, "subsample", 0, "sls")};
  }
  cfg.scale.tol = get_number<double>(sls, "tol", cfg.scale.tol, "sls");
  cfg.scale.max_iters = get_number<int>(sls, "max_iters", cfg.scale.max_iters, "sls");
  cfg.scale.bracket_max = get_number<double>(sls, "bracket_max", cfg.scale.bracket_max, "sls");
  const std::string sinit = sls.get<std::string>("init", "variance");
  if (sinit == "variance") {
    cfg.scale.init = VarianceRule{};
  } else {
    cfg.scale.init = FixedInit{get_number<double>(sls, "init", 1.0, "sls")};
  }

  auto& o = cfg.optimizer;
  o.grad_tol = get_number<double>(opt, "grad_tol", o.grad_tol, "optimizer");
  o.max_iters = get_number<int>(opt, "max_iters", o.max_iters, "optimizer");
  o.linesearch_alpha = get_number<double>(opt, "linesearch_alpha", o.linesearch_alpha, "optimizer");
  o.linesearch_beta = get_number<double>(opt, "linesearch_beta", o.linesearch_beta, "optimizer");
  o.lbfgs_memory = get_number<int>(opt, "lbfgs_memory", o.lbfgs_memory, "optimizer");
  if (opt.get_optional<std::string>("ns_subsample")) {
    o.ns_subsample = get_number<std::size_t>(opt, "ns_subsample", 0, "optimizer");
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    config_error(e.what());
  }
  return cfg;
}

ThresholdStats threshold_stats(const std::vector<TraceRef>& traces) {
  ThresholdStats stats;
  stats.min_achievable_err = -std::numeric_limits<double>::infinity();
  for (const auto& ref : traces) {
    stats.min_achievable_err = std::max(stats.min_achievable_err, ref.trace->test_error.back());
  }
  for (const auto& ref : traces) {
    const OptimizerTrace& t = *ref.trace;
    ThresholdCrossing c;
    c.index = t.size() - 1;
    for (std::size_t k = std::min(ref.first_candidate, t.size() - 1); k < t.size(); ++k) {
      if (t.test_error[k] <= stats.min_achievable_err) {
        c.index = k;
        c.crossed = true;
        break;
      }
    }
    c.iteration = t.iteration[c.index];
    c.time_seconds = t.cum_time_seconds[c.index];
    stats.crossings.push_back(c);
  }
  return stats;
}

OptimizerTrace sls_trace(const TrainTestView& view, const LossFamily& family,
                         const SlsResult& fit) {
  OptimizerTrace trace;
  const MatrixXd& X = view.X_train();
  const VectorXd& y = view.y_train();
  const double n = static_cast<double>(view.n_train());
  auto add = [&](int it, const VectorXd& beta, double seconds) {
    const VectorXd eta = X * beta;
    double psi = 0.0;
    VectorXd resid(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      psi += family.psi(eta(i));
      resid(i) = family.d1(eta(i)) - y(i);
    }
    trace.iteration.push_back(it);
    trace.iterates.push_back(beta);
    trace.objective.push_back((psi - y.dot(eta)) / n);
    trace.grad_norm.push_back((X.transpose() * resid / n).norm());
    trace.cum_time_seconds.push_back(seconds);
    trace.test_error.push_back(mean_prediction_error(view.X_test(), view.y_test(), family, beta));
    trace.fallback.push_back(false);
  };
  add(0, fit.beta_ols, fit.ols_seconds);
  add(fit.root_iterations, fit.beta_sls, fit.wall_time_seconds);
  trace.converged = true;
  return trace;
}

BenchReport run_bench(const BenchConfig& cfg) {
  cfg.validate();
  BenchReport report;
  report.family = cfg.family.name();
  report.init_mode = cfg.init_mode == InitMode::Ols ? "ols" : "random";
  report.environment = environment_info();
  const auto seeds = cfg.resolved_seeds();

  for (std::uint64_t seed : seeds) {
    const Dataset data = build_dataset(cfg.dataset, seed);
    const TrainTestView view(data);
    SeedRun run;
    run.seed = seed;
    std::map<std::string, OptimizerTrace> traces;
    std::map<std::string, std::string> failures;

    std::optional<SlsResult> sls;
    std::optional<std::string> sls_error;
    const bool want_sls =
        std::find(cfg.methods.begin(), cfg.methods.end(), BenchMethod::SLS) != cfg.methods.end();
    if (want_sls) {
      try {
        sls = fit_sls(view, cfg.family, cfg.sls_subsample, cfg.scale, seed);
      } catch (const Error& e) {
        sls_error = e.what();
      }
    }

    OptimizerInit init = RandomInit{cfg.init_seed + seed};
    std::optional<std::string> init_error;
    if (cfg.init_mode == InitMode::Ols) {
      if (sls) {
        init = FromVector{sls->beta_ols};
      } else {
        try {
          init = FromVector{fit_ols(view, cfg.sls_subsample, seed).beta};
        } catch (const Error& e) {
          init_error = e.what();
        }
      }
    }

    for (BenchMethod m : cfg.methods) {
      const std::string name = to_string(m);
      if (m == BenchMethod::SLS) {
        if (sls) {
          traces[name] = sls_trace(view, cfg.family, *sls);
        } else {
          failures[name] = *sls_error;
        }
        continue;
      }
      if (init_error) {
        failures[name] = "OLS initialization failed: " + *init_error;
        continue;
      }
      OptimizerConfig oc = cfg.optimizer;
      oc.method = *parse_method(name);
      oc.init = init;
      oc.ns_seed = seed;
      try {
        traces[name] = minimize(view, cfg.family, oc);
      } catch (const Error& e) {
        failures[name] = e.what();
      }
    }

    std::vector<TraceRef> refs;
    std::vector<std::string> ok_names;
    for (BenchMethod m : cfg.methods) {
      const std::string name = to_string(m);
      const auto it = traces.find(name);
      if (it == traces.end()) continue;
      refs.push_back({&it->second, m == BenchMethod::SLS ? std::size_t{1} : std::size_t{0}});
      ok_names.push_back(name);
    }
    const ThresholdStats stats = threshold_stats(refs);
    run.min_achievable_err = refs.empty() ? kNaN : stats.min_achievable_err;

    for (BenchMethod m : cfg.methods) {
      const std::string name = to_string(m);
      MethodOutcome out;
      out.trace_file = seeds.size() == 1
                           ? "trace_" + name + ".csv"
                           : "trace_" + name + "_seed" + std::to_string(seed) + ".csv";
      if (const auto f = failures.find(name); f != failures.end()) {
        out.failed = true;
        out.error = f->second;
        out.time_to_min_err = out.iters_to_min_err = out.final_test_err = out.total_time = kNaN;
        out.trace_file.clear();
      } else {
        const std::size_t k = static_cast<std::size_t>(
            std::find(ok_names.begin(), ok_names.end(), name) - ok_names.begin());
        const OptimizerTrace& t = traces.at(name);
        const ThresholdCrossing& c = stats.crossings[k];
        out.time_to_min_err = c.time_seconds;
        out.iters_to_min_err = c.iteration;
        out.never_crossed = !c.crossed;
        out.final_test_err = t.test_error.back();
        out.total_time = t.cum_time_seconds.back();
      }
      run.methods.emplace_back(name, out);
    }
    report.runs.push_back(std::move(run));
    report.traces.push_back(std::move(traces));
  }

  std::vector<double> thresholds;
  for (const auto& run : report.runs) thresholds.push_back(run.min_achievable_err);
  report.min_achievable_err = median(thresholds);
  for (BenchMethod m : cfg.methods) {
    const std::string name = to_string(m);
    std::vector<double> times, iters, finals, totals;
    MethodOutcome summary;
    int failed = 0;
    for (const auto& run : report.runs) {
      for (const auto& [mname, out] : run.methods) {
        if (mname != name) continue;
        if (out.failed) {
          ++failed;
          if (summary.error.empty()) summary.error = out.error;
          continue;
        }
        times.push_back(out.time_to_min_err);
        iters.push_back(out.iters_to_min_err);
        finals.push_back(out.final_test_err);
        totals.push_back(out.total_time);
        summary.never_crossed = summary.never_crossed || out.never_crossed;
        if (summary.trace_file.empty()) summary.trace_file = out.trace_file;
      }
    }
    summary.failed = failed == static_cast<int>(report.runs.size());
    if (!summary.failed) summary.error.clear();
    summary.time_to_min_err = median(times);
    summary.iters_to_min_err = median(iters);
    summary.final_test_err = median(finals);
    summary.total_time = median(totals);
    report.per_method.emplace_back(name, summary);
  }
  return report;
}

std::string report_to_json(const BenchReport& report) {
  ordered_json j;
  j["family"] = report.family;
  j["init"] = report.init_mode;
  j["min_achievable_err"] = report.min_achievable_err;
  ordered_json per = ordered_json::object();
  for (const auto& [name, out] : report.per_method) per[name] = outcome_to_json(out);
  j["per_method"] = per;
  ordered_json runs = ordered_json::array();
  for (const auto& run : report.runs) {
    ordered_json r;
    r["seed"] = run.seed;
    r["min_achievable_err"] = run.min_achievable_err;
    ordered_json methods = ordered_json::object();
    for (const auto& [name, out] : run.methods) methods[name] = outcome_to_json(out);
    r["methods"] = methods;
    runs.push_back(r);
  }
  j["runs"] = runs;
  j["environment"] = report.environment;
  return j.dump(2);
}

BenchReport report_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("report: ") + e.what());
  }
  BenchReport report;
  try {
    report.family = j.at("family").get<std::string>();
    report.init_mode = j.at("init").get<std::string>();
    report.min_achievable_err = number_or_nan(j.at("min_achievable_err"));
    for (const auto& [name, v] : j.at("per_method").items()) {
      report.per_method.emplace_back(name, outcome_from_json(v));
    }
    for (const auto& r : j.at("runs")) {
      SeedRun run;
      run.seed = r.at("seed").get<std::uint64_t>();
      run.min_achievable_err = number_or_nan(r.at("min_achievable_err"));
      for (const auto& [name, v] : r.at("methods").items()) {
        run.methods.emplace_back(name, outcome_from_json(v));
      }
      report.runs.push_back(std::move(run));
    }
    report.environment = j.at("environment").get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("report: ") + e.what());
  }
  return report;
}

std::vector<std::filesystem::path> emit_report(const BenchReport& report,
                                               const std::filesystem::path& dir,
                                               ReportFormats formats) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;

  if (formats.json) {
    const auto path = dir / "report.json";
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << report_to_json(report) << '\n';
    if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
    written.push_back(path);
  }
  if (formats.csv) {
    const auto path = dir / "report.csv";
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << "method,time_to_min_err,iters_to_min_err,final_test_err\n";
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const auto& [name, m] : report.per_method) {
      out << name << ',' << m.time_to_min_err << ',' << m.iters_to_min_err << ','
          << m.final_test_err << '\n';
    }
    if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
    written.push_back(path);
  }
  for (std::size_t r = 0; r < report.runs.size() && r < report.traces.size(); ++r) {
    for (const auto& [name, out] : report.runs[r].methods) {
      const auto it = report.traces[r].find(name);
      if (out.failed || out.trace_file.empty() || it == report.traces[r].end()) continue;
      const auto path = dir / out.trace_file;
      write_trace_csv(path, it->second);
      written.push_back(path);
    }
  }
  return written;
}

}  // namespace glmscale
