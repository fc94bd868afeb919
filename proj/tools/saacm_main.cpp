// saacm: run trial batteries, summarize them, time the surrogate.
#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "saacm/analytics.hpp"
#include "saacm/harness.hpp"
#include "saacm/trial.hpp"

namespace {

constexpr int kConfigErrorExit = 2;

struct RunFlags {
  std::optional<std::string> functions, dims, algo, config_path, out_path;
  std::optional<std::size_t> instances, jobs;
  std::optional<double> budget_mult;
  std::optional<std::uint64_t> seed;
};

std::vector<saacm::TrialRecord> load_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw saacm::ConfigError({"cannot open input file '" + path + "'"});
  return saacm::read_records(in);
}

int cmd_run(const RunFlags& f) {
  std::map<std::string, std::string> kv;
  if (f.config_path) {
    std::ifstream in(*f.config_path);
    if (!in) throw saacm::ConfigError({"cannot open config file '" + *f.config_path + "'"});
    kv = saacm::parse_key_values(in);
  }
  if (f.functions) kv["functions"] = *f.functions;
  if (f.dims) kv["dims"] = *f.dims;
  if (f.algo) kv["algo"] = *f.algo;
  if (f.instances) kv["instances"] = std::to_string(*f.instances);
  if (f.jobs) kv["jobs"] = std::to_string(*f.jobs);
  if (f.seed) kv["seed"] = std::to_string(*f.seed);
  if (f.budget_mult) kv["budget_mult"] = saacm::format_double(*f.budget_mult);

  saacm::RunConfig config;
  config.apply(kv);
  config.validate();

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (f.out_path) {
    file.open(*f.out_path);
    if (!file) throw saacm::ConfigError({"cannot open output file '" + *f.out_path + "'"});
    out = &file;
  }
  const auto records = saacm::run_trials(config, out);

  std::size_t solved = 0;
  for (const auto& r : records) solved += r.success ? 1 : 0;
  std::cerr << records.size() << " trials, " << solved << " reached 1e-8\n";
  return 0;
}

int cmd_ert(const std::string& in_path, std::vector<double> targets) {
  if (targets.empty())
    for (int e = 2; e >= -8; --e) targets.push_back(std::pow(10.0, e));
  const auto records = load_records(in_path);

  std::map<std::tuple<int, std::size_t, std::string>, std::vector<saacm::TrialRecord>> groups;
  for (const auto& r : records)
    groups[{r.function_id, r.dimension, saacm::to_string(r.algorithm)}].push_back(r);

  std::cout << "function,dim,algo,target,ert,n_success,n_trials\n";
  for (const auto& [key, group] : groups) {
    for (double t : targets) {
      const auto res = saacm::compute_ert(group, t);
      std::cout << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ','
                << saacm::format_double(t) << ',' << saacm::format_double(res.ert) << ','
                << res.n_success << ',' << res.n_trials << '\n';
    }
  }
  return 0;
}

int cmd_ecdf(const std::string& in_path, std::size_t bootstrap, std::uint64_t seed,
             const std::optional<std::string>& out_path) {
  const auto records = load_records(in_path);
  if (records.empty()) throw saacm::ConfigError({"no trial records in '" + in_path + "'"});
  saacm::Rng rng(seed);
  saacm::EcdfOptions options;
  options.bootstrap_n = bootstrap;
  const auto targets = saacm::default_ecdf_targets();
  const auto curve = saacm::ecdf_bootstrap(records, targets, rng, options);

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (out_path) {
    file.open(*out_path);
    if (!file) throw saacm::ConfigError({"cannot open output file '" + *out_path + "'"});
    out = &file;
  }
  *out << "x,y\n";
  for (const auto& p : curve)
    *out << saacm::format_double(p.evals_per_dim) << ',' << saacm::format_double(p.proportion)
         << '\n';
  return 0;
}

int cmd_timing(const std::string& dims_text, const saacm::TimingOptions& options) {
  std::vector<std::size_t> dims;
  try {
    for (int d : saacm::parse_int_list(dims_text)) {
      if (d < 2) throw std::invalid_argument("dim");
      dims.push_back(static_cast<std::size_t>(d));
    }
  } catch (const std::exception&) {
    throw saacm::ConfigError({"invalid value '" + dims_text + "' for dims"});
  }
  const auto report = saacm::timing_experiment(dims, options);
  std::cout << "dim,evals,trainings,cycles,sec_per_eval,sec_per_training,train_sec_per_cycle\n";
  for (const auto& r : report.rows)
    std::cout << r.dimension << ',' << r.evals << ',' << r.trainings << ',' << r.cycles << ','
              << r.seconds_per_eval << ',' << r.seconds_per_training << ','
              << r.training_seconds_per_cycle << '\n';
  std::cout << "# log-log slope of training cost vs D: " << report.training_slope << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Surrogate-assisted active CMA-ES on noisy benchmark functions"};
  app.require_subcommand(1);

  RunFlags rf;
  auto* run = app.add_subcommand("run", "Run IPOP trials and write trial records");
  run->add_option("--functions", rf.functions, "Function ids, e.g. 101-103,107");
  run->add_option("--dims", rf.dims, "Dimensions, e.g. 2,5,10");
  run->add_option("--instances", rf.instances, "Instances per (function, dimension)");
  run->add_option("--algo", rf.algo, "acma or saacm");
  run->add_option("--budget-mult", rf.budget_mult, "Evaluation budget per dimension");
  run->add_option("--seed", rf.seed, "Base seed");
  run->add_option("--jobs", rf.jobs, "Worker threads");
  run->add_option("--out", rf.out_path, "Output file (default stdout)");
  run->add_option("--config", rf.config_path, "key=value file; flags take precedence");

  std::string ert_in;
  std::vector<double> ert_targets;
  auto* ert = app.add_subcommand("ert", "Expected running time per target");
  ert->add_option("--in", ert_in, "Trial record file")->required();
  ert->add_option("--targets", ert_targets, "Delta-f targets (default 1e2..1e-8)");

  std::string ecdf_in;
  std::size_t ecdf_bootstrap = 100;
  std::uint64_t ecdf_seed = 1;
  std::optional<std::string> ecdf_out;
  auto* ecdf = app.add_subcommand("ecdf", "Bootstrapped ECDF of evaluations / D");
  ecdf->add_option("--in", ecdf_in, "Trial record file")->required();
  ecdf->add_option("--bootstrap", ecdf_bootstrap, "Resamples per unsuccessful pair");
  ecdf->add_option("--seed", ecdf_seed, "Bootstrap seed");
  ecdf->add_option("--out", ecdf_out, "Output file (default stdout)");

  std::string timing_dims = "2,5,10,20";
  saacm::TimingOptions timing_opts;
  auto* timing = app.add_subcommand("timing", "CPU cost of evaluations and surrogate training");
  timing->add_option("--dims", timing_dims, "Dimensions");
  timing->add_option("--budget-per-dim", timing_opts.budget_per_dim, "Evaluations per dimension");
  timing->add_flag("--adapt", timing_opts.adapt_hyperparams, "Enable the hyper-parameter tournament");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigErrorExit;
  }

  try {
    if (*run) return cmd_run(rf);
    if (*ert) return cmd_ert(ert_in, ert_targets);
    if (*ecdf) return cmd_ecdf(ecdf_in, ecdf_bootstrap, ecdf_seed, ecdf_out);
    if (*timing) return cmd_timing(timing_dims, timing_opts);
  } catch (const saacm::ConfigError& e) {
    std::cerr << "saacm: " << e.what() << '\n';
    return kConfigErrorExit;
  } catch (const std::exception& e) {
    std::cerr << "saacm: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
