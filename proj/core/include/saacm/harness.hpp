#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "saacm/restarts.hpp"
#include "saacm/trial.hpp"

namespace saacm {

/// Raised for unknown keys or unparsable values; what() lists every offender.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::vector<std::string>& problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct RunConfig {
  std::vector<int> functions{101};
  std::vector<std::size_t> dims{5};
  std::size_t instances = 15;
  Algorithm algorithm = Algorithm::saacm;
  double budget_mult = 1e4;  // budget = budget_mult * D
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  bool noisy_rates = true;
  bool adapt_hyperparams = true;
  std::size_t lambda_hyp = 20;
  double err_relaxation = 0.2;

  /// Applies key=value pairs on top of the current values. Keys: functions,
  /// dims, instances, algo, budget_mult, seed, jobs, noisy_rates,
  /// adapt_hyperparams, lambda_hyp, err_relaxation. Throws ConfigError.
  void apply(const std::map<std::string, std::string>& values);
  void validate() const;

  RestartPolicy policy_for(std::size_t dimension) const;
};

/// Parses line-oriented key=value text. '#' starts a comment. Throws
/// ConfigError on malformed lines.
std::map<std::string, std::string> parse_key_values(std::istream& in);

/// Comma-separated list of integers with optional ranges, e.g. "101-103,107".
std::vector<int> parse_int_list(const std::string& text);

/// Seed of the trial on (function, dimension, instance) under `base_seed`.
std::uint64_t trial_seed(std::uint64_t base_seed, int function_id, std::size_t dimension,
                         int instance_id);

/// Runs one IPOP trial per (function, dimension, instance). Results come back
/// sorted by key; when `out` is given, records are written in that order as
/// soon as every preceding key has finished.
std::vector<TrialRecord> run_trials(const RunConfig& config, std::ostream* out = nullptr);

struct TimingRow {
  std::size_t dimension = 0;
  std::uint64_t evals = 0;
  std::uint64_t trainings = 0;
  std::uint64_t cycles = 0;
  double seconds_per_eval = 0.0;
  double seconds_per_training = 0.0;
  double training_seconds_per_cycle = 0.0;  // includes tournament models
};

struct TimingReport {
  std::vector<TimingRow> rows;
  double training_slope = 0.0;  // least-squares slope of log(cost) vs log(D)
};

struct TimingOptions {
  double budget_per_dim = 30.0;
  std::uint64_t g_start = 2;
  bool adapt_hyperparams = false;
  std::size_t lambda_hyp = 20;
  std::uint64_t seed = 1;
  std::vector<int> functions{1, 8, 10, 15};
};

TimingReport timing_experiment(const std::vector<std::size_t>& dims, const TimingOptions& options = {});

/// Least-squares slope of log(y) against log(x).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace saacm
