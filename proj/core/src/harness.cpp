#include "saacm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <istream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "saacm/testbed.hpp"

namespace saacm {

namespace {

std::string join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& s, bool& out) {
  if (s == "1" || s == "true" || s == "yes" || s == "on") return out = true, true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return out = false, true;
  return false;
}

template <typename T>
bool parse_unsigned(const std::string& s, T& out) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) return false;
  try {
    out = static_cast<T>(std::stoull(s));
  } catch (const std::exception&) {
    return false;
  }
  return true;
}

// splitmix64 finalizer over the running hash
std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  std::uint64_t z = h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

ConfigError::ConfigError(const std::vector<std::string>& problems)
    : std::runtime_error("configuration error: " + join(problems, "; ")), problems_(problems) {}

std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> values;
  std::vector<std::string> problems;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      problems.push_back("line " + std::to_string(line_no) + ": expected key=value");
      continue;
    }
    values[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  if (!problems.empty()) throw ConfigError(problems);
  return values;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto dash = item.find('-', 1);
    std::size_t used = 0;
    if (dash == std::string::npos) {
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument("bad integer '" + item + "'");
      continue;
    }
    const std::string lo_s = item.substr(0, dash);
    const std::string hi_s = item.substr(dash + 1);
    const int lo = std::stoi(lo_s, &used);
    if (used != lo_s.size()) throw std::invalid_argument("bad range '" + item + "'");
    const int hi = std::stoi(hi_s, &used);
    if (used != hi_s.size() || hi < lo) throw std::invalid_argument("bad range '" + item + "'");
    for (int v = lo; v <= hi; ++v) out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

void RunConfig::apply(const std::map<std::string, std::string>& values) {
  std::vector<std::string> problems;
  for (const auto& [key, value] : values) {
    auto bad = [&, &key = key, &value = value] {
      problems.push_back("invalid value '" + value + "' for " + key);
    };
    try {
      if (key == "functions") {
        functions = parse_int_list(value);
      } else if (key == "dims") {
        dims.clear();
        for (int d : parse_int_list(value)) {
          if (d < 2) throw std::invalid_argument("dim");
          dims.push_back(static_cast<std::size_t>(d));
        }
      } else if (key == "instances") {
        if (!parse_unsigned(value, instances)) bad();
      } else if (key == "algo") {
        algorithm = parse_algorithm(value);
      } else if (key == "budget_mult") {
        std::size_t used = 0;
        budget_mult = std::stod(value, &used);
        if (used != value.size()) bad();
      } else if (key == "seed") {
        if (!parse_unsigned(value, seed)) bad();
      } else if (key == "jobs") {
        if (!parse_unsigned(value, jobs)) bad();
      } else if (key == "noisy_rates") {
        if (!parse_bool(value, noisy_rates)) bad();
      } else if (key == "adapt_hyperparams") {
        if (!parse_bool(value, adapt_hyperparams)) bad();
      } else if (key == "err_relaxation") {
        std::size_t used = 0;
        err_relaxation = std::stod(value, &used);
        if (used != value.size()) bad();
      } else if (key == "lambda_hyp") {
        if (!parse_unsigned(value, lambda_hyp)) bad();
      } else {
        problems.push_back("unknown key '" + key + "'");
      }
    } catch (const std::exception&) {
      bad();
    }
  }
  if (!problems.empty()) throw ConfigError(problems);
}

void RunConfig::validate() const {
  std::vector<std::string> problems;
  if (functions.empty()) problems.emplace_back("functions: empty list");
  for (int f : functions)
    if (!is_known_function(f)) problems.push_back("functions: unknown id " + std::to_string(f));
  if (dims.empty()) problems.emplace_back("dims: empty list");
  for (auto d : dims)
    if (d < 2) problems.push_back("dims: dimension " + std::to_string(d) + " < 2");
  if (instances == 0) problems.emplace_back("instances: must be positive");
  if (!(budget_mult > 0.0)) problems.emplace_back("budget_mult: must be positive");
  if (jobs == 0) problems.emplace_back("jobs: must be positive");
  if (lambda_hyp == 0) problems.emplace_back("lambda_hyp: must be positive");
  if (!(err_relaxation > 0.0 && err_relaxation <= 1.0))
    problems.emplace_back("err_relaxation: must lie in (0, 1]");
  for (auto d : dims)
    if (budget_mult * static_cast<double>(d) < static_cast<double>(default_lambda(d)))
      problems.push_back("budget_mult: budget below the initial population size for D=" +
                         std::to_string(d));
  if (!problems.empty()) throw ConfigError(problems);
}

RestartPolicy RunConfig::policy_for(std::size_t dimension) const {
  RestartPolicy p = RestartPolicy::defaults(dimension);
  p.budget = static_cast<std::uint64_t>(std::floor(budget_mult * static_cast<double>(dimension)));
  p.algorithm = algorithm;
  p.noisy_rates = noisy_rates;
  p.adapt_hyperparams = adapt_hyperparams;
  p.lambda_hyp = lambda_hyp;
  p.err_relaxation = err_relaxation;
  return p;
}

std::uint64_t trial_seed(std::uint64_t base_seed, int function_id, std::size_t dimension,
                         int instance_id) {
  std::uint64_t h = mix(0x243f6a8885a308d3ULL, base_seed);
  h = mix(h, static_cast<std::uint64_t>(function_id));
  h = mix(h, static_cast<std::uint64_t>(dimension));
  return mix(h, static_cast<std::uint64_t>(instance_id));
}

std::vector<TrialRecord> run_trials(const RunConfig& config, std::ostream* out) {
  config.validate();

  struct Key {
    int function_id;
    std::size_t dimension;
    int instance_id;
  };
  std::vector<Key> keys;
  for (int f : config.functions)
    for (std::size_t d : config.dims)
      for (std::size_t i = 1; i <= config.instances; ++i)
        keys.push_back({f, d, static_cast<int>(i)});
  std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
    return std::tie(a.function_id, a.dimension, a.instance_id) <
           std::tie(b.function_id, b.dimension, b.instance_id);
  });

  std::vector<std::optional<TrialRecord>> results(keys.size());
  std::mutex mutex;
  std::size_t next_to_write = 0;
  std::exception_ptr failure;
  std::atomic<std::size_t> next_job{0};

  if (out) write_header(*out);

  auto worker = [&] {
    while (true) {
      const std::size_t k = next_job.fetch_add(1);
      if (k >= keys.size()) return;
      {
        std::lock_guard lock(mutex);
        if (failure) return;
      }
      try {
        const Key& key = keys[k];
        ProblemInstance instance = make_instance(key.function_id, key.dimension, key.instance_id);
        TrialRecord rec = run_ipop(instance, config.policy_for(key.dimension),
                                   trial_seed(config.seed, key.function_id, key.dimension,
                                              key.instance_id));
        std::lock_guard lock(mutex);
        results[k] = std::move(rec);
        while (next_to_write < results.size() && results[next_to_write]) {
          if (out) {
            write_record(*out, *results[next_to_write]);
            out->flush();
          }
          ++next_to_write;
        }
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  const std::size_t threads = std::min(config.jobs, keys.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<TrialRecord> records;
  records.reserve(results.size());
  for (auto& r : results) records.push_back(std::move(*r));
  return records;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("log_log_slope needs two or more paired samples");
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

TimingReport timing_experiment(const std::vector<std::size_t>& dims, const TimingOptions& options) {
  if (dims.empty()) throw std::invalid_argument("timing_experiment needs at least one dimension");
  using Clock = std::chrono::steady_clock;

  TimingReport report;
  for (const std::size_t dim : dims) {
    RestartPolicy policy = RestartPolicy::defaults(dim);
    policy.budget = static_cast<std::uint64_t>(options.budget_per_dim * static_cast<double>(dim));
    policy.algorithm = Algorithm::saacm;
    policy.noisy_rates = false;
    policy.g_start_rule = GStartRule::fixed;
    policy.fixed_g_start = options.g_start;
    policy.adapt_hyperparams = options.adapt_hyperparams;
    policy.lambda_hyp = options.lambda_hyp;
    policy.target_delta = 0.0;  // run the whole budget

    ControllerStats stats;
    std::uint64_t evals = 0;
    const auto start = Clock::now();
    for (int f : options.functions) {
      ProblemInstance instance = make_instance(f, dim, 1);
      evals += run_ipop(instance, policy, trial_seed(options.seed, f, dim, 1), &stats).total_evals;
    }
    const double wall = std::chrono::duration<double>(Clock::now() - start).count();

    TimingRow row;
    row.dimension = dim;
    row.evals = evals;
    row.trainings = stats.trainings;
    row.cycles = stats.eligible_cycles;
    row.seconds_per_eval = evals ? wall / static_cast<double>(evals) : 0.0;
    row.seconds_per_training =
        stats.trainings ? stats.training_seconds / static_cast<double>(stats.trainings) : 0.0;
    row.training_seconds_per_cycle =
        stats.eligible_cycles
            ? (stats.training_seconds + stats.tournament_seconds) /
                  static_cast<double>(stats.eligible_cycles)
            : 0.0;
    report.rows.push_back(row);
  }

  std::vector<double> xs, ys;
  for (const auto& row : report.rows) {
    if (row.seconds_per_training > 0.0) {
      xs.push_back(static_cast<double>(row.dimension));
      ys.push_back(row.seconds_per_training);
    }
  }
  report.training_slope = xs.size() >= 2 ? log_log_slope(xs, ys) : 0.0;
  return report;
}

}  // namespace saacm
