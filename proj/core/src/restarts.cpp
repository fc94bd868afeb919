#include "saacm/restarts.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace saacm {

namespace {

// Independent streams for sampling, hyper-parameter search, noise and
// initial means, all derived from the trial seed.
struct TrialStreams {
  Rng sampling;
  std::uint64_t hp_seed;
  Rng noise;
  Rng init;

  explicit TrialStreams(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      0x5aacU};
    std::array<std::uint64_t, 4> out{};
    std::array<std::uint32_t, 8> words{};
    seq.generate(words.begin(), words.end());
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = (static_cast<std::uint64_t>(words[2 * i]) << 32) | words[2 * i + 1];
    sampling.seed(out[0]);
    hp_seed = out[1];
    noise.seed(out[2]);
    init.seed(out[3]);
  }
};

}  // namespace

RestartPolicy RestartPolicy::defaults(std::size_t dimension) {
  RestartPolicy p;
  p.budget = 1'000'000ULL * dimension;
  return p;
}

void RestartPolicy::validate(std::size_t dimension) const {
  if (budget == 0) throw std::invalid_argument("budget must be positive");
  if (lambda_mult < 2) throw std::invalid_argument("lambda_mult must be at least 2");
  if (budget < lambda_for(dimension, 0)) throw std::invalid_argument("budget is smaller than lambda0");
  if (!(sigma0 > 0.0)) throw std::invalid_argument("sigma0 must be positive");
}

std::size_t RestartPolicy::lambda_for(std::size_t dimension, std::size_t restart) const {
  std::size_t lambda = lambda0 == 0 ? default_lambda(dimension) : lambda0;
  for (std::size_t i = 0; i < restart; ++i) lambda *= lambda_mult;
  return lambda;
}

std::uint64_t RestartPolicy::g_start_for(std::size_t restart) const {
  return g_start_rule == GStartRule::noisy ? 5 * (restart + 1) : fixed_g_start;
}

TrialRecord run_ipop(ProblemInstance& instance, const RestartPolicy& policy, std::uint64_t seed,
                     ControllerStats* stats) {
  const std::size_t dim = instance.dimension;
  policy.validate(dim);

  TrialRecord record;
  record.function_id = instance.function_id;
  record.instance_id = instance.instance_id;
  record.dimension = dim;
  record.seed = seed;
  record.algorithm = policy.algorithm;

  TrialStreams streams(seed);
  std::uniform_real_distribution<double> init_dist(-policy.init_bound, policy.init_bound);

  std::uint64_t evals = 0;
  double best_delta = std::numeric_limits<double>::infinity();
  const Objective objective = [&](const Vector& x) {
    ++evals;
    const auto [noisy, delta] = instance.evaluate(x, streams.noise);
    if (delta < best_delta) {
      best_delta = delta;
      record.events.push_back({evals, delta});
    }
    return noisy;
  };

  std::uint64_t n_hat_sum = 0;
  std::uint64_t eligible = 0;
  bool done = false;
  for (std::size_t restart = 0; !done; ++restart) {
    const std::size_t lambda = policy.lambda_for(dim, restart);
    if (evals + lambda > policy.budget) break;

    const CmaParams params = make_cma_params(dim, lambda, policy.active, policy.noisy_rates);
    Vector m0(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < m0.size(); ++i) m0[i] = init_dist(streams.init);
    CmaState state = init_state(params, m0, policy.sigma0);

    ControllerConfig cfg;
    cfg.surrogate_enabled = policy.algorithm == Algorithm::saacm;
    cfg.g_start = policy.g_start_for(restart);
    cfg.adapt_hyperparams = policy.adapt_hyperparams;
    cfg.lambda_hyp = policy.lambda_hyp;
    cfg.err_relaxation = policy.err_relaxation;
    SurrogateController ctrl(cfg, {}, streams.hp_seed + restart);
    GenerationHistory history(params);

    RestartLogEntry log;
    log.lambda = lambda;
    log.g_start = cfg.g_start;
    log.first_eval = evals;

    while (true) {
      if (evals + lambda > policy.budget) {
        log.stop_reason = "budget";
        done = true;
        break;
      }
      const CycleResult res = cycle(ctrl, params, state, objective, streams.sampling);
      ++log.cycles;
      history.record(res.fitness);
      if (best_delta <= policy.target_delta) {
        log.stop_reason = "target";
        done = true;
        break;
      }
      if (const auto reason = should_terminate(params, state, history)) {
        log.stop_reason = std::string(to_string(*reason));
        break;
      }
    }

    log.evals = evals - log.first_eval;
    log.mean_n_hat = ctrl.stats().mean_n_hat();
    n_hat_sum += ctrl.stats().n_hat_sum;
    eligible += ctrl.stats().eligible_cycles;
    if (stats) *stats += ctrl.stats();
    record.restarts.push_back(std::move(log));
  }

  record.total_evals = evals;
  record.restarts_used = record.restarts.empty() ? 0 : record.restarts.size() - 1;
  record.success = best_delta <= policy.target_delta;
  record.mean_n_hat =
      eligible == 0 ? 0.0 : static_cast<double>(n_hat_sum) / static_cast<double>(eligible);
  return record;
}

}  // namespace saacm
