#include "saacm/surrogate_controller.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

namespace saacm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

ControllerStats& ControllerStats::operator+=(const ControllerStats& o) {
  cycles += o.cycles;
  eligible_cycles += o.eligible_cycles;
  true_generations += o.true_generations;
  surrogate_generations += o.surrogate_generations;
  n_hat_sum += o.n_hat_sum;
  trainings += o.trainings;
  training_seconds += o.training_seconds;
  tournament_trainings += o.tournament_trainings;
  tournament_seconds += o.tournament_seconds;
  tournaments += o.tournaments;
  return *this;
}

HyperparamSampler::HyperparamSampler(const SurrogateHyperparams& center, std::uint64_t seed)
    : rng_(seed) {
  lo_ = SurrogateHyperparams::lower().to_search_space();
  hi_ = SurrogateHyperparams::upper().to_search_space();
  for (std::size_t i = 0; i < SurrogateHyperparams::kCount; ++i)
    stddev_[i] = (hi_[i] - lo_[i]) / 6.0;
  recenter(center);
}

void HyperparamSampler::recenter(const SurrogateHyperparams& winner) {
  mean_ = winner.clamped().to_search_space();
}

SurrogateHyperparams HyperparamSampler::sample() {
  std::normal_distribution<double> normal;
  std::array<double, SurrogateHyperparams::kCount> u{};
  for (std::size_t i = 0; i < u.size(); ++i) {
    double v = mean_[i];
    for (int attempt = 0; attempt < 100; ++attempt) {
      v = mean_[i] + stddev_[i] * normal(rng_);
      if (v >= lo_[i] && v <= hi_[i]) break;
    }
    u[i] = std::clamp(v, lo_[i], hi_[i]);
  }
  return SurrogateHyperparams::from_search_space(u);
}

SurrogateController::SurrogateController(ControllerConfig config, SurrogateHyperparams hp,
                                         std::uint64_t hp_seed)
    : config_(config),
      err_smoothed_(config.err_initial),
      hp_current_(hp.clamped()),
      sampler_(hp_current_, hp_seed) {
  if (config_.lambda_hyp < 1) throw std::invalid_argument("lambda_hyp must be at least 1");
  if (!(config_.err_thresh > 0.0 && config_.err_thresh <= 1.0))
    throw std::invalid_argument("err_thresh must lie in (0, 1]");
  if (!(config_.err_relaxation > 0.0 && config_.err_relaxation <= 1.0))
    throw std::invalid_argument("err_relaxation must lie in (0, 1]");
  if (!(config_.err_initial >= 0.0 && config_.err_initial <= 1.0))
    throw std::invalid_argument("err_initial must lie in [0, 1]");
}

void SurrogateController::set_n_hat(std::size_t n_hat) {
  n_hat_ = std::min(n_hat, config_.n_hat_max);
}

std::size_t SurrogateController::update_lifelength(double err) {
  if (!(err >= 0.0 && err <= 1.0)) throw std::invalid_argument("model error must lie in [0, 1]");
  const double thresh = config_.err_thresh;
  const double share = std::max(0.0, thresh - err) / thresh;
  n_hat_ = static_cast<std::size_t>(
      std::floor(static_cast<double>(config_.n_hat_max) * share));
  n_hat_ = std::min(n_hat_, config_.n_hat_max);
  return n_hat_;
}

std::size_t SurrogateController::observe_error(double err) {
  if (!(err >= 0.0 && err <= 1.0)) throw std::invalid_argument("model error must lie in [0, 1]");
  err_last_ = err;
  const double r = config_.err_relaxation;
  err_smoothed_ = (1.0 - r) * err_smoothed_ + r * err;
  return update_lifelength(err_smoothed_);
}

void SurrogateController::append(const Offspring& offspring, std::span<const double> fitness,
                                 std::uint64_t first_eval_index) {
  if (!archive_.empty() && first_eval_index <= archive_.back().eval_index)
    throw std::logic_error("archive evaluation indices must increase");
  for (std::size_t i = 0; i < fitness.size(); ++i)
    archive_.push_back({offspring.point(i), fitness[i], first_eval_index + i});
}

const SurrogateHyperparams& SurrogateController::adapt_hyperparams(
    const CmaState& cma, const Matrix& last_points, std::span<const double> last_fitness) {
  const auto n_last = static_cast<std::size_t>(last_points.cols());
  if (n_last < 2 || last_fitness.size() != n_last || archive_.size() < n_last + 2)
    return hp_current_;

  const std::span<const ArchiveEntry> history(archive_.data(), archive_.size() - n_last);
  const std::size_t dim = static_cast<std::size_t>(cma.mean.size());

  std::vector<SurrogateHyperparams> candidates;
  candidates.reserve(config_.lambda_hyp);
  for (std::size_t k = 0; k < config_.lambda_hyp; ++k) candidates.push_back(sampler_.sample());

  auto score = [&](const SurrogateHyperparams& hp) -> double {
    try {
      auto model = train(build_training_set(history, dim, hp), hp, cma.basis, cma.axis_scale);
      return model_error(model, last_points, last_fitness);
    } catch (const std::invalid_argument&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  const auto start = Clock::now();
  std::vector<double> errors(candidates.size());
  if (config_.parallel_tournament) {
    std::vector<std::future<double>> jobs;
    jobs.reserve(candidates.size());
    for (const auto& hp : candidates)
      jobs.push_back(std::async(std::launch::async, score, std::cref(hp)));
    for (std::size_t k = 0; k < jobs.size(); ++k) errors[k] = jobs[k].get();
  } else {
    for (std::size_t k = 0; k < candidates.size(); ++k) errors[k] = score(candidates[k]);
  }
  stats_.tournament_seconds += seconds_since(start);
  stats_.tournament_trainings += candidates.size();
  ++stats_.tournaments;

  // Strict comparison keeps the earliest sample on ties.
  std::size_t winner = 0;
  for (std::size_t k = 1; k < errors.size(); ++k)
    if (errors[k] < errors[winner]) winner = k;
  if (!std::isfinite(errors[winner])) return hp_current_;

  hp_current_ = candidates[winner];
  sampler_.recenter(hp_current_);
  return hp_current_;
}

struct CycleRunner {
  SurrogateController& ctrl;
  const CmaParams& params;
  CmaState& cma;
  const Objective& objective;
  Rng& rng;

  std::vector<double> evaluate(const Offspring& off) {
    std::vector<double> fitness(off.size());
    for (std::size_t i = 0; i < off.size(); ++i) fitness[i] = objective(off.point(i));
    return fitness;
  }

  void commit_true_generation(const Offspring& off, std::span<const double> fitness) {
    ctrl.append(off, fitness, cma.eval_count + 1);
    record_evaluations(cma, off, fitness);
    tell(params, cma, off, fitness);
    ++ctrl.stats_.true_generations;
  }

  CycleResult plain() {
    CycleResult result;
    const Offspring off = ask(params, cma, rng);
    result.fitness = evaluate(off);
    commit_true_generation(off, result.fitness);
    result.true_evals = off.size();
    return result;
  }

  CycleResult run() {
    auto& cfg = ctrl.config_;
    ++ctrl.stats_.cycles;
    if (!cfg.surrogate_enabled || cma.generation < cfg.g_start || ctrl.archive_.size() < 2)
      return plain();
    ++ctrl.stats_.eligible_cycles;

    RankingModel model;
    try {
      const auto start = Clock::now();
      model = train(build_training_set(ctrl.archive_, params.dimension, ctrl.hp_current_),
                    ctrl.hp_current_, cma.basis, cma.axis_scale);
      ctrl.stats_.training_seconds += seconds_since(start);
      ++ctrl.stats_.trainings;
    } catch (const std::invalid_argument&) {
      return plain();
    }

    CycleResult result;
    for (std::size_t g = 0; g < ctrl.n_hat_; ++g) {
      const Offspring off = ask(params, cma, rng);
      const std::vector<double> scores = model.predict(off.points);
      tell(params, cma, off, scores);
      ++result.surrogate_generations;
    }
    ctrl.stats_.surrogate_generations += result.surrogate_generations;
    ctrl.stats_.n_hat_sum += result.surrogate_generations;

    const Offspring off = ask(params, cma, rng);
    const std::vector<double> predicted = model.predict(off.points);
    result.fitness = evaluate(off);
    commit_true_generation(off, result.fitness);
    result.true_evals = off.size();

    const double err = model_error(predicted, result.fitness);
    result.model_error = err;
    ctrl.observe_error(err);

    if (cfg.adapt_hyperparams) ctrl.adapt_hyperparams(cma, off.points, result.fitness);
    return result;
  }
};

CycleResult cycle(SurrogateController& ctrl, const CmaParams& params, CmaState& cma,
                  const Objective& objective, Rng& rng) {
  return CycleRunner{ctrl, params, cma, objective, rng}.run();
}

}  // namespace saacm
