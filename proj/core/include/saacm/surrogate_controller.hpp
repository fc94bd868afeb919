#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "saacm/cma.hpp"
#include "saacm/rank_svm.hpp"

namespace saacm {

/// Noisy objective as seen by the optimizer.
using Objective = std::function<double(const Vector&)>;

struct ControllerConfig {
  bool surrogate_enabled = true;
  std::uint64_t g_start = 10;
  std::size_t n_hat_max = 20;
  double err_thresh = 0.45;
  // Exponential relaxation of the measured error before it drives n_hat;
  // 1 feeds the raw error through.
  double err_relaxation = 0.2;
  double err_initial = 0.5;
  std::size_t lambda_hyp = 20;
  bool adapt_hyperparams = true;
  bool parallel_tournament = false;
};

/// Truncated-normal search distribution over the hyper-parameter box, in the
/// (log-)transformed coordinates of SurrogateHyperparams::to_search_space().
class HyperparamSampler {
 public:
  explicit HyperparamSampler(const SurrogateHyperparams& center, std::uint64_t seed = 0);

  SurrogateHyperparams sample();
  void recenter(const SurrogateHyperparams& winner);

  const std::array<double, SurrogateHyperparams::kCount>& mean() const { return mean_; }
  const std::array<double, SurrogateHyperparams::kCount>& stddev() const { return stddev_; }

 private:
  std::array<double, SurrogateHyperparams::kCount> mean_{};
  std::array<double, SurrogateHyperparams::kCount> stddev_{};
  std::array<double, SurrogateHyperparams::kCount> lo_{};
  std::array<double, SurrogateHyperparams::kCount> hi_{};
  Rng rng_;
};

struct ControllerStats {
  std::uint64_t cycles = 0;
  std::uint64_t eligible_cycles = 0;  // cycles at or after g_start
  std::uint64_t true_generations = 0;
  std::uint64_t surrogate_generations = 0;
  std::uint64_t n_hat_sum = 0;        // surrogate generations summed over eligible cycles
  std::uint64_t trainings = 0;
  double training_seconds = 0.0;
  std::uint64_t tournament_trainings = 0;
  double tournament_seconds = 0.0;
  std::uint64_t tournaments = 0;

  ControllerStats& operator+=(const ControllerStats& other);

  double mean_n_hat() const {
    return eligible_cycles == 0 ? 0.0
                                : static_cast<double>(n_hat_sum) / static_cast<double>(eligible_cycles);
  }
};

class SurrogateController {
 public:
  explicit SurrogateController(ControllerConfig config = {},
                               SurrogateHyperparams hp = {}, std::uint64_t hp_seed = 0);

  const ControllerConfig& config() const { return config_; }
  std::size_t n_hat() const { return n_hat_; }
  std::optional<double> err_last() const { return err_last_; }
  double err_smoothed() const { return err_smoothed_; }
  const std::vector<ArchiveEntry>& archive() const { return archive_; }
  const SurrogateHyperparams& hp_current() const { return hp_current_; }
  const HyperparamSampler& sampler() const { return sampler_; }
  const ControllerStats& stats() const { return stats_; }

  void set_n_hat(std::size_t n_hat);

  /// Linear law n_hat = floor(n_hat_max * max(0, thresh - err) / thresh).
  std::size_t update_lifelength(double err);

  /// Folds a fresh measurement into the relaxed error and applies the
  /// linear law to the result.
  std::size_t observe_error(double err);

  /// Samples lambda_hyp candidates, trains each on the archive minus the last
  /// generation and keeps the one with the lowest error on that generation.
  /// Leaves hp_current unchanged when the archive cannot support training.
  const SurrogateHyperparams& adapt_hyperparams(const CmaState& cma,
                                                const Matrix& last_points,
                                                std::span<const double> last_fitness);

  /// Appends a true-evaluated generation to the archive.
  void append(const Offspring& offspring, std::span<const double> fitness,
              std::uint64_t first_eval_index);

 private:
  friend struct CycleRunner;

  ControllerConfig config_;
  std::size_t n_hat_ = 0;
  std::optional<double> err_last_;
  double err_smoothed_;
  std::vector<ArchiveEntry> archive_;
  SurrogateHyperparams hp_current_;
  HyperparamSampler sampler_;
  ControllerStats stats_;
};

struct CycleResult {
  std::uint64_t true_evals = 0;
  std::size_t surrogate_generations = 0;
  std::optional<double> model_error;
  std::vector<double> fitness;  // true-objective values of the evaluated generation
};

/// One surrogate-assisted cycle: up to n_hat generations on the surrogate,
/// then one generation on the objective. Only the latter counts towards
/// cma.eval_count.
CycleResult cycle(SurrogateController& ctrl, const CmaParams& params, CmaState& cma,
                  const Objective& objective, Rng& rng);

}  // namespace saacm
