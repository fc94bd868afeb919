#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace saacm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

/// Strategy parameters of the weighted-recombination CMA-ES.
///
/// `weights` holds the mu positive recombination weights (sum 1), and
/// `neg_weights` the lambda - mu weights applied to the worst offspring in the
/// active covariance update. With `active == false` the negative weights are
/// all zero. `noisy_rates` divides the covariance learning rates by five.
struct CmaParams {
  std::size_t dimension = 0;
  std::size_t lambda = 0;
  std::size_t mu = 0;
  Vector weights;
  Vector neg_weights;
  double mu_eff = 0.0;
  double c_sigma = 0.0;
  double d_sigma = 0.0;
  double c_c = 0.0;
  double c_1 = 0.0;
  double c_mu = 0.0;
  bool active = true;
  bool noisy_rates = false;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;

  /// Generations between two eigendecompositions of C.
  std::size_t eigen_interval() const;
};

/// Population size used when none is given: 4 + floor(3 ln D).
std::size_t default_lambda(std::size_t dimension);

/// Builds the default parameter set. `lambda == 0` selects default_lambda().
CmaParams make_cma_params(std::size_t dimension, std::size_t lambda = 0,
                          bool active = true, bool noisy_rates = false);

struct BestSeen {
  Vector point;
  double fitness = std::numeric_limits<double>::infinity();
};

struct CmaState {
  Vector mean;
  double sigma = 1.0;
  double sigma0 = 1.0;
  Matrix cov;
  Vector p_sigma;
  Vector p_c;
  Matrix basis;       // eigenvectors of cov (columns)
  Vector axis_scale;  // square roots of the eigenvalues of cov
  std::uint64_t generation = 0;
  std::uint64_t eval_count = 0;
  std::uint64_t decomposed_at = 0;
  BestSeen best;
};

/// Offspring of one generation, one column per individual. `z` holds the
/// standard-normal draws and `y = B diag(d) z` the unscaled steps.
struct Offspring {
  Matrix points;
  Matrix z;
  Matrix y;

  std::size_t size() const { return static_cast<std::size_t>(points.cols()); }
  Vector point(std::size_t i) const { return points.col(static_cast<Eigen::Index>(i)); }
};

CmaState init_state(const CmaParams& params, const Vector& m0, double sigma0);

/// Recomputes the eigendecomposition of the covariance, clamping eigenvalues
/// below 1e-30 of the largest to that floor and reassembling C.
void refresh_decomposition(CmaState& state);

/// Samples lambda offspring around the mean.
Offspring ask(const CmaParams& params, const CmaState& state, Rng& rng);

/// Maps caller-supplied standard-normal draws (D x lambda) to offspring.
Offspring ask_from_z(const CmaState& state, Matrix z);

/// Updates mean, step-size, paths and covariance from offspring fitness
/// (lower is better). Ties keep submission order.
void tell(const CmaParams& params, CmaState& state, const Offspring& offspring,
          std::span<const double> fitness);

/// Accounts for lambda true-objective evaluations: bumps eval_count and the
/// best-seen point.
void record_evaluations(CmaState& state, const Offspring& offspring,
                        std::span<const double> fitness);

/// Stable ascending ranking of fitness values.
std::vector<std::size_t> rank_order(std::span<const double> fitness);

enum class TerminationReason {
  tol_fun,
  tol_x,
  condition_cov,
  stagnation,
  eq_fun_values,
};

std::string_view to_string(TerminationReason reason);

struct TerminationThresholds {
  double tol_fun = 1e-12;
  double tol_x_factor = 1e-12;  // multiplied by sigma0
  double max_condition = 1e14;
};

/// Per-generation summary of true-objective fitness used by the termination
/// tests. Retains the last stagnation_window() generations.
class GenerationHistory {
 public:
  explicit GenerationHistory(const CmaParams& params);

  void record(std::span<const double> fitness);

  std::size_t size() const { return best_.size(); }
  std::size_t tol_fun_window() const { return tol_fun_window_; }
  std::size_t stagnation_window() const { return stagnation_window_; }

  const std::deque<double>& best() const { return best_; }
  const std::deque<double>& median() const { return median_; }
  const std::deque<bool>& flat() const { return flat_; }
  double last_range() const { return last_range_; }

 private:
  std::size_t dimension_;
  std::size_t tol_fun_window_;
  std::size_t stagnation_window_;
  std::size_t flat_rank_;
  std::deque<double> best_;
  std::deque<double> median_;
  std::deque<bool> flat_;
  double last_range_ = std::numeric_limits<double>::infinity();
};

std::optional<TerminationReason> should_terminate(
    const CmaParams& params, const CmaState& state,
    const GenerationHistory& history,
    const TerminationThresholds& thresholds = {});

}  // namespace saacm
