#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "saacm/cma.hpp"

namespace saacm {

/// Surrogate hyper-parameters. Values outside the admissible box are clamped
/// by clamped(); the box is exposed through `lower()` / `upper()`.
struct SurrogateHyperparams {
  double n_train_frac = 1.0;
  double kernel_width_mult = 1.0;
  double cost_base = 1e3;
  double cost_power = 1.0;
  double n_iter_mult = 1.0;

  static constexpr std::size_t kCount = 5;

  static SurrogateHyperparams lower();
  static SurrogateHyperparams upper();

  /// Copy with every field clamped into [lower(), upper()].
  SurrogateHyperparams clamped() const;
  bool in_range() const;

  /// Coordinates in the search space of the tournament: log10 for the
  /// log-scaled fields, identity for the others.
  std::array<double, kCount> to_search_space() const;
  static SurrogateHyperparams from_search_space(const std::array<double, kCount>& u);

  bool operator==(const SurrogateHyperparams&) const = default;
};

struct ArchiveEntry {
  Vector point;
  double fitness = 0.0;
  std::uint64_t eval_index = 0;
};

struct TrainingPoint {
  Vector point;
  double fitness = 0.0;
};

/// floor(40 + 4 D^1.7): the training-set cap used with n_train_frac = 1.
std::size_t training_cap(std::size_t dimension);

/// Most recent distinct archive points, best fitness first. The number kept is
/// min(ceil(n_train_frac * training_cap(D)), distinct points in the archive).
std::vector<TrainingPoint> build_training_set(std::span<const ArchiveEntry> archive,
                                              std::size_t dimension,
                                              const SurrogateHyperparams& hp);

/// Whitening transform A = diag(1/d) B^T, so that A^T A = C^-1.
Matrix whitening_transform(const Matrix& basis, const Vector& axis_scale);
Matrix whitening_transform(const Matrix& cov);

struct KernelMetric {
  Matrix transform;
  double bandwidth = 1.0;
};

/// exp(-|A (x - y)|^2 / (2 s^2)).
double kernel(const Vector& x, const Vector& y, const KernelMetric& metric);

/// Ranking SVM over adjacent-rank constraints. Scores are comparison-only:
/// a lower score means a better predicted fitness.
class RankingModel {
 public:
  RankingModel() = default;

  bool trained() const { return trained_; }
  std::size_t size() const { return static_cast<std::size_t>(whitened_.cols()); }
  const Matrix& transform() const { return metric_.transform; }
  double bandwidth() const { return metric_.bandwidth; }
  const Vector& alphas() const { return alphas_; }
  const Vector& costs() const { return costs_; }
  const std::vector<TrainingPoint>& train_points() const { return points_; }

  /// Throws std::logic_error on an untrained model.
  double predict(const Vector& x) const;
  std::vector<double> predict(const Matrix& points) const;

 private:
  friend RankingModel train(std::vector<TrainingPoint>, const SurrogateHyperparams&,
                            const Matrix&, const Vector&);

  std::vector<TrainingPoint> points_;
  KernelMetric metric_;
  Matrix whitened_;   // A p_i, one column per training point
  Vector alphas_;     // one per adjacent pair (i, i+1)
  Vector costs_;
  Vector score_coef_; // per training point, collapsed from alphas_
  bool trained_ = false;
};

/// Number of dual coordinate updates for a training set of size n.
std::uint64_t training_iterations(std::size_t n, const SurrogateHyperparams& hp);

/// Trains on points sorted by fitness (best first) in the metric of the
/// covariance whose eigendecomposition is (basis, axis_scale).
RankingModel train(std::vector<TrainingPoint> points, const SurrogateHyperparams& hp,
                   const Matrix& basis, const Vector& axis_scale);

/// Convenience overload taking the covariance matrix itself.
RankingModel train(std::vector<TrainingPoint> points, const SurrogateHyperparams& hp,
                   const Matrix& cov);

/// Fraction of point pairs whose predicted order contradicts the true order.
/// A pair tied on one side but strictly ordered on the other counts half.
double model_error(std::span<const double> predicted, std::span<const double> truth);
double model_error(const RankingModel& model, const Matrix& points,
                   std::span<const double> truth);

}  // namespace saacm
