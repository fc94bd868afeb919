#include "saacm/rank_svm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace saacm {

namespace {

struct Range {
  double lo;
  double hi;
  bool log_scale;
};

constexpr std::array<Range, SurrogateHyperparams::kCount> kRanges{{
    {0.2, 1.0, false},   // n_train_frac
    {0.1, 10.0, true},   // kernel_width_mult
    {1e-2, 1e6, true},   // cost_base
    {0.0, 3.0, false},   // cost_power
    {0.25, 4.0, true},   // n_iter_mult
}};

std::array<double, SurrogateHyperparams::kCount> as_array(const SurrogateHyperparams& hp) {
  return {hp.n_train_frac, hp.kernel_width_mult, hp.cost_base, hp.cost_power,
          hp.n_iter_mult};
}

SurrogateHyperparams from_array(const std::array<double, SurrogateHyperparams::kCount>& v) {
  return {v[0], v[1], v[2], v[3], v[4]};
}

}  // namespace

SurrogateHyperparams SurrogateHyperparams::lower() {
  std::array<double, kCount> v{};
  for (std::size_t i = 0; i < kCount; ++i) v[i] = kRanges[i].lo;
  return from_array(v);
}

SurrogateHyperparams SurrogateHyperparams::upper() {
  std::array<double, kCount> v{};
  for (std::size_t i = 0; i < kCount; ++i) v[i] = kRanges[i].hi;
  return from_array(v);
}

SurrogateHyperparams SurrogateHyperparams::clamped() const {
  auto v = as_array(*this);
  for (std::size_t i = 0; i < kCount; ++i) {
    if (std::isnan(v[i])) v[i] = kRanges[i].lo;
    v[i] = std::clamp(v[i], kRanges[i].lo, kRanges[i].hi);
  }
  return from_array(v);
}

bool SurrogateHyperparams::in_range() const {
  const auto v = as_array(*this);
  for (std::size_t i = 0; i < kCount; ++i)
    if (!(v[i] >= kRanges[i].lo && v[i] <= kRanges[i].hi)) return false;
  return true;
}

std::array<double, SurrogateHyperparams::kCount> SurrogateHyperparams::to_search_space() const {
  auto v = as_array(*this);
  for (std::size_t i = 0; i < kCount; ++i)
    if (kRanges[i].log_scale) v[i] = std::log10(v[i]);
  return v;
}

SurrogateHyperparams SurrogateHyperparams::from_search_space(
    const std::array<double, kCount>& u) {
  auto v = u;
  for (std::size_t i = 0; i < kCount; ++i)
    if (kRanges[i].log_scale) v[i] = std::pow(10.0, v[i]);
  return from_array(v).clamped();
}

std::size_t training_cap(std::size_t dimension) {
  return static_cast<std::size_t>(
      std::floor(40.0 + 4.0 * std::pow(static_cast<double>(dimension), 1.7)));
}

std::vector<TrainingPoint> build_training_set(std::span<const ArchiveEntry> archive,
                                              std::size_t dimension,
                                              const SurrogateHyperparams& hp) {
  if (archive.empty()) throw std::invalid_argument("cannot build a training set from an empty archive");
  const auto cap = static_cast<std::size_t>(std::ceil(
      hp.n_train_frac * static_cast<double>(training_cap(dimension))));

  // Walk back from the most recent entry; exact duplicates keep the latest.
  std::vector<std::size_t> picked;
  for (std::size_t k = archive.size(); k-- > 0 && picked.size() < cap;) {
    const Vector& x = archive[k].point;
    const bool seen = std::any_of(picked.begin(), picked.end(), [&](std::size_t j) {
      return archive[j].point == x;
    });
    if (!seen) picked.push_back(k);
  }
  // Oldest first, so that equal fitness values keep evaluation order.
  std::reverse(picked.begin(), picked.end());
  std::stable_sort(picked.begin(), picked.end(), [&](std::size_t a, std::size_t b) {
    return archive[a].fitness < archive[b].fitness;
  });

  std::vector<TrainingPoint> out;
  out.reserve(picked.size());
  for (std::size_t k : picked) out.push_back({archive[k].point, archive[k].fitness});
  return out;
}

Matrix whitening_transform(const Matrix& basis, const Vector& axis_scale) {
  return axis_scale.cwiseInverse().asDiagonal() * basis.transpose();
}

Matrix whitening_transform(const Matrix& cov) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  if (solver.info() != Eigen::Success || solver.eigenvalues().minCoeff() <= 0.0)
    throw std::invalid_argument("covariance must be symmetric positive definite");
  return whitening_transform(solver.eigenvectors(), solver.eigenvalues().cwiseSqrt());
}

double kernel(const Vector& x, const Vector& y, const KernelMetric& metric) {
  const double dist_sq = (metric.transform * (x - y)).squaredNorm();
  return std::exp(-dist_sq / (2.0 * metric.bandwidth * metric.bandwidth));
}

std::uint64_t training_iterations(std::size_t n, const SurrogateHyperparams& hp) {
  return static_cast<std::uint64_t>(
      std::ceil(hp.n_iter_mult * 1000.0 * static_cast<double>(n)));
}

RankingModel train(std::vector<TrainingPoint> points, const SurrogateHyperparams& hp,
                   const Matrix& basis, const Vector& axis_scale) {
  const std::size_t n = points.size();
  if (n < 2) throw std::invalid_argument("ranking model needs at least two training points");

  RankingModel model;
  model.metric_.transform = whitening_transform(basis, axis_scale);
  const auto dim = static_cast<Eigen::Index>(points.front().point.size());
  const auto cols = static_cast<Eigen::Index>(n);
  model.whitened_.resize(model.metric_.transform.rows(), cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (points[static_cast<std::size_t>(j)].point.size() != dim)
      throw std::invalid_argument("training points have inconsistent dimension");
    model.whitened_.col(j) = model.metric_.transform * points[static_cast<std::size_t>(j)].point;
  }

  // Squared whitened distances and the base bandwidth.
  const Vector sq_norms = model.whitened_.colwise().squaredNorm().transpose();
  Matrix dist_sq = (-2.0 * model.whitened_.transpose() * model.whitened_);
  dist_sq.colwise() += sq_norms;
  dist_sq.rowwise() += sq_norms.transpose();
  double dist_sum = 0.0;
  for (Eigen::Index j = 0; j < cols; ++j) {
    dist_sq(j, j) = 0.0;
    for (Eigen::Index i = 0; i < j; ++i) {
      const double v = std::max(0.0, dist_sq(i, j));
      dist_sq(i, j) = dist_sq(j, i) = v;
      dist_sum += std::sqrt(v);
    }
  }
  const double mean_dist = dist_sum / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
  if (!(mean_dist > 0.0)) throw std::invalid_argument("all training points are identical");
  model.metric_.bandwidth = hp.kernel_width_mult * mean_dist;

  const double inv_two_s2 = 1.0 / (2.0 * model.metric_.bandwidth * model.metric_.bandwidth);
  const Matrix gram = (-inv_two_s2 * dist_sq).array().exp().matrix();

  // Constraint i asks for score(p_i) + 1 <= score(p_{i+1}), i.e. a margin on
  // phi(p_{i+1}) - phi(p_i). q(i, j) is the inner product of two such
  // difference vectors.
  const Eigen::Index m = cols - 1;
  Matrix q(m, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < m; ++i)
      q(i, j) = gram(i + 1, j + 1) - gram(i + 1, j) - gram(i, j + 1) + gram(i, j);

  model.costs_.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const bool tied = points[static_cast<std::size_t>(i)].fitness ==
                      points[static_cast<std::size_t>(i + 1)].fitness;
    model.costs_[i] = tied ? 0.0
                           : hp.cost_base * std::pow(static_cast<double>(m - i), hp.cost_power);
  }

  model.alphas_ = Vector::Zero(m);
  Vector grad = Vector::Ones(m);  // 1 - q * alpha
  const std::uint64_t iterations = training_iterations(n, hp);
  for (std::uint64_t t = 0; t < iterations; ++t) {
    const auto i = static_cast<Eigen::Index>(t % static_cast<std::uint64_t>(m));
    const double qii = q(i, i);
    if (!(qii > 1e-300)) continue;
    const double old = model.alphas_[i];
    const double next = std::clamp(old + grad[i] / qii, 0.0, model.costs_[i]);
    const double delta = next - old;
    if (delta == 0.0) continue;
    model.alphas_[i] = next;
    grad.noalias() -= delta * q.col(i);
  }

  // score(x) = sum_i alpha_i (k(x, p_{i+1}) - k(x, p_i)) = sum_j coef_j k(x, p_j)
  model.score_coef_ = Vector::Zero(cols);
  for (Eigen::Index i = 0; i < m; ++i) {
    model.score_coef_[i + 1] += model.alphas_[i];
    model.score_coef_[i] -= model.alphas_[i];
  }
  model.points_ = std::move(points);
  model.trained_ = true;
  return model;
}

RankingModel train(std::vector<TrainingPoint> points, const SurrogateHyperparams& hp,
                   const Matrix& cov) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  if (solver.info() != Eigen::Success || solver.eigenvalues().minCoeff() <= 0.0)
    throw std::invalid_argument("covariance must be symmetric positive definite");
  return train(std::move(points), hp, solver.eigenvectors(),
               solver.eigenvalues().cwiseSqrt());
}

double RankingModel::predict(const Vector& x) const {
  if (!trained_) throw std::logic_error("ranking model is not trained");
  const Vector z = metric_.transform * x;
  const double inv_two_s2 = 1.0 / (2.0 * metric_.bandwidth * metric_.bandwidth);
  double score = 0.0;
  for (Eigen::Index j = 0; j < whitened_.cols(); ++j) {
    if (score_coef_[j] == 0.0) continue;
    score += score_coef_[j] * std::exp(-(whitened_.col(j) - z).squaredNorm() * inv_two_s2);
  }
  return score;
}

std::vector<double> RankingModel::predict(const Matrix& points) const {
  std::vector<double> out(static_cast<std::size_t>(points.cols()));
  for (Eigen::Index j = 0; j < points.cols(); ++j)
    out[static_cast<std::size_t>(j)] = predict(Vector(points.col(j)));
  return out;
}

double model_error(std::span<const double> predicted, std::span<const double> truth) {
  if (predicted.size() != truth.size())
    throw std::invalid_argument("model_error: size mismatch");
  const std::size_t n = truth.size();
  if (n < 2) throw std::invalid_argument("model_error needs at least two points");
  double errors = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const int t = (truth[i] < truth[j]) - (truth[i] > truth[j]);
      const int p = (predicted[i] < predicted[j]) - (predicted[i] > predicted[j]);
      if (t == p) continue;
      errors += (t == 0 || p == 0) ? 0.5 : 1.0;
    }
  }
  return errors / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

double model_error(const RankingModel& model, const Matrix& points,
                   std::span<const double> truth) {
  return model_error(model.predict(points), truth);
}

}  // namespace saacm
