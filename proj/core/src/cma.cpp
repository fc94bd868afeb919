#include "saacm/cma.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace saacm {

namespace {

constexpr double kEigenFloor = 1e-30;

double expected_norm(std::size_t dimension) {
  const double d = static_cast<double>(dimension);
  return std::sqrt(d) * (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d));
}

double median_of(std::vector<double> values) {
  const std::size_t n = values.size();
  std::sort(values.begin(), values.end());
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

std::size_t default_lambda(std::size_t dimension) {
  return 4 + static_cast<std::size_t>(
                 std::floor(3.0 * std::log(static_cast<double>(dimension))));
}

CmaParams make_cma_params(std::size_t dimension, std::size_t lambda,
                          bool active, bool noisy_rates) {
  if (dimension == 0) throw std::invalid_argument("dimension must be positive");
  if (lambda == 0) lambda = default_lambda(dimension);
  if (lambda < 2) throw std::invalid_argument("lambda must be at least 2");

  CmaParams p;
  p.dimension = dimension;
  p.lambda = lambda;
  p.mu = lambda / 2;
  p.active = active;
  p.noisy_rates = noisy_rates;

  const double d = static_cast<double>(dimension);
  Vector raw(static_cast<Eigen::Index>(lambda));
  for (std::size_t i = 0; i < lambda; ++i)
    raw[static_cast<Eigen::Index>(i)] =
        std::log((static_cast<double>(lambda) + 1.0) / 2.0) -
        std::log(static_cast<double>(i + 1));

  const auto mu = static_cast<Eigen::Index>(p.mu);
  p.weights = raw.head(mu) / raw.head(mu).sum();
  p.mu_eff = 1.0 / p.weights.squaredNorm();

  p.c_sigma = (p.mu_eff + 2.0) / (d + p.mu_eff + 5.0);
  p.d_sigma = 1.0 +
              2.0 * std::max(0.0, std::sqrt((p.mu_eff - 1.0) / (d + 1.0)) - 1.0) +
              p.c_sigma;
  p.c_c = (4.0 + p.mu_eff / d) / (d + 4.0 + 2.0 * p.mu_eff / d);

  constexpr double alpha_cov = 2.0;
  const double c1 = alpha_cov / ((d + 1.3) * (d + 1.3) + p.mu_eff);
  const double cmu =
      std::min(1.0 - c1, alpha_cov * (p.mu_eff - 2.0 + 1.0 / p.mu_eff) /
                             ((d + 2.0) * (d + 2.0) + alpha_cov * p.mu_eff / 2.0));

  // Negative weights mirror the log-scaled positive ones; their total mass is
  // the smallest of the three bounds that keep the update well behaved.
  const auto n_neg = static_cast<Eigen::Index>(lambda - p.mu);
  p.neg_weights = Vector::Zero(n_neg);
  if (active && n_neg > 0) {
    Vector neg = raw.tail(n_neg);
    const double neg_mass = -neg.sum();
    if (neg_mass > 0.0) {
      const double mu_eff_neg = neg.sum() * neg.sum() / neg.squaredNorm();
      const double alpha_mu = 1.0 + c1 / cmu;
      const double alpha_mu_eff = 1.0 + 2.0 * mu_eff_neg / (p.mu_eff + 2.0);
      const double alpha_posdef = (1.0 - c1 - cmu) / (d * cmu);
      const double scale = std::min({alpha_mu, alpha_mu_eff, alpha_posdef});
      p.neg_weights = neg * (scale / neg_mass);
    }
  }

  p.c_1 = noisy_rates ? c1 / 5.0 : c1;
  p.c_mu = noisy_rates ? cmu / 5.0 : cmu;
  p.validate();
  return p;
}

void CmaParams::validate() const {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("invalid CMA parameters: " + what);
  };
  if (dimension == 0) fail("dimension must be positive");
  if (mu < 1 || 2 * mu > lambda) fail("need 1 <= mu <= lambda/2");
  if (static_cast<std::size_t>(weights.size()) != mu) fail("weights size != mu");
  if (static_cast<std::size_t>(neg_weights.size()) != lambda - mu)
    fail("neg_weights size != lambda - mu");
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0)) fail("weights must be positive");
    if (i > 0 && weights[i] > weights[i - 1]) fail("weights must be non-increasing");
  }
  if (std::abs(weights.sum() - 1.0) > 1e-12) fail("weights must sum to 1");
  if ((neg_weights.array() > 0.0).any()) fail("neg_weights must be non-positive");
  if (!active && (neg_weights.array() != 0.0).any())
    fail("passive update needs zero neg_weights");
  if (!(c_1 + c_mu > 0.0) || c_1 + c_mu > 1.0) fail("need 0 < c_1 + c_mu <= 1");
  if (!(c_sigma > 0.0 && c_sigma < 1.0)) fail("need 0 < c_sigma < 1");
  if (!(d_sigma >= 1.0)) fail("need d_sigma >= 1");
}

std::size_t CmaParams::eigen_interval() const {
  const double rate = 10.0 * static_cast<double>(dimension) * (c_1 + c_mu);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(1.0 / rate)));
}

CmaState init_state(const CmaParams& params, const Vector& m0, double sigma0) {
  params.validate();
  const auto n = static_cast<Eigen::Index>(params.dimension);
  if (m0.size() != n)
    throw std::invalid_argument("initial mean has length " +
                                std::to_string(m0.size()) + ", expected " +
                                std::to_string(n));
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0))
    throw std::invalid_argument("initial step-size must be positive");

  CmaState s;
  s.mean = m0;
  s.sigma = sigma0;
  s.sigma0 = sigma0;
  s.cov = Matrix::Identity(n, n);
  s.p_sigma = Vector::Zero(n);
  s.p_c = Vector::Zero(n);
  s.basis = Matrix::Identity(n, n);
  s.axis_scale = Vector::Ones(n);
  s.best.point = m0;
  return s;
}

void refresh_decomposition(CmaState& state) {
  state.cov = state.cov.selfadjointView<Eigen::Upper>();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(state.cov);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition of the covariance failed");

  Vector eig = solver.eigenvalues();
  const double floor = kEigenFloor * std::max(eig.maxCoeff(), kEigenFloor);
  bool repaired = false;
  for (Eigen::Index i = 0; i < eig.size(); ++i) {
    if (eig[i] <= floor) {
      eig[i] = floor;
      repaired = true;
    }
  }
  state.basis = solver.eigenvectors();
  if (repaired) {
    state.cov = state.basis * eig.asDiagonal() * state.basis.transpose();
    state.cov = state.cov.selfadjointView<Eigen::Upper>();
  }
  state.axis_scale = eig.cwiseSqrt();
  state.decomposed_at = state.generation;
}

Offspring ask_from_z(const CmaState& state, Matrix z) {
  const auto n = state.mean.size();
  if (state.basis.rows() != n || state.basis.cols() != n ||
      state.axis_scale.size() != n)
    throw std::logic_error("covariance decomposition does not match the dimension");
  if (z.rows() != n) throw std::invalid_argument("z has wrong row count");

  Offspring off;
  off.y = state.basis * (state.axis_scale.asDiagonal() * z);
  off.points = (state.sigma * off.y).colwise() + state.mean;
  off.z = std::move(z);
  return off;
}

Offspring ask(const CmaParams& params, const CmaState& state, Rng& rng) {
  std::normal_distribution<double> normal;
  const auto n = static_cast<Eigen::Index>(params.dimension);
  const auto lambda = static_cast<Eigen::Index>(params.lambda);
  Matrix z(n, lambda);
  for (Eigen::Index j = 0; j < lambda; ++j)
    for (Eigen::Index i = 0; i < n; ++i) z(i, j) = normal(rng);
  return ask_from_z(state, std::move(z));
}

std::vector<std::size_t> rank_order(std::span<const double> fitness) {
  std::vector<std::size_t> order(fitness.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return fitness[a] < fitness[b];
  });
  return order;
}

void tell(const CmaParams& params, CmaState& state, const Offspring& offspring,
          std::span<const double> fitness) {
  if (offspring.size() != params.lambda || fitness.size() != params.lambda)
    throw std::invalid_argument("tell expects exactly lambda offspring and fitness values");
  for (double f : fitness)
    if (!std::isfinite(f)) throw std::invalid_argument("non-finite fitness value");

  const auto order = rank_order(fitness);
  const auto n = static_cast<Eigen::Index>(params.dimension);
  const double d = static_cast<double>(params.dimension);
  const std::size_t mu = params.mu;

  Vector y_w = Vector::Zero(n);
  Vector z_w = Vector::Zero(n);
  for (std::size_t i = 0; i < mu; ++i) {
    const auto col = static_cast<Eigen::Index>(order[i]);
    const double w = params.weights[static_cast<Eigen::Index>(i)];
    y_w.noalias() += w * offspring.y.col(col);
    z_w.noalias() += w * offspring.z.col(col);
  }

  state.mean.noalias() += state.sigma * y_w;

  const double cs = params.c_sigma;
  state.p_sigma = (1.0 - cs) * state.p_sigma +
                  std::sqrt(cs * (2.0 - cs) * params.mu_eff) * (state.basis * z_w);

  const double chi_n = expected_norm(params.dimension);
  const double gens = static_cast<double>(state.generation + 1);
  const double ps_norm = state.p_sigma.norm();
  const bool h_sigma =
      ps_norm / std::sqrt(1.0 - std::pow(1.0 - cs, 2.0 * gens)) <
      (1.4 + 2.0 / (d + 1.0)) * chi_n;

  const double cc = params.c_c;
  state.p_c = (1.0 - cc) * state.p_c;
  if (h_sigma) state.p_c.noalias() += std::sqrt(cc * (2.0 - cc) * params.mu_eff) * y_w;

  const double c1 = params.c_1;
  const double cmu = params.c_mu;
  const double weight_sum = params.weights.sum() + params.neg_weights.sum();
  const double h_loss = h_sigma ? 0.0 : cc * (2.0 - cc);
  const double decay = 1.0 + c1 * h_loss - c1 - cmu * weight_sum;

  Matrix rank_mu = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < mu; ++i) {
    const auto col = static_cast<Eigen::Index>(order[i]);
    rank_mu.selfadjointView<Eigen::Upper>().rankUpdate(
        offspring.y.col(col), params.weights[static_cast<Eigen::Index>(i)]);
  }
  if (params.active) {
    for (std::size_t i = mu; i < params.lambda; ++i) {
      const double w = params.neg_weights[static_cast<Eigen::Index>(i - mu)];
      if (w == 0.0) continue;
      const auto col = static_cast<Eigen::Index>(order[i]);
      const double z_sq = offspring.z.col(col).squaredNorm();
      if (!(z_sq > 0.0)) continue;
      rank_mu.selfadjointView<Eigen::Upper>().rankUpdate(offspring.y.col(col),
                                                          w * d / z_sq);
    }
  }

  Matrix updated = decay * state.cov;
  updated.selfadjointView<Eigen::Upper>().rankUpdate(state.p_c, c1);
  updated.triangularView<Eigen::Upper>() += cmu * rank_mu;
  state.cov = updated.selfadjointView<Eigen::Upper>();

  state.sigma *= std::exp((cs / params.d_sigma) * (ps_norm / chi_n - 1.0));
  if (!std::isfinite(state.sigma) || !(state.sigma > 0.0))
    throw std::runtime_error("step-size diverged");

  ++state.generation;
  if (state.generation - state.decomposed_at >= params.eigen_interval())
    refresh_decomposition(state);
}

void record_evaluations(CmaState& state, const Offspring& offspring,
                        std::span<const double> fitness) {
  state.eval_count += fitness.size();
  for (std::size_t i = 0; i < fitness.size(); ++i) {
    if (fitness[i] < state.best.fitness) {
      state.best.fitness = fitness[i];
      state.best.point = offspring.point(i);
    }
  }
}

std::string_view to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::tol_fun: return "tol_fun";
    case TerminationReason::tol_x: return "tol_x";
    case TerminationReason::condition_cov: return "condition_cov";
    case TerminationReason::stagnation: return "stagnation";
    case TerminationReason::eq_fun_values: return "eq_fun_values";
  }
  return "unknown";
}

GenerationHistory::GenerationHistory(const CmaParams& params)
    : dimension_(params.dimension) {
  const double ratio = 30.0 * static_cast<double>(params.dimension) /
                       static_cast<double>(params.lambda);
  tol_fun_window_ = 10 + static_cast<std::size_t>(std::ceil(ratio));
  stagnation_window_ = 120 + static_cast<std::size_t>(std::ceil(ratio));
  flat_rank_ = static_cast<std::size_t>(
      std::ceil(0.1 + static_cast<double>(params.lambda) / 4.0));
}

void GenerationHistory::record(std::span<const double> fitness) {
  if (fitness.empty()) return;
  std::vector<double> sorted(fitness.begin(), fitness.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t k = std::min(flat_rank_, sorted.size()) - 1;

  best_.push_back(sorted.front());
  median_.push_back(median_of(sorted));
  flat_.push_back(sorted.front() == sorted[k]);
  last_range_ = sorted.back() - sorted.front();
  while (best_.size() > stagnation_window_) {
    best_.pop_front();
    median_.pop_front();
    flat_.pop_front();
  }
}

std::optional<TerminationReason> should_terminate(
    const CmaParams& params, const CmaState& state,
    const GenerationHistory& history, const TerminationThresholds& thresholds) {
  const double max_axis = state.axis_scale.maxCoeff();
  const double min_axis = state.axis_scale.minCoeff();
  if (!(min_axis > 0.0) ||
      (max_axis * max_axis) / (min_axis * min_axis) > thresholds.max_condition)
    return TerminationReason::condition_cov;

  const double tol_x = thresholds.tol_x_factor * state.sigma0;
  bool all_small = true;
  for (Eigen::Index i = 0; i < state.mean.size() && all_small; ++i) {
    const double spread =
        state.sigma * std::max(std::abs(state.p_c[i]), std::sqrt(state.cov(i, i)));
    all_small = spread < tol_x;
  }
  if (all_small) return TerminationReason::tol_x;

  const std::size_t n = history.size();
  if (n >= history.tol_fun_window()) {
    const auto& best = history.best();
    const auto first = best.end() - static_cast<std::ptrdiff_t>(history.tol_fun_window());
    const auto [lo, hi] = std::minmax_element(first, best.end());
    if (*hi - *lo < thresholds.tol_fun && history.last_range() < thresholds.tol_fun)
      return TerminationReason::tol_fun;
  }

  const std::size_t flat_window = params.dimension;
  if (n >= flat_window) {
    const auto& flat = history.flat();
    const auto count = std::count(flat.end() - static_cast<std::ptrdiff_t>(flat_window),
                                  flat.end(), true);
    if (3 * static_cast<std::size_t>(count) > flat_window)
      return TerminationReason::eq_fun_values;
  }

  if (n >= history.stagnation_window()) {
    const std::size_t part = std::max<std::size_t>(1, (3 * n) / 10);
    auto slice_median = [&](const std::deque<double>& q, bool recent) {
      std::vector<double> v = recent ? std::vector<double>(q.end() - static_cast<std::ptrdiff_t>(part), q.end())
                                     : std::vector<double>(q.begin(), q.begin() + static_cast<std::ptrdiff_t>(part));
      return median_of(std::move(v));
    };
    if (slice_median(history.best(), true) >= slice_median(history.best(), false) &&
        slice_median(history.median(), true) >= slice_median(history.median(), false))
      return TerminationReason::stagnation;
  }

  return std::nullopt;
}

}  // namespace saacm
