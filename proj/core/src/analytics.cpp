#include "saacm/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace saacm {

ErtResult compute_ert(std::span<const TrialRecord> records, double target) {
  if (records.empty()) throw std::invalid_argument("compute_ert needs at least one trial");
  ErtResult res;
  res.target = target;
  res.n_trials = records.size();
  double spent = 0.0;
  for (const auto& r : records) {
    if (const auto hit = r.first_hit(target)) {
      spent += static_cast<double>(*hit);
      ++res.n_success;
    } else {
      spent += static_cast<double>(r.total_evals);
    }
  }
  res.ert = res.n_success == 0 ? std::numeric_limits<double>::infinity()
                               : spent / static_cast<double>(res.n_success);
  return res;
}

std::vector<double> default_ecdf_targets() {
  std::vector<double> targets(50);
  for (std::size_t k = 0; k < targets.size(); ++k)
    targets[k] = std::pow(10.0, 2.0 - 10.0 * static_cast<double>(k) / 49.0);
  return targets;
}

std::vector<EcdfPoint> ecdf_bootstrap(std::span<const TrialRecord> records,
                                      std::span<const double> targets, Rng& rng,
                                      const EcdfOptions& options) {
  struct Sample {
    double evals;
    double weight;
  };
  std::vector<Sample> samples;
  double max_evals_per_dim = 0.0;
  std::size_t pairs = 0;
  std::uniform_int_distribution<std::size_t> pick(0, records.empty() ? 0 : records.size() - 1);

  for (const double target : targets) {
    std::vector<std::optional<std::uint64_t>> hits;
    hits.reserve(records.size());
    for (const auto& r : records) hits.push_back(r.first_hit(target));

    for (std::size_t i = 0; i < records.size(); ++i) {
      const double dim = static_cast<double>(records[i].dimension);
      max_evals_per_dim = std::max(max_evals_per_dim,
                                   static_cast<double>(records[i].total_evals) / dim);
      ++pairs;
      if (hits[i]) {
        samples.push_back({static_cast<double>(*hits[i]) / dim, 1.0});
        continue;
      }
      if (options.bootstrap_n == 0) continue;
      const double weight = 1.0 / static_cast<double>(options.bootstrap_n);
      for (std::size_t b = 0; b < options.bootstrap_n; ++b) {
        double spent = static_cast<double>(records[i].total_evals);
        for (std::size_t draw = 0; draw < options.max_chain; ++draw) {
          const std::size_t j = pick(rng);
          if (hits[j]) {
            samples.push_back({(spent + static_cast<double>(*hits[j])) / dim, weight});
            break;
          }
          spent += static_cast<double>(records[j].total_evals);
        }
      }
    }
  }

  std::vector<EcdfPoint> curve{{0.0, 0.0}};
  if (pairs == 0) return curve;
  std::sort(samples.begin(), samples.end(),
            [](const Sample& a, const Sample& b) { return a.evals < b.evals; });
  double solved = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    solved += samples[k].weight;
    if (k + 1 < samples.size() && samples[k + 1].evals == samples[k].evals) continue;
    curve.push_back({samples[k].evals, std::min(1.0, solved / static_cast<double>(pairs))});
  }
  if (curve.back().evals_per_dim < max_evals_per_dim)
    curve.push_back({max_evals_per_dim, curve.back().proportion});
  return curve;
}

double median_evals_to_target(std::span<const TrialRecord> records, double target) {
  if (records.empty()) throw std::invalid_argument("median of an empty record set");
  std::vector<double> evals;
  evals.reserve(records.size());
  for (const auto& r : records) {
    const auto hit = r.first_hit(target);
    evals.push_back(hit ? static_cast<double>(*hit) : std::numeric_limits<double>::infinity());
  }
  std::sort(evals.begin(), evals.end());
  const std::size_t n = evals.size();
  if (n % 2 == 1) return evals[n / 2];
  const double a = evals[n / 2 - 1];
  const double b = evals[n / 2];
  if (std::isinf(b)) return b;
  return 0.5 * (a + b);
}

}  // namespace saacm
