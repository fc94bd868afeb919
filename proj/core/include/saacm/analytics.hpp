#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "saacm/cma.hpp"
#include "saacm/trial.hpp"

namespace saacm {

struct ErtResult {
  double target = 0.0;
  double ert = 0.0;  // +inf when no trial reached the target
  std::size_t n_success = 0;
  std::size_t n_trials = 0;
};

/// Evaluations spent before reaching `target` (total_evals for unsuccessful
/// trials), summed over trials and divided by the number of successes.
/// Throws std::invalid_argument on an empty record set.
ErtResult compute_ert(std::span<const TrialRecord> records, double target);

/// 50 targets log-uniformly spaced from 1e2 down to 1e-8.
std::vector<double> default_ecdf_targets();

struct EcdfPoint {
  double evals_per_dim = 0.0;
  double proportion = 0.0;
};

struct EcdfOptions {
  std::size_t bootstrap_n = 100;
  std::size_t max_chain = 100;  // draws before an unsuccessful chain is censored
};

/// Step curve of the share of (trial, target) pairs solved against
/// evaluations / D. Unsuccessful pairs are resampled by chaining runs drawn
/// uniformly from `records`.
std::vector<EcdfPoint> ecdf_bootstrap(std::span<const TrialRecord> records,
                                      std::span<const double> targets, Rng& rng,
                                      const EcdfOptions& options = {});

/// Median over trials of the evaluations to reach `target`; unsuccessful
/// trials count as +inf.
double median_evals_to_target(std::span<const TrialRecord> records, double target);

}  // namespace saacm
