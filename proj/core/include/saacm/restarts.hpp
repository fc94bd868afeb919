#pragma once

#include <cstddef>
#include <cstdint>

#include "saacm/surrogate_controller.hpp"
#include "saacm/testbed.hpp"
#include "saacm/trial.hpp"

namespace saacm {

enum class GStartRule {
  noisy,  // 5 * (i_restart + 1)
  fixed,  // RestartPolicy::fixed_g_start
};

struct RestartPolicy {
  std::uint64_t budget = 0;
  std::size_t lambda0 = 0;  // 0 selects default_lambda(D)
  std::size_t lambda_mult = 2;
  GStartRule g_start_rule = GStartRule::noisy;
  std::uint64_t fixed_g_start = 10;
  double target_delta = 1e-8;
  Algorithm algorithm = Algorithm::saacm;
  bool active = true;
  bool noisy_rates = true;
  bool adapt_hyperparams = true;
  std::size_t lambda_hyp = 20;
  double err_relaxation = 0.2;
  double sigma0 = 2.0;
  double init_bound = 4.0;  // initial mean uniform in [-init_bound, init_bound]^D

  /// Budget 10^6 * D and the defaults above.
  static RestartPolicy defaults(std::size_t dimension);

  void validate(std::size_t dimension) const;
  std::size_t lambda_for(std::size_t dimension, std::size_t restart) const;
  std::uint64_t g_start_for(std::size_t restart) const;
};

/// IPOP loop: restart with a doubled population whenever a termination
/// criterion fires, until the budget is spent or the target is reached.
/// The noise-free channel of `instance` is used for logging and stopping only.
/// Controller statistics of all restarts are summed into `stats` if given.
TrialRecord run_ipop(ProblemInstance& instance, const RestartPolicy& policy, std::uint64_t seed,
                     ControllerStats* stats = nullptr);

}  // namespace saacm
