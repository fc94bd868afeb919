#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "saacm/cma.hpp"

namespace saacm {

enum class NoiseModel { none, gaussian, uniform, cauchy };
enum class Severity { moderate, severe };

/// Noise parameters: `beta` for gaussian, (`alpha`, `beta`) for uniform and
/// (`alpha`, `p`) for cauchy.
struct NoiseConfig {
  NoiseModel model = NoiseModel::none;
  Severity severity = Severity::moderate;
  double alpha = 0.0;
  double beta = 0.0;
  double p = 0.0;

  static NoiseConfig make(NoiseModel model, Severity severity, std::size_t dimension);
  void validate() const;
};

/// Noise is not applied once the noise-free distance to the optimum drops to
/// this value, so the final target stays observable.
inline constexpr double kNoiseGate = 1e-8;

/// Applies `cfg` to the fitness `value` whose noise-free distance to the
/// optimum is `delta`. The noise acts multiplicatively (or additively for
/// cauchy) on `delta`.
double apply_noise(const NoiseConfig& cfg, double delta, double value, Rng& rng);

enum class BaseFunction {
  sphere,
  rosenbrock,
  step_ellipsoid,
  ellipsoid,
  diff_powers,
  schaffer_f7,
  griewank_rosenbrock,
  gallagher101,
  rastrigin,
};

std::string_view to_string(BaseFunction base);

/// 101..130 for the noisy suite; 1, 8, 10 and 15 are the noiseless timing
/// functions (sphere, rosenbrock, ellipsoid, rastrigin).
bool is_known_function(int function_id);
std::vector<int> noisy_function_ids();
std::string function_name(int function_id);

struct GallagherPeak {
  Vector center;
  Vector conditioning;  // diagonal of the peak's quadratic form
  double weight = 0.0;
};

class ProblemInstance {
 public:
  int function_id = 0;
  std::size_t dimension = 0;
  int instance_id = 0;
  BaseFunction base = BaseFunction::sphere;
  Vector x_opt;
  double f_opt = 0.0;
  NoiseConfig noise;
  std::optional<Matrix> rotation;
  std::vector<GallagherPeak> peaks;

  /// Base function value at x, i.e. the noise-free distance to f_opt.
  double delta(const Vector& x) const;
  double evaluate_true(const Vector& x) const { return delta(x) + f_opt; }
  double evaluate_noisy(const Vector& x, Rng& rng) { return evaluate(x, rng).noisy; }

  struct Evaluation {
    double noisy;
    double delta;
  };
  /// Noisy value together with the noise-free delta; counts one evaluation.
  Evaluation evaluate(const Vector& x, Rng& rng);

  std::uint64_t evaluations() const { return evaluations_; }

 private:
  std::uint64_t evaluations_ = 0;
};

/// Deterministic in (function_id, dimension, instance_id). Throws
/// std::invalid_argument on an unknown id or dimension < 2.
ProblemInstance make_instance(int function_id, std::size_t dimension, int instance_id);

/// Seed derived from the instance triple.
std::uint64_t instance_seed(int function_id, std::size_t dimension, int instance_id);

}  // namespace saacm
