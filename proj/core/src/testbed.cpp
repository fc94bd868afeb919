#include "saacm/testbed.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace saacm {

namespace {

constexpr std::array<BaseFunction, 10> kNoisyBases{
    BaseFunction::sphere,        BaseFunction::rosenbrock,  BaseFunction::sphere,
    BaseFunction::rosenbrock,    BaseFunction::step_ellipsoid, BaseFunction::ellipsoid,
    BaseFunction::diff_powers,   BaseFunction::schaffer_f7, BaseFunction::griewank_rosenbrock,
    BaseFunction::gallagher101,
};
constexpr std::array<const char*, 10> kNoisyNames{
    "sphere",      "rosenbrock",  "sphere_sev",          "rosenbrock_sev", "step_ellipsoid",
    "ellipsoid",   "diff_powers", "schaffer_f7",         "griewank_rosenbrock",
    "gallagher101",
};
constexpr std::array<NoiseModel, 3> kNoiseOrder{NoiseModel::gaussian, NoiseModel::uniform,
                                                NoiseModel::cauchy};

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Portable generator for instance data: the same triple must regenerate the
// same instance regardless of the standard library in use.
class InstanceStream {
 public:
  explicit InstanceStream(std::uint64_t seed) : state_(seed) {}

  double uniform() {  // in (0, 1)
    return (static_cast<double>(splitmix64(state_) >> 11) + 0.5) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(splitmix64(state_) % i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

Matrix random_rotation(std::size_t dimension, InstanceStream& stream) {
  const auto n = static_cast<Eigen::Index>(dimension);
  Matrix g(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = stream.normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

double t_osz_scalar(double x) {
  if (x == 0.0) return 0.0;
  const double xh = std::log(std::abs(x));
  const double c1 = x > 0.0 ? 10.0 : 5.5;
  const double c2 = x > 0.0 ? 7.9 : 3.1;
  const double sign = x > 0.0 ? 1.0 : -1.0;
  return sign * std::exp(xh + 0.049 * (std::sin(c1 * xh) + std::sin(c2 * xh)));
}

Vector t_osz(Vector v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = t_osz_scalar(v[i]);
  return v;
}

Vector t_asy(Vector v, double beta) {
  const double denom = static_cast<double>(v.size() - 1);
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v[i] > 0.0)
      v[i] = std::pow(v[i], 1.0 + beta * static_cast<double>(i) / denom * std::sqrt(v[i]));
  return v;
}

// Diagonal of Lambda^alpha: alpha^(0.5 (i-1)/(D-1)).
Vector lambda_diag(std::size_t dimension, double alpha) {
  Vector d(static_cast<Eigen::Index>(dimension));
  const double denom = static_cast<double>(dimension - 1);
  for (Eigen::Index i = 0; i < d.size(); ++i)
    d[i] = std::pow(alpha, 0.5 * static_cast<double>(i) / denom);
  return d;
}

double exponent_ratio(Eigen::Index i, std::size_t dimension) {
  return static_cast<double>(i) / static_cast<double>(dimension - 1);
}

double rosenbrock_sum(const Vector& z) {
  double f = 0.0;
  for (Eigen::Index i = 0; i + 1 < z.size(); ++i) {
    const double a = z[i] * z[i] - z[i + 1];
    const double b = z[i] - 1.0;
    f += 100.0 * a * a + b * b;
  }
  return f;
}

}  // namespace

NoiseConfig NoiseConfig::make(NoiseModel model, Severity severity, std::size_t dimension) {
  NoiseConfig c;
  c.model = model;
  c.severity = severity;
  const bool severe = severity == Severity::severe;
  const double d = static_cast<double>(dimension);
  switch (model) {
    case NoiseModel::none:
      break;
    case NoiseModel::gaussian:
      c.beta = severe ? 1.0 : 0.01;
      break;
    case NoiseModel::uniform:
      c.alpha = severe ? 0.49 + 1.0 / d : 0.01 * (0.49 + 1.0 / d);
      c.beta = severe ? 1.0 : 0.01;
      break;
    case NoiseModel::cauchy:
      c.alpha = severe ? 1.0 : 0.01;
      c.p = severe ? 0.2 : 0.05;
      break;
  }
  return c;
}

void NoiseConfig::validate() const {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("noise probability must lie in [0, 1]");
  if (!(alpha >= 0.0) || !(beta >= 0.0))
    throw std::invalid_argument("noise amplitudes must be non-negative");
}

double apply_noise(const NoiseConfig& cfg, double delta, double value, Rng& rng) {
  if (cfg.model == NoiseModel::none || delta <= kNoiseGate) return value;

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal;
  double noisy = delta;
  switch (cfg.model) {
    case NoiseModel::none:
      break;
    case NoiseModel::gaussian:
      noisy = delta * std::exp(cfg.beta * normal(rng));
      break;
    case NoiseModel::uniform: {
      const double u1 = unif(rng);
      const double u2 = unif(rng);
      noisy = delta * std::pow(u1, cfg.beta) *
              std::max(1.0, std::pow(1e9 / (delta + 1e-99), cfg.alpha * u2));
      break;
    }
    case NoiseModel::cauchy: {
      const bool hit = unif(rng) < cfg.p;
      double jump = 0.0;
      if (hit) {
        const double g1 = normal(rng);
        const double g2 = normal(rng);
        jump = g1 / (std::abs(g2) + 1e-199);
      }
      noisy = delta + cfg.alpha * std::max(0.0, 1000.0 + jump);
      break;
    }
  }
  if (noisy == delta) return value;
  return value + (noisy - delta);
}

std::string_view to_string(BaseFunction base) {
  switch (base) {
    case BaseFunction::sphere: return "sphere";
    case BaseFunction::rosenbrock: return "rosenbrock";
    case BaseFunction::step_ellipsoid: return "step_ellipsoid";
    case BaseFunction::ellipsoid: return "ellipsoid";
    case BaseFunction::diff_powers: return "diff_powers";
    case BaseFunction::schaffer_f7: return "schaffer_f7";
    case BaseFunction::griewank_rosenbrock: return "griewank_rosenbrock";
    case BaseFunction::gallagher101: return "gallagher101";
    case BaseFunction::rastrigin: return "rastrigin";
  }
  return "unknown";
}

bool is_known_function(int id) {
  return (id >= 101 && id <= 130) || id == 1 || id == 8 || id == 10 || id == 15;
}

std::vector<int> noisy_function_ids() {
  std::vector<int> ids(30);
  std::iota(ids.begin(), ids.end(), 101);
  return ids;
}

std::string function_name(int id) {
  if (!is_known_function(id)) throw std::invalid_argument("unknown function id " + std::to_string(id));
  switch (id) {
    case 1: return "f1_sphere";
    case 8: return "f8_rosenbrock";
    case 10: return "f10_ellipsoid";
    case 15: return "f15_rastrigin";
    default: break;
  }
  const int k = id - 101;
  static constexpr std::array<const char*, 3> kNoise{"gauss", "unif", "cauchy"};
  return "f" + std::to_string(id) + "_" + kNoisyNames[static_cast<std::size_t>(k / 3)] + "_" +
         kNoise[static_cast<std::size_t>(k % 3)];
}

std::uint64_t instance_seed(int function_id, std::size_t dimension, int instance_id) {
  std::uint64_t state = 0x5a5acafe2012ULL;
  std::uint64_t h = splitmix64(state);
  for (std::uint64_t v : {static_cast<std::uint64_t>(function_id),
                          static_cast<std::uint64_t>(dimension),
                          static_cast<std::uint64_t>(instance_id)}) {
    state ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h = splitmix64(state);
  }
  return h;
}

ProblemInstance make_instance(int function_id, std::size_t dimension, int instance_id) {
  if (!is_known_function(function_id))
    throw std::invalid_argument("unknown function id " + std::to_string(function_id));
  if (dimension < 2) throw std::invalid_argument("dimension must be at least 2");

  ProblemInstance inst;
  inst.function_id = function_id;
  inst.dimension = dimension;
  inst.instance_id = instance_id;

  switch (function_id) {
    case 1: inst.base = BaseFunction::sphere; break;
    case 8: inst.base = BaseFunction::rosenbrock; break;
    case 10: inst.base = BaseFunction::ellipsoid; break;
    case 15: inst.base = BaseFunction::rastrigin; break;
    default: {
      const int k = function_id - 101;
      inst.base = kNoisyBases[static_cast<std::size_t>(k / 3)];
      const Severity sev = k < 6 ? Severity::moderate : Severity::severe;
      inst.noise = NoiseConfig::make(kNoiseOrder[static_cast<std::size_t>(k % 3)], sev, dimension);
    }
  }

  InstanceStream stream(instance_seed(function_id, dimension, instance_id));
  const auto n = static_cast<Eigen::Index>(dimension);
  inst.x_opt.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) inst.x_opt[i] = stream.uniform(-4.0, 4.0);
  inst.f_opt = stream.uniform(-100.0, 100.0);

  switch (inst.base) {
    case BaseFunction::ellipsoid:
    case BaseFunction::diff_powers:
    case BaseFunction::schaffer_f7:
    case BaseFunction::griewank_rosenbrock:
    case BaseFunction::gallagher101:
    case BaseFunction::rastrigin:
      inst.rotation = random_rotation(dimension, stream);
      break;
    default:
      break;
  }

  if (inst.base == BaseFunction::gallagher101) {
    constexpr std::size_t kPeaks = 101;
    std::vector<int> cond_order(kPeaks - 1);
    std::iota(cond_order.begin(), cond_order.end(), 0);
    stream.shuffle(cond_order);
    for (std::size_t i = 0; i < kPeaks; ++i) {
      GallagherPeak peak;
      double alpha = 1000.0;
      if (i == 0) {
        peak.center = inst.x_opt;
        peak.weight = 10.0;
      } else {
        peak.center.resize(n);
        for (Eigen::Index k = 0; k < n; ++k) peak.center[k] = stream.uniform(-5.0, 5.0);
        peak.weight = 1.1 + 8.0 * static_cast<double>(i - 1) / 99.0;
        alpha = std::pow(1000.0, 2.0 * static_cast<double>(cond_order[i - 1]) / 99.0);
      }
      std::vector<double> diag(dimension);
      for (std::size_t k = 0; k < dimension; ++k)
        diag[k] = std::pow(alpha, static_cast<double>(k) / static_cast<double>(dimension - 1)) /
                  std::pow(alpha, 0.25);
      stream.shuffle(diag);
      peak.conditioning = Eigen::Map<Vector>(diag.data(), n);
      inst.peaks.push_back(std::move(peak));
    }
  }
  return inst;
}

double ProblemInstance::delta(const Vector& x) const {
  if (x.size() != static_cast<Eigen::Index>(dimension))
    throw std::invalid_argument("point has wrong dimension");
  const std::size_t d = dimension;
  const Vector shifted = x - x_opt;
  const Vector rotated = rotation ? Vector(*rotation * shifted) : shifted;

  switch (base) {
    case BaseFunction::sphere:
      return shifted.squaredNorm();

    case BaseFunction::rosenbrock: {
      const double scale = std::max(1.0, std::sqrt(static_cast<double>(d)) / 8.0);
      return rosenbrock_sum((scale * shifted).array() + 1.0);
    }

    case BaseFunction::step_ellipsoid: {
      const Vector zh = lambda_diag(d, 10.0).cwiseProduct(shifted);
      double sum = 0.0;
      for (Eigen::Index i = 0; i < zh.size(); ++i) {
        const double zt = std::abs(zh[i]) > 0.5 ? std::floor(0.5 + zh[i])
                                                 : std::floor(0.5 + 10.0 * zh[i]) / 10.0;
        sum += std::pow(10.0, 2.0 * exponent_ratio(i, d)) * zt * zt;
      }
      return 0.1 * std::max(std::abs(zh[0]) / 1e4, sum);
    }

    case BaseFunction::ellipsoid: {
      const double exponent = function_id == 10 ? 6.0 : 4.0;
      const Vector z = t_osz(rotated);
      double sum = 0.0;
      for (Eigen::Index i = 0; i < z.size(); ++i)
        sum += std::pow(10.0, exponent * exponent_ratio(i, d)) * z[i] * z[i];
      return sum;
    }

    case BaseFunction::diff_powers: {
      double sum = 0.0;
      for (Eigen::Index i = 0; i < rotated.size(); ++i)
        sum += std::pow(std::abs(rotated[i]), 2.0 + 4.0 * exponent_ratio(i, d));
      return sum;
    }

    case BaseFunction::schaffer_f7: {
      const Vector z = lambda_diag(d, 10.0).cwiseProduct(t_asy(rotated, 0.5));
      double sum = 0.0;
      for (Eigen::Index i = 0; i + 1 < z.size(); ++i) {
        const double s = std::sqrt(z[i] * z[i] + z[i + 1] * z[i + 1]);
        const double root = std::sqrt(s);
        const double wave = std::sin(50.0 * std::pow(s, 0.2));
        sum += root + root * wave * wave;
      }
      const double mean = sum / static_cast<double>(d - 1);
      return mean * mean;
    }

    case BaseFunction::griewank_rosenbrock: {
      const double scale = std::max(1.0, std::sqrt(static_cast<double>(d)) / 8.0);
      const Vector z = (scale * rotated).array() + 1.0;
      double sum = 0.0;
      for (Eigen::Index i = 0; i + 1 < z.size(); ++i) {
        const double a = z[i] * z[i] - z[i + 1];
        const double b = z[i] - 1.0;
        const double s = 100.0 * a * a + b * b;
        sum += s / 4000.0 - std::cos(s);
      }
      return 1.0 + sum / static_cast<double>(d - 1);
    }

    case BaseFunction::gallagher101: {
      double best = 0.0;
      const Matrix& r = *rotation;
      for (const auto& peak : peaks) {
        const Vector u = r * (x - peak.center);
        const double quad = u.cwiseProduct(peak.conditioning).dot(u);
        best = std::max(best, peak.weight * std::exp(-quad / (2.0 * static_cast<double>(d))));
      }
      const double v = t_osz_scalar(10.0 - best);
      return v * v;
    }

    case BaseFunction::rastrigin: {
      const Vector z = lambda_diag(d, 10.0).cwiseProduct(t_asy(t_osz(rotated), 0.2));
      double cos_sum = 0.0;
      for (Eigen::Index i = 0; i < z.size(); ++i)
        cos_sum += std::cos(2.0 * std::numbers::pi * z[i]);
      return 10.0 * (static_cast<double>(d) - cos_sum) + z.squaredNorm();
    }
  }
  return 0.0;
}

ProblemInstance::Evaluation ProblemInstance::evaluate(const Vector& x, Rng& rng) {
  ++evaluations_;
  const double d = delta(x);
  return {apply_noise(noise, d, d + f_opt, rng), d};
}

}  // namespace saacm
