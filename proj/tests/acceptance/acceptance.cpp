// Acceptance gate: prints one PASS/FAIL line per criterion and exits non-zero
// if any fails. Tolerances are fixed here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "saacm/analytics.hpp"
#include "saacm/cma.hpp"
#include "saacm/harness.hpp"
#include "saacm/rank_svm.hpp"
#include "saacm/restarts.hpp"
#include "saacm/surrogate_controller.hpp"
#include "saacm/testbed.hpp"

using namespace saacm;

namespace {

constexpr double kTarget = 1e-8;

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
    pass = pass && ok;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Matrix random_orthogonal(std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ();
}

Vector random_vector(std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
  return v;
}

Verdict sphere_convergence() {
  Verdict v;
  RestartPolicy policy = RestartPolicy::defaults(5);
  policy.algorithm = Algorithm::acma;
  policy.noisy_rates = false;
  policy.budget = 5000;
  policy.target_delta = kTarget;
  int solved = 0;
  for (int iid = 1; iid <= 15; ++iid) {
    ProblemInstance inst = make_instance(1, 5, iid);
    const TrialRecord rec = run_ipop(inst, policy, trial_seed(1, 1, 5, iid));
    const auto hit = rec.first_hit(kTarget);
    solved += hit && *hit <= 5000;
  }
  v.require(solved >= 14, std::to_string(solved) + "/15 reach 1e-8 within 5000 evals");
  return v;
}

struct Battery {
  std::vector<TrialRecord> acma, saacm;
};

Battery run_battery(int fid) {
  RunConfig cfg;
  cfg.functions = {fid};
  cfg.dims = {5};
  cfg.instances = 15;
  cfg.budget_mult = 1e4;
  cfg.algorithm = Algorithm::acma;
  Battery b;
  b.acma = run_trials(cfg);
  cfg.algorithm = Algorithm::saacm;
  b.saacm = run_trials(cfg);
  return b;
}

double ratio(const Battery& b) {
  return median_evals_to_target(b.saacm, kTarget) / median_evals_to_target(b.acma, kTarget);
}

std::string medians(const Battery& b) {
  return "saacm " + fmt("%.0f", median_evals_to_target(b.saacm, kTarget)) + " vs acma " +
         fmt("%.0f", median_evals_to_target(b.acma, kTarget));
}

Verdict speedup(const Battery& f101, const Battery& f103) {
  Verdict v;
  const double r1 = ratio(f101), r3 = ratio(f103);
  v.require(r1 <= 0.7, "f101 ratio " + fmt("%.3f", r1) + " (" + medians(f101) + ")");
  v.require(r3 <= 0.7, "f103 ratio " + fmt("%.3f", r3) + " (" + medians(f103) + ")");
  return v;
}

Verdict severe_noise(const Battery& f107) {
  Verdict v;
  const double r = ratio(f107);
  // Each trial's time average of n_hat over its eligible cycles, then the
  // mean over trials.
  double mean_n_hat = 0.0;
  for (const auto& rec : f107.saacm) mean_n_hat += rec.mean_n_hat;
  mean_n_hat /= static_cast<double>(f107.saacm.size());
  v.require(r <= 1.3, "f107 ratio " + fmt("%.3f", r) + " (" + medians(f107) + ")");
  v.require(mean_n_hat < 1.0, "mean n_hat " + fmt("%.3f", mean_n_hat));
  return v;
}

TrialRecord random_record(Rng& rng) {
  std::uniform_int_distribution<int> n_events(0, 8);
  std::uniform_int_distribution<std::uint64_t> gap(1, 50);
  std::uniform_real_distribution<double> shrink(0.0, 0.5);
  TrialRecord r;
  r.dimension = 5;
  std::uint64_t at = 0;
  double delta = std::pow(10.0, std::uniform_real_distribution<double>(-2.0, 3.0)(rng));
  for (int k = n_events(rng); k > 0; --k) {
    at += gap(rng);
    delta *= shrink(rng) * 1e-2;
    r.events.push_back({at, delta});
  }
  r.total_evals = at + gap(rng) - 1;
  return r;
}

// Walks every evaluation of every trial with integer counters.
double ert_oracle(const std::vector<TrialRecord>& records, double target) {
  std::uint64_t spent = 0, successes = 0;
  for (const auto& r : records) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t next = 0;
    for (std::uint64_t e = 1; e <= r.total_evals; ++e) {
      while (next < r.events.size() && r.events[next].eval_index == e) best = r.events[next++].delta_f;
      ++spent;
      if (best <= target) {
        ++successes;
        break;
      }
    }
  }
  return successes ? static_cast<double>(spent) / static_cast<double>(successes)
                   : std::numeric_limits<double>::infinity();
}

Verdict ert_matches_oracle() {
  Verdict v;
  Rng rng(4);
  std::uniform_int_distribution<int> n_trials(1, 10);
  std::uniform_real_distribution<double> log_target(-10.0, 3.0);
  int agree = 0;
  for (int set = 0; set < 1000; ++set) {
    std::vector<TrialRecord> recs;
    for (int k = n_trials(rng); k > 0; --k) recs.push_back(random_record(rng));
    const double target = std::pow(10.0, log_target(rng));
    agree += compute_ert(recs, target).ert == ert_oracle(recs, target);
  }
  v.require(agree == 1000, std::to_string(agree) + "/1000 record sets agree exactly");
  return v;
}

// Runs 50 surrogate-assisted cycles (g_start 0) and returns every mean and
// step size visited.
std::vector<double> trajectory(const std::function<double(const Vector&)>& f) {
  const std::size_t d = 5;
  const CmaParams params = make_cma_params(d);
  CmaState cma = init_state(params, Vector::Constant(static_cast<Eigen::Index>(d), 1.0), 0.5);
  ControllerConfig cc;
  cc.g_start = 2;
  cc.lambda_hyp = 4;
  SurrogateController ctrl(cc, {}, 9);
  Rng rng(17);
  const Objective obj = f;
  std::vector<double> out;
  for (int g = 0; g < 50; ++g) {
    cycle(ctrl, params, cma, obj, rng);
    out.insert(out.end(), cma.mean.data(), cma.mean.data() + cma.mean.size());
    out.push_back(cma.sigma);
  }
  return out;
}

double kendall_tau(const std::vector<double>& a, const std::vector<double>& b) {
  double conc = 0.0, disc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double s = (a[i] - a[j]) * (b[i] - b[j]);
      conc += s > 0;
      disc += s < 0;
    }
  return (conc - disc) / (0.5 * static_cast<double>(a.size() * (a.size() - 1)));
}

Verdict invariance() {
  Verdict v;
  auto ellipsoid = [](const Vector& x) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) s += std::pow(10.0, static_cast<double>(i)) * x[i] * x[i];
    return s;
  };
  const auto a = trajectory(ellipsoid);
  const auto b = trajectory([&](const Vector& x) { return std::log1p(ellipsoid(x)); });
  v.require(a == b, "50-generation trajectories f vs log(1+f) bitwise equal");

  Rng rng(5);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t d = 5;
    const Matrix r = random_orthogonal(d, rng);
    Matrix c = random_orthogonal(d, rng);
    c = c * random_vector(d, rng).cwiseAbs().array().exp().matrix().asDiagonal() * c.transpose();
    const Vector x = random_vector(d, rng), y = random_vector(d, rng);
    const KernelMetric m{whitening_transform(c), 1.7};
    const KernelMetric mr{whitening_transform(Matrix(r * c * r.transpose())), 1.7};
    worst = std::max(worst, std::abs(kernel(r * x, r * y, mr) - kernel(x, y, m)));
  }
  v.require(worst <= 1e-10, "kernel congruence max err " + fmt("%.2e", worst));

  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<TrainingPoint> pts;
  for (int i = 0; i < 20; ++i) {
    Vector x(2);
    x << u(rng), u(rng);
    pts.push_back({x, x[0]});
  }
  std::sort(pts.begin(), pts.end(),
            [](const TrainingPoint& p, const TrainingPoint& q) { return p.fitness < q.fitness; });
  const RankingModel model = train(pts, {}, Matrix::Identity(2, 2));
  std::vector<double> pred, truth;
  for (const auto& p : pts) {
    pred.push_back(model.predict(p.point));
    truth.push_back(p.fitness);
  }
  const double tau = kendall_tau(pred, truth);
  v.require(tau == 1.0, "kendall tau " + fmt("%.3f", tau) + " on 20 points");
  return v;
}

Verdict noise_statistics() {
  Verdict v;
  Rng rng(6);
  const int n = 100000;

  const NoiseConfig g = NoiseConfig::make(NoiseModel::gaussian, Severity::moderate, 5);
  std::vector<double> logs(n);
  for (auto& l : logs) l = std::log(apply_noise(g, 1.0, 1.0, rng));
  double mean = 0.0;
  for (double l : logs) mean += l;
  mean /= n;
  double ss = 0.0;
  for (double l : logs) ss += (l - mean) * (l - mean);
  const double sd = std::sqrt(ss / (n - 1));
  v.require(g.beta == 0.01 && std::abs(sd - 0.01) <= 0.001,
            "gaussian log-ratio std " + fmt("%.5f", sd));

  const NoiseConfig c = NoiseConfig::make(NoiseModel::cauchy, Severity::severe, 5);
  const double baseline = 1.0 + ((1.0 + c.alpha * 1000.0) - 1.0);
  int perturbed = 0;
  for (int k = 0; k < n; ++k) perturbed += apply_noise(c, 1.0, 1.0, rng) != baseline;
  const double freq = static_cast<double>(perturbed) / n;
  v.require(c.p == 0.2 && freq >= 0.18 && freq <= 0.22, "cauchy outlier frequency " + fmt("%.4f", freq));

  std::uniform_real_distribution<double> below(0.0, kNoiseGate);
  std::uniform_int_distribution<int> pick(0, 5);
  int exact = 0;
  for (int k = 0; k < 10000; ++k) {
    const auto model = static_cast<NoiseModel>(1 + pick(rng) % 3);
    const auto sev = pick(rng) < 3 ? Severity::moderate : Severity::severe;
    const double delta = below(rng);
    exact += apply_noise(NoiseConfig::make(model, sev, 5), delta, delta + 30.0, rng) == delta + 30.0;
  }
  v.require(exact == 10000, "gate exact in " + std::to_string(exact) + "/10000");
  return v;
}

Verdict configuration(const Battery& f101) {
  Verdict v;
  bool caps = true;
  std::string listed;
  for (std::size_t d : {2u, 5u, 10u, 20u, 40u}) {
    const auto expect = static_cast<std::size_t>(std::floor(40.0 + 4.0 * std::pow(static_cast<double>(d), 1.7)));
    caps = caps && training_cap(d) == expect;
    listed += (listed.empty() ? "" : ",") + std::to_string(training_cap(d));
  }
  v.require(caps, "training caps " + listed);

  const RestartPolicy policy = RestartPolicy::defaults(5);
  bool schedule = true;
  for (std::size_t r = 0; r < 6; ++r) schedule = schedule && policy.g_start_for(r) == 5 * (r + 1);
  for (const auto& rec : f101.saacm)
    for (std::size_t r = 0; r < rec.restarts.size(); ++r)
      schedule = schedule && rec.restarts[r].g_start == 5 * (r + 1);
  v.require(schedule, "g_start 5,10,15,... in policy and trial logs");

  ControllerConfig cc;
  cc.g_start = 0;
  cc.adapt_hyperparams = false;
  SurrogateController ctrl(cc, {}, 3);
  const CmaParams params = make_cma_params(5);
  CmaState cma = init_state(params, Vector::Ones(5), 1.0);
  Rng rng(2);
  const Objective sphere = [](const Vector& x) { return x.squaredNorm(); };
  for (int k = 0; k < 5; ++k) cycle(ctrl, params, cma, sphere, rng);
  bool twenty = true;
  for (int k = 1; k <= 3; ++k) {
    const Offspring off = ask(params, cma, rng);
    std::vector<double> fit(off.size());
    for (std::size_t i = 0; i < off.size(); ++i) fit[i] = sphere(off.point(i));
    ctrl.append(off, fit, ctrl.archive().back().eval_index + 1);
    const auto before = ctrl.stats().tournament_trainings;
    ctrl.adapt_hyperparams(cma, off.points, fit);
    twenty = twenty && ctrl.stats().tournament_trainings - before == 20;
  }
  v.require(twenty, "20 models per tournament");
  return v;
}

Verdict timing() {
  Verdict v;
  const TimingReport rep = timing_experiment({2, 5, 10, 20});
  std::string per;
  for (const auto& row : rep.rows)
    per += " D" + std::to_string(row.dimension) + "=" + fmt("%.2es", row.seconds_per_training);
  v.require(rep.rows.size() == 4 && rep.training_slope > 0.0,
            "slope " + fmt("%.2f", rep.training_slope) + ";" + per);
  return v;
}

}  // namespace

int main() {
  using Clock = std::chrono::steady_clock;
  int failed = 0;
  auto report = [&](int id, const char* name, const std::function<Verdict()>& check) {
    const auto start = Clock::now();
    const Verdict v = check();
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    std::printf("%s %d %s: %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !v.pass;
  };

  report(1, "acma sphere", sphere_convergence);
  Battery f101, f103, f107;
  report(2, "saacm speedup f101/f103", [&] {
    f101 = run_battery(101);
    f103 = run_battery(103);
    return speedup(f101, f103);
  });
  report(3, "severe noise f107", [&] {
    f107 = run_battery(107);
    return severe_noise(f107);
  });
  report(4, "ert oracle", ert_matches_oracle);
  report(5, "invariance", invariance);
  report(6, "noise statistics", noise_statistics);
  report(7, "configuration", [&] { return configuration(f101); });
  report(8, "timing", timing);

  std::printf("%d/8 criteria passed\n", 8 - failed);
  return failed == 0 ? 0 : 1;
}
