#include <benchmark/benchmark.h>

#include <algorithm>
#include <random>
#include <vector>

#include "saacm/cma.hpp"
#include "saacm/rank_svm.hpp"
#include "saacm/testbed.hpp"

using namespace saacm;

namespace {

std::vector<TrainingPoint> sphere_points(std::size_t dim, std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal;
  std::vector<TrainingPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    Vector x(static_cast<Eigen::Index>(dim));
    for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = normal(rng);
    pts.push_back({x, x.squaredNorm()});
  }
  std::sort(pts.begin(), pts.end(),
            [](const TrainingPoint& a, const TrainingPoint& b) { return a.fitness < b.fitness; });
  return pts;
}

void BM_Train(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const auto pts = sphere_points(dim, training_cap(dim), rng);
  const Matrix cov = Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (auto _ : state) benchmark::DoNotOptimize(train(pts, {}, cov));
  state.counters["points"] = static_cast<double>(pts.size());
}
BENCHMARK(BM_Train)->Arg(2)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Predict(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  const auto pts = sphere_points(dim, training_cap(dim), rng);
  const Eigen::Index d = static_cast<Eigen::Index>(dim);
  const RankingModel model = train(pts, {}, Matrix::Identity(d, d));
  const Offspring off = ask(make_cma_params(dim), init_state(make_cma_params(dim), Vector::Zero(d), 1.0), rng);
  for (auto _ : state) benchmark::DoNotOptimize(model.predict(off.points));
}
BENCHMARK(BM_Predict)->Arg(2)->Arg(5)->Arg(10)->Arg(20);

void BM_Kernel(benchmark::State& state) {
  const Eigen::Index d = state.range(0);
  Rng rng(3);
  std::normal_distribution<double> normal;
  Vector x(d), y(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    x[k] = normal(rng);
    y[k] = normal(rng);
  }
  const KernelMetric metric{Matrix::Identity(d, d), 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(kernel(x, y, metric));
}
BENCHMARK(BM_Kernel)->Arg(2)->Arg(10)->Arg(40);

void BM_CmaGeneration(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const CmaParams params = make_cma_params(dim);
  CmaState cma = init_state(params, Vector::Ones(static_cast<Eigen::Index>(dim)), 1.0);
  Rng rng(4);
  std::vector<double> fit(params.lambda);
  for (auto _ : state) {
    const Offspring off = ask(params, cma, rng);
    for (std::size_t i = 0; i < off.size(); ++i) fit[i] = off.point(i).squaredNorm();
    tell(params, cma, off, fit);
    if (cma.sigma < 1e-8) cma = init_state(params, Vector::Ones(static_cast<Eigen::Index>(dim)), 1.0);
  }
}
BENCHMARK(BM_CmaGeneration)->Arg(2)->Arg(5)->Arg(20)->Arg(40);

void BM_NoisyEvaluation(benchmark::State& state) {
  ProblemInstance inst = make_instance(static_cast<int>(state.range(0)), 5, 1);
  Rng rng(5);
  const Vector x = Vector::Ones(5);
  for (auto _ : state) benchmark::DoNotOptimize(inst.evaluate(x, rng));
}
BENCHMARK(BM_NoisyEvaluation)->Arg(101)->Arg(107)->Arg(122);

}  // namespace
BENCHMARK_MAIN();
