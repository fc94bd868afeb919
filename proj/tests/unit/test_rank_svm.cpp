#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "saacm/rank_svm.hpp"

using namespace saacm;

namespace {

Matrix random_orthogonal(std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ();
}

Matrix random_spd(std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
  return a * a.transpose() + 0.1 * Matrix::Identity(a.rows(), a.cols());
}

Vector random_vector(std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
  return v;
}

// Kendall tau by counting pairs.
double kendall_tau(const std::vector<double>& a, const std::vector<double>& b) {
  double conc = 0.0, disc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double s = (a[i] - a[j]) * (b[i] - b[j]);
      if (s > 0) conc += 1.0;
      if (s < 0) disc += 1.0;
    }
  return (conc - disc) / (0.5 * static_cast<double>(a.size() * (a.size() - 1)));
}

std::vector<TrainingPoint> line_points(std::size_t n, Rng& rng) {
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<TrainingPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    Vector x(2);
    x << u(rng), 0.0;
    pts.push_back({x, x[0]});
  }
  std::sort(pts.begin(), pts.end(),
            [](const TrainingPoint& a, const TrainingPoint& b) { return a.fitness < b.fitness; });
  return pts;
}

}  // namespace

TEST_CASE("training cap") {
  for (std::size_t d : {2u, 5u, 10u, 20u, 40u}) {
    const double raw = 40.0 + 4.0 * std::exp(1.7 * std::log(static_cast<double>(d)));
    CHECK(training_cap(d) == static_cast<std::size_t>(raw));
  }
  CHECK(training_cap(5) == 101);
  CHECK(training_cap(10) == 240);
}

TEST_CASE("build_training_set") {
  Rng rng(1);
  std::vector<ArchiveEntry> archive;
  for (std::uint64_t i = 0; i < 300; ++i) {
    const Vector x = random_vector(5, rng);
    archive.push_back({x, x.squaredNorm(), i + 1});
  }
  SurrogateHyperparams hp;
  auto set = build_training_set(archive, 5, hp);
  CHECK(set.size() == 101);
  for (std::size_t i = 1; i < set.size(); ++i) CHECK(set[i - 1].fitness <= set[i].fitness);
  // only the most recent 101 entries appear
  for (const auto& p : set) {
    const auto it = std::find_if(archive.begin() + 199, archive.end(),
                                 [&](const ArchiveEntry& e) { return e.point == p.point; });
    CHECK(it != archive.end());
  }

  hp.n_train_frac = 0.5;
  CHECK(build_training_set(archive, 5, hp).size() ==
        static_cast<std::size_t>(std::ceil(0.5 * static_cast<double>(training_cap(5)))));

  const std::vector<ArchiveEntry> small(archive.begin(), archive.begin() + 10);
  CHECK(build_training_set(small, 5, {}).size() == 10);
  CHECK(build_training_set(small, 2, {}).size() == 10);

  // duplicates keep the latest evaluation
  std::vector<ArchiveEntry> dup{{archive[0].point, 5.0, 1}, {archive[1].point, 2.0, 2},
                                {archive[0].point, 1.0, 3}};
  const auto d = build_training_set(dup, 5, {});
  REQUIRE(d.size() == 2);
  CHECK(d[0].point == archive[0].point);
  CHECK(d[0].fitness == 1.0);

  CHECK_THROWS_AS(build_training_set(std::span<const ArchiveEntry>{}, 5, {}),
                  std::invalid_argument);
}

TEST_CASE("kernel") {
  KernelMetric m{Matrix::Identity(3, 3), 1.0};
  const Vector x = Vector::LinSpaced(3, 0.0, 1.0);
  CHECK(kernel(x, x, m) == 1.0);
  Vector y = x;
  y[0] += 1.0;
  y[2] -= 1.0;  // squared distance 2
  CHECK(kernel(x, y, m) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("whitening transform inverts the covariance") {
  Rng rng(3);
  for (std::size_t d : {2u, 5u, 10u}) {
    const Matrix c = random_spd(d, rng);
    const Matrix a = whitening_transform(c);
    const Matrix e = a.transpose() * a * c - Matrix::Identity(c.rows(), c.cols());
    CHECK(e.cwiseAbs().maxCoeff() <= 1e-8);
  }
  CHECK_THROWS_AS(whitening_transform(Matrix(-Matrix::Identity(2, 2))), std::invalid_argument);
}

TEST_CASE("kernel congruence under orthogonal maps") {
  Rng rng(5);
  double worst = 0.0;
  for (std::size_t d : {2u, 5u, 10u}) {
    for (int rep = 0; rep < 100; ++rep) {
      const Matrix r = random_orthogonal(d, rng);
      const Matrix c = random_spd(d, rng);
      const Vector x = random_vector(d, rng), y = random_vector(d, rng);
      const double s = 0.5 + static_cast<double>(rep % 7);
      const KernelMetric m{whitening_transform(c), s};
      const KernelMetric mr{whitening_transform(Matrix(r * c * r.transpose())), s};
      worst = std::max(worst, std::abs(kernel(r * x, r * y, mr) - kernel(x, y, m)));
    }
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("training on a line recovers the order") {
  Rng rng(7);
  const auto pts = line_points(20, rng);
  const RankingModel model = train(pts, {}, Matrix::Identity(2, 2));
  std::vector<double> pred, truth;
  for (const auto& p : pts) {
    pred.push_back(model.predict(p.point));
    truth.push_back(p.fitness);
  }
  CHECK(kendall_tau(pred, truth) == 1.0);
  CHECK(model.predict(pts.front().point) < model.predict(pts.back().point));

  Matrix as_matrix(2, 20);
  for (Eigen::Index j = 0; j < 20; ++j) as_matrix.col(j) = pts[static_cast<std::size_t>(j)].point;
  CHECK(model_error(model, as_matrix, truth) == 0.0);
}

TEST_CASE("two points") {
  std::vector<TrainingPoint> pts{{Vector::Zero(3), 0.0}, {Vector::Ones(3), 1.0}};
  const RankingModel model = train(pts, {}, Matrix::Identity(3, 3));
  CHECK(model.predict(Vector(Vector::Zero(3))) < model.predict(Vector(Vector::Ones(3))));
}

TEST_CASE("untrained and zero-iteration models") {
  RankingModel empty;
  CHECK_FALSE(empty.trained());
  CHECK_THROWS_AS(empty.predict(Vector(Vector::Zero(2))), std::logic_error);

  Rng rng(2);
  SurrogateHyperparams hp;
  hp.n_iter_mult = 0.0;
  const RankingModel m = train(line_points(10, rng), hp, Matrix::Identity(2, 2));
  CHECK(training_iterations(10, hp) == 0);
  CHECK((m.alphas().array() == 0.0).all());
  CHECK(m.predict(Vector(Vector::Ones(2))) == 0.0);
}

TEST_CASE("training rejects degenerate input") {
  std::vector<TrainingPoint> one{{Vector::Zero(2), 0.0}};
  CHECK_THROWS_AS(train(one, {}, Matrix::Identity(2, 2)), std::invalid_argument);
  std::vector<TrainingPoint> same{{Vector::Ones(2), 0.0}, {Vector::Ones(2), 1.0}};
  CHECK_THROWS_AS(train(same, {}, Matrix::Identity(2, 2)), std::invalid_argument);
}

TEST_CASE("dual feasibility and determinism") {
  Rng rng(9);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<TrainingPoint> pts;
    for (int i = 0; i < 60; ++i) {
      const Vector x = random_vector(4, rng);
      pts.push_back({x, x.squaredNorm() + 0.3 * x[0] * x[1]});
    }
    std::sort(pts.begin(), pts.end(),
              [](const auto& a, const auto& b) { return a.fitness < b.fitness; });
    SurrogateHyperparams hp;
    hp.cost_base = std::pow(10.0, rep - 1);
    hp.cost_power = 0.5 * rep;
    const Matrix c = random_spd(4, rng);
    const RankingModel m = train(pts, hp, c);
    const auto m_count = static_cast<Eigen::Index>(pts.size() - 1);
    REQUIRE(m.alphas().size() == m_count);
    for (Eigen::Index i = 0; i < m_count; ++i) {
      const double cost = hp.cost_base * std::pow(static_cast<double>(m_count - i), hp.cost_power);
      CHECK(m.costs()[i] == doctest::Approx(cost));
      CHECK(m.alphas()[i] >= 0.0);
      CHECK(m.alphas()[i] <= m.costs()[i]);
    }
    const Matrix whiten = m.transform();
    CHECK((whiten.transpose() * whiten * c - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-8);
    const Vector probe = random_vector(4, rng);
    CHECK(m.predict(probe) == train(pts, hp, c).predict(probe));
    CHECK(std::isfinite(m.predict(pts[3].point)));
  }
}

TEST_CASE("training depends on ranks only") {
  Rng rng(13);
  std::vector<TrainingPoint> a, b;
  for (int i = 0; i < 40; ++i) {
    const Vector x = random_vector(3, rng);
    const double f = x.squaredNorm();
    a.push_back({x, f});
    b.push_back({x, std::log1p(f) * 7.0 - 3.0});
  }
  auto by_fitness = [](const auto& p, const auto& q) { return p.fitness < q.fitness; };
  std::sort(a.begin(), a.end(), by_fitness);
  std::sort(b.begin(), b.end(), by_fitness);
  const RankingModel ma = train(a, {}, Matrix::Identity(3, 3));
  const RankingModel mb = train(b, {}, Matrix::Identity(3, 3));
  CHECK(ma.alphas() == mb.alphas());
  const Vector probe = random_vector(3, rng);
  CHECK(ma.predict(probe) == mb.predict(probe));
}

TEST_CASE("model_error") {
  const std::vector<double> truth{1, 2, 3, 4, 5, 6};
  const std::vector<double> reversed{6, 5, 4, 3, 2, 1};
  CHECK(model_error(truth, truth) == 0.0);
  CHECK(model_error(reversed, truth) == 1.0);
  // tie on one side: half an error
  CHECK(model_error(std::vector<double>{1, 1}, std::vector<double>{1, 2}) == 0.5);
  CHECK(model_error(std::vector<double>{1, 2}, std::vector<double>{3, 3}) == 0.5);
  CHECK_THROWS_AS(model_error(std::vector<double>{1}, std::vector<double>{1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(model_error(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}),
                  std::invalid_argument);

  Rng rng(21);
  std::uniform_real_distribution<double> u;
  double sum = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<double> p(10), t(10);
    for (auto& v : p) v = u(rng);
    for (auto& v : t) v = u(rng);
    const double e = model_error(p, t);
    CHECK(e >= 0.0);
    CHECK(e <= 1.0);
    sum += e;
  }
  CHECK(sum / 1000.0 >= 0.47);
  CHECK(sum / 1000.0 <= 0.53);
}

TEST_CASE("hyper-parameter box") {
  const auto lo = SurrogateHyperparams::lower();
  const auto hi = SurrogateHyperparams::upper();
  CHECK(lo.n_train_frac == 0.2);
  CHECK(hi.kernel_width_mult == 10.0);
  CHECK(lo.cost_base == 1e-2);
  CHECK(hi.cost_power == 3.0);
  CHECK(lo.n_iter_mult == 0.25);
  SurrogateHyperparams wild{5.0, 1e-5, 1e9, -1.0, 100.0};
  CHECK_FALSE(wild.in_range());
  CHECK(wild.clamped().in_range());
  const SurrogateHyperparams def;
  CHECK(def.in_range());
  const auto round = SurrogateHyperparams::from_search_space(def.to_search_space());
  CHECK(round.cost_base == doctest::Approx(def.cost_base));
  CHECK(round.kernel_width_mult == doctest::Approx(def.kernel_width_mult));
}
