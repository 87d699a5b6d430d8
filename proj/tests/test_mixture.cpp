#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "smoothent/bounds.hpp"
#include "smoothent/mixture.hpp"
#include "smoothent/quadrature.hpp"
#include "smoothent/threading.hpp"

using namespace smoothent;

namespace {

GaussianMixture single_standard_normal() {
  return make_gaussian_mixture_uniform(Eigen::MatrixXd::Zero(1, 1), 1.0);
}

}  // namespace

TEST_CASE("log density of a standard normal at its mode") {
  Eigen::VectorXd z(1);
  z << 0.0;
  CHECK(log_density(single_standard_normal(), z) ==
        doctest::Approx(-0.91893853320467274).epsilon(1e-12));
}

TEST_CASE("symmetric two-mode mixture collapses to one component's value") {
  Eigen::MatrixXd c(2, 1);
  c << -3.0, 3.0;
  const GaussianMixture mix = make_gaussian_mixture_uniform(c, 1.0);
  Eigen::VectorXd z(1);
  z << 0.0;
  // Halves at +-3 sum to a full phi(3).
  CHECK(log_density(mix, z) == doctest::Approx(-5.41893853320467).epsilon(1e-12));
}

TEST_CASE("weighted mixture matches the naive sum") {
  Eigen::MatrixXd c(2, 1);
  c << -1.0, 2.0;
  Eigen::VectorXd w(2);
  w << 0.3, 0.7;
  const GaussianMixture mix = make_gaussian_mixture(c, w, 0.7);
  Eigen::VectorXd z(1);
  for (double x : {-2.0, -0.5, 0.0, 1.0, 2.5}) {
    z << x;
    CHECK(log_density(mix, z) ==
          doctest::Approx(oracles::naive_log_density(mix, z)).epsilon(1e-12));
  }
}

TEST_CASE("log density agrees with extended-precision naive summation") {
  std::mt19937 gen(20260808);
  std::uniform_real_distribution<double> point_dist(-6.0, 6.0);
  int checked = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const GaussianMixture mix = oracles::random_mixture(gen, 100, 10);
    Eigen::VectorXd z(mix.dim());
    for (Eigen::Index k = 0; k < mix.dim(); ++k) z(k) = point_dist(gen);
    const double naive = oracles::naive_log_density(mix, z);
    if (!std::isfinite(naive)) continue;  // naive sum underflowed
    CHECK(log_density(mix, z) == doctest::Approx(naive).epsilon(1e-10));
    ++checked;
  }
  CHECK(checked > 150);
}

TEST_CASE("density integrates to one in d=1") {
  std::mt19937 gen(7);
  for (int rep = 0; rep < 4; ++rep) {
    const GaussianMixture mix = oracles::random_mixture(gen, 12, 1);
    DensityScratch scratch;
    Eigen::VectorXd z(1);
    const auto f = [&](double x) {
      z(0) = x;
      return std::exp(log_density(mix, z, scratch));
    };
    const double lo = mix.centers.minCoeff() - 12.0 * mix.sigma;
    const double hi = mix.centers.maxCoeff() + 12.0 * mix.sigma;
    const double total = integrate(f, lo, hi, 1e-8, 400000).value;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("sampling obeys the law of large numbers") {
  const SampleMatrix s = sample(single_standard_normal(), 100000, 42);
  const double mean = s.rows.col(0).mean();
  const double var =
      (s.rows.col(0).array() - mean).square().sum() / (s.count() - 1.0);
  CHECK(std::abs(mean) < 4.0 / std::sqrt(100000.0));
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("sampling is deterministic in the seed") {
  const GaussianMixture mix = single_standard_normal();
  const SampleMatrix a = sample(mix, 1000, 99);
  const SampleMatrix b = sample(mix, 1000, 99);
  CHECK(a.rows == b.rows);
  const SampleMatrix c = sample(mix, 1000, 100);
  CHECK(a.rows != c.rows);
}

TEST_CASE("zero-weight modes are never selected") {
  Eigen::MatrixXd c(2, 1);
  c << 0.0, 100.0;
  Eigen::VectorXd w(2);
  w << 1.0, 0.0;
  const SampleMatrix s = sample(make_gaussian_mixture(c, w, 1.0), 5000, 3);
  CHECK(s.rows.cwiseAbs().maxCoeff() < 10.0);
}

TEST_CASE("component frequencies match the weights") {
  Eigen::MatrixXd c(3, 1);
  c << -100.0, 0.0, 100.0;
  Eigen::VectorXd w(3);
  w << 0.2, 0.5, 0.3;
  const Eigen::Index n = 20000;
  const SampleMatrix s = sample(make_gaussian_mixture(c, w, 0.5), n, 11);
  Eigen::Vector3d counts = Eigen::Vector3d::Zero();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = s.rows(i, 0);
    counts(x < -50.0 ? 0 : (x < 50.0 ? 1 : 2)) += 1.0;
  }
  for (int k = 0; k < 3; ++k) {
    const double freq = counts(k) / static_cast<double>(n);
    const double slack = 4.0 * std::sqrt(w(k) * (1.0 - w(k)) / static_cast<double>(n));
    CHECK(std::abs(freq - w(k)) < slack);
  }
}

TEST_CASE("smoothed empirical measure keeps rows as equal-weight centers") {
  SampleMatrix s;
  s.rows.resize(3, 2);
  s.rows << 0.0, 0.0, 1.0, 1.0, 1.0, 1.0;  // duplicate row stays distinct
  const GaussianMixture mix = smooth_empirical(s, 0.4);
  CHECK(mix.modes() == 3);
  CHECK(mix.weights(0) == doctest::Approx(1.0 / 3.0));
  CHECK(mix.centers.row(1) == mix.centers.row(2));

  SampleMatrix one;
  one.rows = Eigen::MatrixXd::Constant(1, 1, 2.5);
  const GaussianMixture single = smooth_empirical(one, 1.0);
  CHECK(single.modes() == 1);
  CHECK(single.weights(0) == 1.0);
  CHECK(single.centers(0, 0) == 2.5);
}

TEST_CASE("smoothing a point mass gives the plain Gaussian") {
  const DiscreteDistribution p =
      make_discrete(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Ones(1));
  const GaussianMixture mix = smooth_discrete(p, 1.0);
  Eigen::VectorXd z(1);
  z << 0.7;
  CHECK(log_density(mix, z) ==
        doctest::Approx(-0.91893853320467 - 0.5 * 0.49).epsilon(1e-12));
}

TEST_CASE("two-atom smoothed density matches the closed-form sum") {
  Eigen::MatrixXd atoms(2, 1);
  atoms << -1.0, 1.0;
  Eigen::VectorXd probs(2);
  probs << 0.5, 0.5;
  const GaussianMixture mix = smooth_discrete(make_discrete(atoms, probs), 0.1);
  Eigen::VectorXd z(1);
  z << 0.0;
  const double expected =
      std::log(0.5 * 2.0 * std::exp(-50.0) / (0.1 * std::sqrt(2.0 * M_PI)));
  CHECK(log_density(mix, z) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("truncated atom ladder smooths into a valid mixture") {
  CounterexampleSpec spec;
  spec.k_atoms = 5;
  const DiscreteDistribution p = build_counterexample(spec);
  const GaussianMixture mix = smooth_discrete(p, 1.0);
  CHECK(mix.modes() == 6);
  CHECK(mix.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("smoothed empirical density converges pointwise to the truth") {
  Eigen::MatrixXd atoms(2, 1);
  atoms << -0.5, 0.5;
  Eigen::VectorXd probs(2);
  probs << 0.5, 0.5;
  const DiscreteDistribution p = make_discrete(atoms, probs);
  const GaussianMixture truth = smooth_discrete(p, 0.5);
  const GaussianMixture approx = smooth_empirical(sample(p, 100000, 17), 0.5);
  DensityScratch s1, s2;
  Eigen::VectorXd z(1);
  for (double x : {-1.0, -0.3, 0.0, 0.4, 1.1}) {
    z << x;
    const double rel = std::exp(log_density(approx, z, s1) - log_density(truth, z, s2));
    CHECK(rel == doctest::Approx(1.0).epsilon(0.02));
  }
}

TEST_CASE("parallel batch density equals sequential evaluation") {
  std::mt19937 gen(5);
  const GaussianMixture mix = oracles::random_mixture(gen, 60, 3);
  Eigen::MatrixXd pts(257, mix.dim());
  std::uniform_real_distribution<double> dist(-4.0, 4.0);
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    for (Eigen::Index k = 0; k < pts.cols(); ++k) pts(i, k) = dist(gen);
  Eigen::VectorXd seq(pts.rows()), par(pts.rows());
  set_max_threads(1);
  log_density_batch(mix, pts, seq);
  set_max_threads(8);
  log_density_batch(mix, pts, par);
  set_max_threads(0);
  CHECK(seq == par);
}

TEST_CASE("construction rejects invariant violations") {
  Eigen::MatrixXd c(2, 1);
  c << 0.0, 1.0;
  Eigen::VectorXd bad_sum(2), negative(2);
  bad_sum << 0.5, 0.6;
  negative << -0.1, 1.1;
  CHECK_THROWS_AS(make_gaussian_mixture(c, bad_sum, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_gaussian_mixture(c, negative, 1.0), std::invalid_argument);
  Eigen::VectorXd ok(2);
  ok << 0.5, 0.5;
  CHECK_THROWS_AS(make_gaussian_mixture(c, ok, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_gaussian_mixture(c, ok, -1.0), std::invalid_argument);

  const GaussianMixture mix = make_gaussian_mixture(c, ok, 1.0);
  Eigen::VectorXd wrong_dim(2);
  wrong_dim << 0.0, 0.0;
  CHECK_THROWS_AS(log_density(mix, wrong_dim), std::invalid_argument);

  Eigen::MatrixXd dup(2, 1);
  dup << 1.0, 1.0;
  CHECK_THROWS_AS(make_discrete(dup, ok), std::invalid_argument);
}

TEST_CASE("gmm text serialization round-trips at full precision") {
  std::mt19937 gen(13);
  for (int rep = 0; rep < 5; ++rep) {
    const GaussianMixture mix = oracles::random_mixture(gen, 8, 3);
    std::stringstream ss;
    save_gmm(ss, mix);
    const GaussianMixture back = load_gmm(ss);
    CHECK(back.centers == mix.centers);
    CHECK(back.weights == mix.weights);
    CHECK(back.sigma == mix.sigma);
  }

  Eigen::MatrixXd atoms(2, 2);
  atoms << 0.0, 1.0, -1.0, 0.25;
  Eigen::VectorXd probs(2);
  probs << 0.75, 0.25;
  const DiscreteDistribution p = make_discrete(atoms, probs);
  std::stringstream ss;
  save_discrete(ss, p);
  const auto truth = load_truth(ss);
  REQUIRE(std::holds_alternative<DiscreteDistribution>(truth));
  CHECK(std::get<DiscreteDistribution>(truth).atoms == p.atoms);
}

TEST_CASE("samples csv round-trips with its seed tag") {
  const SampleMatrix s = sample(single_standard_normal(), 50, 12345);
  std::stringstream ss;
  save_samples_csv(ss, s);
  const SampleMatrix back = load_samples_csv(ss);
  CHECK(back.seed == 12345);
  CHECK(back.rows == s.rows);
}
