#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "smoothent/noisy_net.hpp"
#include "smoothent/rng.hpp"

using namespace smoothent;

namespace {

AffineLayer identity_layer(Eigen::Index d) {
  return {Eigen::MatrixXd::Identity(d, d), Eigen::VectorXd::Zero(d),
          Activation::identity};
}

NoisyNetwork identity_net(Eigen::Index d, int depth, double sigma) {
  std::vector<AffineLayer> layers;
  for (int i = 0; i < depth; ++i) layers.push_back(identity_layer(d));
  return make_noisy_network(std::move(layers), sigma);
}

/// Two far clusters at +-5 with alternating labels 0/1.
LabeledDataset binary_cluster_data(Eigen::Index n) {
  Eigen::MatrixXd features(n, 1);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    features(i, 0) = (i % 2 == 0) ? -5.0 : 5.0;
    labels[static_cast<std::size_t>(i)] = (i % 2 == 0) ? 0 : 1;
  }
  return make_labeled_dataset(std::move(features), std::move(labels));
}

McBudget budget(Eigen::Index n_mc) {
  return {n_mc, MseBoundMode::bounded_support, 0.0};
}

}  // namespace

TEST_CASE("layer 1 pre-noise activity has no noise in it") {
  const NoisyNetwork net = identity_net(3, 1, 0.2);
  Eigen::VectorXd x(3);
  x << 0.5, -1.0, 2.0;
  CHECK(forward_pre_noise(net, x, 1, 1) == x);
  CHECK(forward_pre_noise(net, x, 1, 2) == x);  // seed cannot matter here
}

TEST_CASE("tanh layers stay inside the unit cube") {
  std::vector<AffineLayer> layers;
  layers.push_back({Eigen::MatrixXd::Random(6, 2) * 3.0, Eigen::VectorXd::Random(6),
                    Activation::tanh_act});
  layers.push_back({Eigen::MatrixXd::Random(4, 6) * 3.0, Eigen::VectorXd::Random(4),
                    Activation::tanh_act});
  const NoisyNetwork net = make_noisy_network(std::move(layers), 0.5);
  Eigen::VectorXd x(2);
  x << 10.0, -20.0;
  const Eigen::VectorXd s2 = forward_pre_noise(net, x, 2, 7);
  CHECK(s2.cwiseAbs().maxCoeff() <= 1.0);
}

TEST_CASE("noise realizations differ across seeds past layer 1") {
  const NoisyNetwork net = identity_net(2, 2, 0.3);
  Eigen::VectorXd x(2);
  x << 1.0, -1.0;
  const Eigen::VectorXd a = forward_pre_noise(net, x, 2, 1);
  const Eigen::VectorXd b = forward_pre_noise(net, x, 2, 2);
  CHECK(a != b);
  CHECK(forward_pre_noise(net, x, 2, 1) == a);
}

TEST_CASE("unconditional sampling reproduces features through an identity first layer") {
  const NoisyNetwork net = identity_net(1, 2, 0.2);
  const LabeledDataset data = binary_cluster_data(20);
  const SampleMatrix s = sample_unconditional(net, data, 1, 9);
  CHECK(s.rows == data.features);
  const SampleMatrix deeper = sample_unconditional(net, data, 2, 9);
  CHECK(deeper.count() == 20);
  CHECK(deeper.rows != data.features);  // layer-1 noise entered
  CHECK(sample_unconditional(net, data, 2, 9).rows == deeper.rows);
}

TEST_CASE("conditional sampling requires a noisy layer upstream") {
  const NoisyNetwork net = identity_net(1, 2, 0.2);
  Eigen::VectorXd x(1);
  x << 0.4;
  CHECK_THROWS_AS(sample_conditional(net, x, 1, 10, 1), std::invalid_argument);
  const SampleMatrix s = sample_conditional(net, x, 2, 500, 3);
  CHECK(s.count() == 500);
  const double mean = s.rows.col(0).mean();
  const double var = (s.rows.col(0).array() - mean).square().sum() / 499.0;
  CHECK(var > 0.0);
  CHECK(mean == doctest::Approx(0.4).epsilon(0.1));
  CHECK(var == doctest::Approx(0.04).epsilon(0.2));
}

TEST_CASE("input mutual information vanishes for a constant feature") {
  Eigen::MatrixXd features = Eigen::MatrixXd::Constant(200, 1, 0.7);
  std::vector<int> labels(200, 0);
  const LabeledDataset data =
      make_labeled_dataset(std::move(features), std::move(labels));
  const NoisyNetwork net = identity_net(1, 1, 0.2);
  const EstimateReport r = mi_input(net, data, 1, budget(400), 5);
  CHECK(std::abs(r.value) <= 3.0 * r.std_error);
}

TEST_CASE("well-separated binary input through noise carries one bit") {
  const NoisyNetwork net = identity_net(1, 1, 0.2);
  const LabeledDataset data = binary_cluster_data(500);
  const EstimateReport r = mi_input(net, data, 1, budget(500), 6, 500);
  CHECK(r.value == doctest::Approx(std::log(2.0)).epsilon(0.05 / 0.69));
}

TEST_CASE("nearly constant input carries almost nothing") {
  const NoisyNetwork net = identity_net(1, 1, 0.2);
  Eigen::MatrixXd features(400, 1);
  std::vector<int> labels(400, 0);
  for (Eigen::Index i = 0; i < 400; ++i)
    features(i, 0) = (i % 2 == 0) ? -0.002 : 0.002;  // sigma / 100
  const LabeledDataset data =
      make_labeled_dataset(std::move(features), std::move(labels));
  const EstimateReport r = mi_input(net, data, 1, budget(400), 7);
  CHECK(std::abs(r.value) < 0.02);
}

TEST_CASE("the layer-1 subtracted term is exactly the analytic noise entropy") {
  const NoisyNetwork net = identity_net(1, 1, 0.2);
  const LabeledDataset data = binary_cluster_data(100);
  SplitRng chain = SplitRng(42).child(0x6d696969ull);
  const std::uint64_t s_sample = chain.next_u64();
  const std::uint64_t s_mc = chain.next_u64();
  const EstimateReport uncond = plugin_entropy(
      sample_unconditional(net, data, 1, s_sample), 0.2, budget(100), s_mc);
  const EstimateReport r = mi_input(net, data, 1, budget(100), 42);
  CHECK(r.value + gaussian_entropy_analytic(1, 0.2) == uncond.value);
  CHECK(r.std_error == uncond.std_error);
}

TEST_CASE("label mutual information of a single class is pure noise") {
  const NoisyNetwork net = identity_net(1, 1, 0.2);
  Eigen::MatrixXd features(100, 1);
  for (Eigen::Index i = 0; i < 100; ++i) features(i, 0) = (i % 2) ? -1.0 : 1.0;
  const LabeledDataset data =
      make_labeled_dataset(std::move(features), std::vector<int>(100, 3));
  const EstimateReport r = mi_label(net, data, 1, budget(400), 8);
  CHECK(std::abs(r.value) <= 3.0 * r.std_error);
}

TEST_CASE("label determined by the cluster carries one bit") {
  const NoisyNetwork net = identity_net(1, 1, 0.2);
  const LabeledDataset data = binary_cluster_data(500);
  const EstimateReport r = mi_label(net, data, 1, budget(500), 9);
  CHECK(r.value == doctest::Approx(std::log(2.0)).epsilon(0.05 / 0.69));
}

TEST_CASE("three balanced distant clusters carry log 3") {
  const NoisyNetwork net = identity_net(1, 1, 0.2);
  Eigen::MatrixXd features(600, 1);
  std::vector<int> labels(600);
  for (Eigen::Index i = 0; i < 600; ++i) {
    const int c = static_cast<int>(i % 3);
    features(i, 0) = 10.0 * static_cast<double>(c - 1);  // 50 sigma apart
    labels[static_cast<std::size_t>(i)] = c;
  }
  const LabeledDataset data =
      make_labeled_dataset(std::move(features), std::move(labels));
  const EstimateReport r = mi_label(net, data, 1, budget(500), 10);
  CHECK(r.value == doctest::Approx(std::log(3.0)).epsilon(0.05 / 1.1));
}

TEST_CASE("empty label classes are rejected by name") {
  const NoisyNetwork net = identity_net(1, 1, 0.2);
  Eigen::MatrixXd features = Eigen::MatrixXd::Zero(10, 1);
  features.col(0).setLinSpaced(10, -1.0, 1.0);
  const LabeledDataset data = make_labeled_dataset(
      std::move(features), std::vector<int>(10, 0), std::vector<int>{0, 4});
  CHECK_THROWS_WITH_AS(mi_label(net, data, 1, budget(100), 1),
                       doctest::Contains("label class 4"), std::invalid_argument);
}

TEST_CASE("processing cannot create information") {
  // The Monte Carlo error bar must dominate the sample-to-sample wobble for
  // the 4-sigma slack to mean anything, hence the small n_mc.
  const NoisyNetwork net = identity_net(1, 2, 0.2);
  const LabeledDataset data = binary_cluster_data(200);
  const EstimateReport shallow = mi_input(net, data, 1, budget(24), 11, 200);
  const EstimateReport deep = mi_input(net, data, 2, budget(24), 12, 200);
  const double slack =
      4.0 * std::sqrt(shallow.std_error * shallow.std_error +
                      deep.std_error * deep.std_error);
  CHECK(deep.value <= shallow.value + slack);
  // Estimates stay nonnegative up to noise.
  CHECK(shallow.value >= -3.0 * shallow.std_error);
  CHECK(deep.value >= -3.0 * deep.std_error);
}

TEST_CASE("mutual information risk bound arithmetic") {
  CHECK(mi_input_risk_bound(0.0, 1, 1.0, 100) ==
        doctest::Approx(std::log(2.0) / 40.0).epsilon(1e-12));
  CHECK(mi_input_risk_bound(0.1, 1, 1.0, 100) ==
        doctest::Approx(0.2 + std::log(2.0) / 40.0).epsilon(1e-12));
  CHECK(mi_input_risk_bound(0.05, 3, 1e6, 100) == doctest::Approx(0.1).epsilon(1e-6));
}

TEST_CASE("weight files round-trip") {
  std::vector<AffineLayer> layers;
  layers.push_back({Eigen::MatrixXd::Random(3, 2), Eigen::VectorXd::Random(3),
                    Activation::tanh_act});
  layers.push_back({Eigen::MatrixXd::Random(2, 3), Eigen::VectorXd::Random(2),
                    Activation::relu});
  const NoisyNetwork net = make_noisy_network(std::move(layers), 0.15);
  std::stringstream ss;
  save_network(ss, net);
  const NoisyNetwork back = load_network(ss, 0.15);
  REQUIRE(back.depth() == 2);
  CHECK(back.layers[0].weight == net.layers[0].weight);
  CHECK(back.layers[0].bias == net.layers[0].bias);
  CHECK(back.layers[1].activation == Activation::relu);

  std::stringstream bad("layer 2 2 swish\n1 0\n0 1\n0 0\n");
  CHECK_THROWS_AS(load_network(bad, 0.1), std::invalid_argument);
}

TEST_CASE("network construction validates the dimension chain") {
  std::vector<AffineLayer> layers;
  layers.push_back({Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(3),
                    Activation::identity});
  layers.push_back({Eigen::MatrixXd::Zero(2, 4), Eigen::VectorXd::Zero(2),
                    Activation::identity});
  CHECK_THROWS_AS(make_noisy_network(std::move(layers), 0.1), std::invalid_argument);
  CHECK_THROWS_AS(identity_net(2, 1, 0.0), std::invalid_argument);
}
