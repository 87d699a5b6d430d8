#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "smoothent/entropy.hpp"
#include "smoothent/mixture.hpp"

namespace smoothent {

enum class Activation { tanh_act, relu, identity };

const char* activation_name(Activation a);
Activation parse_activation(const std::string& name);

struct AffineLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
  Activation activation = Activation::identity;
};

/// Feed-forward network whose every layer output has isotropic Gaussian
/// noise of width noise_sigma added after the activation.
struct NoisyNetwork {
  std::vector<AffineLayer> layers;
  double noise_sigma = 0.1;

  [[nodiscard]] Eigen::Index depth() const {
    return static_cast<Eigen::Index>(layers.size());
  }
  [[nodiscard]] Eigen::Index input_dim() const { return layers.front().weight.cols(); }
  [[nodiscard]] Eigen::Index layer_dim(Eigen::Index ell) const {
    return layers[static_cast<std::size_t>(ell - 1)].weight.rows();
  }
};

NoisyNetwork make_noisy_network(std::vector<AffineLayer> layers,
                                double noise_sigma);

struct LabeledDataset {
  Eigen::MatrixXd features;  // n x d0
  std::vector<int> labels;   // length n, each drawn from label_set
  std::vector<int> label_set;
};

LabeledDataset make_labeled_dataset(Eigen::MatrixXd features,
                                    std::vector<int> labels,
                                    std::vector<int> label_set = {});

/// Pre-noise activity of layer ell (1-based): layers 1..ell-1 run with fresh
/// noise injections, layer ell's own noise is not added.
Eigen::VectorXd forward_pre_noise(const NoisyNetwork& net,
                                  const Eigen::Ref<const Eigen::VectorXd>& x,
                                  Eigen::Index ell, std::uint64_t seed);

/// One pre-noise forward pass per dataset row, i.i.d. noise per row.
SampleMatrix sample_unconditional(const NoisyNetwork& net,
                                  const LabeledDataset& data, Eigen::Index ell,
                                  std::uint64_t seed);

/// n_cond pre-noise passes of the same input x with fresh noise each pass;
/// defined for ell >= 2 (layer 1 has no noise before it).
SampleMatrix sample_conditional(const NoisyNetwork& net,
                                const Eigen::Ref<const Eigen::VectorXd>& x,
                                Eigen::Index ell, Eigen::Index n_cond,
                                std::uint64_t seed);

/// Mutual information between the input feature and noisy layer ell, as the
/// plug-in entropy of the layer minus the average plug-in entropy
/// conditional on each input. At ell = 1 the subtracted term is the exact
/// noise entropy (no MC noise in it). std_error is the root-sum-square of
/// the component errors, a heuristic bar.
/// n_cond = 0 means "use the dataset size" for the conditional sample sets.
EstimateReport mi_input(const NoisyNetwork& net, const LabeledDataset& data,
                        Eigen::Index ell, const McBudget& budget,
                        std::uint64_t seed, Eigen::Index n_cond = 0);

/// Mutual information between the label and noisy layer ell: unconditional
/// plug-in entropy minus the label-frequency-weighted entropies of the
/// label-partitioned unconditional samples (class sizes are the random
/// empirical counts). Empty label classes are rejected by name.
EstimateReport mi_label(const NoisyNetwork& net, const LabeledDataset& data,
                        Eigen::Index ell, const McBudget& budget,
                        std::uint64_t seed);

/// 2 delta_n + d log(1 + 1/sigma^2) / (4 sqrt(n)): absolute-error risk bound
/// for mi_input given a risk bound delta_n on the entropy estimator.
double mi_input_risk_bound(double delta_n, Eigen::Index d, double sigma,
                           Eigen::Index n);

// Plain-text weight format: per layer a header `layer <in> <out>
// <activation>`, then the weight matrix row-major, then the bias.
void save_network(std::ostream& os, const NoisyNetwork& net);
NoisyNetwork load_network(std::istream& is, double noise_sigma);

}  // namespace smoothent
