#include "smoothent/noisy_net.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "smoothent/rng.hpp"
#include "smoothent/threading.hpp"

namespace smoothent {

namespace {

constexpr std::uint64_t kTagForward = 0x666f7277ull;
constexpr std::uint64_t kTagUncond = 0x756e636full;
constexpr std::uint64_t kTagCond = 0x636f6e64ull;
constexpr std::uint64_t kTagMiInput = 0x6d696969ull;
constexpr std::uint64_t kTagMiLabel = 0x6d696c62ull;

void apply_activation(Activation a, Eigen::VectorXd& v) {
  switch (a) {
    case Activation::tanh_act:
      v = v.array().tanh();
      break;
    case Activation::relu:
      v = v.cwiseMax(0.0);
      break;
    case Activation::identity:
      break;
  }
}

/// Shared body: pre-noise activity of layer ell with noise from rng.
Eigen::VectorXd forward_impl(const NoisyNetwork& net,
                             const Eigen::Ref<const Eigen::VectorXd>& x,
                             Eigen::Index ell, SplitRng rng) {
  if (ell < 1 || ell > net.depth())
    throw std::invalid_argument("forward_pre_noise: layer index out of range");
  if (x.size() != net.input_dim())
    throw std::invalid_argument("forward_pre_noise: input has dimension " +
                                std::to_string(x.size()) + ", network expects " +
                                std::to_string(net.input_dim()));
  Eigen::VectorXd t = x;
  for (Eigen::Index j = 1; j < ell; ++j) {
    const AffineLayer& layer = net.layers[static_cast<std::size_t>(j - 1)];
    Eigen::VectorXd s = layer.weight * t + layer.bias;
    apply_activation(layer.activation, s);
    for (Eigen::Index k = 0; k < s.size(); ++k)
      s(k) += net.noise_sigma * rng.next_normal();
    t = std::move(s);
  }
  const AffineLayer& layer = net.layers[static_cast<std::size_t>(ell - 1)];
  Eigen::VectorXd s = layer.weight * t + layer.bias;
  apply_activation(layer.activation, s);
  return s;
}

}  // namespace

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::tanh_act: return "tanh";
    case Activation::relu: return "relu";
    case Activation::identity: return "identity";
  }
  return "?";
}

Activation parse_activation(const std::string& name) {
  if (name == "tanh") return Activation::tanh_act;
  if (name == "relu") return Activation::relu;
  if (name == "identity") return Activation::identity;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

NoisyNetwork make_noisy_network(std::vector<AffineLayer> layers,
                                double noise_sigma) {
  if (layers.empty()) throw std::invalid_argument("NoisyNetwork: need at least one layer");
  if (!(noise_sigma > 0.0)) throw std::invalid_argument("NoisyNetwork: noise_sigma must be positive");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].weight.rows() != layers[i].bias.size())
      throw std::invalid_argument("NoisyNetwork: bias/weight mismatch at layer " +
                                  std::to_string(i + 1));
    if (i > 0 && layers[i].weight.cols() != layers[i - 1].weight.rows())
      throw std::invalid_argument("NoisyNetwork: dimension chain broken at layer " +
                                  std::to_string(i + 1));
  }
  NoisyNetwork net;
  net.layers = std::move(layers);
  net.noise_sigma = noise_sigma;
  return net;
}

LabeledDataset make_labeled_dataset(Eigen::MatrixXd features,
                                    std::vector<int> labels,
                                    std::vector<int> label_set) {
  if (features.rows() != static_cast<Eigen::Index>(labels.size()))
    throw std::invalid_argument("LabeledDataset: features/labels size mismatch");
  if (label_set.empty()) {
    label_set = labels;
    std::sort(label_set.begin(), label_set.end());
    label_set.erase(std::unique(label_set.begin(), label_set.end()), label_set.end());
  }
  if (label_set.empty()) throw std::invalid_argument("LabeledDataset: empty label set");
  for (int y : labels)
    if (!std::binary_search(label_set.begin(), label_set.end(), y))
      throw std::invalid_argument("LabeledDataset: label " + std::to_string(y) +
                                  " not in the label set");
  return LabeledDataset{std::move(features), std::move(labels), std::move(label_set)};
}

Eigen::VectorXd forward_pre_noise(const NoisyNetwork& net,
                                  const Eigen::Ref<const Eigen::VectorXd>& x,
                                  Eigen::Index ell, std::uint64_t seed) {
  return forward_impl(net, x, ell, SplitRng(seed).child(kTagForward));
}

SampleMatrix sample_unconditional(const NoisyNetwork& net,
                                  const LabeledDataset& data, Eigen::Index ell,
                                  std::uint64_t seed) {
  const Eigen::Index n = data.features.rows();
  if (n < 1) throw std::invalid_argument("sample_unconditional: empty dataset");
  SampleMatrix out;
  out.seed = seed;
  out.rows.resize(n, net.layer_dim(ell));
  const SplitRng root = SplitRng(seed).child(kTagUncond);
  parallel_for(n, [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i)
      out.rows.row(i) = forward_impl(net, data.features.row(i).transpose(), ell,
                                     root.child(static_cast<std::uint64_t>(i)))
                            .transpose();
  });
  return out;
}

SampleMatrix sample_conditional(const NoisyNetwork& net,
                                const Eigen::Ref<const Eigen::VectorXd>& x,
                                Eigen::Index ell, Eigen::Index n_cond,
                                std::uint64_t seed) {
  if (ell < 2)
    throw std::invalid_argument(
        "sample_conditional: undefined at layer 1 (no noise precedes it); the "
        "layer-1 conditional entropy is the analytic noise entropy");
  if (n_cond < 1) throw std::invalid_argument("sample_conditional: n_cond must be >= 1");
  const Eigen::VectorXd input = x;
  SampleMatrix out;
  out.seed = seed;
  out.rows.resize(n_cond, net.layer_dim(ell));
  const SplitRng root = SplitRng(seed).child(kTagCond);
  parallel_for(n_cond, [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i)
      out.rows.row(i) =
          forward_impl(net, input, ell, root.child(static_cast<std::uint64_t>(i)))
              .transpose();
  });
  return out;
}

EstimateReport mi_input(const NoisyNetwork& net, const LabeledDataset& data,
                        Eigen::Index ell, const McBudget& budget,
                        std::uint64_t seed, Eigen::Index n_cond) {
  const Eigen::Index n = data.features.rows();
  if (n_cond == 0) n_cond = n;
  SplitRng chain = SplitRng(seed).child(kTagMiInput);
  const std::uint64_t seed_uncond_sample = chain.next_u64();
  const std::uint64_t seed_uncond_mc = chain.next_u64();

  const SampleMatrix uncond = sample_unconditional(net, data, ell, seed_uncond_sample);
  const EstimateReport h_uncond =
      plugin_entropy(uncond, net.noise_sigma, budget, seed_uncond_mc);

  double subtracted = 0.0;
  double subtracted_var = 0.0;
  if (ell == 1) {
    subtracted = gaussian_entropy_analytic(net.layer_dim(1), net.noise_sigma);
  } else {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      SplitRng per_input = chain.child(static_cast<std::uint64_t>(i));
      const std::uint64_t s_sample = per_input.next_u64();
      const std::uint64_t s_mc = per_input.next_u64();
      const SampleMatrix cond = sample_conditional(
          net, data.features.row(i).transpose(), ell, n_cond, s_sample);
      const EstimateReport h_cond =
          plugin_entropy(cond, net.noise_sigma, budget, s_mc);
      acc += h_cond.value;
      subtracted_var += h_cond.std_error * h_cond.std_error;
    }
    subtracted = acc / static_cast<double>(n);
    subtracted_var /= static_cast<double>(n) * static_cast<double>(n);
  }

  EstimateReport report;
  report.value = h_uncond.value - subtracted;
  report.std_error =
      std::sqrt(h_uncond.std_error * h_uncond.std_error + subtracted_var);
  report.n = n;
  report.n_mc = budget.n_mc;
  report.seed = seed;
  return report;
}

EstimateReport mi_label(const NoisyNetwork& net, const LabeledDataset& data,
                        Eigen::Index ell, const McBudget& budget,
                        std::uint64_t seed) {
  const Eigen::Index n = data.features.rows();
  SplitRng chain = SplitRng(seed).child(kTagMiLabel);
  const std::uint64_t seed_uncond_sample = chain.next_u64();
  const std::uint64_t seed_uncond_mc = chain.next_u64();

  const SampleMatrix uncond = sample_unconditional(net, data, ell, seed_uncond_sample);
  const EstimateReport h_uncond =
      plugin_entropy(uncond, net.noise_sigma, budget, seed_uncond_mc);

  // Label-partitioned rows of the unconditional pass; class sizes are the
  // empirical counts, so sum_y n_y = n by construction.
  std::map<int, std::vector<Eigen::Index>> classes;
  for (int y : data.label_set) classes[y] = {};
  for (Eigen::Index i = 0; i < n; ++i)
    classes[data.labels[static_cast<std::size_t>(i)]].push_back(i);

  double subtracted = 0.0;
  double subtracted_var = 0.0;
  std::uint64_t class_idx = 0;
  for (const auto& [y, rows] : classes) {
    if (rows.empty())
      throw std::invalid_argument("mi_label: label class " + std::to_string(y) +
                                  " has no samples");
    const double p_hat =
        static_cast<double>(rows.size()) / static_cast<double>(n);
    SampleMatrix part;
    part.seed = uncond.seed;
    part.rows.resize(static_cast<Eigen::Index>(rows.size()), uncond.dim());
    for (std::size_t j = 0; j < rows.size(); ++j)
      part.rows.row(static_cast<Eigen::Index>(j)) = uncond.rows.row(rows[j]);
    const EstimateReport h_y = plugin_entropy(
        part, net.noise_sigma, budget, chain.child(class_idx++).next_u64());
    subtracted += p_hat * h_y.value;
    subtracted_var += p_hat * p_hat * h_y.std_error * h_y.std_error;
  }

  EstimateReport report;
  report.value = h_uncond.value - subtracted;
  report.std_error =
      std::sqrt(h_uncond.std_error * h_uncond.std_error + subtracted_var);
  report.n = n;
  report.n_mc = budget.n_mc;
  report.seed = seed;
  return report;
}

double mi_input_risk_bound(double delta_n, Eigen::Index d, double sigma,
                           Eigen::Index n) {
  if (d < 1 || n < 1 || !(sigma > 0.0) || delta_n < 0.0)
    throw std::invalid_argument("mi_input_risk_bound: bad parameters");
  return 2.0 * delta_n + static_cast<double>(d) *
                             std::log1p(1.0 / (sigma * sigma)) /
                             (4.0 * std::sqrt(static_cast<double>(n)));
}

void save_network(std::ostream& os, const NoisyNetwork& net) {
  for (const AffineLayer& layer : net.layers) {
    os << "layer " << layer.weight.cols() << ' ' << layer.weight.rows() << ' '
       << activation_name(layer.activation) << "\n";
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) {
        if (j) os << ' ';
        os << format_full(layer.weight(i, j));
      }
      os << "\n";
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
      if (i) os << ' ';
      os << format_full(layer.bias(i));
    }
    os << "\n";
  }
}

NoisyNetwork load_network(std::istream& is, double noise_sigma) {
  std::vector<AffineLayer> layers;
  std::string tok;
  while (is >> tok) {
    if (tok != "layer")
      throw std::invalid_argument("network file: expected 'layer', got '" + tok + "'");
    long in = 0, out = 0;
    std::string act;
    if (!(is >> in >> out >> act) || in < 1 || out < 1)
      throw std::invalid_argument("network file: bad layer header");
    AffineLayer layer;
    layer.activation = parse_activation(act);
    layer.weight.resize(out, in);
    for (long i = 0; i < out; ++i)
      for (long j = 0; j < in; ++j)
        if (!(is >> layer.weight(i, j)))
          throw std::invalid_argument("network file: truncated weights");
    layer.bias.resize(out);
    for (long i = 0; i < out; ++i)
      if (!(is >> layer.bias(i)))
        throw std::invalid_argument("network file: truncated bias");
    layers.push_back(std::move(layer));
  }
  return make_noisy_network(std::move(layers), noise_sigma);
}

}  // namespace smoothent
