#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace smoothent {

/// Isotropic Gaussian mixture with shared width sigma. Immutable after
/// construction; build through make_gaussian_mixture so the invariants hold
/// and the cached log-weights are in place.
struct GaussianMixture {
  Eigen::MatrixXd centers;      // n_modes x d
  Eigen::VectorXd weights;      // nonnegative, sums to 1
  double sigma = 1.0;
  bool truncate_unit_box = false;  // sampler rejects draws outside [-1,1]^d

  Eigen::VectorXd log_weights;  // cached; -inf for zero weights
  bool uniform_weights = false;  // cached; all weights equal

  [[nodiscard]] Eigen::Index modes() const { return centers.rows(); }
  [[nodiscard]] Eigen::Index dim() const { return centers.cols(); }
};

/// Finite atomic distribution; atoms pairwise distinct, probs sum to 1.
struct DiscreteDistribution {
  Eigen::MatrixXd atoms;  // k x d
  Eigen::VectorXd probs;

  [[nodiscard]] Eigen::Index size() const { return atoms.rows(); }
  [[nodiscard]] Eigen::Index dim() const { return atoms.cols(); }
};

/// n x d matrix of i.i.d. draws, tagged with the seed that produced it.
struct SampleMatrix {
  Eigen::MatrixXd rows;
  std::uint64_t seed = 0;

  [[nodiscard]] Eigen::Index count() const { return rows.rows(); }
  [[nodiscard]] Eigen::Index dim() const { return rows.cols(); }
};

GaussianMixture make_gaussian_mixture(Eigen::MatrixXd centers,
                                      Eigen::VectorXd weights, double sigma);
GaussianMixture make_gaussian_mixture_uniform(Eigen::MatrixXd centers,
                                              double sigma);
DiscreteDistribution make_discrete(Eigen::MatrixXd atoms, Eigen::VectorXd probs);

/// Reusable exponent buffer for density evaluation in hot loops.
struct DensityScratch {
  Eigen::ArrayXd exponents;
};

/// log of the mixture density at z, via log-sum-exp over all modes.
/// Never returns -inf below the analytic log of the largest term.
double log_density(const GaussianMixture& mix,
                   const Eigen::Ref<const Eigen::VectorXd>& z);
double log_density(const GaussianMixture& mix,
                   const Eigen::Ref<const Eigen::VectorXd>& z,
                   DensityScratch& scratch);

/// Evaluates log density at every row of points (m x d) into out (length m).
/// Parallel over rows; identical to the sequential evaluation.
void log_density_batch(const GaussianMixture& mix,
                       const Eigen::Ref<const Eigen::MatrixXd>& points,
                       Eigen::Ref<Eigen::VectorXd> out);

/// n i.i.d. draws: component by weight, plus N(0, sigma^2 I). Deterministic
/// given seed and independent of evaluation order. Honors truncate_unit_box
/// by per-draw rejection.
SampleMatrix sample(const GaussianMixture& mix, Eigen::Index n,
                    std::uint64_t seed);

class SplitRng;

/// One draw from the mixture using the caller's stream.
void sample_one(const GaussianMixture& mix, SplitRng& rng,
                Eigen::Ref<Eigen::VectorXd> out);
SampleMatrix sample(const DiscreteDistribution& p, Eigen::Index n,
                    std::uint64_t seed);

/// The smoothed empirical measure of the samples: centers = sample rows,
/// uniform weights 1/n, width sigma. Duplicate rows stay distinct.
GaussianMixture smooth_empirical(const SampleMatrix& samples, double sigma);

/// The samples with fresh N(0, sigma^2 I) noise added per row (noisy draws
/// of S + Z for general-purpose estimators).
SampleMatrix add_gaussian_noise(const SampleMatrix& samples, double sigma,
                                std::uint64_t seed);

/// Exact density of p convolved with an isotropic Gaussian of width sigma.
GaussianMixture smooth_discrete(const DiscreteDistribution& p, double sigma);

// Plain-text serialization: header `gmm d=<d> k=<k> sigma=<s>` then k lines
// `w c1 ... cd` at full precision. Discrete distributions use sigma=0.
void save_gmm(std::ostream& os, const GaussianMixture& mix);
GaussianMixture load_gmm(std::istream& is);
void save_discrete(std::ostream& os, const DiscreteDistribution& p);
DiscreteDistribution load_discrete(std::istream& is);
std::variant<DiscreteDistribution, GaussianMixture> load_truth(std::istream& is);

// CSV with a leading `# seed=<seed>` comment line.
void save_samples_csv(std::ostream& os, const SampleMatrix& samples);
SampleMatrix load_samples_csv(std::istream& is);

/// Shortest round-trippable decimal form of x ("%.17g").
std::string format_full(double x);

}  // namespace smoothent
