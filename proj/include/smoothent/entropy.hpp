#pragma once

#include <cstdint>

#include "smoothent/mixture.hpp"

namespace smoothent {

/// Universal estimator return: point estimate in nats plus an empirical
/// standard error. n_mc is 0 for estimators with no Monte Carlo stage.
struct EstimateReport {
  double value = 0.0;
  double std_error = 0.0;
  Eigen::Index n = 0;       // data samples / mixture modes
  Eigen::Index n_mc = 0;    // MC samples per center
  std::uint64_t seed = 0;
};

enum class MseBoundMode { bounded_support, bounded_moment };

/// Monte Carlo budget plus the side information the certified MSE bound
/// consumes (support radius reading or second moment, by mode).
struct McBudget {
  Eigen::Index n_mc = 1;
  MseBoundMode mse_bound_mode = MseBoundMode::bounded_support;
  double support_or_moment_param = 0.0;  // D for bounded support, m = E||C||^2
};

/// (d/2) log(2 pi e sigma^2) in nats.
double gaussian_entropy_analytic(Eigen::Index d, double sigma);

/// Monte Carlo differential entropy of a known Gaussian mixture: fresh
/// N(0, sigma^2 I) draws around each center, outer average weighted by the
/// mixture weights. std_error is the standard deviation of the per-draw
/// log-density terms over sqrt(n * n_mc). Bit-reproducible for a fixed seed
/// regardless of thread count.
EstimateReport mixture_entropy_mc(const GaussianMixture& mix,
                                  const McBudget& budget, std::uint64_t seed);

/// Plug-in estimator: entropy of the smoothed empirical measure of the
/// samples. Rows are canonicalized (sorted) before seeding so the result is
/// invariant under row permutations.
EstimateReport plugin_entropy(const SampleMatrix& samples, double sigma,
                              const McBudget& budget, std::uint64_t seed);

/// Certified MSE upper bound for mixture_entropy_mc. The bounded-support
/// case reads centers within the sqrt(d) ball (covers [-1,1]^d); whether the
/// centers satisfy that is the caller's responsibility.
double mc_mse_bound(const McBudget& budget, Eigen::Index d, double sigma,
                    Eigen::Index n);

/// Kozachenko-Leonenko nearest-neighbor estimate (k = 1). Ships no error
/// bars (std_error = 0). Duplicate rows are rejected with their indices.
EstimateReport knn_kl_entropy(const SampleMatrix& samples);

/// Leave-one-out Gaussian-KDE resubstitution estimate.
EstimateReport kde_entropy(const SampleMatrix& samples, double bandwidth);

/// Silverman's rule-of-thumb bandwidth (per-dimension-averaged scale).
double silverman_bandwidth(const SampleMatrix& samples);

}  // namespace smoothent
