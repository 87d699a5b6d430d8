#pragma once

#include <array>
#include <cstdint>
#include <variant>
#include <vector>

#include "smoothent/mixture.hpp"

namespace smoothent {

enum class DistanceKind { tv, kl, chi2, w1, w2sq };

const char* distance_kind_name(DistanceKind kind);
DistanceKind parse_distance_kind(const std::string& name);

struct DistanceEstimate {
  DistanceKind kind = DistanceKind::tv;
  double value = 0.0;
  double std_error = 0.0;
  Eigen::Index n_points = 0;  // integration / transport cloud size
  std::uint64_t seed = 0;
  bool heavy_tail = false;  // chi2 only: top 1% of terms carry >50% of the sum
};

/// Least-squares fit of the provided (log n, log value) points.
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::array<double, 2>> points;
};

RateFit fit_rate(const std::vector<std::array<double, 2>>& log_points);

/// 0.5 * int |q - r|, importance-sampled under the half-half proposal
/// f = (q + r) / 2. Every term lies in [0, 1], so the estimate does too.
DistanceEstimate tv_mc(const GaussianMixture& q_mix,
                       const GaussianMixture& r_mix, Eigen::Index n_points,
                       std::uint64_t seed);

/// KL(q_mix || r_mix): mean of log q - log r under z ~ q_mix. May come out
/// negative from MC noise; reported unclamped.
DistanceEstimate kl_mc(const GaussianMixture& q_mix,
                       const GaussianMixture& r_mix, Eigen::Index n_points,
                       std::uint64_t seed);

/// chi^2(r_mix || q_mix): mean of (r/q - 1)^2 under z ~ q_mix. Sets
/// heavy_tail when the largest 1% of terms carry more than half the sum,
/// the telltale of a divergent integral the sampler cannot resolve.
DistanceEstimate chi2_mc(const GaussianMixture& r_mix,
                         const GaussianMixture& q_mix, Eigen::Index n_points,
                         std::uint64_t seed);

enum class Chi2MiMethod { quadrature_1d, mc };

/// chi^2 mutual information between S ~ p and S + N(0, sigma^2 I):
/// int E_P[phi_sigma(z - S)^2] / q(z) dz - 1 with q the smoothed density.
/// Quadrature (d = 1 only) integrates to 1e-8 over the atom range padded by
/// 10 sigma; failure to converge within the evaluation budget raises
/// NumericError carrying the partial value.
DistanceEstimate chi2_mutual_information(const DiscreteDistribution& p,
                                         double sigma, Chi2MiMethod method,
                                         Eigen::Index n_points,
                                         std::uint64_t seed);

/// Exact optimal-transport cost between two equal-size point clouds taken as
/// uniform empirical measures (Euclidean ground cost; assignment problem,
/// sorting in d = 1). Clouds above 4096 points are refused unless forced.
DistanceEstimate w1_empirical(const SampleMatrix& a, const SampleMatrix& b,
                              bool force = false);
/// Same with squared ground cost.
DistanceEstimate w2sq_empirical(const SampleMatrix& a, const SampleMatrix& b,
                                bool force = false);

using TruthDistribution = std::variant<DiscreteDistribution, GaussianMixture>;

/// m draws from truth * N(0, sigma^2 I): sample the truth, add noise.
SampleMatrix sample_smoothed(const TruthDistribution& truth, double sigma,
                             Eigen::Index m, std::uint64_t seed);

/// Exact density of truth * N(0, sigma^2 I) as a Gaussian mixture. Refuses
/// truncated mixtures (their smoothed density is not a finite mixture).
GaussianMixture smoothed_truth_mixture(const TruthDistribution& truth,
                                       double sigma);

struct DistanceBudget {
  Eigen::Index n_points = 20000;  // MC integration points per estimate
  Eigen::Index ot_cloud = 1024;   // coupled cloud size for w1 / w2sq
};

struct ConvergencePoint {
  Eigen::Index n = 0;
  double mean = 0.0;
  double std_error = 0.0;  // over repetitions
  Eigen::Index reps = 0;
};

struct ConvergenceResult {
  std::vector<ConvergencePoint> points;
  RateFit fit;  // log(mean) against log(n)
};

/// For each n: draw `reps` sample sets from truth, smooth them, estimate the
/// chosen distance to the smoothed truth, and fit the log-log decay rate.
ConvergenceResult convergence_experiment(const TruthDistribution& truth,
                                         double sigma, DistanceKind kind,
                                         const std::vector<Eigen::Index>& n_grid,
                                         Eigen::Index reps,
                                         const DistanceBudget& budget,
                                         std::uint64_t seed);

}  // namespace smoothent
