// Test-only reference computations, kept independent of the library paths
// they check: long-double naive density sums, one-dimensional quadrature
// entropies, and closed-form Gaussian facts.
#pragma once

#include <cmath>
#include <random>

#include "smoothent/mixture.hpp"
#include "smoothent/quadrature.hpp"

namespace oracles {

/// Naive mixture log density: direct summation in extended precision.
/// Returns -inf if the unshifted sum underflows to zero.
inline double naive_log_density(const smoothent::GaussianMixture& mix,
                                const Eigen::VectorXd& z) {
  const long double two_pi = 6.283185307179586476925286766559L;
  const long double s2 = static_cast<long double>(mix.sigma) * mix.sigma;
  long double sum = 0.0L;
  for (Eigen::Index i = 0; i < mix.modes(); ++i) {
    long double sq = 0.0L;
    for (Eigen::Index k = 0; k < mix.dim(); ++k) {
      const long double diff = static_cast<long double>(z(k)) - mix.centers(i, k);
      sq += diff * diff;
    }
    sum += static_cast<long double>(mix.weights(i)) * std::exp(-sq / (2.0L * s2));
  }
  const long double norm =
      std::pow(two_pi * s2, -0.5L * static_cast<long double>(mix.dim()));
  return static_cast<double>(std::log(sum * norm));
}

/// -int g log g for a one-dimensional mixture by adaptive quadrature.
inline double quad_entropy_1d(const smoothent::GaussianMixture& mix, double lo,
                              double hi, double tol = 1e-9) {
  smoothent::DensityScratch scratch;
  Eigen::VectorXd z(1);
  const auto integrand = [&](double x) {
    z(0) = x;
    const double lg = smoothent::log_density(mix, z, scratch);
    const double g = std::exp(lg);
    return g > 1e-300 ? -g * lg : 0.0;
  };
  std::vector<double> breaks{lo};
  for (Eigen::Index i = 0; i < mix.modes(); ++i) breaks.push_back(mix.centers(i, 0));
  breaks.push_back(hi);
  return smoothent::integrate_split(integrand, breaks, tol, 400000).value;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Random mixture for property tests (std::mt19937, independent of the
/// library's generator).
inline smoothent::GaussianMixture random_mixture(std::mt19937& gen,
                                                 Eigen::Index max_modes,
                                                 Eigen::Index max_dim) {
  std::uniform_int_distribution<Eigen::Index> modes_dist(1, max_modes);
  std::uniform_int_distribution<Eigen::Index> dim_dist(1, max_dim);
  std::uniform_real_distribution<double> center_dist(-5.0, 5.0);
  std::uniform_real_distribution<double> sigma_dist(0.1, 2.0);
  std::uniform_real_distribution<double> weight_dist(0.05, 1.0);
  const Eigen::Index n = modes_dist(gen);
  const Eigen::Index d = dim_dist(gen);
  Eigen::MatrixXd centers(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < d; ++k) centers(i, k) = center_dist(gen);
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) w(i) = weight_dist(gen);
  w /= w.sum();
  return smoothent::make_gaussian_mixture(std::move(centers), std::move(w),
                                          sigma_dist(gen));
}

}  // namespace oracles
