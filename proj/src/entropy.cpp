#include "smoothent/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "smoothent/kdtree.hpp"
#include "smoothent/numeric.hpp"
#include "smoothent/rng.hpp"
#include "smoothent/threading.hpp"

namespace smoothent {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kEulerGamma = 0.57721566490153286060651209008240;
constexpr std::uint64_t kTagEntropyMc = 0x656e7463ull;

double digamma(double x) {
  double acc = 0.0;
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  return acc + std::log(x) - 0.5 * inv -
         inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0));
}

double log_unit_ball_volume(Eigen::Index d) {
  return 0.5 * static_cast<double>(d) * std::log(M_PI) -
         std::lgamma(0.5 * static_cast<double>(d) + 1.0);
}

/// Lexicographic order over rows; ties keep index order (stable).
std::vector<Eigen::Index> sorted_row_order(const Eigen::MatrixXd& rows) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(rows.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) {
                     for (Eigen::Index k = 0; k < rows.cols(); ++k) {
                       if (rows(a, k) < rows(b, k)) return true;
                       if (rows(a, k) > rows(b, k)) return false;
                     }
                     return false;
                   });
  return order;
}

}  // namespace

double gaussian_entropy_analytic(Eigen::Index d, double sigma) {
  if (d < 1) throw std::invalid_argument("gaussian_entropy_analytic: d must be >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_entropy_analytic: sigma must be positive");
  return 0.5 * static_cast<double>(d) * (kLog2Pi + 1.0 + 2.0 * std::log(sigma));
}

EstimateReport mixture_entropy_mc(const GaussianMixture& mix,
                                  const McBudget& budget, std::uint64_t seed) {
  if (budget.n_mc < 1) throw std::invalid_argument("mixture_entropy_mc: n_mc must be >= 1");
  const Eigen::Index n = mix.modes();
  const Eigen::Index d = mix.dim();
  const Eigen::Index n_mc = budget.n_mc;

  std::vector<double> sums(static_cast<std::size_t>(n));
  std::vector<double> sumsqs(static_cast<std::size_t>(n));
  const SplitRng root = SplitRng(seed).child(kTagEntropyMc);

  parallel_for(n, [&](std::int64_t b, std::int64_t e) {
    DensityScratch scratch;
    Eigen::VectorXd z(d);
    for (std::int64_t i = b; i < e; ++i) {
      const SplitRng center_rng = root.child(static_cast<std::uint64_t>(i));
      double s = 0.0, ss = 0.0;
      for (Eigen::Index j = 0; j < n_mc; ++j) {
        SplitRng rng = center_rng.child(static_cast<std::uint64_t>(j));
        for (Eigen::Index k = 0; k < d; ++k)
          z(k) = mix.centers(i, k) + mix.sigma * rng.next_normal();
        const double term = log_density(mix, z, scratch);
        s += term;
        ss += term * term;
      }
      sums[static_cast<std::size_t>(i)] = s;
      sumsqs[static_cast<std::size_t>(i)] = ss;
    }
  });

  // Weight-weighted outer average plus the matching weighted term variance,
  // combined in index order.
  const double inv_mc = 1.0 / static_cast<double>(n_mc);
  std::vector<double> contrib(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    contrib[static_cast<std::size_t>(i)] = mix.weights(i) * sums[static_cast<std::size_t>(i)] * inv_mc;
  const double mean_log = pairwise_sum(contrib);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t u = static_cast<std::size_t>(i);
    contrib[u] = mix.weights(i) * inv_mc *
                 (sumsqs[u] - 2.0 * mean_log * sums[u]) +
                 mix.weights(i) * mean_log * mean_log;
  }
  const double term_var = std::max(0.0, pairwise_sum(contrib));

  EstimateReport report;
  report.value = -mean_log;
  report.std_error = std::sqrt(term_var / static_cast<double>(n * n_mc));
  report.n = n;
  report.n_mc = n_mc;
  report.seed = seed;
  return report;
}

EstimateReport plugin_entropy(const SampleMatrix& samples, double sigma,
                              const McBudget& budget, std::uint64_t seed) {
  const auto order = sorted_row_order(samples.rows);
  Eigen::MatrixXd sorted(samples.rows.rows(), samples.rows.cols());
  for (Eigen::Index i = 0; i < samples.rows.rows(); ++i)
    sorted.row(i) = samples.rows.row(order[static_cast<std::size_t>(i)]);
  SampleMatrix canonical{std::move(sorted), samples.seed};
  EstimateReport report =
      mixture_entropy_mc(smooth_empirical(canonical, sigma), budget, seed);
  report.seed = seed;
  return report;
}

double mc_mse_bound(const McBudget& budget, Eigen::Index d, double sigma,
                    Eigen::Index n) {
  if (d < 1 || n < 1 || budget.n_mc < 1 || !(sigma > 0.0))
    throw std::invalid_argument("mc_mse_bound: parameters must be positive");
  const double dd = static_cast<double>(d);
  const double s2 = sigma * sigma;
  const double denom = static_cast<double>(n) * static_cast<double>(budget.n_mc);
  if (budget.mse_bound_mode == MseBoundMode::bounded_support)
    return 2.0 * dd * (2.0 + s2) / s2 / denom;
  const double m = budget.support_or_moment_param;
  if (m < 0.0) throw std::invalid_argument("mc_mse_bound: moment must be nonnegative");
  const double sqd = sigma * std::sqrt(dd);
  return (9.0 * dd * s2 + 8.0 * (2.0 + sqd) * m +
          3.0 * (11.0 * sqd + 1.0) * std::sqrt(m)) /
         s2 / denom;
}

EstimateReport knn_kl_entropy(const SampleMatrix& samples) {
  const Eigen::Index n = samples.count();
  const Eigen::Index d = samples.dim();
  if (n < 2) throw std::invalid_argument("knn_kl_entropy: need n >= 2");

  // Exact duplicates give a zero nearest-neighbor distance and an undefined
  // log; report the first offending pair.
  {
    const auto order = sorted_row_order(samples.rows);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      if ((samples.rows.row(order[i]) - samples.rows.row(order[i + 1]))
              .cwiseAbs()
              .maxCoeff() == 0.0)
        throw std::invalid_argument(
            "knn_kl_entropy: duplicate rows at indices " +
            std::to_string(order[i]) + " and " + std::to_string(order[i + 1]));
    }
  }

  std::vector<double> log_dists(static_cast<std::size_t>(n));
  if (d <= 15) {
    const KdTree tree(samples.rows);
    parallel_for(n, [&](std::int64_t b, std::int64_t e) {
      for (std::int64_t i = b; i < e; ++i)
        log_dists[static_cast<std::size_t>(i)] =
            std::log(tree.nearest_distance_excluding(i));
    });
  } else {
    const Eigen::MatrixXd& rows = samples.rows;
    parallel_for(n, [&](std::int64_t b, std::int64_t e) {
      Eigen::ArrayXd sq(n);
      for (std::int64_t i = b; i < e; ++i) {
        sq.setZero();
        for (Eigen::Index k = 0; k < d; ++k)
          sq += (rows.col(k).array() - rows(i, k)).square();
        sq(i) = std::numeric_limits<double>::infinity();
        log_dists[static_cast<std::size_t>(i)] = 0.5 * std::log(sq.minCoeff());
      }
    });
  }

  EstimateReport report;
  report.value = digamma(static_cast<double>(n)) + kEulerGamma +
                 log_unit_ball_volume(d) +
                 static_cast<double>(d) * pairwise_sum(log_dists) /
                     static_cast<double>(n);
  report.std_error = 0.0;
  report.n = n;
  report.n_mc = 0;
  report.seed = samples.seed;
  return report;
}

EstimateReport kde_entropy(const SampleMatrix& samples, double bandwidth) {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("kde_entropy: bandwidth must be positive");
  const Eigen::Index n = samples.count();
  const Eigen::Index d = samples.dim();
  if (n < 2) throw std::invalid_argument("kde_entropy: need n >= 2");

  const double inv_two_h2 = 1.0 / (2.0 * bandwidth * bandwidth);
  const double log_norm =
      -0.5 * static_cast<double>(d) * (kLog2Pi + 2.0 * std::log(bandwidth)) -
      std::log(static_cast<double>(n - 1));
  std::vector<double> terms(static_cast<std::size_t>(n));

  if (d == 1) {
    // Sorted one-dimensional fast path: only the window whose kernel terms
    // are within exp(-40) of the largest remaining term can contribute, and
    // that largest term sits at the nearest other point, so the window is
    // the adjacent gap plus the kernel's own reach.
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = samples.rows(i, 0);
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> sorted(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) sorted[i] = xs[order[i]];
    const double reach = bandwidth * std::sqrt(80.0);

    std::vector<double> sorted_terms(static_cast<std::size_t>(n));
    parallel_for(n, [&](std::int64_t b, std::int64_t e) {
      Eigen::ArrayXd expo;
      for (std::int64_t i = b; i < e; ++i) {
        const double x = sorted[static_cast<std::size_t>(i)];
        double nearest = std::numeric_limits<double>::infinity();
        if (i > 0) nearest = x - sorted[static_cast<std::size_t>(i - 1)];
        if (i + 1 < n)
          nearest = std::min(nearest, sorted[static_cast<std::size_t>(i + 1)] - x);
        const double radius = nearest + reach;
        const auto lo = std::lower_bound(sorted.begin(), sorted.end(), x - radius);
        const auto hi = std::upper_bound(sorted.begin(), sorted.end(), x + radius);
        const auto lo_idx = static_cast<Eigen::Index>(lo - sorted.begin());
        const Eigen::Index len = static_cast<Eigen::Index>(hi - lo);
        expo.resize(len);
        for (Eigen::Index j = 0; j < len; ++j) {
          const double diff = sorted[static_cast<std::size_t>(lo_idx + j)] - x;
          expo(j) = -diff * diff * inv_two_h2;
        }
        expo(i - lo_idx) = -std::numeric_limits<double>::infinity();  // leave self out
        const double m = expo.maxCoeff();
        expo = (expo - m).exp();
        const double s = pairwise_sum(
            std::span<const double>(expo.data(), static_cast<std::size_t>(len)));
        sorted_terms[static_cast<std::size_t>(i)] = m + std::log(s) + log_norm;
      }
    });
    for (std::size_t i = 0; i < order.size(); ++i)
      terms[order[i]] = sorted_terms[i];
  } else {
    const Eigen::MatrixXd& rows = samples.rows;
    parallel_for(n, [&](std::int64_t b, std::int64_t e) {
      Eigen::ArrayXd expo(n);
      for (std::int64_t i = b; i < e; ++i) {
        expo.setZero();
        for (Eigen::Index k = 0; k < d; ++k)
          expo += (rows.col(k).array() - rows(i, k)).square();
        expo = -expo * inv_two_h2;
        expo(i) = -std::numeric_limits<double>::infinity();
        const double m = expo.maxCoeff();
        expo = (expo - m).exp();
        const double s = pairwise_sum(
            std::span<const double>(expo.data(), static_cast<std::size_t>(n)));
        terms[static_cast<std::size_t>(i)] = m + std::log(s) + log_norm;
      }
    });
  }

  const double mean = pairwise_sum(terms) / static_cast<double>(n);
  double var = 0.0;
  for (double t : terms) var += (t - mean) * (t - mean);
  var /= static_cast<double>(n);

  EstimateReport report;
  report.value = -mean;
  report.std_error = std::sqrt(var / static_cast<double>(n));
  report.n = n;
  report.n_mc = 0;
  report.seed = samples.seed;
  return report;
}

double silverman_bandwidth(const SampleMatrix& samples) {
  const Eigen::Index n = samples.count();
  const Eigen::Index d = samples.dim();
  const Eigen::RowVectorXd mean = samples.rows.colwise().mean();
  const double avg_var =
      (samples.rows.rowwise() - mean).array().square().sum() /
      static_cast<double>((n - 1) * d);
  const double dd = static_cast<double>(d);
  return std::pow(4.0 / (dd + 2.0), 1.0 / (dd + 4.0)) *
         std::pow(static_cast<double>(n), -1.0 / (dd + 4.0)) *
         std::sqrt(avg_var);
}

}  // namespace smoothent
