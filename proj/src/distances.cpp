#include "smoothent/distances.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "smoothent/numeric.hpp"
#include "smoothent/quadrature.hpp"
#include "smoothent/rng.hpp"
#include "smoothent/threading.hpp"

namespace smoothent {

namespace {

constexpr std::uint64_t kTagTv = 0x74762e2eull;
constexpr std::uint64_t kTagKl = 0x6b6c2e2eull;
constexpr std::uint64_t kTagChi2 = 0x63686932ull;
constexpr std::uint64_t kTagChi2Mi = 0x63326d69ull;
constexpr std::uint64_t kTagConv = 0x636f6e76ull;
constexpr std::uint64_t kTagSmoothed = 0x736d6f6full;

struct TermStats {
  double mean;
  double std_error;
};

TermStats stats_from_terms(const std::vector<double>& terms) {
  const MeanVar mv = [&] {
    std::vector<double> sums(terms.size()), sumsqs(terms.size());
    for (std::size_t i = 0; i < terms.size(); ++i) {
      sums[i] = terms[i];
      sumsqs[i] = terms[i] * terms[i];
    }
    return mean_var_from_sums(sums, sumsqs, terms.size());
  }();
  return {mv.mean, std::sqrt(mv.var / static_cast<double>(terms.size()))};
}

void check_mc_args(const GaussianMixture& a, const GaussianMixture& b,
                   Eigen::Index n_points) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("distance: mixtures have different dimensions");
  if (n_points < 2) throw std::invalid_argument("distance: need n_points >= 2");
}

/// Per-point MC terms under a caller-supplied proposal/term rule, evaluated
/// in parallel with per-point streams and reduced in index order.
template <typename TermFn>
std::vector<double> mc_terms(Eigen::Index n_points, std::uint64_t seed,
                             std::uint64_t tag, Eigen::Index dim,
                             const TermFn& term_fn) {
  std::vector<double> terms(static_cast<std::size_t>(n_points));
  const SplitRng root = SplitRng(seed).child(tag);
  parallel_for(n_points, [&](std::int64_t b, std::int64_t e) {
    DensityScratch s1, s2;
    Eigen::VectorXd z(dim);
    for (std::int64_t t = b; t < e; ++t) {
      SplitRng rng = root.child(static_cast<std::uint64_t>(t));
      terms[static_cast<std::size_t>(t)] = term_fn(rng, z, s1, s2);
    }
  });
  return terms;
}

}  // namespace

const char* distance_kind_name(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::tv: return "tv";
    case DistanceKind::kl: return "kl";
    case DistanceKind::chi2: return "chi2";
    case DistanceKind::w1: return "w1";
    case DistanceKind::w2sq: return "w2sq";
  }
  return "?";
}

DistanceKind parse_distance_kind(const std::string& name) {
  if (name == "tv") return DistanceKind::tv;
  if (name == "kl") return DistanceKind::kl;
  if (name == "chi2") return DistanceKind::chi2;
  if (name == "w1") return DistanceKind::w1;
  if (name == "w2sq") return DistanceKind::w2sq;
  throw std::invalid_argument("unknown distance kind '" + name + "'");
}

RateFit fit_rate(const std::vector<std::array<double, 2>>& log_points) {
  if (log_points.size() < 3)
    throw std::invalid_argument("fit_rate: need at least 3 points");
  const double n = static_cast<double>(log_points.size());
  double sx = 0, sy = 0;
  for (const auto& p : log_points) {
    sx += p[0];
    sy += p[1];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& p : log_points) {
    sxx += (p[0] - mx) * (p[0] - mx);
    sxy += (p[0] - mx) * (p[1] - my);
    syy += (p[1] - my) * (p[1] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_rate: degenerate abscissa");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0;
  for (const auto& p : log_points) {
    const double r = p[1] - (fit.intercept + fit.slope * p[0]);
    sse += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - sse / syy) : 1.0;
  fit.points = log_points;
  return fit;
}

DistanceEstimate tv_mc(const GaussianMixture& q_mix,
                       const GaussianMixture& r_mix, Eigen::Index n_points,
                       std::uint64_t seed) {
  check_mc_args(q_mix, r_mix, n_points);
  const auto terms = mc_terms(
      n_points, seed, kTagTv, q_mix.dim(),
      [&](SplitRng& rng, Eigen::VectorXd& z, DensityScratch& s1, DensityScratch& s2) {
        if (rng.next_uniform() < 0.5)
          sample_one(q_mix, rng, z);
        else
          sample_one(r_mix, rng, z);
        const double lq = log_density(q_mix, z, s1);
        const double lr = log_density(r_mix, z, s2);
        // |q - r| / (q + r) in a cancellation-free form.
        return std::tanh(0.5 * std::abs(lq - lr));
      });
  const TermStats st = stats_from_terms(terms);
  return {DistanceKind::tv, st.mean, st.std_error, n_points, seed, false};
}

DistanceEstimate kl_mc(const GaussianMixture& q_mix,
                       const GaussianMixture& r_mix, Eigen::Index n_points,
                       std::uint64_t seed) {
  check_mc_args(q_mix, r_mix, n_points);
  const auto terms = mc_terms(
      n_points, seed, kTagKl, q_mix.dim(),
      [&](SplitRng& rng, Eigen::VectorXd& z, DensityScratch& s1, DensityScratch& s2) {
        sample_one(q_mix, rng, z);
        return log_density(q_mix, z, s1) - log_density(r_mix, z, s2);
      });
  const TermStats st = stats_from_terms(terms);
  return {DistanceKind::kl, st.mean, st.std_error, n_points, seed, false};
}

DistanceEstimate chi2_mc(const GaussianMixture& r_mix,
                         const GaussianMixture& q_mix, Eigen::Index n_points,
                         std::uint64_t seed) {
  check_mc_args(r_mix, q_mix, n_points);
  const auto terms = mc_terms(
      n_points, seed, kTagChi2, q_mix.dim(),
      [&](SplitRng& rng, Eigen::VectorXd& z, DensityScratch& s1, DensityScratch& s2) {
        sample_one(q_mix, rng, z);
        const double ratio =
            std::exp(log_density(r_mix, z, s1) - log_density(q_mix, z, s2));
        return (ratio - 1.0) * (ratio - 1.0);
      });
  const TermStats st = stats_from_terms(terms);

  DistanceEstimate est{DistanceKind::chi2, st.mean, st.std_error, n_points, seed, false};
  std::vector<double> sorted = terms;
  const std::size_t top = std::max<std::size_t>(1, sorted.size() / 100);
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(top),
                   sorted.end(), std::greater<double>());
  double top_sum = 0.0;
  for (std::size_t i = 0; i < top; ++i) top_sum += sorted[i];
  const double total = pairwise_sum(terms);
  est.heavy_tail = total > 0.0 && top_sum > 0.5 * total;
  // Every term near 1 means every sampled likelihood ratio sat near zero (or
  // pinned far from one): the proposal saw none of the numerator's mass, so
  // the integral's dominant region went unvisited.
  double min_term = std::numeric_limits<double>::infinity();
  for (double t : terms) min_term = std::min(min_term, t);
  if (min_term > 0.9) est.heavy_tail = true;
  return est;
}

DistanceEstimate chi2_mutual_information(const DiscreteDistribution& p,
                                         double sigma, Chi2MiMethod method,
                                         Eigen::Index n_points,
                                         std::uint64_t seed) {
  if (!(sigma > 0.0)) throw std::invalid_argument("chi2_mutual_information: sigma must be positive");
  const GaussianMixture q_mix = smooth_discrete(p, sigma);
  // E_P[phi_sigma(z - S)^2] = (2 sigma sqrt(pi))^-1 * (P * N_{sigma/sqrt2})(z)
  const GaussianMixture num_mix = smooth_discrete(p, sigma / std::sqrt(2.0));
  const double log_num_scale = -std::log(2.0 * sigma * std::sqrt(M_PI));

  if (method == Chi2MiMethod::quadrature_1d) {
    if (p.dim() != 1)
      throw std::invalid_argument("chi2_mutual_information: quadrature_1d requires d=1");
    const double lo_atom = p.atoms.col(0).minCoeff();
    const double hi_atom = p.atoms.col(0).maxCoeff();
    const double pad = 10.0 * sigma * std::max(1.0, hi_atom - lo_atom);
    std::vector<double> breaks;
    breaks.push_back(lo_atom - pad);
    for (Eigen::Index i = 0; i < p.size(); ++i) breaks.push_back(p.atoms(i, 0));
    breaks.push_back(hi_atom + pad);

    DensityScratch s1, s2;
    Eigen::VectorXd z(1);
    const auto integrand = [&](double x) {
      z(0) = x;
      return std::exp(log_density(num_mix, z, s1) + log_num_scale -
                      log_density(q_mix, z, s2));
    };
    const QuadratureResult quad = integrate_split(integrand, breaks, 1e-8, 1000000);
    const double value = quad.value - 1.0;
    if (!quad.converged)
      throw NumericError("chi2_mutual_information: quadrature did not converge within budget",
                         value);
    return {DistanceKind::chi2, value, quad.error_estimate,
            static_cast<Eigen::Index>(quad.evals), seed, false};
  }

  if (n_points < 2) throw std::invalid_argument("chi2_mutual_information: need n_points >= 2");
  const auto terms = mc_terms(
      n_points, seed, kTagChi2Mi, p.dim(),
      [&](SplitRng& rng, Eigen::VectorXd& z, DensityScratch& s1, DensityScratch& s2) {
        sample_one(q_mix, rng, z);
        return std::exp(log_density(num_mix, z, s1) + log_num_scale -
                        2.0 * log_density(q_mix, z, s2));
      });
  const TermStats st = stats_from_terms(terms);
  return {DistanceKind::chi2, st.mean - 1.0, st.std_error, n_points, seed, false};
}

namespace {

/// Exact square assignment by shortest augmenting paths with potentials.
/// Returns the minimizing column for each row.
std::vector<int> solve_assignment(
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>& cost) {
  const int n = static_cast<int>(cost.rows());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> match(static_cast<std::size_t>(n) + 1, 0);  // col -> row (1-based)
  std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
  std::vector<double> minv(static_cast<std::size_t>(n) + 1);
  std::vector<char> used(static_cast<std::size_t>(n) + 1);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), char{0});
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = match[static_cast<std::size_t>(j0)];
      int j1 = -1;
      double delta = kInf;
      const double* row = cost.data() + static_cast<std::ptrdiff_t>(i0 - 1) * n;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = row[j - 1] - u[static_cast<std::size_t>(i0)] -
                           v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j)
    row_to_col[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return row_to_col;
}

DistanceEstimate ot_empirical(const SampleMatrix& a, const SampleMatrix& b,
                              bool squared, bool force) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("w_empirical: dimension mismatch");
  if (a.count() != b.count())
    throw std::invalid_argument("w_empirical: clouds must have equal sizes");
  const Eigen::Index m = a.count();
  if (m > 4096 && !force)
    throw std::invalid_argument(
        "w_empirical: cloud size " + std::to_string(m) +
        " exceeds 4096 (cubic assignment solver); pass force to override");

  double total = 0.0;
  if (a.dim() == 1) {
    // The sorted coupling is optimal in one dimension for any convex cost.
    std::vector<double> xs(static_cast<std::size_t>(m)), ys(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
      xs[static_cast<std::size_t>(i)] = a.rows(i, 0);
      ys[static_cast<std::size_t>(i)] = b.rows(i, 0);
    }
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    std::vector<double> costs(static_cast<std::size_t>(m));
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double diff = std::abs(xs[i] - ys[i]);
      costs[i] = squared ? diff * diff : diff;
    }
    total = pairwise_sum(costs);
  } else {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> cost(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) {
        const double sq = (a.rows.row(i) - b.rows.row(j)).squaredNorm();
        cost(i, j) = squared ? sq : std::sqrt(sq);
      }
    const auto assign = solve_assignment(cost);
    std::vector<double> costs(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i)
      costs[static_cast<std::size_t>(i)] = cost(i, assign[static_cast<std::size_t>(i)]);
    total = pairwise_sum(costs);
  }
  return {squared ? DistanceKind::w2sq : DistanceKind::w1,
          total / static_cast<double>(m), 0.0, m, a.seed, false};
}

}  // namespace

DistanceEstimate w1_empirical(const SampleMatrix& a, const SampleMatrix& b,
                              bool force) {
  return ot_empirical(a, b, /*squared=*/false, force);
}

DistanceEstimate w2sq_empirical(const SampleMatrix& a, const SampleMatrix& b,
                                bool force) {
  return ot_empirical(a, b, /*squared=*/true, force);
}

SampleMatrix sample_smoothed(const TruthDistribution& truth, double sigma,
                             Eigen::Index m, std::uint64_t seed) {
  SampleMatrix base = std::visit(
      [&](const auto& t) { return sample(t, m, seed); }, truth);
  const SplitRng root = SplitRng(seed).child(kTagSmoothed);
  for (Eigen::Index i = 0; i < m; ++i) {
    SplitRng rng = root.child(static_cast<std::uint64_t>(i));
    for (Eigen::Index k = 0; k < base.dim(); ++k)
      base.rows(i, k) += sigma * rng.next_normal();
  }
  return base;
}

GaussianMixture smoothed_truth_mixture(const TruthDistribution& truth,
                                       double sigma) {
  if (const auto* disc = std::get_if<DiscreteDistribution>(&truth))
    return smooth_discrete(*disc, sigma);
  const auto& mix = std::get<GaussianMixture>(truth);
  if (mix.truncate_unit_box)
    throw std::invalid_argument(
        "smoothed_truth_mixture: truncated mixtures have no finite-mixture smoothed density");
  return make_gaussian_mixture(mix.centers, mix.weights,
                               std::sqrt(mix.sigma * mix.sigma + sigma * sigma));
}

ConvergenceResult convergence_experiment(const TruthDistribution& truth,
                                         double sigma, DistanceKind kind,
                                         const std::vector<Eigen::Index>& n_grid,
                                         Eigen::Index reps,
                                         const DistanceBudget& budget,
                                         std::uint64_t seed) {
  if (n_grid.size() < 3)
    throw std::invalid_argument("convergence_experiment: need at least 3 grid points");
  for (std::size_t i = 0; i + 1 < n_grid.size(); ++i)
    if (n_grid[i] >= n_grid[i + 1])
      throw std::invalid_argument("convergence_experiment: n_grid must be strictly increasing");
  if (reps < 1) throw std::invalid_argument("convergence_experiment: reps must be >= 1");

  const bool needs_density =
      kind == DistanceKind::tv || kind == DistanceKind::kl || kind == DistanceKind::chi2;
  GaussianMixture q_mix;
  if (needs_density) q_mix = smoothed_truth_mixture(truth, sigma);

  ConvergenceResult result;
  const SplitRng root = SplitRng(seed).child(kTagConv);
  for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
    const Eigen::Index n = n_grid[gi];
    std::vector<double> values(static_cast<std::size_t>(reps));
    for (Eigen::Index rep = 0; rep < reps; ++rep) {
      SplitRng chain = root.child(gi).child(static_cast<std::uint64_t>(rep));
      const std::uint64_t seed_sample = chain.next_u64();
      const std::uint64_t seed_mc = chain.next_u64();
      const SampleMatrix samples = std::visit(
          [&](const auto& t) { return sample(t, n, seed_sample); }, truth);
      const GaussianMixture r_mix = smooth_empirical(samples, sigma);
      double v = 0.0;
      switch (kind) {
        case DistanceKind::tv:
          v = tv_mc(r_mix, q_mix, budget.n_points, seed_mc).value;
          break;
        case DistanceKind::kl:
          v = kl_mc(r_mix, q_mix, budget.n_points, seed_mc).value;
          break;
        case DistanceKind::chi2:
          v = chi2_mc(r_mix, q_mix, budget.n_points, seed_mc).value;
          break;
        case DistanceKind::w1:
        case DistanceKind::w2sq: {
          const std::uint64_t seed_b = chain.next_u64();
          const SampleMatrix cloud_a = sample(r_mix, budget.ot_cloud, seed_mc);
          const SampleMatrix cloud_b =
              sample_smoothed(truth, sigma, budget.ot_cloud, seed_b);
          v = kind == DistanceKind::w1 ? w1_empirical(cloud_a, cloud_b).value
                                       : w2sq_empirical(cloud_a, cloud_b).value;
          break;
        }
      }
      values[static_cast<std::size_t>(rep)] = v;
    }
    ConvergencePoint pt;
    pt.n = n;
    pt.reps = reps;
    pt.mean = pairwise_sum(values) / static_cast<double>(reps);
    double var = 0.0;
    for (double v : values) var += (v - pt.mean) * (v - pt.mean);
    pt.std_error = reps > 1 ? std::sqrt(var / static_cast<double>(reps - 1) /
                                        static_cast<double>(reps))
                            : 0.0;
    result.points.push_back(pt);
  }

  std::vector<std::array<double, 2>> log_points;
  for (const auto& pt : result.points)
    if (pt.mean > 0.0)
      log_points.push_back({std::log(static_cast<double>(pt.n)), std::log(pt.mean)});
  if (log_points.size() < 3)
    throw NumericError("convergence_experiment: fewer than 3 positive means to fit", 0.0);
  result.fit = fit_rate(log_points);
  return result;
}

}  // namespace smoothent
