#include "smoothent/mixture.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "smoothent/numeric.hpp"
#include "smoothent/rng.hpp"
#include "smoothent/threading.hpp"

namespace smoothent {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr std::uint64_t kTagMixtureSample = 0x6d697873ull;   // per-op stream tags
constexpr std::uint64_t kTagDiscreteSample = 0x64697363ull;

void check_weights(const Eigen::VectorXd& w, const char* what) {
  if (w.size() < 1) throw std::invalid_argument(std::string(what) + ": empty weight vector");
  // Extended-precision accumulation: the check must not inject more rounding
  // than the 1e-12 tolerance it enforces.
  long double s = 0.0L;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!(w(i) >= 0.0)) throw std::invalid_argument(std::string(what) + ": negative weight");
    s += static_cast<long double>(w(i));
  }
  if (std::abs(static_cast<double>(s) - 1.0) > 1e-12)
    throw std::invalid_argument(std::string(what) + ": weights sum to " +
                                format_full(static_cast<double>(s)) +
                                ", expected 1 within 1e-12");
}

}  // namespace

std::string format_full(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

GaussianMixture make_gaussian_mixture(Eigen::MatrixXd centers,
                                      Eigen::VectorXd weights, double sigma) {
  if (centers.rows() < 1 || centers.cols() < 1)
    throw std::invalid_argument("GaussianMixture: need n_modes >= 1 and d >= 1");
  if (weights.size() != centers.rows())
    throw std::invalid_argument("GaussianMixture: weights/centers size mismatch");
  if (!(sigma > 0.0)) throw std::invalid_argument("GaussianMixture: sigma must be positive");
  if (!centers.allFinite()) throw std::invalid_argument("GaussianMixture: non-finite center");
  check_weights(weights, "GaussianMixture");
  GaussianMixture mix;
  mix.centers = std::move(centers);
  mix.weights = std::move(weights);
  mix.sigma = sigma;
  mix.log_weights.resize(mix.weights.size());
  for (Eigen::Index i = 0; i < mix.weights.size(); ++i)
    mix.log_weights(i) = mix.weights(i) > 0.0
                             ? std::log(mix.weights(i))
                             : -std::numeric_limits<double>::infinity();
  mix.uniform_weights =
      mix.weights.minCoeff() == mix.weights.maxCoeff();
  return mix;
}

GaussianMixture make_gaussian_mixture_uniform(Eigen::MatrixXd centers,
                                              double sigma) {
  const Eigen::Index n = centers.rows();
  if (n < 1) throw std::invalid_argument("GaussianMixture: need n_modes >= 1");
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  // Renormalize exactly so the sum-to-one invariant holds for every n.
  w /= w.sum();
  return make_gaussian_mixture(std::move(centers), std::move(w), sigma);
}

DiscreteDistribution make_discrete(Eigen::MatrixXd atoms, Eigen::VectorXd probs) {
  if (atoms.rows() < 1 || atoms.cols() < 1)
    throw std::invalid_argument("DiscreteDistribution: need k >= 1 and d >= 1");
  if (probs.size() != atoms.rows())
    throw std::invalid_argument("DiscreteDistribution: probs/atoms size mismatch");
  if (!atoms.allFinite()) throw std::invalid_argument("DiscreteDistribution: non-finite atom");
  check_weights(probs, "DiscreteDistribution");
  for (Eigen::Index i = 0; i < atoms.rows(); ++i)
    for (Eigen::Index j = i + 1; j < atoms.rows(); ++j)
      if ((atoms.row(i) - atoms.row(j)).cwiseAbs().maxCoeff() == 0.0)
        throw std::invalid_argument("DiscreteDistribution: atoms " + std::to_string(i) +
                                    " and " + std::to_string(j) + " coincide");
  DiscreteDistribution p;
  p.atoms = std::move(atoms);
  p.probs = std::move(probs);
  return p;
}

namespace {

/// sum_i exp(e_i - m), blocked so SIMD reductions stay deterministic and the
/// block partials combine pairwise. Shifted arguments are floored at -708:
/// such terms are below 1e-307 relative and only exist to stall the FPU with
/// subnormals.
double exp_sum_shifted(const Eigen::ArrayXd& e, double m) {
  constexpr Eigen::Index kBlock = 4096;
  constexpr double kExpFloor = -708.0;
  const Eigen::Index n = e.size();
  if (n <= kBlock) return (e - m).max(kExpFloor).exp().sum();
  std::vector<double> partials;
  partials.reserve(static_cast<std::size_t>((n + kBlock - 1) / kBlock));
  for (Eigen::Index b = 0; b < n; b += kBlock) {
    const Eigen::Index len = std::min(kBlock, n - b);
    partials.push_back((e.segment(b, len) - m).max(kExpFloor).exp().sum());
  }
  return pairwise_sum(partials);
}

}  // namespace

double log_density(const GaussianMixture& mix,
                   const Eigen::Ref<const Eigen::VectorXd>& z,
                   DensityScratch& scratch) {
  const Eigen::Index n = mix.modes();
  const Eigen::Index d = mix.dim();
  if (z.size() != d)
    throw std::invalid_argument("log_density: point has dimension " +
                                std::to_string(z.size()) + ", mixture has " +
                                std::to_string(d));
  Eigen::ArrayXd& e = scratch.exponents;
  const double inv_two_s2 = 1.0 / (2.0 * mix.sigma * mix.sigma);
  e = (mix.centers.col(0).array() - z(0)).square();
  for (Eigen::Index k = 1; k < d; ++k)
    e += (mix.centers.col(k).array() - z(k)).square();
  const bool uniform = mix.uniform_weights;
  if (uniform) {
    e *= -inv_two_s2;
  } else {
    e = mix.log_weights.array() - e * inv_two_s2;
  }
  const double m = e.maxCoeff();  // exp(-inf - m) = 0 handles zero weights
  const double s = exp_sum_shifted(e, m);
  const double log_w = uniform ? mix.log_weights(0) : 0.0;
  return m + std::log(s) + log_w -
         0.5 * static_cast<double>(d) * (kLog2Pi + 2.0 * std::log(mix.sigma));
}

double log_density(const GaussianMixture& mix,
                   const Eigen::Ref<const Eigen::VectorXd>& z) {
  DensityScratch scratch;
  return log_density(mix, z, scratch);
}

void log_density_batch(const GaussianMixture& mix,
                       const Eigen::Ref<const Eigen::MatrixXd>& points,
                       Eigen::Ref<Eigen::VectorXd> out) {
  if (points.cols() != mix.dim())
    throw std::invalid_argument("log_density_batch: dimension mismatch");
  if (out.size() != points.rows())
    throw std::invalid_argument("log_density_batch: output size mismatch");
  // Copy rows up front: Ref is not guaranteed thread-safe to slice lazily.
  const Eigen::MatrixXd pts = points;
  double* dst = out.data();
  parallel_for(points.rows(), [&](std::int64_t b, std::int64_t e) {
    DensityScratch scratch;
    for (std::int64_t i = b; i < e; ++i)
      dst[i] = log_density(mix, pts.row(i).transpose(), scratch);
  });
}

namespace {

Eigen::Index pick_component(const Eigen::VectorXd& w, double u) {
  // Inverse CDF walk; weights are short-lived vectors so a linear scan is fine.
  double acc = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    acc += w(i);
    if (u < acc) return i;
  }
  // u landed in the rounding slack past the last positive weight.
  for (Eigen::Index i = w.size(); i-- > 0;)
    if (w(i) > 0.0) return i;
  return w.size() - 1;
}

}  // namespace

void sample_one(const GaussianMixture& mix, SplitRng& rng,
                Eigen::Ref<Eigen::VectorXd> out) {
  const Eigen::Index d = mix.dim();
  for (;;) {
    const Eigen::Index c = pick_component(mix.weights, rng.next_uniform());
    for (Eigen::Index k = 0; k < d; ++k)
      out(k) = mix.centers(c, k) + mix.sigma * rng.next_normal();
    if (!mix.truncate_unit_box || out.cwiseAbs().maxCoeff() <= 1.0) break;
  }
}

SampleMatrix sample(const GaussianMixture& mix, Eigen::Index n,
                    std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  const Eigen::Index d = mix.dim();
  SampleMatrix out;
  out.seed = seed;
  out.rows.resize(n, d);
  Eigen::MatrixXd& rows = out.rows;
  const SplitRng root = SplitRng(seed).child(kTagMixtureSample);
  parallel_for(n, [&](std::int64_t b, std::int64_t e) {
    Eigen::VectorXd x(d);
    for (std::int64_t t = b; t < e; ++t) {
      SplitRng rng = root.child(static_cast<std::uint64_t>(t));
      sample_one(mix, rng, x);
      rows.row(t) = x.transpose();
    }
  });
  return out;
}

SampleMatrix sample(const DiscreteDistribution& p, Eigen::Index n,
                    std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  SampleMatrix out;
  out.seed = seed;
  out.rows.resize(n, p.dim());
  const SplitRng root = SplitRng(seed).child(kTagDiscreteSample);
  for (Eigen::Index t = 0; t < n; ++t) {
    SplitRng rng = root.child(static_cast<std::uint64_t>(t));
    out.rows.row(t) = p.atoms.row(pick_component(p.probs, rng.next_uniform()));
  }
  return out;
}

GaussianMixture smooth_empirical(const SampleMatrix& samples, double sigma) {
  return make_gaussian_mixture_uniform(samples.rows, sigma);
}

SampleMatrix add_gaussian_noise(const SampleMatrix& samples, double sigma,
                                std::uint64_t seed) {
  constexpr std::uint64_t kTagAddNoise = 0x6e6f6973ull;
  SampleMatrix noisy = samples;
  const SplitRng root = SplitRng(seed).child(kTagAddNoise);
  for (Eigen::Index i = 0; i < noisy.count(); ++i) {
    SplitRng rng = root.child(static_cast<std::uint64_t>(i));
    for (Eigen::Index k = 0; k < noisy.dim(); ++k)
      noisy.rows(i, k) += sigma * rng.next_normal();
  }
  return noisy;
}

GaussianMixture smooth_discrete(const DiscreteDistribution& p, double sigma) {
  return make_gaussian_mixture(p.atoms, p.probs, sigma);
}

void save_gmm(std::ostream& os, const GaussianMixture& mix) {
  os << "gmm d=" << mix.dim() << " k=" << mix.modes()
     << " sigma=" << format_full(mix.sigma) << "\n";
  for (Eigen::Index i = 0; i < mix.modes(); ++i) {
    os << format_full(mix.weights(i));
    for (Eigen::Index k = 0; k < mix.dim(); ++k)
      os << ' ' << format_full(mix.centers(i, k));
    os << "\n";
  }
}

void save_discrete(std::ostream& os, const DiscreteDistribution& p) {
  os << "gmm d=" << p.dim() << " k=" << p.size() << " sigma=0\n";
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    os << format_full(p.probs(i));
    for (Eigen::Index k = 0; k < p.dim(); ++k)
      os << ' ' << format_full(p.atoms(i, k));
    os << "\n";
  }
}

namespace {

struct GmmText {
  Eigen::MatrixXd points;
  Eigen::VectorXd weights;
  double sigma = 0.0;
};

GmmText parse_gmm(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw std::invalid_argument("gmm: empty input");
  long d = 0, k = 0;
  double sigma = 0.0;
  if (std::sscanf(header.c_str(), "gmm d=%ld k=%ld sigma=%lf", &d, &k, &sigma) != 3)
    throw std::invalid_argument("gmm: bad header '" + header + "'");
  if (d < 1 || k < 1) throw std::invalid_argument("gmm: bad dimensions in header");
  GmmText g;
  g.sigma = sigma;
  g.points.resize(k, d);
  g.weights.resize(k);
  for (long i = 0; i < k; ++i) {
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("gmm: truncated input");
    std::istringstream ls(line);
    if (!(ls >> g.weights(i))) throw std::invalid_argument("gmm: bad weight line");
    for (long j = 0; j < d; ++j)
      if (!(ls >> g.points(i, j))) throw std::invalid_argument("gmm: bad component line");
  }
  return g;
}

}  // namespace

GaussianMixture load_gmm(std::istream& is) {
  GmmText g = parse_gmm(is);
  if (!(g.sigma > 0.0)) throw std::invalid_argument("gmm: sigma=0 is a discrete distribution");
  return make_gaussian_mixture(std::move(g.points), std::move(g.weights), g.sigma);
}

DiscreteDistribution load_discrete(std::istream& is) {
  GmmText g = parse_gmm(is);
  if (g.sigma != 0.0) throw std::invalid_argument("gmm: expected sigma=0 for a discrete distribution");
  return make_discrete(std::move(g.points), std::move(g.weights));
}

std::variant<DiscreteDistribution, GaussianMixture> load_truth(std::istream& is) {
  GmmText g = parse_gmm(is);
  if (g.sigma > 0.0)
    return make_gaussian_mixture(std::move(g.points), std::move(g.weights), g.sigma);
  return make_discrete(std::move(g.points), std::move(g.weights));
}

void save_samples_csv(std::ostream& os, const SampleMatrix& samples) {
  os << "# seed=" << samples.seed << "\n";
  for (Eigen::Index i = 0; i < samples.count(); ++i) {
    for (Eigen::Index k = 0; k < samples.dim(); ++k) {
      if (k) os << ',';
      os << format_full(samples.rows(i, k));
    }
    os << "\n";
  }
}

SampleMatrix load_samples_csv(std::istream& is) {
  SampleMatrix out;
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      unsigned long long seed = 0;
      if (std::sscanf(line.c_str(), "# seed=%llu", &seed) == 1) out.seed = seed;
      continue;
    }
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::invalid_argument("samples csv: ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("samples csv: no data rows");
  out.rows.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      out.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return out;
}

}  // namespace smoothent
