#include "smoothent/bounds.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "smoothent/numeric.hpp"
#include "smoothent/quadrature.hpp"

namespace smoothent {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_common(const BoundQuery& q) {
  require(q.d >= 1, "bound query: d must be >= 1");
  require(q.sigma > 0.0, "bound query: sigma must be positive");
  require(q.k_subg >= 0.0, "bound query: K must be nonnegative");
}

double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

}  // namespace

double w1_constant(const BoundQuery& q) {
  check_common(q);
  const double dd = static_cast<double>(q.d);
  return q.sigma * std::sqrt(2.0 * dd) *
         std::pow(1.0 / std::sqrt(2.0) + q.k_subg / q.sigma, 0.5 * dd + 1.0) *
         std::exp(3.0 * dd / 16.0);
}

double tv_constant(const BoundQuery& q) {
  check_common(q);
  const double dd = static_cast<double>(q.d);
  return std::pow(1.0 / std::sqrt(2.0) + q.k_subg / q.sigma, 0.5 * dd) *
         std::exp(3.0 * dd / 16.0);
}

double chi2_constant(const BoundQuery& q) {
  check_common(q);
  if (!(q.k_subg < 0.5 * q.sigma))
    throw std::domain_error("chi2_constant: requires K < sigma/2 (K=" +
                            format_full(q.k_subg) + ", sigma/2=" +
                            format_full(0.5 * q.sigma) + ")");
  const double r2 = (q.k_subg / q.sigma) * (q.k_subg / q.sigma);
  const double s2 = q.sigma * q.sigma;
  const double k2 = q.k_subg * q.k_subg;
  return std::exp(2.0 * static_cast<double>(q.d) * r2 * (s2 - 2.0 * k2) /
                  (s2 - 4.0 * k2));
}

double chi2_bounded_constant(const BoundQuery& q) {
  require(q.sigma > 0.0, "chi2_bounded_constant: sigma must be positive");
  require(q.diameter >= 0.0, "chi2_bounded_constant: diameter must be nonnegative");
  return std::exp(q.diameter * q.diameter / (q.sigma * q.sigma));
}

double plugin_risk_constant_bounded(const BoundQuery& q) {
  check_common(q);
  const double dd = static_cast<double>(q.d);
  const double s2 = q.sigma * q.sigma;
  return 2.0 *
         std::sqrt((s2 * dd * (2.0 + dd) * (2.0 + s2) + 8.0 * dd * dd) /
                   (4.0 * s2 * s2)) *
         std::exp(2.0 * dd / s2);
}

double plugin_risk_constant_subg(const BoundQuery& q) {
  check_common(q);
  const double dd = static_cast<double>(q.d);
  const double kk = q.k_subg;
  const double s = q.sigma;
  const double a = kk + s / std::sqrt(2.0);
  const double squared =
      64.0 * (2.0 * dd * dd * kk * kk * kk * kk + dd * (dd + 2.0) * a * a * a * a) /
      (s * s * s * s) *
      std::pow((1.0 / std::sqrt(2.0) + kk / s) * std::exp(3.0 / 8.0), dd);
  return std::sqrt(squared);
}

double binary_entropy(double p) {
  require(p >= 0.0 && p <= 1.0, "binary_entropy: p must lie in [0, 1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double q_inverse(double y) {
  require(y > 0.0 && y < 0.5, "q_inverse: y must lie in (0, 1/2)");
  double lo = 0.0, hi = 1.0;
  while (q_function(hi) > y) {
    hi *= 2.0;
    if (hi > 1e3) throw std::domain_error("q_inverse: y too small to bracket");
  }
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (q_function(mid) > y ? lo : hi) = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 2; ++i) x += (q_function(x) - y) / phi(x);
  return x;
}

Eigen::Index k_star(Eigen::Index d, double sigma, double eps) {
  require(d >= 1, "k_star: d must be >= 1");
  require(sigma > 0.0, "k_star: sigma must be positive");
  const double dd = static_cast<double>(d);
  const double tail = q_function(1.0 / (2.0 * sigma));
  const double window_lo =
      tail < 0.5 ? -std::expm1(dd * std::log1p(-2.0 * tail)) : 1.0;
  if (!(eps > window_lo && eps <= 1.0))
    throw std::domain_error("k_star: eps must lie in (" + format_full(window_lo) +
                            ", 1], got " + format_full(eps));
  if (eps == 1.0)
    throw std::domain_error("k_star: eps = 1 puts no resolution limit (k_star unbounded)");
  // 0.5 (1 - (1-eps)^(1/d)) without cancellation.
  const double arg = -0.5 * std::expm1(std::log1p(-eps) / dd);
  const double inv = q_inverse(arg);
  return static_cast<Eigen::Index>(std::floor(1.0 / (sigma * inv)));
}

double bias_lower_bound(Eigen::Index d, double sigma, double eps, Eigen::Index n) {
  require(n >= 1, "bias_lower_bound: n must be >= 1");
  const Eigen::Index ks = k_star(d, sigma, eps);
  return static_cast<double>(d) * (1.0 - eps) * std::log(static_cast<double>(ks)) -
         std::log(static_cast<double>(n)) - binary_entropy(eps);
}

namespace {

struct Ladder {
  std::vector<double> atoms;        // r_0 .. r_top
  std::vector<double> log_weights;  // matching log p_k (p_0 from full tail)
  double p0 = 0.0;
};

/// Atom positions and exact log-weights up to index `top`; the full infinite
/// tail behind p_0 is summed to machine convergence.
Ladder build_ladder(const CounterexampleSpec& spec, Eigen::Index top) {
  require(spec.eps > 0.0 && spec.eps < 0.5,
          "counterexample: eps must lie in (0, 1/2) for the ladder to grow");
  require(top >= 1, "counterexample: need at least atom index 1");
  const double alpha = 1.0 - std::sqrt(2.0 * spec.eps);
  const double log_coeff = std::log(2.0) + 0.5 * (std::log(spec.eps) - std::log(M_PI));

  Ladder lad;
  lad.atoms.resize(static_cast<std::size_t>(top) + 1);
  lad.log_weights.resize(static_cast<std::size_t>(top) + 1);
  lad.atoms[0] = 0.0;
  double r = 1.0;
  double tail = 0.0;
  for (Eigen::Index k = 1;; ++k) {
    const double pk = 2.0 * std::sqrt(spec.eps / M_PI) * std::exp(-spec.eps * r * r);
    tail += pk;
    if (k <= top) {
      lad.atoms[static_cast<std::size_t>(k)] = r;
      lad.log_weights[static_cast<std::size_t>(k)] = log_coeff - spec.eps * r * r;
    }
    if (k >= top && pk < 1e-300) break;
    r /= alpha;
  }
  lad.p0 = 1.0 - tail;
  require(lad.p0 > 0.0, "counterexample: weights exceed 1");
  lad.log_weights[0] = std::log(lad.p0);
  return lad;
}

}  // namespace

DiscreteDistribution build_counterexample(const CounterexampleSpec& spec) {
  require(spec.k_atoms >= 2, "counterexample: k_atoms must be >= 2");
  require(spec.k_atoms <= 400, "counterexample: atom positions overflow past k ~ 400");
  const Ladder lad = build_ladder(spec, spec.k_atoms);
  Eigen::MatrixXd atoms(spec.k_atoms + 1, 1);
  Eigen::VectorXd probs(spec.k_atoms + 1);
  for (Eigen::Index k = 0; k <= spec.k_atoms; ++k) {
    atoms(k, 0) = lad.atoms[static_cast<std::size_t>(k)];
    probs(k) = k == 0 ? lad.p0 : std::exp(lad.log_weights[static_cast<std::size_t>(k)]);
  }
  return make_discrete(std::move(atoms), std::move(probs));
}

std::vector<double> divergence_diagnostic(const CounterexampleSpec& spec,
                                          Eigen::Index k_max) {
  require(k_max >= 1, "divergence_diagnostic: k_max must be >= 1");
  require(k_max <= 400, "divergence_diagnostic: atom positions overflow past k ~ 400");
  require(spec.sigma > 0.0, "divergence_diagnostic: sigma must be positive");
  // Atoms a few indices past the last window cover every term that can
  // matter there; everything further is doubly-exponentially negligible.
  const Ladder lad = build_ladder(spec, k_max + 4);
  const double s_den = spec.sigma;
  const double s_num = spec.sigma / std::sqrt(2.0);
  const double log_norm_den = -0.5 * (kLog2Pi + 2.0 * std::log(s_den));
  const double log_norm_num = -0.5 * (kLog2Pi + 2.0 * std::log(s_num));
  const std::size_t atom_count = lad.atoms.size();

  // The windows sit at r_k, which outgrows both the spacing and the
  // log-weight magnitudes representable next to each other in a double.
  // Integrating in the local offset u = z - r_k with weights taken relative
  // to atom k keeps the dominant (j = k) term exact; the far terms only need
  // their astronomically negative exponents roughly right. The relative
  // shift cancels between numerator and denominator.
  std::vector<double> expo_num(atom_count), expo_den(atom_count);
  std::vector<double> base(atom_count), lw_rel(atom_count);
  const auto window_integrand = [&](double u) {
    for (std::size_t j = 0; j < atom_count; ++j) {
      const double diff = base[j] + u;
      expo_num[j] = lw_rel[j] - diff * diff / (2.0 * s_num * s_num);
      expo_den[j] = lw_rel[j] - diff * diff / (2.0 * s_den * s_den);
    }
    const double ln = log_sum_exp(expo_num) + log_norm_num;
    const double ld = log_sum_exp(expo_den) + log_norm_den;
    return std::exp(ln - ld);
  };

  std::vector<double> partial_sums;
  partial_sums.reserve(static_cast<std::size_t>(k_max));
  double acc = 0.0;
  for (Eigen::Index k = 1; k <= k_max; ++k) {
    const double rk = lad.atoms[static_cast<std::size_t>(k)];
    for (std::size_t j = 0; j < atom_count; ++j) {
      base[j] = rk - lad.atoms[j];
      lw_rel[j] = lad.log_weights[j] - lad.log_weights[static_cast<std::size_t>(k)];
    }
    const QuadratureResult quad =
        integrate(window_integrand, -0.01, 0.01, 1e-10, 20000);
    if (!quad.converged)
      throw NumericError("divergence_diagnostic: window quadrature failed at k=" +
                             std::to_string(k) + " (partial sums up to k-1 carried)",
                         acc);
    acc += quad.value;
    partial_sums.push_back(acc);
  }
  return partial_sums;
}

}  // namespace smoothent
