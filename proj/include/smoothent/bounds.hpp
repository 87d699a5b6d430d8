#pragma once

#include <vector>

#include "smoothent/mixture.hpp"

namespace smoothent {

/// Parameter bundle for the closed-form bound evaluators. Each evaluator
/// reads only the fields it consumes and validates those.
struct BoundQuery {
  Eigen::Index d = 1;
  double sigma = 1.0;
  double k_subg = 0.0;    // subgaussian constant K
  double diameter = 0.0;  // support diameter D
  Eigen::Index n = 1;
  double eps = 0.01;
  double moment_m = 0.0;  // E ||C||^2
};

/// sigma sqrt(2d) (1/sqrt2 + K/sigma)^(d/2+1) e^(3d/16): the W1 rate constant.
double w1_constant(const BoundQuery& q);

/// (1/sqrt2 + K/sigma)^(d/2) e^(3d/16): the TV rate constant.
double tv_constant(const BoundQuery& q);

/// exp(2d (K/sigma)^2 (sigma^2 - 2K^2) / (sigma^2 - 4K^2)); requires K < sigma/2.
double chi2_constant(const BoundQuery& q);

/// exp(D^2 / sigma^2): chi^2 mutual-information bound for bounded support.
double chi2_bounded_constant(const BoundQuery& q);

/// 2 sqrt((sigma^2 d(2+d)(2+sigma^2) + 8 d^2) / (4 sigma^4)) e^(2d/sigma^2):
/// plug-in risk constant, bounded-support class.
double plugin_risk_constant_bounded(const BoundQuery& q);

/// Subgaussian-class plug-in risk constant. The source bound is on the
/// squared risk; this returns its square root so all risk constants share
/// units of nats * sqrt(n).
double plugin_risk_constant_subg(const BoundQuery& q);

/// Binary entropy in nats; H_b(0) = H_b(1) = 0.
double binary_entropy(double p);

/// Gaussian tail Q(x) and its inverse on (0, 1/2), the latter via bracketed
/// bisection to 1e-12 plus two Newton polish steps.
double q_function(double x);
double q_inverse(double y);

/// Grid resolution floor(1 / (sigma Q^{-1}(0.5 (1 - (1-eps)^{1/d})))) of the
/// bias lower bound. eps must lie in the admissibility window
/// (1 - (1 - 2 Q(1/(2 sigma)))^d, 1].
Eigen::Index k_star(Eigen::Index d, double sigma, double eps);

/// log(k_star^{d(1-eps)} / n) - H_b(eps); may be negative (vacuous).
double bias_lower_bound(Eigen::Index d, double sigma, double eps, Eigen::Index n);

/// Atom ladder whose chi^2 mutual information diverges: r_0 = 0, r_1 = 1,
/// r_k = r_{k-1} / (1 - sqrt(2 eps)), p_k = 2 sqrt(eps/pi) e^{-eps r_k^2}.
struct CounterexampleSpec {
  double eps = 0.25;
  Eigen::Index k_atoms = 8;  // highest atom index kept; >= 2
  double sigma = 1.0;
};

/// Atoms r_0..r_k with the exact ladder weights; p_0 absorbs the full
/// infinite tail, summed to machine convergence, so truncation changes the
/// support but not the remaining weights.
DiscreteDistribution build_counterexample(const CounterexampleSpec& spec);

/// Cumulative contributions of the windows [r_k - 1/100, r_k + 1/100] to the
/// divergence integral int E_P phi_{1/sqrt2}(z-S) / E_P phi_1(z-S) dz,
/// k = 1..k_max. Partial sums grow without bound (harmonically) when the
/// construction diverges.
std::vector<double> divergence_diagnostic(const CounterexampleSpec& spec,
                                          Eigen::Index k_max);

}  // namespace smoothent
