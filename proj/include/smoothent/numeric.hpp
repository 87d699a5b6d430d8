#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace smoothent {

/// Pairwise (tree) summation. Deterministic for a fixed element order and
/// accurate to O(log n) rounding error; used for accumulations over many
/// terms where a linear sum would drift.
inline double pairwise_sum(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(std::span<const double>(v));
}

/// log(sum_i exp(e_i)) over a buffer of exponents; -inf only if all are -inf.
inline double log_sum_exp(std::span<const double> e) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : e) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : e) s += std::exp(x - m);
  return m + std::log(s);
}

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;  // population variance of the accumulated terms
  std::size_t count = 0;
};

/// Mean and variance from per-block (sum, sum of squares, count) triples,
/// combined pairwise in block order.
inline MeanVar mean_var_from_sums(std::span<const double> sums,
                                  std::span<const double> sumsqs,
                                  std::size_t count) {
  MeanVar mv;
  mv.count = count;
  if (count == 0) return mv;
  const double s = pairwise_sum(sums);
  mv.mean = s / static_cast<double>(count);
  std::vector<double> centered(sums.size());
  for (std::size_t i = 0; i < sums.size(); ++i)
    centered[i] = sumsqs[i] - 2.0 * mv.mean * sums[i];
  const double ss = pairwise_sum(centered) +
                    static_cast<double>(count) * mv.mean * mv.mean;
  mv.var = std::max(0.0, ss / static_cast<double>(count));
  return mv;
}

}  // namespace smoothent
