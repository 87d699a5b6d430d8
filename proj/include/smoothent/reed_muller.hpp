#pragma once

#include <cstdint>

#include "smoothent/entropy.hpp"
#include "smoothent/mixture.hpp"

namespace smoothent {

/// RM(r, m): generator rows are the evaluations of the degree-<= r monomials
/// in m Boolean variables over all 2^m points, giving k = sum_i C(m, i) rows
/// of length 2^m.
struct ReedMullerCode {
  int r = 0;
  int m = 0;
  Eigen::Index k = 0;
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> generator;  // k x 2^m
};

ReedMullerCode rm_generate(int r, int m);

/// All 2^k codewords with bits {0,1} mapped to channel symbols {-1,+1}.
struct BpskCodebook {
  Eigen::MatrixXd points;  // 2^k x 2^m

  [[nodiscard]] Eigen::Index size() const { return points.rows(); }
  [[nodiscard]] Eigen::Index block_length() const { return points.cols(); }
};

BpskCodebook bpsk_modulate(const ReedMullerCode& code);

enum class ChannelMiMode {
  plugin,  // mixture over sampled codewords (with replacement)
  exact,   // mixture over the full codebook
};

/// I(S; S+Z) for S uniform on the codebook and Z ~ N(0, sigma^2 I):
/// h(S+Z) estimated per mode, minus the exact noise entropy. `exhaustive`
/// makes plugin mode visit every codeword exactly once instead of sampling.
/// Exact mode refuses codebooks beyond 2^20 words unless forced.
EstimateReport channel_mi(const BpskCodebook& codebook, double sigma,
                          Eigen::Index n_codewords_sampled,
                          const McBudget& budget, ChannelMiMode mode,
                          std::uint64_t seed, bool exhaustive = false,
                          bool force_full = false);

}  // namespace smoothent
