#include "smoothent/reed_muller.hpp"

#include <bit>
#include <stdexcept>
#include <vector>

#include "smoothent/rng.hpp"

namespace smoothent {

namespace {
constexpr std::uint64_t kTagCodeSample = 0x636f6465ull;
}

ReedMullerCode rm_generate(int r, int m) {
  if (m < 0 || m > 20) throw std::invalid_argument("rm_generate: m out of range");
  if (r < 0 || r > m) throw std::invalid_argument("rm_generate: need 0 <= r <= m");
  const std::uint32_t n_points = 1u << m;

  // Monomial masks of weight <= r, ordered by degree then value; the mask's
  // set bits name the variables in the monomial.
  std::vector<std::uint32_t> masks;
  for (int deg = 0; deg <= r; ++deg)
    for (std::uint32_t t = 0; t < n_points; ++t)
      if (std::popcount(t) == deg) masks.push_back(t);

  ReedMullerCode code;
  code.r = r;
  code.m = m;
  code.k = static_cast<Eigen::Index>(masks.size());
  code.generator.resize(code.k, n_points);
  for (Eigen::Index row = 0; row < code.k; ++row) {
    const std::uint32_t t = masks[static_cast<std::size_t>(row)];
    for (std::uint32_t y = 0; y < n_points; ++y)
      code.generator(row, y) = ((y & t) == t) ? 1 : 0;
  }
  return code;
}

BpskCodebook bpsk_modulate(const ReedMullerCode& code) {
  if (code.k > 20)
    throw std::invalid_argument("bpsk_modulate: 2^" + std::to_string(code.k) +
                                " codewords exceed the in-memory limit (k <= 20)");
  const std::uint64_t n_words = 1ull << code.k;
  const Eigen::Index len = code.generator.cols();
  BpskCodebook book;
  book.points.resize(static_cast<Eigen::Index>(n_words), len);
  std::vector<std::uint8_t> word(static_cast<std::size_t>(len));
  for (std::uint64_t msg = 0; msg < n_words; ++msg) {
    std::fill(word.begin(), word.end(), std::uint8_t{0});
    for (Eigen::Index row = 0; row < code.k; ++row)
      if ((msg >> row) & 1ull)
        for (Eigen::Index j = 0; j < len; ++j) word[static_cast<std::size_t>(j)] ^= code.generator(row, j);
    for (Eigen::Index j = 0; j < len; ++j)
      book.points(static_cast<Eigen::Index>(msg), j) =
          word[static_cast<std::size_t>(j)] ? 1.0 : -1.0;
  }
  return book;
}

EstimateReport channel_mi(const BpskCodebook& codebook, double sigma,
                          Eigen::Index n_codewords_sampled,
                          const McBudget& budget, ChannelMiMode mode,
                          std::uint64_t seed, bool exhaustive, bool force_full) {
  if (!(sigma > 0.0)) throw std::invalid_argument("channel_mi: sigma must be positive");
  const Eigen::Index n_words = codebook.size();
  const Eigen::Index d = codebook.block_length();

  EstimateReport h_est;
  if (mode == ChannelMiMode::exact) {
    if (n_words > (Eigen::Index{1} << 20) && !force_full)
      throw std::invalid_argument(
          "channel_mi: full-codebook mixture with " + std::to_string(n_words) +
          " centers refused; pass force_full to override");
    h_est = mixture_entropy_mc(
        make_gaussian_mixture_uniform(codebook.points, sigma), budget, seed);
  } else {
    SampleMatrix drawn;
    drawn.seed = seed;
    if (exhaustive) {
      drawn.rows = codebook.points;
    } else {
      if (n_codewords_sampled < 1 || n_codewords_sampled > n_words)
        throw std::invalid_argument(
            "channel_mi: n_codewords_sampled must lie in [1, 2^k]");
      drawn.rows.resize(n_codewords_sampled, d);
      SplitRng rng = SplitRng(seed).child(kTagCodeSample);
      for (Eigen::Index i = 0; i < n_codewords_sampled; ++i)
        drawn.rows.row(i) = codebook.points.row(static_cast<Eigen::Index>(
            rng.next_u64() % static_cast<std::uint64_t>(n_words)));
    }
    h_est = plugin_entropy(drawn, sigma, budget, seed);
  }

  EstimateReport report = h_est;
  report.value = h_est.value - gaussian_entropy_analytic(d, sigma);
  report.seed = seed;
  return report;
}

}  // namespace smoothent
