#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "smoothent/mixture.hpp"

namespace smoothent {

inline constexpr const char* kVersion = "0.1.0";

enum class ExperimentFamily {
  corner_mixture,
  mc_convergence,
  distance_rates,
  dnn_spiral,
  rm_awgn,
  counterexample,
  bounds_table,
};

const char* experiment_family_name(ExperimentFamily f);
ExperimentFamily parse_experiment_family(const std::string& name);

/// One experiment run: family, its key=value parameters, seed, output path.
/// Required keys are validated per family before any compute starts.
struct ExperimentSpec {
  ExperimentFamily family = ExperimentFamily::corner_mixture;
  std::map<std::string, std::string> parameters;
  std::uint64_t seed = 1;
  std::string output_path;

  bool operator==(const ExperimentSpec&) const = default;
};

/// Flat key=value config (a TOML-compatible subset: `key = value`, '#'
/// comments, optional double quotes around values).
ExperimentSpec parse_spec_file(std::istream& is);

/// The `# key=value` echo block placed at the top of every output CSV.
std::string spec_echo(const ExperimentSpec& spec);

/// Parses an echo block (or a whole CSV starting with one) back into the
/// spec it came from; round-trips with spec_echo.
ExperimentSpec parse_spec_echo(const std::string& text);

/// Runs the family, appending CSV content to `out` as it goes so partial
/// output survives a numeric failure. Throws on errors.
void run_experiment_to_string(const ExperimentSpec& spec, std::string& out);

/// Runs and writes the output CSV (default path `<family>.csv`). Returns 0
/// on success; on numeric failure writes whatever was produced plus an
/// `# error=` trailer and returns 1.
int run_experiment(const ExperimentSpec& spec);

/// The 2^d-corner Gaussian mixture of width component_sigma on [-1,1]^d.
/// With truncated set, the sampler rejects draws outside the box.
GaussianMixture build_corner_mixture(Eigen::Index d,
                                     double component_sigma = 0.02,
                                     bool truncated = true);

/// Exact h(P * N_sigma) for the corner mixture: the distribution is a
/// product over coordinates, so the entropy is d times a one-dimensional
/// quadrature (closed-form coordinate density in both modes).
double corner_truth_entropy(Eigen::Index d, double sigma,
                            double component_sigma = 0.02,
                            bool truncated = true);

/// Three-class two-dimensional spiral features with class labels.
struct SpiralDataset {
  Eigen::MatrixXd features;  // n x 2
  std::vector<int> labels;
};
SpiralDataset make_spiral_dataset(Eigen::Index n, int n_classes,
                                  std::uint64_t seed);

}  // namespace smoothent
