// Command-line front end: entropy estimation, distance rate experiments,
// bound evaluation, mutual information over noisy networks, Reed-Muller
// channel curves, and the config-driven experiment runner.

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "smoothent/bounds.hpp"
#include "smoothent/distances.hpp"
#include "smoothent/entropy.hpp"
#include "smoothent/experiments.hpp"
#include "smoothent/mixture.hpp"
#include "smoothent/noisy_net.hpp"
#include "smoothent/quadrature.hpp"
#include "smoothent/reed_muller.hpp"

namespace {

using namespace smoothent;

constexpr double kLn2 = 0.69314718055994530941723212145818;

std::vector<Eigen::Index> parse_index_list(const std::string& csv) {
  std::vector<Eigen::Index> out;
  std::istringstream ss(csv);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(std::stoll(cell));
  return out;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::istringstream ss(csv);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
  return out;
}

SampleMatrix read_samples(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::invalid_argument("cannot open samples file '" + path + "'");
  return load_samples_csv(file);
}

int cmd_estimate_entropy(const std::string& input, double sigma,
                         const std::string& method, Eigen::Index n_mc,
                         std::uint64_t seed, bool bits, double bandwidth) {
  const SampleMatrix samples = read_samples(input);
  EstimateReport report;
  if (method == "plugin") {
    report = plugin_entropy(samples, sigma,
                            {n_mc, MseBoundMode::bounded_support, 0.0}, seed);
  } else if (method == "knn") {
    // General-purpose estimators see noisy draws of S + Z.
    report = knn_kl_entropy(add_gaussian_noise(samples, sigma, seed));
  } else if (method == "kde") {
    const SampleMatrix noisy = add_gaussian_noise(samples, sigma, seed);
    const double bw = bandwidth > 0.0 ? bandwidth : silverman_bandwidth(noisy);
    report = kde_entropy(noisy, bw);
  } else {
    throw std::invalid_argument("method must be plugin, knn or kde");
  }
  const double scale = bits ? 1.0 / kLn2 : 1.0;
  std::cout << method << ',' << format_full(report.value * scale) << ','
            << format_full(report.std_error * scale) << ',' << report.n << ','
            << report.n_mc << ',' << report.seed << "\n";
  return 0;
}

int cmd_distances(const std::string& truth_path, double sigma,
                  const std::string& kind, const std::string& n_grid,
                  Eigen::Index reps, std::uint64_t seed, const std::string& out,
                  Eigen::Index n_points, Eigen::Index ot_cloud) {
  ExperimentSpec spec;
  spec.family = ExperimentFamily::distance_rates;
  spec.seed = seed;
  spec.output_path = out;
  spec.parameters["truth"] = truth_path;
  spec.parameters["sigma"] = format_full(sigma);
  spec.parameters["kind"] = kind;
  spec.parameters["n_grid"] = n_grid;
  spec.parameters["reps"] = std::to_string(reps);
  spec.parameters["n_points"] = std::to_string(n_points);
  spec.parameters["ot_cloud"] = std::to_string(ot_cloud);
  return run_experiment(spec);
}

BoundQuery parse_query(const std::string& query) {
  BoundQuery q;
  std::istringstream ss(query);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto eq = cell.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("bad query entry '" + cell + "' (want key=val)");
    const std::string key = cell.substr(0, eq);
    const double value = std::stod(cell.substr(eq + 1));
    if (key == "d") q.d = static_cast<Eigen::Index>(value);
    else if (key == "sigma") q.sigma = value;
    else if (key == "K") q.k_subg = value;
    else if (key == "D") q.diameter = value;
    else if (key == "n") q.n = static_cast<Eigen::Index>(value);
    else if (key == "eps") q.eps = value;
    else if (key == "m") q.moment_m = value;
    else throw std::invalid_argument("unknown query key '" + key + "'");
  }
  return q;
}

int cmd_bounds(const std::string& query, const std::string& which) {
  const BoundQuery q = parse_query(query);
  double value = 0.0;
  if (which == "w1") value = w1_constant(q);
  else if (which == "tv") value = tv_constant(q);
  else if (which == "chi2") value = chi2_constant(q);
  else if (which == "chi2-bdd") value = chi2_bounded_constant(q);
  else if (which == "plugin-bdd") value = plugin_risk_constant_bounded(q);
  else if (which == "plugin-subg") value = plugin_risk_constant_subg(q);
  else if (which == "kstar") value = static_cast<double>(k_star(q.d, q.sigma, q.eps));
  else if (which == "bias-lb") value = bias_lower_bound(q.d, q.sigma, q.eps, q.n);
  else throw std::invalid_argument("unknown bound '" + which + "'");
  std::cout << which << ',' << format_full(value) << "\n";
  return 0;
}

int cmd_counterexample(Eigen::Index k_max, const std::string& out,
                       std::uint64_t seed) {
  ExperimentSpec spec;
  spec.family = ExperimentFamily::counterexample;
  spec.seed = seed;
  spec.output_path = out;
  spec.parameters["k_max"] = std::to_string(k_max);
  return run_experiment(spec);
}

int cmd_estimate_mi(const std::string& net_path, const std::string& data_path,
                    Eigen::Index layer, const std::string& target,
                    Eigen::Index n_mc, std::uint64_t seed, double noise_sigma,
                    Eigen::Index n_cond, bool bits) {
  std::ifstream net_file(net_path);
  if (!net_file) throw std::invalid_argument("cannot open net file '" + net_path + "'");
  const NoisyNetwork net = load_network(net_file, noise_sigma);

  // Data rows are features with the integer label in the last column.
  const SampleMatrix raw = read_samples(data_path);
  if (raw.dim() < 2)
    throw std::invalid_argument("data file needs feature columns plus a label column");
  Eigen::MatrixXd features = raw.rows.leftCols(raw.dim() - 1);
  std::vector<int> labels(static_cast<std::size_t>(raw.count()));
  for (Eigen::Index i = 0; i < raw.count(); ++i)
    labels[static_cast<std::size_t>(i)] =
        static_cast<int>(std::lround(raw.rows(i, raw.dim() - 1)));
  const LabeledDataset data = make_labeled_dataset(std::move(features), std::move(labels));

  const McBudget budget{n_mc, MseBoundMode::bounded_support, 0.0};
  EstimateReport report;
  if (target == "input")
    report = mi_input(net, data, layer, budget, seed, n_cond);
  else if (target == "label")
    report = mi_label(net, data, layer, budget, seed);
  else
    throw std::invalid_argument("target must be input or label");
  const double scale = bits ? 1.0 / kLn2 : 1.0;
  std::cout << target << ',' << format_full(report.value * scale) << ','
            << format_full(report.std_error * scale) << ',' << report.n << ','
            << report.n_mc << ',' << report.seed << "\n";
  return 0;
}

int cmd_rm_mi(int r, int m, const std::string& sigma_grid, Eigen::Index n,
              const std::string& mode, Eigen::Index n_mc, std::uint64_t seed,
              const std::string& out, bool exhaustive) {
  ExperimentSpec spec;
  spec.family = ExperimentFamily::rm_awgn;
  spec.seed = seed;
  spec.output_path = out;
  spec.parameters["r"] = std::to_string(r);
  spec.parameters["m"] = std::to_string(m);
  spec.parameters["sigma_grid"] = sigma_grid;
  spec.parameters["n"] = std::to_string(n);
  spec.parameters["mode"] = mode;
  spec.parameters["n_mc"] = std::to_string(n_mc);
  spec.parameters["exhaustive"] = exhaustive ? "true" : "false";
  return run_experiment(spec);
}

int cmd_run_experiment(const std::string& spec_path,
                       const std::vector<std::string>& overrides) {
  std::ifstream file(spec_path);
  if (!file) throw std::invalid_argument("cannot open spec file '" + spec_path + "'");
  ExperimentSpec spec = parse_spec_file(file);
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    if (key == "family") spec.family = parse_experiment_family(value);
    else if (key == "seed") spec.seed = std::stoull(value);
    else if (key == "out") spec.output_path = value;
    else spec.parameters[key] = value;
  }
  return run_experiment(spec);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differential entropy under Gaussian smoothing: estimators, "
               "distance rate experiments, and bound evaluators"};
  app.require_subcommand(1);

  // estimate-entropy
  std::string ee_input, ee_method = "plugin";
  double ee_sigma = 0.1, ee_bandwidth = 0.0;
  Eigen::Index ee_n_mc = 1000;
  std::uint64_t ee_seed = 1;
  bool ee_bits = false;
  auto* ee = app.add_subcommand(
      "estimate-entropy",
      "Estimate entropy of the smoothed samples; prints "
      "method,value,std_error,n,n_mc,seed");
  ee->add_option("--input", ee_input, "samples CSV (with # seed= comment)")->required();
  ee->add_option("--sigma", ee_sigma, "smoothing noise width")->required();
  ee->add_option("--method", ee_method, "plugin | knn | kde");
  ee->add_option("--n-mc", ee_n_mc, "MC samples per center (plugin)");
  ee->add_option("--seed", ee_seed, "PRNG seed");
  ee->add_option("--bandwidth", ee_bandwidth, "KDE bandwidth (default: Silverman)");
  ee->add_flag("--bits", ee_bits, "report in bits instead of nats");

  // distances
  std::string di_truth, di_kind = "tv", di_grid = "10,100,1000", di_out = "rates.csv";
  double di_sigma = 0.1;
  Eigen::Index di_reps = 20, di_points = 20000, di_cloud = 1024;
  std::uint64_t di_seed = 1;
  auto* di = app.add_subcommand(
      "distances",
      "Convergence-rate experiment for a statistical distance; CSV columns "
      "n,mean,std_error,reps plus a # slope= comment");
  di->add_option("--truth", di_truth, "ground-truth distribution file (gmm text)")->required();
  di->add_option("--sigma", di_sigma, "smoothing width")->required();
  di->add_option("--kind", di_kind, "tv | kl | chi2 | w1 | w2sq");
  di->add_option("--n-grid", di_grid, "comma list of sample counts");
  di->add_option("--reps", di_reps, "repetitions per grid point");
  di->add_option("--seed", di_seed, "PRNG seed");
  di->add_option("--out", di_out, "output CSV path");
  di->add_option("--n-points", di_points, "MC integration points per estimate");
  di->add_option("--ot-cloud", di_cloud, "cloud size for w1/w2sq");

  // bounds
  std::string bo_query, bo_which = "w1";
  auto* bo = app.add_subcommand("bounds",
                                "Evaluate a closed-form constant; prints name,value");
  bo->add_option("--query", bo_query, "comma list, e.g. d=5,sigma=0.1,K=0.5,D=1,eps=0.01,n=16,m=2")
      ->required();
  bo->add_option("--which", bo_which,
                 "w1 | tv | chi2 | chi2-bdd | plugin-bdd | plugin-subg | kstar | bias-lb");

  // counterexample
  Eigen::Index ce_kmax = 40;
  std::string ce_out = "diag.csv";
  std::uint64_t ce_seed = 1;
  auto* ce = app.add_subcommand("counterexample",
                                "Divergence diagnostic partial sums; CSV k,partial_sum");
  ce->add_option("--k-max", ce_kmax, "number of windows");
  ce->add_option("--out", ce_out, "output CSV path");
  ce->add_option("--seed", ce_seed, "PRNG seed (echoed into the CSV)");

  // estimate-mi
  std::string mi_net, mi_data, mi_target = "input";
  Eigen::Index mi_layer = 1, mi_n_mc = 500, mi_n_cond = 0;
  std::uint64_t mi_seed = 1;
  double mi_sigma = 0.1;
  bool mi_bits = false;
  auto* mi = app.add_subcommand(
      "estimate-mi",
      "Mutual information between a noisy-network layer and the input or "
      "label; data CSV carries the label in the last column");
  mi->add_option("--net", mi_net, "network weight file")->required();
  mi->add_option("--data", mi_data, "dataset CSV (features..., label)")->required();
  mi->add_option("--layer", mi_layer, "layer index (1-based)")->required();
  mi->add_option("--target", mi_target, "input | label");
  mi->add_option("--n-mc", mi_n_mc, "MC samples per center");
  mi->add_option("--seed", mi_seed, "PRNG seed");
  mi->add_option("--noise-sigma", mi_sigma, "injected noise width")->required();
  mi->add_option("--n-cond", mi_n_cond, "conditional passes per input (0 = dataset size)");
  mi->add_flag("--bits", mi_bits, "report in bits instead of nats");

  // rm-mi
  int rm_r = 1, rm_m = 3;
  std::string rm_grid = "0.5,1,2,4", rm_mode = "plugin", rm_out = "rm.csv";
  Eigen::Index rm_n = 1024, rm_n_mc = 200;
  std::uint64_t rm_seed = 1;
  bool rm_exhaustive = false;
  auto* rm = app.add_subcommand(
      "rm-mi", "Reed-Muller AWGN mutual information curve; CSV "
               "sigma,mi,std_error,n,mode");
  rm->add_option("--r", rm_r, "RM order r")->required();
  rm->add_option("--m", rm_m, "RM parameter m")->required();
  rm->add_option("--sigma-grid", rm_grid, "comma list of noise widths");
  rm->add_option("--n", rm_n, "codewords sampled (plugin mode)");
  rm->add_option("--mode", rm_mode, "plugin | exact");
  rm->add_option("--n-mc", rm_n_mc, "MC samples per center");
  rm->add_option("--seed", rm_seed, "PRNG seed");
  rm->add_option("--out", rm_out, "output CSV path");
  rm->add_flag("--exhaustive", rm_exhaustive, "visit every codeword once (plugin mode)");

  // run-experiment
  std::string rx_spec;
  std::vector<std::string> rx_sets;
  auto* rx = app.add_subcommand(
      "run-experiment",
      "Run an experiment family from a key=value spec file. Families: "
      "corner_mixture (n,plugin_mean_err,plugin_se,knn_mean_err,knn_se), "
      "mc_convergence (n_mc,rmse,mean,reps), distance_rates "
      "(n,mean,std_error,reps), dnn_spiral "
      "(n,plugin_mean,plugin_sd,knn_mean,knn_sd,kde_mean,kde_sd), rm_awgn "
      "(sigma,mi,std_error,n,mode), counterexample (k,partial_sum), "
      "bounds_table (name,value)");
  rx->add_option("--spec", rx_spec, "spec file (key = value lines)")->required();
  rx->add_option("--set", rx_sets, "override spec keys, e.g. --set seed=7");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ee->parsed())
      return cmd_estimate_entropy(ee_input, ee_sigma, ee_method, ee_n_mc, ee_seed,
                                  ee_bits, ee_bandwidth);
    if (di->parsed())
      return cmd_distances(di_truth, di_sigma, di_kind, di_grid, di_reps, di_seed,
                           di_out, di_points, di_cloud);
    if (bo->parsed()) return cmd_bounds(bo_query, bo_which);
    if (ce->parsed()) return cmd_counterexample(ce_kmax, ce_out, ce_seed);
    if (mi->parsed())
      return cmd_estimate_mi(mi_net, mi_data, mi_layer, mi_target, mi_n_mc,
                             mi_seed, mi_sigma, mi_n_cond, mi_bits);
    if (rm->parsed())
      return cmd_rm_mi(rm_r, rm_m, rm_grid, rm_n, rm_mode, rm_n_mc, rm_seed,
                       rm_out, rm_exhaustive);
    if (rx->parsed()) return cmd_run_experiment(rx_spec, rx_sets);
  } catch (const NumericError& err) {
    std::cerr << "numeric error: " << err.what()
              << " (partial value " << format_full(err.partial_value()) << ")\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
