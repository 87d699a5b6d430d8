#include "smoothent/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "smoothent/bounds.hpp"
#include "smoothent/distances.hpp"
#include "smoothent/entropy.hpp"
#include "smoothent/noisy_net.hpp"
#include "smoothent/quadrature.hpp"
#include "smoothent/reed_muller.hpp"
#include "smoothent/rng.hpp"

namespace smoothent {

namespace {

constexpr std::uint64_t kTagCorner = 0x636f726eull;
constexpr std::uint64_t kTagMcConv = 0x6d637645ull;
constexpr std::uint64_t kTagSpiral = 0x73706972ull;
constexpr std::uint64_t kTagSpiralData = 0x73706430ull;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
    return s.substr(1, s.size() - 2);
  return s;
}

const std::string& require_param(const ExperimentSpec& spec, const std::string& key) {
  const auto it = spec.parameters.find(key);
  if (it == spec.parameters.end())
    throw std::invalid_argument("experiment " +
                                std::string(experiment_family_name(spec.family)) +
                                ": missing required key '" + key + "'");
  return it->second;
}

std::string param_or(const ExperimentSpec& spec, const std::string& key,
                     const std::string& def) {
  const auto it = spec.parameters.find(key);
  return it == spec.parameters.end() ? def : it->second;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    throw std::invalid_argument("experiment: key '" + key + "' has non-numeric value '" + v + "'");
  }
}

Eigen::Index to_index(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x < 0 || x != std::floor(x))
    throw std::invalid_argument("experiment: key '" + key + "' must be a nonnegative integer");
  return static_cast<Eigen::Index>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("experiment: key '" + key + "' must be true/false");
}

template <typename T, typename Fn>
std::vector<T> to_list(const std::string& key, const std::string& v, Fn convert) {
  std::vector<T> out;
  std::istringstream ss(v);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(convert(key, trim(cell)));
  if (out.empty()) throw std::invalid_argument("experiment: key '" + key + "' is an empty list");
  return out;
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation
};

MeanSd mean_sd(const std::vector<double>& v) {
  MeanSd out;
  for (double x : v) out.mean += x;
  out.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return out;
}

}  // namespace

const char* experiment_family_name(ExperimentFamily f) {
  switch (f) {
    case ExperimentFamily::corner_mixture: return "corner_mixture";
    case ExperimentFamily::mc_convergence: return "mc_convergence";
    case ExperimentFamily::distance_rates: return "distance_rates";
    case ExperimentFamily::dnn_spiral: return "dnn_spiral";
    case ExperimentFamily::rm_awgn: return "rm_awgn";
    case ExperimentFamily::counterexample: return "counterexample";
    case ExperimentFamily::bounds_table: return "bounds_table";
  }
  return "?";
}

ExperimentFamily parse_experiment_family(const std::string& name) {
  for (ExperimentFamily f :
       {ExperimentFamily::corner_mixture, ExperimentFamily::mc_convergence,
        ExperimentFamily::distance_rates, ExperimentFamily::dnn_spiral,
        ExperimentFamily::rm_awgn, ExperimentFamily::counterexample,
        ExperimentFamily::bounds_table})
    if (name == experiment_family_name(f)) return f;
  throw std::invalid_argument("unknown experiment family '" + name + "'");
}

ExperimentSpec parse_spec_file(std::istream& is) {
  ExperimentSpec spec;
  bool have_family = false;
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("spec file: expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = unquote(trim(line.substr(eq + 1)));
    if (key == "family") {
      spec.family = parse_experiment_family(value);
      have_family = true;
    } else if (key == "seed") {
      spec.seed = std::stoull(value);
    } else if (key == "out") {
      spec.output_path = value;
    } else {
      spec.parameters[key] = value;
    }
  }
  if (!have_family) throw std::invalid_argument("spec file: missing required key 'family'");
  return spec;
}

std::string spec_echo(const ExperimentSpec& spec) {
  std::ostringstream os;
  os << "# smoothent_version=" << kVersion << "\n";
  os << "# family=" << experiment_family_name(spec.family) << "\n";
  os << "# seed=" << spec.seed << "\n";
  os << "# out=" << spec.output_path << "\n";
  for (const auto& [k, v] : spec.parameters) os << "# param." << k << "=" << v << "\n";
  return os.str();
}

ExperimentSpec parse_spec_echo(const std::string& text) {
  ExperimentSpec spec;
  bool have_family = false;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.rfind("# ", 0) != 0) continue;
    const std::string body = line.substr(2);
    const auto eq = body.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = body.substr(0, eq);
    const std::string value = body.substr(eq + 1);
    if (key == "family") {
      spec.family = parse_experiment_family(value);
      have_family = true;
    } else if (key == "seed") {
      spec.seed = std::stoull(value);
    } else if (key == "out") {
      spec.output_path = value;
    } else if (key.rfind("param.", 0) == 0) {
      spec.parameters[key.substr(6)] = value;
    }
  }
  if (!have_family) throw std::invalid_argument("spec echo: no family line found");
  return spec;
}

GaussianMixture build_corner_mixture(Eigen::Index d, double component_sigma,
                                     bool truncated) {
  if (d < 1) throw std::invalid_argument("build_corner_mixture: d must be >= 1");
  if (d > 20)
    throw std::invalid_argument("build_corner_mixture: 2^" + std::to_string(d) +
                                " modes refused (d must be <= 20)");
  const Eigen::Index n_modes = Eigen::Index{1} << d;
  Eigen::MatrixXd centers(n_modes, d);
  for (Eigen::Index i = 0; i < n_modes; ++i)
    for (Eigen::Index k = 0; k < d; ++k)
      centers(i, k) = ((i >> k) & 1) ? 1.0 : -1.0;
  GaussianMixture mix = make_gaussian_mixture_uniform(std::move(centers), component_sigma);
  mix.truncate_unit_box = truncated;
  return mix;
}

double corner_truth_entropy(Eigen::Index d, double sigma,
                            double component_sigma, bool truncated) {
  if (d < 1) throw std::invalid_argument("corner_truth_entropy: d must be >= 1");
  if (!(sigma > 0.0) || !(component_sigma > 0.0))
    throw std::invalid_argument("corner_truth_entropy: widths must be positive");
  // The corner mixture is a product across coordinates (uniform corner signs
  // are independent bits, truncation acts per coordinate), so
  // h(P * N_sigma) = d * h(one coordinate).
  const double c = component_sigma;
  const double st = std::sqrt(c * c + sigma * sigma);
  const double ratio = c / (sigma * st);
  const auto phi = [](double x, double s) {
    return std::exp(-0.5 * x * x / (s * s)) / (s * std::sqrt(2.0 * M_PI));
  };
  const auto coord_density = [&](double z) {
    if (!truncated) return 0.5 * (phi(z - 1.0, st) + phi(z + 1.0, st));
    const double gp = 2.0 * phi(z - 1.0, st) * std_normal_cdf(-(z - 1.0) * ratio);
    const double gm = 2.0 * phi(z + 1.0, st) * std_normal_cdf((z + 1.0) * ratio);
    return 0.5 * (gp + gm);
  };
  const auto integrand = [&](double z) {
    const double f = coord_density(z);
    return f > 1e-300 ? -f * std::log(f) : 0.0;
  };
  const double pad = 12.0 * st;
  const QuadratureResult quad = integrate_split(
      integrand, {-1.0 - pad, -1.0, 0.0, 1.0, 1.0 + pad}, 1e-10, 400000);
  if (!quad.converged)
    throw NumericError("corner_truth_entropy: quadrature did not converge",
                       static_cast<double>(d) * quad.value);
  return static_cast<double>(d) * quad.value;
}

SpiralDataset make_spiral_dataset(Eigen::Index n, int n_classes,
                                  std::uint64_t seed) {
  if (n < 1 || n_classes < 1) throw std::invalid_argument("make_spiral_dataset: bad sizes");
  SpiralDataset data;
  data.features.resize(n, 2);
  data.labels.resize(static_cast<std::size_t>(n));
  const SplitRng root = SplitRng(seed).child(kTagSpiralData);
  for (Eigen::Index i = 0; i < n; ++i) {
    SplitRng rng = root.child(static_cast<std::uint64_t>(i));
    const int c = static_cast<int>(i % n_classes);
    const double t = rng.next_uniform();
    const double radius = 0.15 + 0.8 * t;
    const double angle = 2.0 * M_PI * (static_cast<double>(c) / n_classes + 0.75 * t);
    data.features(i, 0) = radius * std::cos(angle) + 0.02 * rng.next_normal();
    data.features(i, 1) = radius * std::sin(angle) + 0.02 * rng.next_normal();
    data.labels[static_cast<std::size_t>(i)] = c;
  }
  return data;
}

namespace {

void run_corner_mixture(const ExperimentSpec& spec, std::string& out) {
  const Eigen::Index d = to_index("d", require_param(spec, "d"));
  const double sigma = to_double("sigma", require_param(spec, "sigma"));
  const auto n_grid = to_list<Eigen::Index>("n_grid", require_param(spec, "n_grid"), to_index);
  const Eigen::Index reps = to_index("reps", require_param(spec, "reps"));
  const Eigen::Index n_mc = to_index("n_mc", require_param(spec, "n_mc"));
  const double comp_sigma = to_double("component_sigma", param_or(spec, "component_sigma", "0.02"));
  const bool truncated = to_bool("truncated", param_or(spec, "truncated", "true"));

  const GaussianMixture corner = build_corner_mixture(d, comp_sigma, truncated);
  const double truth = corner_truth_entropy(d, sigma, comp_sigma, truncated);
  const McBudget budget{n_mc, MseBoundMode::bounded_support, 0.0};

  out += "n,plugin_mean_err,plugin_se,knn_mean_err,knn_se\n";
  std::vector<std::array<double, 2>> plugin_pts, knn_pts;
  const SplitRng root = SplitRng(spec.seed).child(kTagCorner);
  for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
    const Eigen::Index n = n_grid[gi];
    std::vector<double> plugin_errs, knn_errs;
    for (Eigen::Index rep = 0; rep < reps; ++rep) {
      SplitRng chain = root.child(gi).child(static_cast<std::uint64_t>(rep));
      const std::uint64_t s_draw = chain.next_u64();
      const std::uint64_t s_mc = chain.next_u64();
      const std::uint64_t s_noise = chain.next_u64();
      const SampleMatrix samples = sample(corner, n, s_draw);
      plugin_errs.push_back(
          std::abs(plugin_entropy(samples, sigma, budget, s_mc).value - truth));
      const SampleMatrix noisy = add_gaussian_noise(samples, sigma, s_noise);
      knn_errs.push_back(std::abs(knn_kl_entropy(noisy).value - truth));
    }
    const MeanSd pl = mean_sd(plugin_errs);
    const MeanSd kn = mean_sd(knn_errs);
    const double rr = std::sqrt(static_cast<double>(reps));
    out += std::to_string(n) + "," + format_full(pl.mean) + "," +
           format_full(pl.sd / rr) + "," + format_full(kn.mean) + "," +
           format_full(kn.sd / rr) + "\n";
    const double ln_n = std::log(static_cast<double>(n));
    if (pl.mean > 0) plugin_pts.push_back({ln_n, std::log(pl.mean)});
    if (kn.mean > 0) knn_pts.push_back({ln_n, std::log(kn.mean)});
  }
  out += "# truth=" + format_full(truth) + "\n";
  if (plugin_pts.size() >= 3) {
    const RateFit fit = fit_rate(plugin_pts);
    out += "# slope_plugin=" + format_full(fit.slope) + " r2=" + format_full(fit.r_squared) + "\n";
  }
  if (knn_pts.size() >= 3) {
    const RateFit fit = fit_rate(knn_pts);
    out += "# slope_knn=" + format_full(fit.slope) + " r2=" + format_full(fit.r_squared) + "\n";
  }
}

void run_mc_convergence(const ExperimentSpec& spec, std::string& out) {
  const Eigen::Index d = to_index("d", require_param(spec, "d"));
  const double sigma = to_double("sigma", require_param(spec, "sigma"));
  const Eigen::Index n = to_index("n", require_param(spec, "n"));
  const auto n_mc_grid =
      to_list<Eigen::Index>("n_mc_grid", require_param(spec, "n_mc_grid"), to_index);
  const auto reps_list = to_list<Eigen::Index>("reps", require_param(spec, "reps"), to_index);
  if (reps_list.size() != 1 && reps_list.size() != n_mc_grid.size())
    throw std::invalid_argument("mc_convergence: reps must be one value or match n_mc_grid");
  const double comp_sigma = to_double("component_sigma", param_or(spec, "component_sigma", "0.02"));
  const bool truncated = to_bool("truncated", param_or(spec, "truncated", "true"));

  const GaussianMixture corner = build_corner_mixture(d, comp_sigma, truncated);
  const SplitRng root = SplitRng(spec.seed).child(kTagMcConv);
  SplitRng chain = root.child(0);
  const SampleMatrix samples = sample(corner, n, chain.next_u64());
  const GaussianMixture g = smooth_empirical(samples, sigma);

  out += "n_mc,rmse,mean,reps\n";
  std::vector<std::array<double, 2>> pts;
  for (std::size_t gi = 0; gi < n_mc_grid.size(); ++gi) {
    const Eigen::Index n_mc = n_mc_grid[gi];
    const Eigen::Index reps = reps_list.size() == 1 ? reps_list[0] : reps_list[gi];
    if (reps < 2) throw std::invalid_argument("mc_convergence: need reps >= 2 per grid point");
    std::vector<double> values;
    for (Eigen::Index rep = 0; rep < reps; ++rep) {
      const std::uint64_t s =
          root.child(gi + 1).child(static_cast<std::uint64_t>(rep)).next_u64();
      values.push_back(
          mixture_entropy_mc(g, {n_mc, MseBoundMode::bounded_support, 0.0}, s).value);
    }
    const MeanSd ms = mean_sd(values);
    out += std::to_string(n_mc) + "," + format_full(ms.sd) + "," +
           format_full(ms.mean) + "," + std::to_string(reps) + "\n";
    if (ms.sd > 0) pts.push_back({std::log(static_cast<double>(n_mc)), std::log(ms.sd)});
  }
  if (pts.size() >= 3) {
    const RateFit fit = fit_rate(pts);
    out += "# slope=" + format_full(fit.slope) + " r2=" + format_full(fit.r_squared) + "\n";
  }
}

void run_distance_rates(const ExperimentSpec& spec, std::string& out) {
  const std::string truth_path = require_param(spec, "truth");
  const double sigma = to_double("sigma", require_param(spec, "sigma"));
  const DistanceKind kind = parse_distance_kind(require_param(spec, "kind"));
  const auto n_grid = to_list<Eigen::Index>("n_grid", require_param(spec, "n_grid"), to_index);
  const Eigen::Index reps = to_index("reps", require_param(spec, "reps"));
  DistanceBudget budget;
  budget.n_points = to_index("n_points", param_or(spec, "n_points", "20000"));
  budget.ot_cloud = to_index("ot_cloud", param_or(spec, "ot_cloud", "1024"));

  std::ifstream truth_file(truth_path);
  if (!truth_file) throw std::invalid_argument("distance_rates: cannot open truth file '" + truth_path + "'");
  const TruthDistribution truth = load_truth(truth_file);

  const ConvergenceResult res =
      convergence_experiment(truth, sigma, kind, n_grid, reps, budget, spec.seed);
  out += "n,mean,std_error,reps\n";
  for (const auto& pt : res.points)
    out += std::to_string(pt.n) + "," + format_full(pt.mean) + "," +
           format_full(pt.std_error) + "," + std::to_string(pt.reps) + "\n";
  out += "# slope=" + format_full(res.fit.slope) + " r2=" + format_full(res.fit.r_squared) + "\n";
}

void run_dnn_spiral(const ExperimentSpec& spec, std::string& out) {
  const std::string net_path = require_param(spec, "net");
  const Eigen::Index layer = to_index("layer", require_param(spec, "layer"));
  const auto n_grid = to_list<Eigen::Index>("n_grid", require_param(spec, "n_grid"), to_index);
  const Eigen::Index reps = to_index("reps", require_param(spec, "reps"));
  const Eigen::Index n_mc = to_index("n_mc", require_param(spec, "n_mc"));
  const double noise_sigma = to_double("noise_sigma", require_param(spec, "noise_sigma"));
  const int classes = static_cast<int>(to_index("classes", param_or(spec, "classes", "3")));

  std::ifstream net_file(net_path);
  if (!net_file) throw std::invalid_argument("dnn_spiral: cannot open net file '" + net_path + "'");
  const NoisyNetwork net = load_network(net_file, noise_sigma);
  const McBudget budget{n_mc, MseBoundMode::bounded_support, 0.0};

  out += "n,plugin_mean,plugin_sd,knn_mean,knn_sd,kde_mean,kde_sd\n";
  const SplitRng root = SplitRng(spec.seed).child(kTagSpiral);
  for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
    const Eigen::Index n = n_grid[gi];
    std::vector<double> plugin_vals, knn_vals, kde_vals;
    for (Eigen::Index rep = 0; rep < reps; ++rep) {
      SplitRng chain = root.child(gi).child(static_cast<std::uint64_t>(rep));
      const std::uint64_t s_data = chain.next_u64();
      const std::uint64_t s_fwd = chain.next_u64();
      const std::uint64_t s_mc = chain.next_u64();
      const std::uint64_t s_noise = chain.next_u64();
      const SpiralDataset data = make_spiral_dataset(n, classes, s_data);
      const LabeledDataset labeled =
          make_labeled_dataset(data.features, data.labels);
      const SampleMatrix pre = sample_unconditional(net, labeled, layer, s_fwd);
      plugin_vals.push_back(plugin_entropy(pre, noise_sigma, budget, s_mc).value);
      const SampleMatrix noisy = add_gaussian_noise(pre, noise_sigma, s_noise);
      knn_vals.push_back(knn_kl_entropy(noisy).value);
      kde_vals.push_back(kde_entropy(noisy, silverman_bandwidth(noisy)).value);
    }
    const MeanSd pl = mean_sd(plugin_vals), kn = mean_sd(knn_vals), kd = mean_sd(kde_vals);
    out += std::to_string(n) + "," + format_full(pl.mean) + "," + format_full(pl.sd) +
           "," + format_full(kn.mean) + "," + format_full(kn.sd) + "," +
           format_full(kd.mean) + "," + format_full(kd.sd) + "\n";
  }
}

void run_rm_awgn(const ExperimentSpec& spec, std::string& out) {
  const int r = static_cast<int>(to_index("r", require_param(spec, "r")));
  const int m = static_cast<int>(to_index("m", require_param(spec, "m")));
  const auto sigma_grid =
      to_list<double>("sigma_grid", require_param(spec, "sigma_grid"), to_double);
  const Eigen::Index n = to_index("n", require_param(spec, "n"));
  const std::string mode_str = require_param(spec, "mode");
  const Eigen::Index n_mc = to_index("n_mc", require_param(spec, "n_mc"));
  const bool exhaustive = to_bool("exhaustive", param_or(spec, "exhaustive", "false"));
  const ChannelMiMode mode = mode_str == "exact" ? ChannelMiMode::exact
                             : mode_str == "plugin"
                                 ? ChannelMiMode::plugin
                                 : throw std::invalid_argument(
                                       "rm_awgn: mode must be plugin or exact");

  const BpskCodebook book = bpsk_modulate(rm_generate(r, m));
  const McBudget budget{n_mc, MseBoundMode::bounded_support, 0.0};
  out += "sigma,mi,std_error,n,mode\n";
  const SplitRng root = SplitRng(spec.seed);
  for (std::size_t gi = 0; gi < sigma_grid.size(); ++gi) {
    const double sigma = sigma_grid[gi];
    const EstimateReport rep =
        channel_mi(book, sigma, n, budget, mode, root.child(gi).next_u64(), exhaustive);
    out += format_full(sigma) + "," + format_full(rep.value) + "," +
           format_full(rep.std_error) + "," + std::to_string(rep.n) + "," +
           mode_str + "\n";
  }
}

void run_counterexample(const ExperimentSpec& spec, std::string& out) {
  const Eigen::Index k_max = to_index("k_max", require_param(spec, "k_max"));
  CounterexampleSpec cs;
  out += "k,partial_sum\n";
  const std::vector<double> sums = divergence_diagnostic(cs, k_max);
  std::vector<std::array<double, 2>> pts;
  for (Eigen::Index k = 1; k <= k_max; ++k) {
    const double s = sums[static_cast<std::size_t>(k - 1)];
    out += std::to_string(k) + "," + format_full(s) + "\n";
    if (k >= 10) pts.push_back({std::log(static_cast<double>(k)), s});
  }
  if (pts.size() >= 3) {
    // Growth of the cumulative sum against log k, fitted past the initial
    // crowded windows.
    const RateFit fit = fit_rate(pts);
    out += "# slope_vs_logk=" + format_full(fit.slope) + " r2=" + format_full(fit.r_squared) + "\n";
  }
}

void run_bounds_table(const ExperimentSpec& spec, std::string& out) {
  BoundQuery q;
  q.d = to_index("d", param_or(spec, "d", "1"));
  q.sigma = to_double("sigma", param_or(spec, "sigma", "1"));
  q.k_subg = to_double("k_subg", param_or(spec, "k_subg", "0"));
  q.diameter = to_double("diameter", param_or(spec, "diameter", "0"));
  q.eps = to_double("eps", param_or(spec, "eps", "0.01"));
  q.n = to_index("n", param_or(spec, "n", "1"));
  q.moment_m = to_double("moment", param_or(spec, "moment", "0"));

  out += "name,value\n";
  const auto emit = [&](const char* name, auto&& fn) {
    try {
      out += std::string(name) + "," + format_full(fn()) + "\n";
    } catch (const std::exception&) {
      out += std::string(name) + ",nan\n";
    }
  };
  emit("w1", [&] { return w1_constant(q); });
  emit("tv", [&] { return tv_constant(q); });
  emit("chi2", [&] { return chi2_constant(q); });
  emit("chi2-bdd", [&] { return chi2_bounded_constant(q); });
  emit("plugin-bdd", [&] { return plugin_risk_constant_bounded(q); });
  emit("plugin-subg", [&] { return plugin_risk_constant_subg(q); });
  emit("kstar", [&] { return static_cast<double>(k_star(q.d, q.sigma, q.eps)); });
  emit("bias-lb", [&] { return bias_lower_bound(q.d, q.sigma, q.eps, q.n); });
}

}  // namespace

void run_experiment_to_string(const ExperimentSpec& spec, std::string& out) {
  out += spec_echo(spec);
  switch (spec.family) {
    case ExperimentFamily::corner_mixture: run_corner_mixture(spec, out); break;
    case ExperimentFamily::mc_convergence: run_mc_convergence(spec, out); break;
    case ExperimentFamily::distance_rates: run_distance_rates(spec, out); break;
    case ExperimentFamily::dnn_spiral: run_dnn_spiral(spec, out); break;
    case ExperimentFamily::rm_awgn: run_rm_awgn(spec, out); break;
    case ExperimentFamily::counterexample: run_counterexample(spec, out); break;
    case ExperimentFamily::bounds_table: run_bounds_table(spec, out); break;
  }
}

int run_experiment(const ExperimentSpec& spec) {
  std::string csv;
  int status = 0;
  try {
    run_experiment_to_string(spec, csv);
  } catch (const NumericError& err) {
    csv += std::string("# error=") + err.what() + "\n";
    csv += "# partial_value=" + format_full(err.partial_value()) + "\n";
    status = 1;
  }
  const std::string path = spec.output_path.empty()
                               ? std::string(experiment_family_name(spec.family)) + ".csv"
                               : spec.output_path;
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("run_experiment: cannot write '" + path + "'");
  file << csv;
  return status;
}

}  // namespace smoothent
