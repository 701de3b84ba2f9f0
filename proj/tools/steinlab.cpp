// steinlab command-line front end.
//
//   steinlab test|power|calibrate|oracle|rates|sample --config <file> --out <path>
//            [--seed N] [--paper-scale] [--data <csv>] [--suite <names>]
//
// Exit status: 0 success, 1 operational error, 2 oracle-suite failure.

#include "steinlab/csv_io.hpp"
#include "steinlab/experiments.hpp"
#include "steinlab/oracle_suites.hpp"
#include "steinlab/spectral_oracles.hpp"
#include "steinlab/test_engine.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

using json = nlohmann::ordered_json;
using namespace steinlab;

namespace {

struct Options {
  std::string config_path;
  std::string out_path;
  std::string data_path;
  std::string suite;
  std::optional<std::uint64_t> seed;
  bool paper_scale = false;
};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  json j = json::parse(in);
  if (!j.is_object()) throw std::runtime_error("config must be a JSON object");
  return j;
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw std::runtime_error("unknown key '" + key + "' in " + where);
}

/// FNV-1a over the canonical dump of the parsed config.
std::string config_hash(const json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

template <typename T>
std::vector<T> as_list(const json& v) {
  if (v.is_array()) return v.get<std::vector<T>>();
  return {v.get<T>()};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void read_grid_fields(const json& j, TestConfig& t) {
  if (j.contains("lambdas")) t.lambdas = j["lambdas"].get<std::vector<double>>();
  if (j.contains("bandwidth_multipliers")) t.bandwidth_multipliers = j["bandwidth_multipliers"].get<std::vector<double>>();
  if (j.contains("alpha")) t.alpha = j["alpha"].get<double>();
  if (j.contains("bootstrap")) t.bootstrap = j["bootstrap"].get<int>();
  if (j.contains("split_fraction")) t.split_fraction = j["split_fraction"].get<double>();
  if (j.contains("n2")) t.n2 = j["n2"].get<Eigen::Index>();
  if (j.contains("median_bandwidth")) t.median_bandwidth = j["median_bandwidth"].get<double>();
}

// ---------------------------------------------------------------------------
// test
// ---------------------------------------------------------------------------

ScoreModel<double> parse_score(const json& j, Eigen::Index dim) {
  const std::string type = j.value("type", "gaussian");
  if (type == "gaussian") return StandardGaussianScore{dim};
  if (type == "zero") return ZeroScore{dim};
  if (type == "rbm") {
    RbmScore<double> s;
    const auto b = j.at("b").get<std::vector<double>>();
    const auto c = j.at("c").get<std::vector<double>>();
    const auto rows = j.at("B").get<std::vector<std::vector<double>>>();
    s.b = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    s.c = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
    s.B.resize(static_cast<Eigen::Index>(rows.size()), s.c.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (static_cast<Eigen::Index>(rows[i].size()) != s.c.size())
        throw std::runtime_error("RBM coupling rows must have d_h entries");
      for (std::size_t k = 0; k < rows[i].size(); ++k) s.B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
    s.validate();
    if (s.dim() != dim) throw std::runtime_error("RBM dimension does not match the data");
    return s;
  }
  throw std::runtime_error("unknown score type: " + type);
}

SteinKernel<double> parse_kernel(const json& j, Eigen::Index dim) {
  const std::string type = j.value("type", "langevin");
  if (type == "sphere") {
    check_keys(j, {"type", "decay", "beta", "tau", "kmax"}, "kernel");
    const int kmax = j.value("kmax", 100);
    if (j.value("decay", "polynomial") == "exponential")
      return SphereHarmonicKernel<double>::exponential(j.value("tau", 1.0), kmax);
    return SphereHarmonicKernel<double>::polynomial(j.value("beta", 3.0), kmax);
  }
  if (type != "langevin") throw std::runtime_error("unknown kernel type: " + type);
  check_keys(j, {"type", "base", "rho", "beta", "a0", "kmax", "score"}, "kernel");
  const std::string base = j.value("base", "gaussian");
  BaseKernelSpec<double> spec;
  if (base == "gaussian") spec = BaseKernelSpec<double>::gaussian(1.0);
  else if (base == "imq") spec = BaseKernelSpec<double>::imq(1.0);
  else if (base == "mehler") spec = BaseKernelSpec<double>::mehler(j.value("rho", 0.5));
  else if (base == "periodic_fourier")
    spec = BaseKernelSpec<double>::periodic_fourier(j.value("beta", 4.0), j.value("a0", 0.0), j.value("kmax", 200));
  else throw std::runtime_error("unknown base kernel: " + base);
  const json score = j.contains("score") ? j["score"] : json::object();
  return LangevinKernel<double>{spec, parse_score(score, dim)};
}

json report_json(const TestReport& r, const json& cfg, std::uint64_t seed) {
  json out;
  out["version"] = STEINLAB_VERSION;
  out["config_hash"] = config_hash(cfg);
  out["seed"] = seed;
  out["test"] = r.test;
  out["regularizer"] = r.regularizer;
  out["unsupported_theory"] = r.unsupported_theory;
  out["reject"] = r.reject;
  out["alpha"] = r.alpha;
  out["level_per_cell"] = r.level_per_cell;
  out["bootstrap"] = r.bootstrap;
  out["n1"] = r.n1;
  out["n2"] = r.n2;
  out["median_bandwidth"] = r.median_bandwidth;
  out["bandwidth_grid_applied"] = r.bandwidth_grid_applied;
  json cells = json::array();
  for (const auto& c : r.cells) {
    json cell;
    cell["lambda_index"] = c.lambda_index;
    cell["bandwidth_index"] = c.bandwidth_index;
    cell["lambda"] = c.lambda;
    cell["bandwidth_multiplier"] = c.multiplier;
    cell["bandwidth"] = c.bandwidth;
    cell["statistic"] = c.statistic;
    cell["threshold"] = c.threshold;
    cell["reject"] = c.reject;
    cell["seed"] = c.seed;
    cell["trace_m"] = c.trace_m;
    cells.push_back(cell);
  }
  out["cells"] = cells;
  return out;
}

int cmd_test(const Options& o) {
  json cfg = load_config(o.config_path);
  check_keys(cfg, {"data", "null_samples", "test", "kernel", "lambdas", "bandwidth_multipliers", "alpha",
                   "bootstrap", "split_fraction", "n2", "median_bandwidth", "seed", "shuffle"},
             "test config");
  std::string data_path = o.data_path;
  if (data_path.empty()) data_path = cfg.value("data", "");
  if (data_path.empty()) throw std::runtime_error("test needs a data file (--data or \"data\")");
  PointSet data = read_csv(data_path);
  const std::uint64_t seed = o.seed ? *o.seed : cfg.value("seed", std::uint64_t{0});

  if (cfg.value("shuffle", true)) {
    Rng rng(seed, Stream::Shuffle, 0);
    for (Eigen::Index i = data.rows() - 1; i > 0; --i) {
      const auto j = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
      if (j != i) data.row(i).swap(data.row(j));
    }
  }

  TestConfig t;
  read_grid_fields(cfg, t);
  t.seed = seed;
  t.kernel = parse_kernel(cfg.contains("kernel") ? cfg["kernel"] : json::object(), data.cols());
  if (stein_dim(t.kernel) != data.cols()) throw std::runtime_error("kernel dimension does not match the data");

  const TestVariant variant = parse_test_variant(cfg.value("test", "KSD(Tikhonov)"));
  t.regularizer = variant.regularizer;
  Dataset ds{data, {}, t.kernel};
  if (variant.kind == TestVariant::Kind::NullCov) {
    if (!cfg.contains("null_samples")) throw std::runtime_error("the * variants need \"null_samples\"");
    ds.null_samples = read_csv(cfg["null_samples"].get<std::string>());
  }
  const TestReport report = run_variant(variant, ds, t, seed);
  write_text(o.out_path, report_json(report, cfg, seed).dump(2) + "\n");
  std::cerr << report.test << ": " << (report.reject ? "reject" : "fail to reject") << " H0 ("
            << report.cells.size() << " cells)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// power / calibrate / sample
// ---------------------------------------------------------------------------

ExperimentConfig experiment_config(const json& cfg, const Options& o) {
  check_keys(cfg, {"model", "dim", "hidden_dim", "params", "n", "n2", "null_samples", "tests", "base_kernel",
                   "lambdas", "bandwidth_multipliers", "alpha", "bootstrap", "split_fraction", "median_bandwidth",
                   "repetitions", "seed", "threads", "gibbs", "fourier_m", "fourier_beta", "sphere_beta",
                   "sphere_kmax"},
             "experiment config");
  ExperimentConfig e = default_experiment(model_from_name(cfg.value("model", "gaussian")));
  if (o.paper_scale) apply_paper_scale(e);
  if (cfg.contains("dim")) e.dim = cfg["dim"].get<Eigen::Index>();
  if (cfg.contains("hidden_dim")) e.hidden_dim = cfg["hidden_dim"].get<Eigen::Index>();
  if (cfg.contains("params")) e.params = as_list<double>(cfg["params"]);
  if (cfg.contains("n")) e.n = cfg["n"].get<Eigen::Index>();
  if (cfg.contains("n2")) e.n2 = cfg["n2"].get<Eigen::Index>();
  if (cfg.contains("null_samples")) e.null_samples = cfg["null_samples"].get<Eigen::Index>();
  if (cfg.contains("tests")) e.tests = as_list<std::string>(cfg["tests"]);
  if (cfg.contains("base_kernel")) e.base_kernel = cfg["base_kernel"].get<std::string>();
  read_grid_fields(cfg, e.test);
  e.test.n2.reset();
  if (cfg.contains("repetitions")) e.repetitions = cfg["repetitions"].get<int>();
  if (cfg.contains("threads")) e.threads = cfg["threads"].get<int>();
  if (cfg.contains("gibbs")) {
    const json& g = cfg["gibbs"];
    check_keys(g, {"burn_in", "thin", "chains"}, "gibbs");
    e.gibbs.burn_in = g.value("burn_in", e.gibbs.burn_in);
    e.gibbs.thin = g.value("thin", e.gibbs.thin);
    e.gibbs.chains = g.value("chains", e.gibbs.chains);
  }
  e.fourier_m = cfg.value("fourier_m", e.fourier_m);
  e.fourier_beta = cfg.value("fourier_beta", e.fourier_beta);
  e.sphere_beta = cfg.value("sphere_beta", e.sphere_beta);
  e.sphere_kmax = cfg.value("sphere_kmax", e.sphere_kmax);
  e.seed = o.seed ? *o.seed : cfg.value("seed", std::uint64_t{0});
  e.validate();
  return e;
}

std::string provenance(const json& cfg, const ExperimentConfig& e) {
  return "# steinlab " STEINLAB_VERSION " config_hash=" + config_hash(cfg) + " seed=" + std::to_string(e.seed) +
         " model=" + to_string(e.model) + " n=" + std::to_string(e.n) + " repetitions=" +
         std::to_string(e.repetitions) + " bootstrap=" + std::to_string(e.test.bootstrap) + " gibbs_burn_in=" +
         std::to_string(e.gibbs.burn_in) + " gibbs_thin=" + std::to_string(e.gibbs.thin) + "\n";
}

Progress stderr_progress() {
  return [](std::size_t done, std::size_t total) {
    if (done == total || done % 10 == 0) std::cerr << "progress " << done << "/" << total << "\n";
  };
}

int cmd_power(const Options& o, bool calibrate) {
  const json cfg = load_config(o.config_path);
  const ExperimentConfig e = experiment_config(cfg, o);
  const auto rows = calibrate ? run_calibration(e, stderr_progress()) : run_power(e, stderr_progress());
  std::ostringstream os;
  os << provenance(cfg, e);
  if (calibrate) {
    os << "test,param,rejections,reps,rate,se,ci_low,ci_high\n";
    for (const auto& r : rows) {
      // Wilson score interval, 95%.
      const double z = 1.959963984540054, nn = r.reps, p = r.power;
      const double centre = (p + z * z / (2 * nn)) / (1 + z * z / nn);
      const double half = z * std::sqrt(p * (1 - p) / nn + z * z / (4 * nn * nn)) / (1 + z * z / nn);
      os << r.test << ',' << format_double(r.param) << ',' << r.rejections << ',' << r.reps << ','
         << format_double(r.power) << ',' << format_double(r.se) << ',' << format_double(std::max(0.0, centre - half))
         << ',' << format_double(std::min(1.0, centre + half)) << '\n';
    }
  } else {
    os << "param,test,rejections,reps,power,se\n";
    for (const auto& r : rows)
      os << format_double(r.param) << ',' << r.test << ',' << r.rejections << ',' << r.reps << ','
         << format_double(r.power) << ',' << format_double(r.se) << '\n';
  }
  write_text(o.out_path, os.str());
  return 0;
}

int cmd_sample(const Options& o) {
  const json cfg = load_config(o.config_path);
  ExperimentConfig e = experiment_config(cfg, o);
  const Dataset ds = draw_dataset(e, 0, 0);
  write_csv(o.out_path, ds.data);
  return 0;
}

// ---------------------------------------------------------------------------
// oracle / rates
// ---------------------------------------------------------------------------

int cmd_oracle(const Options& o) {
  const json cfg = load_config(o.config_path);
  check_keys(cfg, {"suites", "seed"}, "oracle config");
  std::string selector = o.suite;
  if (selector.empty() && cfg.contains("suites")) {
    for (const auto& s : as_list<std::string>(cfg["suites"])) selector += (selector.empty() ? "" : ",") + s;
  }
  const std::uint64_t seed = o.seed ? *o.seed : cfg.value("seed", std::uint64_t{0});
  const auto results = run_oracle_suites(selector, seed);
  std::ostringstream os;
  bool all = true;
  for (const auto& r : results) {
    os << (r.passed ? "PASS " : "FAIL ") << r.name << "\n";
    for (const auto& d : r.details) os << "  " << d << "\n";
    all = all && r.passed;
  }
  std::cout << os.str();
  if (!o.out_path.empty()) write_text(o.out_path, os.str());
  return all ? 0 : 2;
}

int cmd_rates(const Options& o) {
  const json cfg = load_config(o.config_path);
  check_keys(cfg, {"theta", "xi", "beta", "tau", "n", "decay", "bounded"}, "rates config");
  const auto thetas = as_list<double>(cfg.value("theta", json::array({0.25, 0.5, 1.0})));
  const auto betas = as_list<double>(cfg.value("beta", json::array({2.0})));
  const auto taus = as_list<double>(cfg.value("tau", json::array({1.0})));
  const auto ns = as_list<double>(cfg.value("n", json::array({1000.0})));
  const auto decays = as_list<std::string>(cfg.value("decay", json::array({"poly", "exp"})));
  const auto bounded = as_list<bool>(cfg.value("bounded", json::array({false, true})));
  const double xi = cfg.value("xi", std::numeric_limits<double>::infinity());

  std::ostringstream os;
  os << "decay,bounded,theta_tilde,beta,tau,n,log_power,n_power,value,regime\n";
  for (const auto& decay : decays) {
    if (decay != "poly" && decay != "exp") throw std::runtime_error("decay must be poly or exp");
    const bool poly = decay == "poly";
    for (bool b : bounded)
      for (double theta : thetas)
        for (double shape : poly ? betas : taus)
          for (double n : ns) {
            RateParams p;
            p.theta = theta;
            p.xi = xi;
            p.decay = poly ? DecayKind::Polynomial : DecayKind::Exponential;
            p.bounded_eigenfunctions = b;
            (poly ? p.beta : p.tau) = shape;
            const RateResult r = separation_rate(p, n);
            os << decay << ',' << (b ? "true" : "false") << ',' << format_double(p.theta_tilde()) << ','
               << (poly ? format_double(p.beta) : "") << ',' << (poly ? "" : format_double(p.tau)) << ','
               << format_double(n) << ',' << format_double(r.log_power) << ',' << format_double(r.n_power) << ','
               << format_double(r.value) << ",\"" << r.regime << "\"\n";
          }
  }
  write_text(o.out_path, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral-regularized kernel Stein discrepancy tests"};
  app.set_version_flag("--version", STEINLAB_VERSION);
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub, bool config_required, bool out_required) {
    auto* c = sub->add_option("--config", o.config_path, "JSON config file");
    if (config_required) c->required()->check(CLI::ExistingFile);
    else c->check(CLI::ExistingFile);
    auto* out = sub->add_option("--out", o.out_path, "output path");
    if (out_required) out->required();
    sub->add_option("--seed", seed, "master seed (overrides the config)");
  };
  auto* test = app.add_subcommand("test", "run a goodness-of-fit test on a CSV data file");
  add_common(test, true, true);
  test->add_option("--data", o.data_path, "CSV data file (overrides the config)");
  auto* power = app.add_subcommand("power", "power sweep over an alternative parameter");
  add_common(power, true, true);
  power->add_flag("--paper-scale", o.paper_scale, "use the published experiment sizes");
  auto* calibrate = app.add_subcommand("calibrate", "type-I error under the null");
  add_common(calibrate, true, true);
  calibrate->add_flag("--paper-scale", o.paper_scale, "use the published experiment sizes");
  auto* oracle = app.add_subcommand("oracle", "run oracle suites");
  add_common(oracle, false, false);
  oracle->add_option("--suite", o.suite, "comma-separated suite names (default: all)");
  auto* rates = app.add_subcommand("rates", "tabulate separation rates");
  add_common(rates, false, true);
  auto* sample = app.add_subcommand("sample", "write one dataset of an experiment family as CSV");
  add_common(sample, true, true);
  sample->add_flag("--paper-scale", o.paper_scale, "use the published experiment sizes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  for (auto* sub : {test, power, calibrate, oracle, rates, sample})
    if (sub->parsed() && sub->count("--seed")) o.seed = seed;

  try {
    if (test->parsed()) return cmd_test(o);
    if (power->parsed()) return cmd_power(o, false);
    if (calibrate->parsed()) return cmd_power(o, true);
    if (oracle->parsed()) return cmd_oracle(o);
    if (rates->parsed()) return cmd_rates(o);
    if (sample->parsed()) return cmd_sample(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
