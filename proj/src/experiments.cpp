#include "steinlab/experiments.hpp"

#include "steinlab/csv_io.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace steinlab {

ModelFamily model_from_name(const std::string& name) {
  if (name == "gaussian") return ModelFamily::Gaussian;
  if (name == "rbm") return ModelFamily::Rbm;
  if (name == "watson") return ModelFamily::Watson;
  if (name == "fourier") return ModelFamily::Fourier;
  throw std::invalid_argument("unknown model family: " + name);
}

std::string to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::Gaussian: return "gaussian";
    case ModelFamily::Rbm: return "rbm";
    case ModelFamily::Watson: return "watson";
    case ModelFamily::Fourier: return "fourier";
  }
  return "unknown";
}

std::string TestVariant::name() const {
  switch (kind) {
    case Kind::Ksd: return "KSD";
    case Kind::Aggregate: return "KSD(" + regularizer.name() + ")";
    case Kind::NullCov: return "KSD(" + regularizer.name() + ")*";
    case Kind::SingleLambda:
      return "KSD(" + regularizer.name() + ")[lambda=" + format_double(lambda) + "]";
  }
  return "unknown";
}

TestVariant parse_test_variant(const std::string& name) {
  TestVariant v;
  if (name == "KSD") return v;
  const auto open = name.find('('), close = name.find(')');
  if (name.rfind("KSD(", 0) != 0 || close == std::string::npos || close < open)
    throw std::invalid_argument("unknown test variant: " + name);
  v.regularizer = regularizer_from_name(name.substr(open + 1, close - open - 1));
  const std::string rest = name.substr(close + 1);
  if (rest.empty()) {
    v.kind = TestVariant::Kind::Aggregate;
  } else if (rest == "*") {
    v.kind = TestVariant::Kind::NullCov;
  } else if (rest.rfind("[lambda=", 0) == 0 && rest.back() == ']') {
    v.kind = TestVariant::Kind::SingleLambda;
    const std::string num = rest.substr(8, rest.size() - 9);
    const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), v.lambda);
    if (ec != std::errc() || ptr != num.data() + num.size() || !(v.lambda > 0))
      throw std::invalid_argument("bad lambda in test variant: " + name);
  } else {
    throw std::invalid_argument("unknown test variant: " + name);
  }
  return v;
}

void ExperimentConfig::validate() const {
  if (repetitions < 1) throw std::invalid_argument("repetitions R must be >= 1");
  if (n < 2) throw std::invalid_argument("sample size n must be >= 2");
  if (dim < 1 || hidden_dim < 1) throw std::invalid_argument("dimensions must be positive");
  if (params.empty()) throw std::invalid_argument("parameter sweep is empty");
  if (tests.empty()) throw std::invalid_argument("test list is empty");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  if (model == ModelFamily::Watson && dim != 3)
    throw std::invalid_argument("the sphere Stein kernel is defined on S^2 (dim = 3)");
  if (model == ModelFamily::Fourier && dim != 1)
    throw std::invalid_argument("the Fourier family is one-dimensional");
  if (base_kernel != "gaussian" && base_kernel != "imq")
    throw std::invalid_argument("base kernel must be gaussian or imq");
  for (const auto& t : tests) parse_test_variant(t);
  test.validate();
}

double null_parameter(ModelFamily) { return 0.0; }

ExperimentConfig default_experiment(ModelFamily family) {
  ExperimentConfig c;
  c.model = family;
  switch (family) {
    case ModelFamily::Gaussian:
      c.dim = 2;
      c.n = 200;
      c.params = {0.0, 0.25, 0.5};
      break;
    case ModelFamily::Rbm:
      c.dim = 10;
      c.hidden_dim = 8;
      c.n = 300;
      c.params = {0.0, 0.02, 0.05};
      c.tests = {"KSD", "KSD(Tikhonov)", "KSD(TikMax)"};
      break;
    case ModelFamily::Watson:
      c.dim = 3;
      c.n = 500;
      c.n2 = 100;
      c.params = {0.0, 1.0, 2.0, 4.0};
      c.tests = {"KSD", "KSD(Tikhonov)", "KSD(TikMax)"};
      break;
    case ModelFamily::Fourier:
      c.dim = 1;
      c.n = 200;
      c.params = {0.0, 0.1, 0.2, 0.3};
      c.tests = {"KSD", "KSD(Tikhonov)", "KSD(TikMax)"};
      break;
  }
  return c;
}

void apply_paper_scale(ExperimentConfig& config) {
  config.repetitions = 500;
  if (config.model == ModelFamily::Rbm) {
    config.dim = 50;
    config.hidden_dim = 40;
    config.n = 1000;
    config.n2.reset();
  }
}

namespace {

BaseKernelSpec<double> rd_base(const ExperimentConfig& c) {
  return c.base_kernel == "imq" ? BaseKernelSpec<double>::imq(1.0) : BaseKernelSpec<double>::gaussian(1.0);
}

}  // namespace

Dataset draw_dataset(const ExperimentConfig& config, std::size_t param_index, int rep) {
  const double p = config.params.at(param_index);
  const auto r = static_cast<std::uint64_t>(rep);
  // Data streams depend on the repetition only, so every parameter value sees
  // common random numbers.
  Rng data_rng(config.seed, Stream::Data, r);
  Rng null_rng(config.seed, Stream::NullSamples, r);
  const Eigen::Index n2 = config.n2 ? *config.n2 : default_n2(config.n);
  const Eigen::Index m0 = config.null_samples ? *config.null_samples : n2;
  Dataset ds;
  switch (config.model) {
    case ModelFamily::Gaussian: {
      ds.data = sample_standard_gaussian(config.dim, config.n, data_rng);
      ds.data.col(0).array() += p;
      ds.null_samples = sample_standard_gaussian(config.dim, m0, null_rng);
      ds.kernel = LangevinKernel<double>{rd_base(config), StandardGaussianScore{config.dim}};
      break;
    }
    case ModelFamily::Rbm: {
      Rng model_rng(config.seed, Stream::Model, r);
      Rng perturb_rng(config.seed, Stream::Perturbation, r);
      const RbmParams null_params = draw_rbm_params(config.dim, config.hidden_dim, model_rng);
      const RbmParams alt = perturb_rbm(null_params, p, perturb_rng);
      ds.data = sample_rbm_gibbs(alt, config.n, data_rng, config.gibbs);
      ds.null_samples = sample_rbm_gibbs(null_params, m0, null_rng, config.gibbs);
      ds.kernel = LangevinKernel<double>{rd_base(config), null_params.score()};
      break;
    }
    case ModelFamily::Watson: {
      const auto [mu1, mu2] = watson_mean_directions(config.dim);
      ds.data = sample_watson_mixture(mu1, mu2, p, config.n, data_rng).points;
      ds.null_samples = sample_uniform_sphere(config.dim, m0, null_rng);
      ds.kernel = SphereHarmonicKernel<double>::polynomial(config.sphere_beta, config.sphere_kmax);
      break;
    }
    case ModelFamily::Fourier: {
      ds.data = sample_fourier_density(config.fourier_m, p, config.n, data_rng);
      ds.null_samples = sample_fourier_density(config.fourier_m, 0.0, m0, null_rng);
      ds.kernel = LangevinKernel<double>{BaseKernelSpec<double>::periodic_fourier(config.fourier_beta),
                                         ZeroScore{1}};
      break;
    }
  }
  return ds;
}

TestReport run_variant(const TestVariant& variant, const Dataset& dataset, const TestConfig& base,
                       std::uint64_t seed) {
  TestConfig cfg = base;
  cfg.kernel = dataset.kernel;
  cfg.seed = seed;
  cfg.regularizer = variant.regularizer;
  switch (variant.kind) {
    case TestVariant::Kind::Ksd: {
      cfg.bandwidth_multipliers = {1.0};
      return run_ksd_test(dataset.data, cfg);
    }
    case TestVariant::Kind::Aggregate: return run_aggregate_test(dataset.data, cfg);
    case TestVariant::Kind::NullCov: return run_test_null_cov(dataset.data, dataset.null_samples, cfg);
    case TestVariant::Kind::SingleLambda: {
      cfg.lambdas = {variant.lambda};
      cfg.bandwidth_multipliers = {1.0};
      return run_single_test(dataset.data, cfg);
    }
  }
  throw std::logic_error("unhandled test variant");
}

std::vector<PowerRow> run_power(const ExperimentConfig& config, const Progress& progress) {
  config.validate();
  std::vector<TestVariant> variants;
  for (const auto& t : config.tests) variants.push_back(parse_test_variant(t));
  TestConfig base = config.test;
  base.n2 = config.n2;

  const std::size_t n_params = config.params.size(), n_tests = variants.size();
  const auto reps = static_cast<std::size_t>(config.repetitions);
  const std::size_t units = n_params * reps;
  // rejects[(param * reps + rep) * n_tests + test]
  std::vector<char> rejects(units * n_tests, 0);

  std::atomic<std::size_t> next{0}, done{0};
  std::mutex progress_mutex;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t u = next.fetch_add(1);
      if (u >= units) return;
      try {
        const std::size_t pi = u / reps;
        const int rep = static_cast<int>(u % reps);
        const Dataset ds = draw_dataset(config, pi, rep);
        for (std::size_t t = 0; t < n_tests; ++t) {
          const std::uint64_t s = derive_seed(derive_seed(config.seed, Stream::Bootstrap, u), t, 0);
          rejects[u * n_tests + t] = run_variant(variants[t], ds, base, s).reject ? 1 : 0;
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = units;
        return;
      }
      const std::size_t d = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(d, units);
      }
    }
  };
  const int threads = std::min<int>(config.threads, static_cast<int>(units));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<PowerRow> rows;
  for (std::size_t t = 0; t < n_tests; ++t) {
    for (std::size_t pi = 0; pi < n_params; ++pi) {
      PowerRow row;
      row.param = config.params[pi];
      row.test = variants[t].name();
      row.reps = config.repetitions;
      for (std::size_t r = 0; r < reps; ++r) row.rejections += rejects[(pi * reps + r) * n_tests + t];
      row.power = static_cast<double>(row.rejections) / row.reps;
      row.se = std::sqrt(row.power * (1 - row.power) / row.reps);
      rows.push_back(row);
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const PowerRow& a, const PowerRow& b) {
    return a.test != b.test ? a.test < b.test : a.param < b.param;
  });
  return rows;
}

std::vector<PowerRow> run_calibration(const ExperimentConfig& config, const Progress& progress) {
  ExperimentConfig c = config;
  c.params = {null_parameter(config.model)};
  return run_power(c, progress);
}

}  // namespace steinlab
