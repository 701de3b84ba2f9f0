#include "steinlab/oracle_suites.hpp"

#include "steinlab/samplers.hpp"
#include "steinlab/spectral_oracles.hpp"
#include "steinlab/test_engine.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace steinlab {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void record(SuiteResult& r, bool ok, const std::string& line) {
  r.passed = r.passed && ok;
  r.details.push_back(std::string(ok ? "ok   " : "FAIL ") + line);
}

/// Langevin-Gaussian Stein Gram inputs on N(0, I_d) draws.
SteinKernel<double> gaussian_stein(double h, Eigen::Index d) {
  return LangevinKernel<double>{BaseKernelSpec<double>::gaussian(h), StandardGaussianScore{d}};
}

SuiteResult suite_stein_identity(std::uint64_t seed) {
  SuiteResult r{"stein_identity", true, {}};
  constexpr Eigen::Index m = 100000;
  struct Case {
    std::string label;
    SteinKernel<double> kernel;
    NullSampler sampler;
    bool sphere;
  };
  std::vector<Case> cases;
  for (const char* family : {"gaussian", "imq"})
    for (double h : {0.5, 1.0, 2.0})
      for (Eigen::Index d : {1, 5}) {
        const auto base = std::string(family) == "gaussian" ? BaseKernelSpec<double>::gaussian(h)
                                                            : BaseKernelSpec<double>::imq(h);
        cases.push_back({std::string(family) + " h=" + fmt(h) + " d=" + std::to_string(d),
                         LangevinKernel<double>{base, StandardGaussianScore{d}},
                         [d](Eigen::Index k, Rng& g) { return sample_standard_gaussian(d, k, g); }, false});
      }
  cases.push_back({"sphere beta=3", SphereHarmonicKernel<double>::polynomial(3.0, 100),
                   [](Eigen::Index k, Rng& g) { return sample_uniform_sphere(3, k, g); }, true});

  for (std::size_t c = 0; c < cases.size(); ++c) {
    const Eigen::Index d = stein_dim(cases[c].kernel);
    Rng probe_rng(seed, Stream::Probe, c);
    const PointSet probes = cases[c].sphere ? sample_uniform_sphere(3, 5, probe_rng)
                                            : sample_standard_gaussian(d, 5, probe_rng);
    for (Eigen::Index p = 0; p < probes.rows(); ++p) {
      const auto est = stein_identity_residual(cases[c].kernel, cases[c].sampler, probes.row(p).transpose(), m,
                                               derive_seed(seed, Stream::Probe, 1000 + c * 5 + p));
      const double z = est.std_error > 0 ? std::abs(est.mean) / est.std_error : 0.0;
      record(r, z <= 3.0,
             cases[c].label + " probe " + std::to_string(p) + ": mean=" + fmt(est.mean) +
                 " se=" + fmt(est.std_error) + " |z|=" + fmt(z) + " (limit 3)");
    }
  }
  return r;
}

SuiteResult suite_mehler(std::uint64_t) {
  SuiteResult r{"mehler", true, {}};
  const double rho = 0.5;
  const SteinKernel<double> k = LangevinKernel<double>{BaseKernelSpec<double>::mehler(rho), StandardGaussianScore{1}};
  double worst = 0;
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) {
      Eigen::VectorXd x(1), y(1);
      x(0) = -2 + 0.5 * i;
      y(0) = -2 + 0.5 * j;
      const double a = stein_eval(k, x, y);
      const double b = mehler_stein_series(rho, x(0), y(0), 60);
      worst = std::max(worst, std::abs(a - b));
    }
  record(r, worst <= 1e-8, "9x9 grid on [-2,2]^2, rho=0.5, K=60: max |diff|=" + fmt(worst) + " (limit 1e-08)");
  return r;
}

SuiteResult suite_tikhonov_path(std::uint64_t seed) {
  SuiteResult r{"tikhonov_path", true, {}};
  const double lambdas[] = {1e-3, 1e-1, 1.0};
  Rng rng(seed, Stream::Probe, 77);
  for (int f = 0; f < 20; ++f) {
    const Eigen::Index n1 = 10 + static_cast<Eigen::Index>(rng.below(51));
    const Eigen::Index n2 = 5 + static_cast<Eigen::Index>(rng.below(36));
    const double lambda = lambdas[f % 3];
    const PointSet x = sample_standard_gaussian(2, n1, rng);
    PointSet z = sample_standard_gaussian(2, n2, rng);
    const bool rank_deficient = f % 5 == 0;
    if (rank_deficient)  // three distinct points repeated
      for (Eigen::Index i = 3; i < n2; ++i) z.row(i) = z.row(i % 3);
    const auto kernel = gaussian_stein(1.0, 2);
    const Eigen::MatrixXd kx = stein_gram(kernel, x), kxz = stein_gram(kernel, x, z), kz = stein_gram(kernel, z);
    const double eig_path =
        reg_statistic(kx, kxz, eigensystem(kz), RegularizerSpec::tikhonov(), lambda).value;
    const double solve_path = tikhonov_oracle_statistic(kx, kxz, kz, lambda);
    const double rel = std::abs(eig_path - solve_path) / std::max(std::abs(solve_path), 1e-300);
    record(r, rel <= 1e-8,
           "fixture " + std::to_string(f) + " n1=" + std::to_string(n1) + " n2=" + std::to_string(n2) +
               " lambda=" + fmt(lambda) + (rank_deficient ? " rank-deficient" : "") +
               ": rel diff=" + fmt(rel) + " (limit 1e-08)");
  }
  return r;
}

SuiteResult suite_bootstrap_exhaustive(std::uint64_t seed) {
  SuiteResult r{"bootstrap_exhaustive", true, {}};
  constexpr Eigen::Index n1 = 10;
  Rng rng(seed, Stream::Probe, 88);
  const PointSet x = sample_standard_gaussian(2, n1, rng);
  const Eigen::MatrixXd m = stein_gram(gaussian_stein(1.0, 2), x);

  std::vector<double> all;
  all.reserve(1u << n1);
  Eigen::VectorXd eps(n1);
  for (unsigned mask = 0; mask < (1u << n1); ++mask) {
    for (Eigen::Index i = 0; i < n1; ++i) eps(i) = (mask >> i) & 1u ? 1.0 : -1.0;
    all.push_back(bootstrap_replicate(m, eps));
  }
  std::sort(all.begin(), all.end());
  const auto total = static_cast<double>(all.size());
  // The Monte Carlo path evaluates the same quadratic forms by GEMM; allow for
  // rounding only.
  const double tol = 1e-12 * std::max(std::abs(all.front()), std::abs(all.back()));

  const std::uint64_t boot_seed = derive_seed(seed, Stream::Bootstrap, 5000);
  for (double alpha : {0.01, 0.05, 0.1}) {
    const auto k = static_cast<std::size_t>(std::ceil((1 - alpha) * total - 1e-9 * total));  // 1-based
    const double lo = all[std::max<std::size_t>(k, 2) - 2], hi = all[std::min(k, all.size() - 1)];
    const double q = wild_bootstrap_quantile(m, alpha, 5000, boot_seed);
    record(r, q >= lo - tol && q <= hi + tol,
           "alpha=" + fmt(alpha) + ": MC quantile=" + fmt(q) + " exhaustive order stats [" +
               std::to_string(k - 1) + "]=" + fmt(lo) + " [" + std::to_string(k) + "]=" + fmt(all[k - 1]) +
               " [" + std::to_string(k + 1) + "]=" + fmt(hi));
  }
  const double stat = offdiagonal_mean(m);
  const double ones = bootstrap_replicate(m, Eigen::VectorXd::Ones(n1));
  record(r, ones == stat, "all-ones replicate=" + fmt(ones) + " statistic=" + fmt(stat) + " (exact)");
  return r;
}

SuiteResult suite_fourier_ksd_mc(std::uint64_t seed) {
  SuiteResult r{"fourier_ksd_mc", true, {}};
  const int m = 3;
  const double eps = 0.3, beta = 4;
  const auto eig = AnalyticEigensystem::fourier_stein(beta);
  const double population = population_ksd(eig, {{m, 0, eps}});
  const double expected = eps * eps * 4 * std::numbers::pi * std::numbers::pi / (m * m);
  record(r, std::abs(population - expected) <= 1e-12 * expected,
         "population_ksd=" + fmt(population) + " closed form=" + fmt(expected));

  constexpr Eigen::Index pairs = 100000;
  Rng rx(seed, Stream::Data, 31), ry(seed, Stream::Data, 32);
  const PointSet xs = sample_fourier_density(m, eps, pairs, rx);
  const PointSet ys = sample_fourier_density(m, eps, pairs, ry);
  const SteinKernel<double> k = LangevinKernel<double>{BaseKernelSpec<double>::periodic_fourier(beta), ZeroScore{1}};
  double mean = 0, m2 = 0;
  for (Eigen::Index i = 0; i < pairs; ++i) {
    const double v = stein_eval(k, xs.row(i).transpose(), ys.row(i).transpose());
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  const double se = std::sqrt(m2 / (pairs - 1) / pairs);
  const double z = std::abs(mean - population) / se;
  record(r, z <= 3.0,
         "MC E K0(X,Y) over 1e5 pairs=" + fmt(mean) + " se=" + fmt(se) + " population=" + fmt(population) +
             " |z|=" + fmt(z) + " (limit 3)");
  return r;
}

SuiteResult suite_eigen_decay(std::uint64_t seed) {
  SuiteResult r{"eigen_decay", true, {}};
  constexpr Eigen::Index n = 2000;
  Rng rng(seed, Stream::Data, 41);
  const PointSet x = sample_fourier_density(1, 0.0, n, rng);
  const SteinKernel<double> k = LangevinKernel<double>{BaseKernelSpec<double>::periodic_fourier(4.0), ZeroScore{1}};
  const Eigen::MatrixXd g = stein_gram(k, x) / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(g, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd vals = solver.eigenvalues().reverse();
  // Least-squares slope of log lambda_r on log r, r = 2..20.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (int rank = 2; rank <= 20; ++rank) {
    const double lx = std::log(static_cast<double>(rank)), ly = std::log(vals(rank - 1));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++count;
  }
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  record(r, std::abs(slope + 2) <= 0.3,
         "n=2000 beta=4 ranks 2-20: log-log slope=" + fmt(slope) + " (target -2 +- 0.3); top eigenvalue=" +
             fmt(vals(0)) + " population=" + fmt(4 * std::numbers::pi * std::numbers::pi));
  return r;
}

const std::map<std::string, std::function<SuiteResult(std::uint64_t)>>& registry() {
  static const std::map<std::string, std::function<SuiteResult(std::uint64_t)>> suites{
      {"stein_identity", suite_stein_identity}, {"mehler", suite_mehler},
      {"tikhonov_path", suite_tikhonov_path},   {"bootstrap_exhaustive", suite_bootstrap_exhaustive},
      {"fourier_ksd_mc", suite_fourier_ksd_mc},             {"eigen_decay", suite_eigen_decay},
  };
  return suites;
}

}  // namespace

const std::vector<std::string>& oracle_suite_names() {
  static const std::vector<std::string> names{"stein_identity", "mehler",   "tikhonov_path",
                                              "bootstrap_exhaustive", "fourier_ksd_mc", "eigen_decay"};
  return names;
}

SuiteResult run_oracle_suite(const std::string& name, std::uint64_t seed) {
  const auto it = registry().find(name);
  if (it == registry().end()) throw std::invalid_argument("unknown oracle suite: " + name);
  return it->second(seed);
}

std::vector<SuiteResult> run_oracle_suites(const std::string& selector, std::uint64_t seed) {
  std::vector<std::string> names;
  if (selector.empty() || selector == "all") {
    names = oracle_suite_names();
  } else {
    std::stringstream ss(selector);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) names.push_back(item);
  }
  for (const auto& n : names)
    if (!registry().count(n)) throw std::invalid_argument("unknown oracle suite: " + n);
  std::vector<SuiteResult> out;
  for (const auto& n : names) out.push_back(run_oracle_suite(n, seed));
  return out;
}

}  // namespace steinlab
