#pragma once

#include "steinlab/samplers.hpp"
#include "steinlab/test_engine.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace steinlab {

/// Null / alternative families. The swept parameter is
///   Gaussian  mean shift of the first coordinate, N(0, I_d) null
///   Rbm       sigma of the coupling perturbation
///   Watson    concentration k, uniform S^2 null
///   Fourier   eps of the density 1 + eps sqrt2 cos(2 pi m x), uniform [0,1] null
enum class ModelFamily { Gaussian, Rbm, Watson, Fourier };

ModelFamily model_from_name(const std::string& name);
std::string to_string(ModelFamily family);

/// A member of the test menu.
///   "KSD"                       unregularized, median bandwidth
///   "KSD(<reg>)"                adaptive over lambdas x bandwidths
///   "KSD(<reg>)*"               same, covariance block from extra null samples
///   "KSD(<reg>)[lambda=<v>]"    one lambda at the median bandwidth, level alpha
struct TestVariant {
  enum class Kind { Ksd, Aggregate, NullCov, SingleLambda };
  Kind kind = Kind::Ksd;
  RegularizerSpec regularizer;
  double lambda = 0;

  std::string name() const;
};

TestVariant parse_test_variant(const std::string& name);

struct ExperimentConfig {
  ModelFamily model = ModelFamily::Gaussian;
  Eigen::Index dim = 2;
  Eigen::Index hidden_dim = 8;
  std::vector<double> params{0.0};
  Eigen::Index n = 200;
  std::optional<Eigen::Index> n2;
  /// Extra null draws for the * variants; defaults to the covariance block size.
  std::optional<Eigen::Index> null_samples;
  std::vector<std::string> tests{"KSD", "KSD(Tikhonov)"};
  std::string base_kernel = "gaussian";  // gaussian | imq (R^d models)
  TestConfig test;                       // lambdas, multipliers, alpha, bootstrap
  int repetitions = 100;
  std::uint64_t seed = 0;
  int threads = 1;
  GibbsOptions gibbs;
  int fourier_m = 3;
  double fourier_beta = 4;
  double sphere_beta = 3;
  int sphere_kmax = 100;

  void validate() const;
};

/// Desk-scale settings per family.
ExperimentConfig default_experiment(ModelFamily family);
/// The published sizes (RBM d=50, d_h=40, n=1000; 500 repetitions).
void apply_paper_scale(ExperimentConfig& config);
/// Parameter value under which the data follow the null.
double null_parameter(ModelFamily family);

struct PowerRow {
  double param = 0;
  std::string test;
  int rejections = 0;
  int reps = 0;
  double power = 0;
  double se = 0;  // sqrt(p (1 - p) / R)
};

/// One repetition's data.
struct Dataset {
  PointSet data;
  PointSet null_samples;     // for the * variants, may be empty
  SteinKernel<double> kernel;  // null model; bandwidth set per test
};

Dataset draw_dataset(const ExperimentConfig& config, std::size_t param_index, int rep);

/// Runs one test variant on a dataset.
TestReport run_variant(const TestVariant& variant, const Dataset& dataset, const TestConfig& base,
                       std::uint64_t seed);

using Progress = std::function<void(std::size_t done, std::size_t total)>;

/// R seeded repetitions per (param, test); rows sorted by (test, param).
std::vector<PowerRow> run_power(const ExperimentConfig& config, const Progress& progress = {});

/// run_power restricted to the null parameter.
std::vector<PowerRow> run_calibration(const ExperimentConfig& config, const Progress& progress = {});

}  // namespace steinlab
