#pragma once

#include "steinlab/base_kernels.hpp"
#include "steinlab/rng.hpp"
#include "steinlab/stein_kernels.hpp"

namespace steinlab {

/// n i.i.d. rows from N(0, I_d).
PointSet sample_standard_gaussian(Eigen::Index d, Eigen::Index n, Rng& rng);

// ---------------------------------------------------------------------------
// Gaussian-Bernoulli RBM
// ---------------------------------------------------------------------------

struct RbmParams {
  Eigen::VectorXd b;  // visible bias, R^d
  Eigen::VectorXd c;  // hidden bias, R^{d_h}
  Eigen::MatrixXd B;  // d x d_h coupling

  Eigen::Index dim() const { return b.size(); }
  Eigen::Index hidden_dim() const { return c.size(); }
  void validate() const;
  /// Score model of the visible marginal.
  RbmScore<double> score() const { return {b, c, B}; }
};

/// b, c ~ N(0, I); entries of B uniform on {-1, +1}.
RbmParams draw_rbm_params(Eigen::Index d, Eigen::Index d_h, Rng& rng);

/// B' = B + N(0, sigma^2) noise per entry; b and c unchanged.
RbmParams perturb_rbm(const RbmParams& params, double sigma, Rng& rng);

struct GibbsOptions {
  int burn_in = 100;
  int thin = 10;
  /// Independent chains the n draws are spread over; 0 means one chain per draw.
  Eigen::Index chains = 0;
};

/// Block Gibbs on the joint exp(x^T B h / 2 + b^T x + c^T h - |x|^2 / 2):
///   x | h ~ N(b + B h / 2, I),   P(h_j = +1 | x) = sigmoid((B^T x)_j + 2 c_j).
/// Each chain starts from h uniform on {-1,1}^{d_h}, discards burn_in sweeps,
/// then keeps every thin-th visible state.
PointSet sample_rbm_gibbs(const RbmParams& params, Eigen::Index n, Rng& rng,
                          const GibbsOptions& options = {});

// ---------------------------------------------------------------------------
// Sphere
// ---------------------------------------------------------------------------

/// Normalized standard Gaussians; d >= 2.
PointSet sample_uniform_sphere(Eigen::Index d, Eigen::Index n, Rng& rng);

struct WatsonSample {
  PointSet points;
  double acceptance_rate = 0;
  std::vector<int> component;  // 0 or 1 per row
};

/// Equal mixture of Watson(mu1, k) and Watson(mu2, k) on S^{d-1}, density
/// ∝ exp(k (mu^T x)^2), by rejection from the uniform proposal with envelope e^k.
WatsonSample sample_watson_mixture(const Eigen::VectorXd& mu1, const Eigen::VectorXd& mu2,
                                   double k, Eigen::Index n, Rng& rng);

/// mu1 = (1,...,1)/sqrt(d), mu2 = (-1,1,...,1)/sqrt(d).
std::pair<Eigen::VectorXd, Eigen::VectorXd> watson_mean_directions(Eigen::Index d);

// ---------------------------------------------------------------------------
// Perturbed uniform density on [0, 1]
// ---------------------------------------------------------------------------

/// Density 1 + eps sqrt2 cos(2 pi m x), by bisection on the CDF.
PointSet sample_fourier_density(int m, double eps, Eigen::Index n, Rng& rng);

/// F(x) = x + eps sqrt2 sin(2 pi m x) / (2 pi m).
double fourier_density_cdf(int m, double eps, double x);

}  // namespace steinlab
