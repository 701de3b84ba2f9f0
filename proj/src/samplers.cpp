#include "steinlab/samplers.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace steinlab {

namespace {

void check_count(Eigen::Index n) {
  if (n < 0) throw std::invalid_argument("sample count must be nonnegative");
}

double sigmoid(double t) {
  return t >= 0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
}

}  // namespace

PointSet sample_standard_gaussian(Eigen::Index d, Eigen::Index n, Rng& rng) {
  if (d <= 0) throw std::invalid_argument("dimension must be positive");
  check_count(n);
  PointSet out(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) out(i, j) = rng.normal();
  return out;
}

void RbmParams::validate() const {
  if (b.size() < 1 || c.size() < 1) throw std::invalid_argument("RBM needs d >= 1 and d_h >= 1");
  if (B.rows() != b.size() || B.cols() != c.size())
    throw std::invalid_argument("RBM parameters are dimensionally inconsistent");
  if (!b.allFinite() || !c.allFinite() || !B.allFinite())
    throw std::invalid_argument("RBM parameters must be finite");
}

RbmParams draw_rbm_params(Eigen::Index d, Eigen::Index d_h, Rng& rng) {
  if (d < 1 || d_h < 1) throw std::invalid_argument("RBM needs d >= 1 and d_h >= 1");
  RbmParams p;
  p.b.resize(d);
  p.c.resize(d_h);
  p.B.resize(d, d_h);
  for (Eigen::Index i = 0; i < d; ++i) p.b(i) = rng.normal();
  for (Eigen::Index j = 0; j < d_h; ++j) p.c(j) = rng.normal();
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d_h; ++j) p.B(i, j) = rng.sign();
  return p;
}

RbmParams perturb_rbm(const RbmParams& params, double sigma, Rng& rng) {
  params.validate();
  if (!(sigma >= 0)) throw std::invalid_argument("perturbation sigma must be nonnegative");
  RbmParams out = params;
  if (sigma == 0) return out;
  for (Eigen::Index i = 0; i < out.B.rows(); ++i)
    for (Eigen::Index j = 0; j < out.B.cols(); ++j) out.B(i, j) += sigma * rng.normal();
  return out;
}

PointSet sample_rbm_gibbs(const RbmParams& params, Eigen::Index n, Rng& rng,
                          const GibbsOptions& options) {
  params.validate();
  if (n < 1) throw std::invalid_argument("Gibbs sampler needs n >= 1");
  if (options.burn_in < 0 || options.thin < 1 || options.chains < 0)
    throw std::invalid_argument("Gibbs options need burn_in >= 0, thin >= 1, chains >= 0");
  const Eigen::Index d = params.dim(), dh = params.hidden_dim();
  const Eigen::Index chains = options.chains == 0 ? n : std::min(options.chains, n);
  PointSet out(n, d);
  Eigen::VectorXd x(d), h(dh);
  auto sweep = [&] {
    x = params.b + 0.5 * (params.B * h);
    for (Eigen::Index i = 0; i < d; ++i) x(i) += rng.normal();
    const Eigen::VectorXd act = params.B.transpose() * x + 2.0 * params.c;
    for (Eigen::Index j = 0; j < dh; ++j) h(j) = rng.uniform() < sigmoid(act(j)) ? 1.0 : -1.0;
  };
  Eigen::Index row = 0;
  for (Eigen::Index chain = 0; chain < chains; ++chain) {
    // Draws n / chains per chain, the first n % chains chains take one extra.
    const Eigen::Index draws = n / chains + (chain < n % chains ? 1 : 0);
    for (Eigen::Index j = 0; j < dh; ++j) h(j) = rng.sign();
    for (int s = 0; s < options.burn_in; ++s) sweep();
    for (Eigen::Index k = 0; k < draws; ++k) {
      for (int s = 0; s < options.thin; ++s) sweep();
      out.row(row++) = x.transpose();
    }
  }
  return out;
}

PointSet sample_uniform_sphere(Eigen::Index d, Eigen::Index n, Rng& rng) {
  if (d < 2) throw std::invalid_argument("sphere sampling needs d >= 2");
  check_count(n);
  PointSet out(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    double norm = 0;
    do {
      for (Eigen::Index j = 0; j < d; ++j) out(i, j) = rng.normal();
      norm = out.row(i).norm();
    } while (norm < 1e-12);
    out.row(i) /= norm;
  }
  return out;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> watson_mean_directions(Eigen::Index d) {
  if (d < 2) throw std::invalid_argument("Watson directions need d >= 2");
  Eigen::VectorXd mu1 = Eigen::VectorXd::Ones(d), mu2 = Eigen::VectorXd::Ones(d);
  mu2(0) = -1;
  return {mu1.normalized(), mu2.normalized()};
}

WatsonSample sample_watson_mixture(const Eigen::VectorXd& mu1, const Eigen::VectorXd& mu2,
                                   double k, Eigen::Index n, Rng& rng) {
  const Eigen::Index d = mu1.size();
  if (d < 2 || mu2.size() != d) throw std::invalid_argument("Watson mean directions must share dimension >= 2");
  if (!(k >= 0) || !std::isfinite(k)) throw std::invalid_argument("Watson concentration must be >= 0");
  if (mu1.norm() == 0 || mu2.norm() == 0) throw std::invalid_argument("Watson mean direction is zero");
  check_count(n);
  const Eigen::VectorXd m1 = mu1.normalized(), m2 = mu2.normalized();

  // Expected acceptance E_unif exp(k (t^2 - 1)), t = mu^T x with density
  // ∝ (1 - t^2)^((d-3)/2) on [-1, 1]; a midpoint rule in t is enough to gate
  // the sampler.
  {
    const int q = 200;
    double num = 0, den = 0;
    for (int i = 0; i < q; ++i) {
      const double t = -1 + (2.0 * i + 1) / q;
      const double w = std::pow(std::max(1 - t * t, 0.0), 0.5 * static_cast<double>(d - 3));
      num += w * std::exp(k * (t * t - 1));
      den += w;
    }
    if (num / den < 1e-4)
      throw std::invalid_argument("Watson concentration too large for rejection sampling "
                                  "(expected acceptance below 1e-4); use a dedicated sampler");
  }

  WatsonSample out;
  out.points.resize(n, d);
  out.component.resize(static_cast<std::size_t>(n));
  std::uint64_t proposals = 0;
  Eigen::VectorXd x(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int comp = rng.uniform() < 0.5 ? 0 : 1;
    const Eigen::VectorXd& mu = comp == 0 ? m1 : m2;
    while (true) {
      ++proposals;
      double norm = 0;
      do {
        for (Eigen::Index j = 0; j < d; ++j) x(j) = rng.normal();
        norm = x.norm();
      } while (norm < 1e-12);
      x /= norm;
      const double t = mu.dot(x);
      if (rng.uniform() < std::exp(k * (t * t - 1))) break;
    }
    out.points.row(i) = x.transpose();
    out.component[static_cast<std::size_t>(i)] = comp;
  }
  out.acceptance_rate = proposals == 0 ? 1.0 : static_cast<double>(n) / static_cast<double>(proposals);
  return out;
}

double fourier_density_cdf(int m, double eps, double x) {
  const double w = 2 * std::numbers::pi * m;
  // Reduce the phase first so sin vanishes exactly at the endpoints.
  const double cycles = m * x;
  return x + eps * std::numbers::sqrt2 * std::sin(2 * std::numbers::pi * (cycles - std::floor(cycles))) / w;
}

PointSet sample_fourier_density(int m, double eps, Eigen::Index n, Rng& rng) {
  if (m < 1) throw std::invalid_argument("Fourier density frequency m must be >= 1");
  if (eps * std::numbers::sqrt2 > 1 || eps * std::numbers::sqrt2 < -1)
    throw std::invalid_argument("Fourier density needs |eps| sqrt2 <= 1 to stay nonnegative");
  check_count(n);
  PointSet out(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = rng.uniform();
    double lo = 0, hi = 1;
    while (hi - lo > 1e-12) {
      const double mid = 0.5 * (lo + hi);
      (fourier_density_cdf(m, eps, mid) < u ? lo : hi) = mid;
    }
    out(i, 0) = 0.5 * (lo + hi);
  }
  return out;
}

}  // namespace steinlab
