#include "steinlab/spectral_oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace steinlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPiSq = 4.0 * kPi * kPi;

}  // namespace

AnalyticEigensystem AnalyticEigensystem::fourier_stein(double beta) {
  if (!(beta > 2)) throw std::invalid_argument("Fourier Stein eigensystem requires beta > 2");
  AnalyticEigensystem e;
  e.family_ = EigenFamily::FourierStein;
  e.beta_ = beta;
  return e;
}

AnalyticEigensystem AnalyticEigensystem::mehler_stein(double rho) {
  if (!(rho > 0 && rho < 1)) throw std::invalid_argument("Mehler Stein eigensystem requires 0 < rho < 1");
  AnalyticEigensystem e;
  e.family_ = EigenFamily::MehlerStein;
  e.rho_ = rho;
  return e;
}

AnalyticEigensystem AnalyticEigensystem::sphere_harmonic(const SphereHarmonicKernel<double>& kernel) {
  AnalyticEigensystem e;
  e.family_ = EigenFamily::SphereHarmonic;
  e.sphere_ = kernel;
  return e;
}

void AnalyticEigensystem::check_index(int k, int j) const {
  if (k < 1) throw std::invalid_argument("eigen index k must be >= 1 (no constant component)");
  if (family_ == EigenFamily::SphereHarmonic && k > sphere_.kmax())
    throw std::invalid_argument("eigen index beyond the sphere kernel truncation");
  if (j < 0 || j >= multiplicity(k)) throw std::invalid_argument("eigen index j out of range");
}

double AnalyticEigensystem::eigenvalue(int k) const {
  check_index(k, 0);
  switch (family_) {
    case EigenFamily::FourierStein: return kTwoPiSq * std::pow(static_cast<double>(k), -(beta_ - 2));
    case EigenFamily::MehlerStein: return k * std::pow(rho_, k - 1);
    case EigenFamily::SphereHarmonic: return sphere_.eigenvalue(k) / (4 * kPi);
  }
  return 0;
}

int AnalyticEigensystem::multiplicity(int k) const {
  switch (family_) {
    case EigenFamily::FourierStein: return 2;
    case EigenFamily::MehlerStein: return 1;
    case EigenFamily::SphereHarmonic: return 2 * k + 1;
  }
  return 0;
}

double AnalyticEigensystem::eigenfunction(int k, int j, const Eigen::VectorXd& x) const {
  check_index(k, j);
  switch (family_) {
    case EigenFamily::FourierStein: {
      if (x.size() != 1) throw std::invalid_argument("Fourier eigenfunctions take scalar input");
      const double arg = 2 * kPi * k * x(0);
      return std::numbers::sqrt2 * (j == 0 ? std::cos(arg) : std::sin(arg));
    }
    case EigenFamily::MehlerStein: {
      if (x.size() != 1) throw std::invalid_argument("Hermite eigenfunctions take scalar input");
      // Normalized probabilists' recurrence.
      double g_prev = 1, g = x(0);
      for (int i = 1; i < k; ++i) {
        const double next = (x(0) * g - std::sqrt(static_cast<double>(i)) * g_prev) / std::sqrt(i + 1.0);
        g_prev = g;
        g = next;
      }
      return g;
    }
    case EigenFamily::SphereHarmonic: {
      if (x.size() != 3) throw std::invalid_argument("sphere eigenfunctions take points in R^3");
      detail::check_on_sphere(x);
      const double theta = std::acos(std::clamp(x(2), -1.0, 1.0));
      const double phi = std::atan2(x(1), x(0));
      const int m = j - k;
      const double y = std::sph_legendre(static_cast<unsigned>(k), static_cast<unsigned>(std::abs(m)), theta);
      const double root4pi = std::sqrt(4 * kPi);
      if (m == 0) return root4pi * y;
      const double ang = m > 0 ? std::cos(m * phi) : std::sin(-m * phi);
      return root4pi * std::numbers::sqrt2 * y * ang;
    }
  }
  return 0;
}

std::vector<double> AnalyticEigensystem::spectrum(int kmax) const {
  std::vector<double> out;
  for (int k = 1; k <= kmax; ++k) {
    const double l = eigenvalue(k);
    out.insert(out.end(), static_cast<std::size_t>(multiplicity(k)), l);
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

double population_ksd(const AnalyticEigensystem& eig, const std::vector<SpectralCoefficient>& coeffs) {
  double sum = 0;
  for (const auto& c : coeffs) {
    if (c.k < 1 || c.j < 0 || c.j >= eig.multiplicity(c.k))
      throw std::invalid_argument("coefficient on an index with no eigenvalue");
    if (!std::isfinite(c.value)) throw std::invalid_argument("non-finite spectral coefficient");
    sum += eig.eigenvalue(c.k) * c.value * c.value;
  }
  return sum;
}

SeriesValue fourier_stein_kernel_eval(double beta, double x, double y, int kmax) {
  if (!(beta > 2)) throw std::invalid_argument("Fourier Stein kernel requires beta > 2");
  if (kmax < 1) throw std::invalid_argument("kmax must be >= 1");
  if (x < 0 || x > 1 || y < 0 || y > 1) throw std::invalid_argument("Fourier Stein kernel is defined on [0, 1]");
  SeriesValue out;
  const double d = x - y;
  for (int k = kmax; k >= 1; --k)  // small terms first
    out.value += std::pow(static_cast<double>(k), -(beta - 2)) * std::cos(2 * kPi * k * d);
  out.value *= 2 * kTwoPiSq;
  out.slow_convergence = beta <= 3;
  out.tail_bound = out.slow_convergence
                       ? std::numeric_limits<double>::infinity()
                       : 2 * kTwoPiSq * std::pow(static_cast<double>(kmax), 3 - beta) / (beta - 3);
  return out;
}

double mehler_stein_series(double rho, double x, double y, int kmax) {
  if (!(rho > 0 && rho < 1)) throw std::invalid_argument("Mehler series requires 0 < rho < 1");
  if (kmax < 1) throw std::invalid_argument("kmax must be >= 1");
  constexpr double kBig = 1e100;
  const double log_big = std::log(kBig);
  // gamma_k = g * exp(scale); the pair (g_prev, g) shares the scale.
  double gx_prev = 1, gx = x, sx = 0;
  double gy_prev = 1, gy = y, sy = 0;
  const double log_rho = std::log(rho);
  double sum = 0;
  for (int k = 1; k <= kmax; ++k) {
    if (k > 1) {
      const double a = std::sqrt(k - 1.0), b = std::sqrt(static_cast<double>(k));
      double nx = (x * gx - a * gx_prev) / b;
      double ny = (y * gy - a * gy_prev) / b;
      gx_prev = gx;
      gx = nx;
      gy_prev = gy;
      gy = ny;
      if (std::abs(gx) > kBig) { gx /= kBig; gx_prev /= kBig; sx += log_big; }
      if (std::abs(gy) > kBig) { gy /= kBig; gy_prev /= kBig; sy += log_big; }
    }
    const double prod = gx * gy;
    if (prod == 0) continue;
    const double log_w = std::log(static_cast<double>(k)) + (k - 1) * log_rho + sx + sy;
    sum += (sx + sy == 0) ? k * std::pow(rho, k - 1) * prod
                          : std::copysign(std::exp(log_w + std::log(std::abs(prod))), prod);
  }
  return sum;
}

double tikhonov_oracle_statistic(const Eigen::MatrixXd& kx, const Eigen::MatrixXd& kxz,
                                 const Eigen::MatrixXd& kz, double lambda) {
  if (!(lambda > 0)) throw std::invalid_argument("lambda must be positive");
  const Eigen::Index n1 = kx.rows(), n2 = kz.rows();
  if (kx.cols() != n1 || kz.cols() != n2 || kxz.rows() != n1 || kxz.cols() != n2)
    throw std::invalid_argument("tikhonov_oracle_statistic: shape mismatch");
  if (n1 < 2) throw std::invalid_argument("tikhonov_oracle_statistic: n1 must be at least 2");
  Eigen::MatrixXd a = kz / static_cast<double>(n2);
  a.diagonal().array() += lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw std::runtime_error("regularized covariance block is not positive definite");
  const Eigen::MatrixXd solved = llt.solve(kxz.transpose());
  const Eigen::MatrixXd m = (kx - kxz * solved / static_cast<double>(n2)) / lambda;
  double off = 0;
  for (Eigen::Index i = 0; i < n1; ++i)
    for (Eigen::Index j = 0; j < n1; ++j)
      if (i != j) off += 0.5 * (m(i, j) + m(j, i));
  return off / (static_cast<double>(n1) * static_cast<double>(n1 - 1));
}

EffectiveDims effective_dims(const std::vector<double>& eigenvalues, double lambda) {
  if (!(lambda > 0)) throw std::invalid_argument("lambda must be positive");
  EffectiveDims d;
  double sq = 0;
  for (double l : eigenvalues) {
    if (l < 0) throw std::invalid_argument("eigenvalues must be nonnegative");
    const double r = l / (l + lambda);
    d.n1 += r;
    sq += r * r;
  }
  d.n2 = std::sqrt(sq);
  return d;
}

void RateParams::validate() const {
  if (!(theta_tilde() > 0)) throw std::invalid_argument("smoothness theta must be positive");
  if (decay == DecayKind::Polynomial && !(beta > 1))
    throw std::invalid_argument("polynomial decay requires beta > 1");
  if (decay == DecayKind::Exponential && !(tau > 0))
    throw std::invalid_argument("exponential decay requires tau > 0");
}

RateResult separation_rate(const RateParams& params, double n) {
  params.validate();
  if (!(n > 1)) throw std::invalid_argument("separation_rate requires n > 1");
  const double t = params.theta_tilde(), b = params.beta;
  RateResult r;
  auto set = [&](double log_power, double n_power, std::string regime) {
    r.log_power = log_power;
    r.n_power = n_power;
    r.regime = std::move(regime);
  };
  const double fast = 4 * t * b / (4 * t * b + 1);
  if (params.decay == DecayKind::Polynomial) {
    if (params.bounded_eigenfunctions) {
      if (t >= 1 / (2 * b)) set(0, fast, "poly-bounded: n^(-4tb/(4tb+1))");
      else if (t >= 0.5 - 1 / (2 * b)) set(0, 4 * t * b / (2 * t * b + b + 1), "poly-bounded: n^(-4tb/(2tb+b+1))");
      else set(2 * t, 2 * t, "poly-bounded: (log n/n)^(2t)");
    } else if (b >= 1.5) {
      if (t > 2.0 / 3.0) set(0, fast, "poly: n^(-4tb/(4tb+1))");
      else if (t >= 1 / (4 * b) + 0.5) {
        const double e = 4 * t * b / (1 + 4 * b - 2 * t * b);
        set(e, e, "poly: (log n/n)^(4tb/(1+4b-2tb))");
      } else set(0, t, "poly: n^(-t)");
    } else {
      if (t > 0.5 + 1 / (4 * b)) set(0, fast, "poly: n^(-4tb/(4tb+1))");
      else if (t >= 1 - 1 / (2 * b)) {
        const double e = 2 * t * b / (b + 1);
        set(e, e, "poly: (log n/n)^(2tb/(b+1))");
      } else set(0, t, "poly: n^(-t)");
    }
  } else {
    if (params.bounded_eigenfunctions) set(0.5, 1, "exp-bounded: sqrt(log n)/n");
    else if (t > 2.0 / 3.0) set(0.5, 1, "exp: sqrt(log n)/n");
    else if (t >= 0.5) {
      const double e = 2 * t / (2 - t);
      set(2 * e, e, "exp: ((log n)^2/n)^(2t/(2-t))");
    } else set(0, t, "exp: n^(-t)");
  }
  r.value = std::pow(std::log(n), r.log_power) * std::pow(n, -r.n_power);
  return r;
}

namespace {

/// Nodes and weights from the symmetric Jacobi matrix with off-diagonals `off`.
Quadrature golub_welsch(const Eigen::VectorXd& off, double mu0) {
  const Eigen::Index n = off.size() + 1;
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) j(i, i + 1) = j(i + 1, i) = off(i);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(j);
  Quadrature q;
  q.nodes = solver.eigenvalues();
  q.weights = mu0 * solver.eigenvectors().row(0).transpose().array().square();
  return q;
}

}  // namespace

Quadrature gauss_legendre(int points, double a, double b) {
  if (points < 1) throw std::invalid_argument("quadrature needs at least one point");
  Eigen::VectorXd off(points - 1);
  for (int i = 1; i < points; ++i) off(i - 1) = i / std::sqrt(4.0 * i * i - 1.0);
  Quadrature q = golub_welsch(off, 2.0);
  q.nodes = (0.5 * (b - a)) * (q.nodes.array() + 1.0) + a;
  q.weights *= 0.5 * (b - a);
  return q;
}

Quadrature gauss_hermite(int points) {
  if (points < 1) throw std::invalid_argument("quadrature needs at least one point");
  Eigen::VectorXd off(points - 1);
  for (int i = 1; i < points; ++i) off(i - 1) = std::sqrt(static_cast<double>(i));
  return golub_welsch(off, 1.0);
}

}  // namespace steinlab
