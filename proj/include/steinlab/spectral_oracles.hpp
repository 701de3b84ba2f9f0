#pragma once

#include "steinlab/stein_kernels.hpp"

#include <limits>
#include <string>
#include <vector>

namespace steinlab {

// ---------------------------------------------------------------------------
// Closed-form eigensystems of Stein kernels, orthonormal in L2(P0)
// ---------------------------------------------------------------------------

enum class EigenFamily { FourierStein, MehlerStein, SphereHarmonic };

/// Eigenpairs indexed by (k, j), k >= 1, 0 <= j < multiplicity(k).
///
///   FourierStein(beta)   uniform [0,1]; (2 pi)^2 k^-(beta-2); sqrt2 cos / sqrt2 sin (j = 0, 1)
///   MehlerStein(rho)     N(0,1); k rho^(k-1); He_k / sqrt(k!)
///   SphereHarmonic       uniform S^2; lambda_k / (4 pi); sqrt(4 pi) Y_k^m, m = j - k
class AnalyticEigensystem {
 public:
  static AnalyticEigensystem fourier_stein(double beta);
  static AnalyticEigensystem mehler_stein(double rho);
  static AnalyticEigensystem sphere_harmonic(const SphereHarmonicKernel<double>& kernel);

  EigenFamily family() const { return family_; }
  double eigenvalue(int k) const;
  int multiplicity(int k) const;
  /// phi_{k,j}(x); x has size 1 (Fourier, Mehler) or 3 (sphere, unit norm).
  double eigenfunction(int k, int j, const Eigen::VectorXd& x) const;
  /// All eigenvalues with k <= kmax, repeated by multiplicity, nonincreasing.
  std::vector<double> spectrum(int kmax) const;

 private:
  AnalyticEigensystem() = default;
  void check_index(int k, int j) const;

  EigenFamily family_ = EigenFamily::FourierStein;
  double beta_ = 4;
  double rho_ = 0.5;
  SphereHarmonicKernel<double> sphere_;
};

/// <u, phi_{k,j}>_{L2(P0)}.
struct SpectralCoefficient {
  int k = 1;
  int j = 0;
  double value = 0;
};

/// sum_i lambda_i c_i^2: the population discrepancy of dP/dP0 = 1 + u.
double population_ksd(const AnalyticEigensystem& eig, const std::vector<SpectralCoefficient>& coeffs);

// ---------------------------------------------------------------------------
// Series evaluations, independent of the kernel code paths
// ---------------------------------------------------------------------------

struct SeriesValue {
  double value = 0;
  double tail_bound = 0;          // inf when the bound does not exist
  bool slow_convergence = false;  // beta <= 3
};

/// 2 (2 pi)^2 sum_{k=1}^{kmax} k^-(beta-2) cos(2 pi k (x - y)), x, y in [0, 1].
SeriesValue fourier_stein_kernel_eval(double beta, double x, double y, int kmax);

/// sum_{k=1}^{kmax} k rho^(k-1) gamma_k(x) gamma_k(y), gamma_k = He_k / sqrt(k!).
/// Accumulates on a rescaled grid so large |x| and kmax do not overflow.
double mehler_stein_series(double rho, double x, double y, int kmax);

/// Tikhonov statistic by a dense linear solve:
/// M = (K_x - K_xz (K_z/n2 + lambda I)^-1 K_xz^T / n2) / lambda.
double tikhonov_oracle_statistic(const Eigen::MatrixXd& kx, const Eigen::MatrixXd& kxz,
                                 const Eigen::MatrixXd& kz, double lambda);

struct EffectiveDims {
  double n1 = 0;  // sum l / (l + lambda)
  double n2 = 0;  // sqrt(sum (l / (l + lambda))^2)
};

EffectiveDims effective_dims(const std::vector<double>& eigenvalues, double lambda);

// ---------------------------------------------------------------------------
// Separation-rate calculator
// ---------------------------------------------------------------------------

enum class DecayKind { Polynomial, Exponential };

struct RateParams {
  double theta = 1;
  double xi = std::numeric_limits<double>::infinity();  // qualification
  double beta = 2;                                      // polynomial decay exponent
  double tau = 1;                                       // exponential decay rate
  bool bounded_eigenfunctions = false;
  DecayKind decay = DecayKind::Polynomial;

  double theta_tilde() const { return theta < xi ? theta : xi; }
  void validate() const;
};

/// B_n = (log n)^log_power * n^(-n_power).
struct RateResult {
  double log_power = 0;
  double n_power = 0;
  double value = 0;
  std::string regime;
};

RateResult separation_rate(const RateParams& params, double n);

// ---------------------------------------------------------------------------
// Quadrature (Golub-Welsch)
// ---------------------------------------------------------------------------

struct Quadrature {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

Quadrature gauss_legendre(int points, double a = 0.0, double b = 1.0);
/// Weight exp(-x^2/2)/sqrt(2 pi); weights sum to one.
Quadrature gauss_hermite(int points);

}  // namespace steinlab
