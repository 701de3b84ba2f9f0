#pragma once

#include "steinlab/base_kernels.hpp"
#include "steinlab/rng.hpp"

#include <cmath>
#include <concepts>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <variant>

namespace steinlab {

// ---------------------------------------------------------------------------
// Score models: nabla log p0
// ---------------------------------------------------------------------------

/// N(0, I_d); score -x.
struct StandardGaussianScore {
  Eigen::Index dim = 1;
};

/// Gaussian-Bernoulli RBM with joint
///   f(x, h) ∝ exp(x^T B h / 2 + b^T x + c^T h - |x|^2 / 2),  h in {-1, 1}^{d_h}.
/// Summing out h gives the score b - x + (1/2) B tanh(B^T x / 2 + c).
template <typename Scalar = double>
struct RbmScore {
  Vector<Scalar> b;
  Vector<Scalar> c;
  Matrix<Scalar> B;

  Eigen::Index dim() const { return b.size(); }
  Eigen::Index hidden_dim() const { return c.size(); }
  void validate() const {
    if (B.rows() != b.size() || B.cols() != c.size())
      throw std::invalid_argument("RBM parameters are dimensionally inconsistent");
  }
};

/// Score identically zero: the uniform null on [0, 1] paired with a periodic
/// base kernel, so that K0 = d/dx d/dy K.
struct ZeroScore {
  Eigen::Index dim = 1;
};

template <typename Scalar = double>
using ScoreModel = std::variant<StandardGaussianScore, RbmScore<Scalar>, ZeroScore>;

template <typename Scalar>
Eigen::Index score_dim(const ScoreModel<Scalar>& model) {
  return std::visit(
      [](const auto& m) -> Eigen::Index {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, RbmScore<Scalar>>) return m.dim();
        else return m.dim;
      },
      model);
}

template <typename Scalar, typename Derived>
Vector<Scalar> score_eval(const ScoreModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != score_dim(model)) throw std::invalid_argument("score: dimension mismatch");
  return std::visit(
      [&](const auto& m) -> Vector<Scalar> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, StandardGaussianScore>) {
          return -x;
        } else if constexpr (std::is_same_v<T, ZeroScore>) {
          return Vector<Scalar>::Zero(x.size());
        } else {
          m.validate();
          const Vector<Scalar> xv = x;
          const Vector<Scalar> act =
              (Scalar(0.5) * (m.B.transpose() * xv) + m.c).array().tanh().matrix();
          return m.b - xv + Scalar(0.5) * (m.B * act);
        }
      },
      model);
}

/// Scores of every row of a point set (rows of the result).
template <typename Scalar, typename Derived>
Matrix<Scalar> score_rows(const ScoreModel<Scalar>& model, const Eigen::MatrixBase<Derived>& pts) {
  Matrix<Scalar> out(pts.rows(), pts.cols());
  for (Eigen::Index i = 0; i < pts.rows(); ++i) out.row(i) = score_eval(model, pts.row(i)).transpose();
  return out;
}

// ---------------------------------------------------------------------------
// Stein kernels
// ---------------------------------------------------------------------------

/// Langevin-Stein kernel on R^d:
///   K0(x,y) = s(x)^T s(y) K + s(y)^T grad_x K + s(x)^T grad_y K + Tr(grad_x grad_y K).
template <typename Scalar = double>
struct LangevinKernel {
  BaseKernelSpec<Scalar> base;
  ScoreModel<Scalar> score;
};

enum class SpectrumDecay { Polynomial, Exponential };

/// Spectral Stein kernel for the uniform distribution on S^2,
///   K0(x,y) = sum_{k=1}^{kmax} lambda_k (2k+1)/(4 pi) P_k(<x,y>),
/// the addition-theorem form of sum_k sum_j lambda_k Y_k^j(x) Y_k^j(y).
template <typename Scalar = double>
class SphereHarmonicKernel {
 public:
  SphereHarmonicKernel() : SphereHarmonicKernel(SpectrumDecay::Polynomial, Scalar(3), 100) {}
  SphereHarmonicKernel(SpectrumDecay decay, Scalar rate, int kmax)
      : decay_(decay), rate_(rate), kmax_(kmax) {
    if (kmax < 1) throw std::invalid_argument("sphere kernel requires kmax >= 1");
    if (decay == SpectrumDecay::Polynomial && !(rate > Scalar(2)))
      throw std::invalid_argument("polynomial sphere spectrum requires beta > 2");
    if (decay == SpectrumDecay::Exponential && !(rate > Scalar(0)))
      throw std::invalid_argument("exponential sphere spectrum requires tau > 0");
    coeffs_.resize(kmax + 1);
    coeffs_(0) = 0;
    for (int k = 1; k <= kmax; ++k)
      coeffs_(k) = eigenvalue(k) * Scalar(2 * k + 1) / (Scalar(4) * std::numbers::pi_v<Scalar>);
  }

  static SphereHarmonicKernel polynomial(Scalar beta, int kmax = 100) {
    return {SpectrumDecay::Polynomial, beta, kmax};
  }
  static SphereHarmonicKernel exponential(Scalar tau, int kmax = 100) {
    return {SpectrumDecay::Exponential, tau, kmax};
  }

  SpectrumDecay decay() const { return decay_; }
  Scalar rate() const { return rate_; }
  int kmax() const { return kmax_; }

  /// lambda_k (multiplicity 2k+1).
  Scalar eigenvalue(int k) const {
    return decay_ == SpectrumDecay::Polynomial ? std::pow(static_cast<Scalar>(k), -rate_)
                                               : std::exp(-rate_ * static_cast<Scalar>(k));
  }

  /// Bound on the dropped tail sum_{k>kmax} lambda_k (2k+1) / (4 pi), which
  /// dominates the truncation error because |P_k| <= 1 on [-1, 1].
  Scalar tail_bound() const {
    const Scalar K = static_cast<Scalar>(kmax_), four_pi = Scalar(4) * std::numbers::pi_v<Scalar>;
    if (decay_ == SpectrumDecay::Polynomial) {
      // sum_{k>K} (2k+1) k^-b <= int_K^inf (2t+1) t^-b dt (integrand decreasing for b > 2).
      const Scalar b = rate_;
      return (Scalar(2) * std::pow(K, Scalar(2) - b) / (b - Scalar(2)) +
              std::pow(K, Scalar(1) - b) / (b - Scalar(1))) /
             four_pi;
    }
    // Geometric tail of (2k+1) q^k, bounded by sum_{k>K} (2k+1) q^k exactly.
    const Scalar q = std::exp(-rate_);
    const Scalar qk = std::pow(q, K + 1);
    const Scalar s0 = qk / (Scalar(1) - q);
    const Scalar s1 = qk * ((K + 1) - K * q) / ((Scalar(1) - q) * (Scalar(1) - q));
    return (Scalar(2) * s1 + s0) / four_pi;
  }

  /// Evaluate at t = <x, y> with the Legendre three-term recurrence.
  Scalar eval_cosine(Scalar t) const {
    Scalar p_prev(1), p_curr = t, sum = coeffs_(1) * t;
    for (int k = 1; k < kmax_; ++k) {
      const Scalar p_next = (Scalar(2 * k + 1) * t * p_curr - Scalar(k) * p_prev) / Scalar(k + 1);
      p_prev = p_curr;
      p_curr = p_next;
      sum += coeffs_(k + 1) * p_curr;
    }
    return sum;
  }

 private:
  SpectrumDecay decay_;
  Scalar rate_;
  int kmax_;
  Vector<Scalar> coeffs_;
};

template <typename Scalar = double>
using SteinKernel = std::variant<LangevinKernel<Scalar>, SphereHarmonicKernel<Scalar>>;

/// Langevin-Stein kernel from precomputed scores.
template <typename Scalar, typename DX, typename SX, typename DY, typename SY>
Scalar langevin_stein_eval(const BaseKernelSpec<Scalar>& base, const Eigen::MatrixBase<DX>& x,
                           const Eigen::MatrixBase<SX>& sx, const Eigen::MatrixBase<DY>& y,
                           const Eigen::MatrixBase<SY>& sy) {
  const KernelDerivatives<Scalar> kd = kernel_derivatives(base, x, y);
  // The cross terms are grouped so that swapping x and y only commutes one addition.
  const Scalar cross = sy.dot(kd.grad_x.transpose()) + sx.dot(kd.grad_y.transpose());
  return sx.dot(sy) * kd.value + cross + kd.trace_xy;
}

template <typename Scalar, typename DX, typename DY>
Scalar langevin_stein_eval(const LangevinKernel<Scalar>& kernel, const Eigen::MatrixBase<DX>& x,
                           const Eigen::MatrixBase<DY>& y) {
  const Vector<Scalar> sx = score_eval(kernel.score, x);
  const Vector<Scalar> sy = score_eval(kernel.score, y);
  return langevin_stein_eval(kernel.base, x, sx.transpose(), y, sy.transpose());
}

namespace detail {
template <typename Derived>
void check_on_sphere(const Eigen::MatrixBase<Derived>& x) {
  using std::abs;
  if (x.size() != 3) throw std::invalid_argument("sphere kernel expects points in R^3");
  if (abs(x.norm() - 1) > 1e-8) throw std::invalid_argument("sphere kernel: point is off S^2");
}
}  // namespace detail

template <typename Scalar, typename DX, typename DY>
Scalar sphere_stein_eval(const SphereHarmonicKernel<Scalar>& kernel, const Eigen::MatrixBase<DX>& x,
                         const Eigen::MatrixBase<DY>& y) {
  detail::check_on_sphere(x);
  detail::check_on_sphere(y);
  using std::clamp;
  return kernel.eval_cosine(clamp<Scalar>(x.dot(y), Scalar(-1), Scalar(1)));
}

template <typename Scalar, typename DX, typename DY>
Scalar stein_eval(const SteinKernel<Scalar>& kernel, const Eigen::MatrixBase<DX>& x,
                  const Eigen::MatrixBase<DY>& y) {
  return std::visit(
      [&](const auto& k) -> Scalar {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, LangevinKernel<Scalar>>) return langevin_stein_eval(k, x, y);
        else return sphere_stein_eval(k, x, y);
      },
      kernel);
}

template <typename Scalar>
bool has_bandwidth(const SteinKernel<Scalar>& kernel) {
  const auto* lk = std::get_if<LangevinKernel<Scalar>>(&kernel);
  return lk != nullptr && lk->base.has_bandwidth();
}

/// Copy of the kernel with base bandwidth h; bandwidth-free kernels are returned as-is.
template <typename Scalar>
SteinKernel<Scalar> with_bandwidth(const SteinKernel<Scalar>& kernel, Scalar h) {
  if (!has_bandwidth(kernel)) return kernel;
  LangevinKernel<Scalar> lk = std::get<LangevinKernel<Scalar>>(kernel);
  lk.base = lk.base.with_bandwidth(h);
  return lk;
}

/// Point dimension the kernel expects (3 for the sphere).
template <typename Scalar>
Eigen::Index stein_dim(const SteinKernel<Scalar>& kernel) {
  if (const auto* lk = std::get_if<LangevinKernel<Scalar>>(&kernel)) return score_dim(lk->score);
  return 3;
}

/// Stein Gram matrix [K0(A_i, B_j)]. Scores are evaluated once per point.
template <typename Scalar, typename DA, typename DB>
Matrix<Scalar> stein_gram(const SteinKernel<Scalar>& kernel, const Eigen::MatrixBase<DA>& a,
                          const Eigen::MatrixBase<DB>& b) {
  if (a.cols() != b.cols() || a.cols() != stein_dim(kernel))
    throw std::invalid_argument("stein_gram: dimension mismatch");
  Matrix<Scalar> out(a.rows(), b.rows());
  if (const auto* lk = std::get_if<LangevinKernel<Scalar>>(&kernel)) {
    const Matrix<Scalar> sa = score_rows(lk->score, a), sb = score_rows(lk->score, b);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < b.rows(); ++j)
        out(i, j) = langevin_stein_eval(lk->base, a.row(i), sa.row(i), b.row(j), sb.row(j));
  } else {
    const auto& sk = std::get<SphereHarmonicKernel<Scalar>>(kernel);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < b.rows(); ++j) out(i, j) = sphere_stein_eval(sk, a.row(i), b.row(j));
  }
  return out;
}

template <typename Scalar, typename DA>
Matrix<Scalar> stein_gram(const SteinKernel<Scalar>& kernel, const Eigen::MatrixBase<DA>& a) {
  if (a.cols() != stein_dim(kernel)) throw std::invalid_argument("stein_gram: dimension mismatch");
  const Eigen::Index n = a.rows();
  Matrix<Scalar> out(n, n);
  if (const auto* lk = std::get_if<LangevinKernel<Scalar>>(&kernel)) {
    const Matrix<Scalar> s = score_rows(lk->score, a);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i; j < n; ++j)
        out(i, j) = out(j, i) = langevin_stein_eval(lk->base, a.row(i), s.row(i), a.row(j), s.row(j));
  } else {
    const auto& sk = std::get<SphereHarmonicKernel<Scalar>>(kernel);
    for (Eigen::Index i = 0; i < n; ++i) detail::check_on_sphere(a.row(i));
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i; j < n; ++j) {
        using std::clamp;
        out(i, j) = out(j, i) =
            sk.eval_cosine(clamp<Scalar>(a.row(i).dot(a.row(j)), Scalar(-1), Scalar(1)));
      }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stein identity diagnostic
// ---------------------------------------------------------------------------

struct MonteCarloEstimate {
  double mean = 0;
  double std_error = 0;
};

/// Draws m points from the null through `sampler(m, rng)`.
using NullSampler = std::function<PointSet(Eigen::Index, Rng&)>;

/// Monte Carlo estimate of E_{P0} k(x, Y) for an arbitrary two-point kernel.
template <typename KernelFn>
  requires std::invocable<KernelFn&, const Eigen::VectorXd&, const Eigen::VectorXd&>
MonteCarloEstimate stein_identity_residual(KernelFn&& kernel, const NullSampler& sampler,
                                           const Eigen::VectorXd& x, Eigen::Index m,
                                           std::uint64_t seed) {
  if (m < 100) throw std::invalid_argument("stein_identity_residual requires m >= 100");
  Rng rng(derive_seed(seed, Stream::Probe, 0));
  const PointSet ys = sampler(m, rng);
  if (ys.rows() != m || ys.cols() != x.size())
    throw std::invalid_argument("stein_identity_residual: sampler output does not match the probe point");
  double mean = 0, m2 = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double v = kernel(x, ys.row(i).transpose());
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  const double var = m2 / static_cast<double>(m - 1);
  return {mean, std::sqrt(var / static_cast<double>(m))};
}

inline MonteCarloEstimate stein_identity_residual(const SteinKernel<double>& kernel,
                                                  const NullSampler& sampler,
                                                  const Eigen::VectorXd& x, Eigen::Index m,
                                                  std::uint64_t seed) {
  if (x.size() != stein_dim(kernel))
    throw std::invalid_argument("stein_identity_residual: probe dimension does not match the kernel");
  return stein_identity_residual(
      [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return stein_eval(kernel, a, b); },
      sampler, x, m, seed);
}

}  // namespace steinlab
