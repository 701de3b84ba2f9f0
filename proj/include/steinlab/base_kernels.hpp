#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace steinlab {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Point sets are stored one observation per row.
using PointSet = Eigen::MatrixXd;

enum class BaseFamily { Gaussian, IMQ, Mehler, PeriodicFourier };

inline const char* to_string(BaseFamily family) {
  switch (family) {
    case BaseFamily::Gaussian: return "gaussian";
    case BaseFamily::IMQ: return "imq";
    case BaseFamily::Mehler: return "mehler";
    case BaseFamily::PeriodicFourier: return "periodic_fourier";
  }
  return "unknown";
}

/// Base reproducing kernel K.
///
///   Gaussian         exp(-|x-y|^2 / (2h))
///   IMQ              (1 + |x-y|^2 / h)^(-1/2)
///   Mehler           prod_i (1-rho^2)^(-1/2) exp(-(rho^2(x_i^2+y_i^2) - 2 rho x_i y_i) / (2(1-rho^2)))
///   PeriodicFourier  a0 + 2 sum_{k=1}^{kmax} k^(-beta) cos(2 pi k (x-y)),  one-dimensional
///
/// h lives on the squared-distance scale.
template <typename Scalar = double>
struct BaseKernelSpec {
  BaseFamily family = BaseFamily::Gaussian;
  Scalar bandwidth = Scalar(1);
  Scalar rho = Scalar(0.5);
  Scalar beta = Scalar(4);
  Scalar a0 = Scalar(0);
  int kmax = 200;

  static BaseKernelSpec gaussian(Scalar h) {
    BaseKernelSpec s;
    s.family = BaseFamily::Gaussian;
    s.bandwidth = h;
    s.validate();
    return s;
  }
  static BaseKernelSpec imq(Scalar h) {
    BaseKernelSpec s;
    s.family = BaseFamily::IMQ;
    s.bandwidth = h;
    s.validate();
    return s;
  }
  static BaseKernelSpec mehler(Scalar rho) {
    BaseKernelSpec s;
    s.family = BaseFamily::Mehler;
    s.rho = rho;
    s.validate();
    return s;
  }
  static BaseKernelSpec periodic_fourier(Scalar beta, Scalar a0 = Scalar(0), int kmax = 200) {
    BaseKernelSpec s;
    s.family = BaseFamily::PeriodicFourier;
    s.beta = beta;
    s.a0 = a0;
    s.kmax = kmax;
    s.validate();
    return s;
  }

  bool has_bandwidth() const {
    return family == BaseFamily::Gaussian || family == BaseFamily::IMQ;
  }

  BaseKernelSpec with_bandwidth(Scalar h) const {
    BaseKernelSpec s = *this;
    s.bandwidth = h;
    s.validate();
    return s;
  }

  void validate() const {
    using std::isfinite;
    switch (family) {
      case BaseFamily::Gaussian:
      case BaseFamily::IMQ:
        if (!(bandwidth > Scalar(0)) || !isfinite(bandwidth))
          throw std::invalid_argument("bandwidth h must be positive and finite");
        break;
      case BaseFamily::Mehler:
        if (!(rho > Scalar(0) && rho < Scalar(1)))
          throw std::invalid_argument("Mehler kernel requires 0 < rho < 1");
        break;
      case BaseFamily::PeriodicFourier:
        if (!(beta > Scalar(2)))
          throw std::invalid_argument("periodic Fourier kernel requires beta > 2");
        if (a0 < Scalar(0)) throw std::invalid_argument("periodic Fourier kernel requires a0 >= 0");
        if (kmax < 1) throw std::invalid_argument("periodic Fourier kernel requires kmax >= 1");
        break;
    }
  }

  /// Upper bound on |K_kmax - K_inf| for the periodic family: 2 sum_{k>kmax} k^-beta.
  Scalar truncation_bound() const {
    if (family != BaseFamily::PeriodicFourier) return Scalar(0);
    const Scalar k = static_cast<Scalar>(kmax);
    // Integral comparison: sum_{j>k} j^-b <= int_k^inf t^-b dt.
    return Scalar(2) * std::pow(k, Scalar(1) - beta) / (beta - Scalar(1));
  }
};

namespace detail {

template <typename DerivedA, typename DerivedB>
void check_same_dim(const Eigen::MatrixBase<DerivedA>& x, const Eigen::MatrixBase<DerivedB>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("dimension mismatch between points");
}

/// Squared Euclidean distance; Kahan-compensated in high dimension.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar squared_distance(const Eigen::MatrixBase<DerivedA>& x,
                                           const Eigen::MatrixBase<DerivedB>& y) {
  using Scalar = typename DerivedA::Scalar;
  const Eigen::Index d = x.size();
  if (d <= 100) return (x - y).squaredNorm();
  Scalar sum(0), carry(0);
  for (Eigen::Index i = 0; i < d; ++i) {
    const Scalar diff = x(i) - y(i);
    const Scalar term = diff * diff - carry;
    const Scalar next = sum + term;
    carry = (next - sum) - term;
    sum = next;
  }
  return sum;
}

/// sum_{k=1}^{kmax} w_k cos(k t) via the Chebyshev recurrence.
template <typename Scalar, typename Weight>
Scalar cosine_series(Scalar t, int kmax, Weight&& weight) {
  const Scalar c1 = std::cos(t);
  Scalar prev(1), curr = c1, sum(0);
  for (int k = 1; k <= kmax; ++k) {
    sum += weight(k) * curr;
    const Scalar next = Scalar(2) * c1 * curr - prev;
    prev = curr;
    curr = next;
  }
  return sum;
}

}  // namespace detail

/// K(x, y).
template <typename Scalar, typename DerivedA, typename DerivedB>
Scalar kernel_eval(const BaseKernelSpec<Scalar>& spec, const Eigen::MatrixBase<DerivedA>& x,
                   const Eigen::MatrixBase<DerivedB>& y) {
  detail::check_same_dim(x, y);
  switch (spec.family) {
    case BaseFamily::Gaussian:
      return std::exp(-detail::squared_distance(x, y) / (Scalar(2) * spec.bandwidth));
    case BaseFamily::IMQ:
      return Scalar(1) / std::sqrt(Scalar(1) + detail::squared_distance(x, y) / spec.bandwidth);
    case BaseFamily::Mehler: {
      const Scalar r = spec.rho, r2 = r * r, denom = Scalar(2) * (Scalar(1) - r2);
      Scalar log_k(0);
      for (Eigen::Index i = 0; i < x.size(); ++i)
        log_k += -(r2 * (x(i) * x(i) + y(i) * y(i)) - Scalar(2) * r * (x(i) * y(i))) / denom;
      return std::exp(log_k - Scalar(0.5) * static_cast<Scalar>(x.size()) * std::log1p(-r2));
    }
    case BaseFamily::PeriodicFourier: {
      if (x.size() != 1) throw std::invalid_argument("periodic Fourier kernel is one-dimensional");
      const Scalar t = Scalar(2) * std::numbers::pi_v<Scalar> * (x(0) - y(0));
      return spec.a0 + Scalar(2) * detail::cosine_series(t, spec.kmax, [&](int k) {
               return std::pow(static_cast<Scalar>(k), -spec.beta);
             });
    }
  }
  throw std::invalid_argument("unsupported base kernel family");
}

/// K together with the pieces the Langevin-Stein kernel needs.
template <typename Scalar>
struct KernelDerivatives {
  Scalar value;
  Vector<Scalar> grad_x;  // nabla_x K(x, y)
  Vector<Scalar> grad_y;  // nabla_y K(x, y)
  Scalar trace_xy;        // Tr(nabla_x nabla_y K(x, y))
};

template <typename Scalar, typename DerivedA, typename DerivedB>
KernelDerivatives<Scalar> kernel_derivatives(const BaseKernelSpec<Scalar>& spec,
                                             const Eigen::MatrixBase<DerivedA>& x,
                                             const Eigen::MatrixBase<DerivedB>& y) {
  detail::check_same_dim(x, y);
  const Eigen::Index d = x.size();
  KernelDerivatives<Scalar> out;
  switch (spec.family) {
    case BaseFamily::Gaussian: {
      const Vector<Scalar> r = x - y;
      const Scalar h = spec.bandwidth, r2 = detail::squared_distance(x, y);
      const Scalar k = std::exp(-r2 / (Scalar(2) * h));
      out.value = k;
      out.grad_x = -(k / h) * r;
      out.grad_y = (k / h) * r;
      out.trace_xy = k * (static_cast<Scalar>(d) / h - r2 / (h * h));
      return out;
    }
    case BaseFamily::IMQ: {
      const Vector<Scalar> r = x - y;
      const Scalar h = spec.bandwidth, r2 = detail::squared_distance(x, y);
      const Scalar u = Scalar(1) + r2 / h;
      const Scalar u32 = std::pow(u, Scalar(-1.5)), u52 = u32 / u;
      out.value = Scalar(1) / std::sqrt(u);
      out.grad_x = -(u32 / h) * r;
      out.grad_y = (u32 / h) * r;
      out.trace_xy = static_cast<Scalar>(d) / h * u32 - Scalar(3) * r2 / (h * h) * u52;
      return out;
    }
    case BaseFamily::Mehler: {
      // Product kernel: d/dx_i log k_i = -(rho^2 x_i - rho y_i)/(1-rho^2),
      // d^2/dx_i dy_i log k_i = rho/(1-rho^2).
      const Scalar r = spec.rho, one_m = Scalar(1) - r * r;
      const Scalar k = kernel_eval(spec, x, y);
      out.value = k;
      out.grad_x.resize(d);
      out.grad_y.resize(d);
      out.trace_xy = 0;
      for (Eigen::Index i = 0; i < d; ++i) {
        const Scalar lx = -(r * r * x(i) - r * y(i)) / one_m;
        const Scalar ly = -(r * r * y(i) - r * x(i)) / one_m;
        out.grad_x(i) = k * lx;
        out.grad_y(i) = k * ly;
        out.trace_xy += k * (lx * ly + r / one_m);
      }
      return out;
    }
    case BaseFamily::PeriodicFourier: {
      if (d != 1) throw std::invalid_argument("periodic Fourier kernel is one-dimensional");
      const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
      const Scalar t = two_pi * (x(0) - y(0));
      const Scalar b = spec.beta;
      // d/dx cos(k t) = -2 pi k sin(k t); sums of sin use the same recurrence.
      Scalar s_sum(0), prev_s(0), curr_s = std::sin(t);
      const Scalar c1 = std::cos(t);
      for (int k = 1; k <= spec.kmax; ++k) {
        s_sum += std::pow(static_cast<Scalar>(k), Scalar(1) - b) * curr_s;
        const Scalar next = Scalar(2) * c1 * curr_s - prev_s;
        prev_s = curr_s;
        curr_s = next;
      }
      out.value = kernel_eval(spec, x, y);
      out.grad_x = Vector<Scalar>::Constant(1, -Scalar(2) * two_pi * s_sum);
      out.grad_y = Vector<Scalar>::Constant(1, Scalar(2) * two_pi * s_sum);
      out.trace_xy = Scalar(2) * two_pi * two_pi * detail::cosine_series(t, spec.kmax, [&](int k) {
                       return std::pow(static_cast<Scalar>(k), Scalar(2) - b);
                     });
      return out;
    }
  }
  throw std::invalid_argument("unsupported base kernel family");
}

/// matrix(i, j) = K(A_i, B_j).
template <typename Scalar, typename DerivedA, typename DerivedB>
Matrix<Scalar> gram(const BaseKernelSpec<Scalar>& spec, const Eigen::MatrixBase<DerivedA>& a,
                    const Eigen::MatrixBase<DerivedB>& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("dimension mismatch between point sets");
  Matrix<Scalar> out(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j) out(i, j) = kernel_eval(spec, a.row(i), b.row(j));
  return out;
}

/// Symmetric Gram matrix of one point set; only the upper triangle is evaluated.
template <typename Scalar, typename Derived>
Matrix<Scalar> gram(const BaseKernelSpec<Scalar>& spec, const Eigen::MatrixBase<Derived>& a) {
  Matrix<Scalar> out(a.rows(), a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = i; j < a.rows(); ++j)
      out(i, j) = out(j, i) = kernel_eval(spec, a.row(i), a.row(j));
  return out;
}

/// Median of squared pairwise distances over unordered distinct pairs; the
/// lower median when the pair count is even.
template <typename Derived>
typename Derived::Scalar median_heuristic(const Eigen::MatrixBase<Derived>& samples) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = samples.rows();
  if (n < 2) throw std::invalid_argument("median heuristic needs at least two points");
  std::vector<Scalar> dists;
  dists.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      dists.push_back(detail::squared_distance(samples.row(i), samples.row(j)));
  const auto mid = dists.begin() + static_cast<std::ptrdiff_t>((dists.size() - 1) / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  if (!(*mid > Scalar(0)))
    throw std::invalid_argument("median heuristic is zero (identical points); bandwidth undefined");
  return *mid;
}

}  // namespace steinlab
