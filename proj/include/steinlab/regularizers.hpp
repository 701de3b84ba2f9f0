#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace steinlab {

enum class RegularizerFamily { Tikhonov, TikMax, SpectralCutoff };

/// Spectral regularizer g_lambda, an approximation of t -> 1/t.
///
///   Tikhonov        1 / (t + lambda)
///   TikMax          max{1, 1 / (t + lambda)}
///   SpectralCutoff  1/t for t >= lambda, 0 otherwise   (violates E4)
struct RegularizerSpec {
  RegularizerFamily family = RegularizerFamily::Tikhonov;

  static RegularizerSpec tikhonov() { return {RegularizerFamily::Tikhonov}; }
  static RegularizerSpec tikmax() { return {RegularizerFamily::TikMax}; }
  static RegularizerSpec spectral_cutoff() { return {RegularizerFamily::SpectralCutoff}; }

  /// All three families have infinite qualification.
  double qualification() const { return std::numeric_limits<double>::infinity(); }
  bool satisfies_e4() const { return family != RegularizerFamily::SpectralCutoff; }
  /// Reports built on a family outside the theory carry this flag.
  bool unsupported_theory() const { return !satisfies_e4(); }

  std::string name() const {
    switch (family) {
      case RegularizerFamily::Tikhonov: return "Tikhonov";
      case RegularizerFamily::TikMax: return "TikMax";
      case RegularizerFamily::SpectralCutoff: return "SpectralCutoff";
    }
    return "unknown";
  }
};

inline RegularizerSpec regularizer_from_name(const std::string& name) {
  if (name == "Tikhonov" || name == "tikhonov") return RegularizerSpec::tikhonov();
  if (name == "TikMax" || name == "tikmax") return RegularizerSpec::tikmax();
  if (name == "SpectralCutoff" || name == "spectral_cutoff" || name == "cutoff")
    return RegularizerSpec::spectral_cutoff();
  throw std::invalid_argument("unknown regularizer: " + name);
}

namespace detail {
template <typename Scalar>
void check_lambda(Scalar lambda) {
  if (!(lambda > Scalar(0)) || !std::isfinite(lambda))
    throw std::invalid_argument("regularization parameter lambda must be positive");
}
}  // namespace detail

template <typename Scalar>
Scalar g_eval(const RegularizerSpec& spec, Scalar lambda, Scalar t) {
  detail::check_lambda(lambda);
  if (t < Scalar(0)) throw std::invalid_argument("g_eval requires t >= 0");
  switch (spec.family) {
    case RegularizerFamily::Tikhonov: return Scalar(1) / (t + lambda);
    case RegularizerFamily::TikMax: return std::max(Scalar(1), Scalar(1) / (t + lambda));
    case RegularizerFamily::SpectralCutoff: return t >= lambda ? Scalar(1) / t : Scalar(0);
  }
  throw std::invalid_argument("unknown regularizer family");
}

template <typename Scalar>
Scalar g_zero(const RegularizerSpec& spec, Scalar lambda) {
  detail::check_lambda(lambda);
  switch (spec.family) {
    case RegularizerFamily::Tikhonov: return Scalar(1) / lambda;
    case RegularizerFamily::TikMax: return std::max(Scalar(1), Scalar(1) / lambda);
    case RegularizerFamily::SpectralCutoff: return Scalar(0);
  }
  throw std::invalid_argument("unknown regularizer family");
}

/// Limit of (g(t) - g(0)) / t as t -> 0+.
template <typename Scalar>
Scalar g_ratio_limit(const RegularizerSpec& spec, Scalar lambda) {
  detail::check_lambda(lambda);
  switch (spec.family) {
    case RegularizerFamily::Tikhonov: return -Scalar(1) / (lambda * lambda);
    case RegularizerFamily::TikMax:
      return lambda < Scalar(1) ? -Scalar(1) / (lambda * lambda) : Scalar(0);
    case RegularizerFamily::SpectralCutoff: return Scalar(0);
  }
  throw std::invalid_argument("unknown regularizer family");
}

/// (g(t) - g(0)) / t for t > eps, the analytic limit for t <= eps. The
/// Tikhonov branch uses the cancellation-free form -1 / (lambda (t + lambda)).
template <typename Scalar>
Scalar g_ratio(const RegularizerSpec& spec, Scalar lambda, Scalar t, Scalar eps = Scalar(1e-14)) {
  detail::check_lambda(lambda);
  if (t < Scalar(0)) throw std::invalid_argument("g_ratio requires t >= 0");
  if (t <= eps) return g_ratio_limit(spec, lambda);
  switch (spec.family) {
    case RegularizerFamily::Tikhonov: return -Scalar(1) / (lambda * (t + lambda));
    case RegularizerFamily::TikMax:
      if (Scalar(1) / (t + lambda) >= Scalar(1)) return -Scalar(1) / (lambda * (t + lambda));
      return (Scalar(1) - g_zero(spec, lambda)) / t;
    case RegularizerFamily::SpectralCutoff: return t >= lambda ? Scalar(1) / (t * t) : Scalar(0);
  }
  throw std::invalid_argument("unknown regularizer family");
}

/// Numerical constants of the sufficient conditions on Gamma = [0, kappa].
struct ConditionReport {
  double c1 = 0;  // sup |x g(x)|
  double c2 = 0;  // sup |lambda g(x)|
  double c3 = 0;  // sup_{x g(x) < 1} |1 - x g(x)| x^{2 phi} / lambda^{2 phi}
  double c4 = 0;  // inf g(x) (x + lambda)
  bool e4_holds = false;
  double g_ratio_lipschitz = 0;  // sup |d/dt g_ratio| on [eps, kappa]; inf if discontinuous
  bool unsupported_theory = false;
};

/// Evaluates the condition expressions on a log-spaced grid over (0, kappa]
/// together with x = 0. E3 is reported with B3 = 1 and the given phi.
inline ConditionReport verify_conditions(const RegularizerSpec& spec, double lambda, double kappa,
                                         int grid_size, double phi = 0.5, double eps = 1e-10) {
  detail::check_lambda(lambda);
  if (!(kappa > 0)) throw std::invalid_argument("verify_conditions requires kappa > 0");
  if (grid_size < 2) throw std::invalid_argument("verify_conditions requires grid_size >= 2");
  ConditionReport r;
  r.c4 = std::numeric_limits<double>::infinity();
  const double lo = std::log(std::min(eps, kappa) * 1e-2), hi = std::log(kappa);
  auto visit = [&](double x) {
    const double g = g_eval(spec, lambda, x);
    r.c1 = std::max(r.c1, std::abs(x * g));
    r.c2 = std::max(r.c2, std::abs(lambda * g));
    if (x * g < 1.0)
      r.c3 = std::max(r.c3, std::abs(1.0 - x * g) * std::pow(x / lambda, 2.0 * phi));
    r.c4 = std::min(r.c4, g * (x + lambda));
  };
  visit(0.0);
  for (int i = 0; i < grid_size; ++i)
    visit(std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid_size - 1)));
  // Breakpoints of the piecewise families.
  if (lambda <= kappa) visit(lambda);
  if (1.0 - lambda > 0 && 1.0 - lambda <= kappa) visit(1.0 - lambda);
  r.e4_holds = r.c4 > 0;

  // g_ratio derivative, piecewise closed form.
  switch (spec.family) {
    case RegularizerFamily::Tikhonov:
      r.g_ratio_lipschitz = 1.0 / (lambda * (eps + lambda) * (eps + lambda));
      break;
    case RegularizerFamily::TikMax: {
      double lip = 0;
      if (lambda < 1) {
        const double knee = 1.0 - lambda;
        const double lo_t = std::min(eps, knee);
        lip = 1.0 / (lambda * (lo_t + lambda) * (lo_t + lambda));
        if (knee <= kappa) lip = std::max(lip, (1.0 / lambda - 1.0) / (knee * knee));
      }
      r.g_ratio_lipschitz = lip;
      break;
    }
    case RegularizerFamily::SpectralCutoff:
      r.g_ratio_lipschitz = lambda <= kappa ? std::numeric_limits<double>::infinity()
                                            : 0.0;
      break;
  }
  r.unsupported_theory = spec.unsupported_theory();
  return r;
}

}  // namespace steinlab
