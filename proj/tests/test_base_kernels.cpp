#include "steinlab/base_kernels.hpp"
#include "steinlab/rng.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace steinlab;

namespace {

Eigen::MatrixXd random_points(Eigen::Index n, Eigen::Index d, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Eigen::MatrixXd p(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) p(i, j) = scale * rng.normal();
  return p;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

double min_over_max_eigenvalue(const Eigen::MatrixXd& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() / es.eigenvalues().maxCoeff();
}

}  // namespace

TEST(KernelEval, GaussianAtZeroDistanceIsOne) {
  const auto k = BaseKernelSpec<double>::gaussian(1.0);
  const auto x = vec({0.3, -1.2});
  EXPECT_EQ(kernel_eval(k, x, x), 1.0);
}

TEST(KernelEval, ImqClosedForm) {
  const auto k = BaseKernelSpec<double>::imq(1.0);
  // |x - y|^2 = 1 + 1 + 1 = 3
  EXPECT_DOUBLE_EQ(kernel_eval(k, vec({1, 1, 1}), vec({0, 0, 0})), 0.5);
}

TEST(KernelEval, MehlerAtOrigin) {
  const auto k = BaseKernelSpec<double>::mehler(0.5);
  EXPECT_NEAR(kernel_eval(k, vec({0}), vec({0})), 1.154700538379251529, 1e-15);
}

TEST(KernelEval, MehlerMatchesHermiteSeries) {
  // Independent oracle: sum_k rho^k He_k(x) He_k(y) / k!.
  const double rho = 0.3, x = 0.7, y = -1.1;
  double hx0 = 1, hx1 = x, hy0 = 1, hy1 = y, sum = 1 + rho * x * y, fact = 1, rk = rho;
  for (int k = 1; k < 80; ++k) {
    const double hx2 = x * hx1 - k * hx0, hy2 = y * hy1 - k * hy0;
    hx0 = hx1;
    hx1 = hx2;
    hy0 = hy1;
    hy1 = hy2;
    fact *= k + 1;
    rk *= rho;
    sum += rk * hx1 * hy1 / fact;
  }
  EXPECT_NEAR(kernel_eval(BaseKernelSpec<double>::mehler(rho), vec({x}), vec({y})), sum, 1e-12);
}

TEST(KernelEval, PeriodicFourierConvergesToZeta4) {
  const double target = std::pow(std::numbers::pi, 4) / 45.0;
  // Partial sums of 2 sum k^-4 to convergence, accumulated smallest first.
  double partial = 0;
  for (int k = 200000; k >= 1; --k) partial += 2.0 / std::pow(static_cast<double>(k), 4);
  EXPECT_NEAR(partial, target, 1e-14);
  const auto big = BaseKernelSpec<double>::periodic_fourier(4.0, 0.0, 200000);
  EXPECT_NEAR(kernel_eval(big, vec({0.25}), vec({0.25})), target, 1e-12);
  const auto k200 = BaseKernelSpec<double>::periodic_fourier(4.0);
  EXPECT_NEAR(kernel_eval(k200, vec({0.25}), vec({0.25})), target, k200.truncation_bound());
}

TEST(KernelEval, PeriodicFourierMatchesDirectCosineSum) {
  const auto k = BaseKernelSpec<double>::periodic_fourier(3.5, 0.7, 50);
  for (double d : {0.0, 0.1, 0.37, 0.5, 0.93}) {
    double direct = 0.7;
    for (int j = 1; j <= 50; ++j) direct += 2 * std::pow(j, -3.5) * std::cos(2 * std::numbers::pi * j * d);
    EXPECT_NEAR(kernel_eval(k, vec({d}), vec({0.0})), direct, 1e-13);
  }
}

TEST(KernelEval, Errors) {
  EXPECT_THROW(kernel_eval(BaseKernelSpec<double>::gaussian(1.0), vec({1, 2}), vec({1})), std::invalid_argument);
  EXPECT_THROW(BaseKernelSpec<double>::gaussian(0.0), std::invalid_argument);
  EXPECT_THROW(BaseKernelSpec<double>::imq(-1.0), std::invalid_argument);
  EXPECT_THROW(BaseKernelSpec<double>::mehler(1.0), std::invalid_argument);
  EXPECT_THROW(BaseKernelSpec<double>::mehler(0.0), std::invalid_argument);
  EXPECT_THROW(BaseKernelSpec<double>::periodic_fourier(2.0), std::invalid_argument);
  EXPECT_THROW(BaseKernelSpec<double>::periodic_fourier(4.0, -1.0), std::invalid_argument);
  EXPECT_THROW(BaseKernelSpec<double>::periodic_fourier(4.0, 0.0, 0), std::invalid_argument);
  EXPECT_THROW(kernel_eval(BaseKernelSpec<double>::periodic_fourier(4.0), vec({1, 2}), vec({1, 2})),
               std::invalid_argument);
}

TEST(MedianHeuristic, ThreePointsOnALine) {
  Eigen::MatrixXd p(3, 1);
  p << 0, 1, 2;
  EXPECT_EQ(median_heuristic(p), 1.0);
}

TEST(MedianHeuristic, IdenticalPointsThrow) {
  Eigen::MatrixXd p(2, 2);
  p << 1, 2, 1, 2;
  EXPECT_THROW(median_heuristic(p), std::invalid_argument);
  EXPECT_THROW(median_heuristic(Eigen::MatrixXd(1, 2)), std::invalid_argument);
}

TEST(MedianHeuristic, MatchesBruteForceSort) {
  const auto p = random_points(50, 3, 11);
  std::vector<double> d;
  for (int i = 0; i < 50; ++i)
    for (int j = i + 1; j < 50; ++j) d.push_back((p.row(i) - p.row(j)).squaredNorm());
  ASSERT_EQ(d.size(), 1225u);
  std::sort(d.begin(), d.end());
  EXPECT_NEAR(median_heuristic(p), d[612], 1e-14);
}

TEST(MedianHeuristic, EvenPairCountUsesLowerMedian) {
  Eigen::MatrixXd p(4, 1);
  p << 0, 1, 3, 7;  // distances 1,3,7,2,6,4 -> sorted 1,2,3,4,6,7
  EXPECT_EQ(median_heuristic(p), 9.0);  // squared: 1,4,9,16,36,49 -> lower median 9
}

TEST(Gram, SinglePoint) {
  Eigen::MatrixXd p(1, 2);
  p << 0.5, 0.5;
  const auto k = BaseKernelSpec<double>::imq(2.0);
  const auto g = gram(k, p);
  ASSERT_EQ(g.rows(), 1);
  EXPECT_EQ(g(0, 0), kernel_eval(k, p.row(0), p.row(0)));
}

TEST(Gram, GaussianDiagonalIsOne) {
  const auto g = gram(BaseKernelSpec<double>::gaussian(0.7), random_points(15, 4, 3));
  for (int i = 0; i < 15; ++i) EXPECT_EQ(g(i, i), 1.0);
}

TEST(Gram, MatchesDoubleLoop) {
  const auto a = random_points(10, 3, 5), b = random_points(7, 3, 6);
  for (const auto& k : {BaseKernelSpec<double>::gaussian(1.3), BaseKernelSpec<double>::imq(0.4),
                        BaseKernelSpec<double>::mehler(0.6)}) {
    const auto g = gram(k, a, b);
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 7; ++j) EXPECT_EQ(g(i, j), kernel_eval(k, a.row(i), b.row(j)));
    const auto s = gram(k, a);
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j) EXPECT_EQ(s(i, j), kernel_eval(k, a.row(i), a.row(j)));
  }
  EXPECT_THROW(gram(BaseKernelSpec<double>::gaussian(1.0), a, random_points(3, 2, 1)), std::invalid_argument);
}

TEST(BaseKernelProperties, SymmetryIsExact) {
  const auto p = random_points(12, 3, 8);
  for (const auto& k : {BaseKernelSpec<double>::gaussian(1.3), BaseKernelSpec<double>::imq(0.4),
                        BaseKernelSpec<double>::mehler(0.6)})
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 12; ++j) EXPECT_EQ(kernel_eval(k, p.row(i), p.row(j)), kernel_eval(k, p.row(j), p.row(i)));
  Rng rng(4);
  const auto f = BaseKernelSpec<double>::periodic_fourier(4.0);
  for (int t = 0; t < 20; ++t) {
    const auto x = vec({rng.uniform()}), y = vec({rng.uniform()});
    EXPECT_EQ(kernel_eval(f, x, y), kernel_eval(f, y, x));
  }
}

TEST(BaseKernelProperties, GramIsPsd) {
  for (const auto& k : {BaseKernelSpec<double>::gaussian(0.5), BaseKernelSpec<double>::imq(2.0),
                        BaseKernelSpec<double>::mehler(0.8)})
    EXPECT_GE(min_over_max_eigenvalue(gram(k, random_points(30, 2, 21))), -1e-8);
  Rng rng(22);
  Eigen::MatrixXd u(30, 1);
  for (int i = 0; i < 30; ++i) u(i, 0) = rng.uniform();
  EXPECT_GE(min_over_max_eigenvalue(gram(BaseKernelSpec<double>::periodic_fourier(3.0, 1.0), u)), -1e-8);
}

TEST(BaseKernelProperties, PsdInHighDimension) {
  // d > 100 exercises the compensated distance path.
  EXPECT_GE(min_over_max_eigenvalue(gram(BaseKernelSpec<double>::gaussian(150.0), random_points(30, 150, 23))),
            -1e-8);
}

TEST(BaseKernelProperties, TranslationInvariance) {
  const auto p = random_points(10, 3, 9);
  const Eigen::RowVectorXd c = random_points(1, 3, 10, 5.0);
  for (const auto& k : {BaseKernelSpec<double>::gaussian(1.3), BaseKernelSpec<double>::imq(0.4)})
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j) {
        const double a = kernel_eval(k, p.row(i), p.row(j));
        const double b = kernel_eval(k, p.row(i) + c, p.row(j) + c);
        EXPECT_NEAR(a, b, 1e-12 * std::abs(a));
      }
}

TEST(BaseKernelProperties, PeriodicTailBound) {
  for (int kmax : {10, 50, 200}) {
    const auto k = BaseKernelSpec<double>::periodic_fourier(3.0, 0.0, kmax);
    const auto k2 = BaseKernelSpec<double>::periodic_fourier(3.0, 0.0, 2 * kmax);
    double tail = 0;  // 2 sum_{k > kmax} k^-3, summed to convergence
    for (int j = 2000000; j > kmax; --j) tail += 2 * std::pow(static_cast<double>(j), -3.0);
    EXPECT_LE(k.truncation_bound(), 2 * std::pow(kmax, -2.0) / 2.0 + 1e-15);
    EXPECT_GE(k.truncation_bound(), tail);
    for (double d : {0.0, 0.13, 0.5}) {
      const double diff = std::abs(kernel_eval(k, vec({d}), vec({0})) - kernel_eval(k2, vec({d}), vec({0})));
      EXPECT_LE(diff, tail);
    }
  }
}

TEST(KernelDerivatives, MatchFiniteDifferences) {
  Rng rng(31);
  const double step = 1e-5;
  for (const auto& k : {BaseKernelSpec<double>::gaussian(1.7), BaseKernelSpec<double>::imq(0.8),
                        BaseKernelSpec<double>::mehler(0.4)}) {
    for (int t = 0; t < 20; ++t) {
      Eigen::VectorXd x(3), y(3);
      for (int i = 0; i < 3; ++i) {
        x(i) = rng.normal();
        y(i) = rng.normal();
      }
      const auto kd = kernel_derivatives(k, x, y);
      EXPECT_NEAR(kd.value, kernel_eval(k, x, y), 1e-14);
      double trace = 0;
      for (int i = 0; i < 3; ++i) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(3);
        e(i) = step;
        const double gx = (kernel_eval(k, x + e, y) - kernel_eval(k, x - e, y)) / (2 * step);
        const double gy = (kernel_eval(k, x, y + e) - kernel_eval(k, x, y - e)) / (2 * step);
        EXPECT_NEAR(kd.grad_x(i), gx, 1e-5);
        EXPECT_NEAR(kd.grad_y(i), gy, 1e-5);
        trace += (kernel_eval(k, x + e, y + e) - kernel_eval(k, x + e, y - e) - kernel_eval(k, x - e, y + e) +
                  kernel_eval(k, x - e, y - e)) /
                 (4 * step * step);
      }
      EXPECT_NEAR(kd.trace_xy, trace, 1e-4);
    }
  }
}

TEST(KernelDerivatives, PeriodicMatchesFiniteDifferences) {
  const auto k = BaseKernelSpec<double>::periodic_fourier(5.0, 0.3, 60);
  const double step = 1e-5;
  for (double x : {0.1, 0.42, 0.77})
    for (double y : {0.05, 0.6}) {
      const auto kd = kernel_derivatives(k, vec({x}), vec({y}));
      const double gx = (kernel_eval(k, vec({x + step}), vec({y})) - kernel_eval(k, vec({x - step}), vec({y}))) / (2 * step);
      EXPECT_NEAR(kd.grad_x(0), gx, 1e-5 * std::max(1.0, std::abs(gx)));
      EXPECT_EQ(kd.grad_y(0), -kd.grad_x(0));
      const double cross = (kernel_eval(k, vec({x + step}), vec({y + step})) - kernel_eval(k, vec({x + step}), vec({y - step})) -
                            kernel_eval(k, vec({x - step}), vec({y + step})) + kernel_eval(k, vec({x - step}), vec({y - step}))) /
                           (4 * step * step);
      EXPECT_NEAR(kd.trace_xy, cross, 1e-3 * std::max(1.0, std::abs(cross)));
    }
}
