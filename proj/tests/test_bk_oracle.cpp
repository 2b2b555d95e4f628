#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dwl/bk_oracle.hpp"
#include "dwl/stieltjes.hpp"

using namespace dwl;

TEST(BkXi1, AsymptoticBranch) {
  const cplx z{1e6, 0.0};
  const auto xi = bk_xi1(z, 2.0);
  EXPECT_NEAR(std::abs(xi - z) / std::abs(z), 0.0, 1e-5);
}

TEST(BkXi1, SolvesTheCubic) {
  for (double x : {-3.0, -1.0, 0.2, 2.5})
    for (double a : {1.5, 2.0, 3.0}) {
      const cplx z{x, 0.3};
      const auto xi = bk_xi1(z, a);
      EXPECT_NEAR(std::abs(bk_cubic(z, a)(xi)), 0.0, 1e-10);
      EXPECT_NEAR(std::abs(bk_map(xi, a) - z), 0.0, 1e-10);
    }
}

// xi_1 = z + m(z) for the two-atom source.
TEST(BkXi1, AgreesWithPasturSolution) {
  for (double a : {1.5, 2.0, std::numbers::sqrt2}) {
    const auto mu = make_measure({{-a, 0.5}, {a, 0.5}});
    for (double x : {-2.5, -0.5, 0.0, 1.0, 3.0})
      for (double y : {1e-3, 0.1, 2.0}) {
        const cplx z{x, y};
        EXPECT_NEAR(std::abs(bk_xi1(z, a) - (z + solve_pastur(mu, z).m)), 0.0, 1e-9) << a << " " << z;
      }
  }
}

TEST(BkXi1, GapAtOriginForSqrtTwo) {
  const auto xi = bk_xi1({0.0, 0.0}, std::numbers::sqrt2);
  EXPECT_NEAR(xi.imag(), 0.0, 1e-6);
}

TEST(BkXi1, InteriorHasPositiveImaginaryPart) {
  const auto p = bk_support(2.0);
  EXPECT_GT(bk_xi1({0.5 * (p.alpha + p.beta), 0.0}, 2.0).imag(), 0.0);
}

TEST(BkDensity, ZeroInGapAndOutside) {
  const auto p = bk_support(2.0);
  EXPECT_EQ(bk_density(0.0, 2.0), 0.0);
  EXPECT_EQ(bk_density(p.alpha + 1.0, 2.0), 0.0);
  EXPECT_EQ(bk_density(-p.alpha - 1.0, 2.0), 0.0);
}

TEST(BkDensity, EvenSymmetry) {
  for (double x = 0.05; x < 4.0; x += 0.173) EXPECT_NEAR(bk_density(x, 2.0), bk_density(-x, 2.0), 1e-12);
}

TEST(BkDensity, IntegratesToOne) {
  for (double a : {1.5, 2.0, 3.0}) {
    const auto p = bk_support(a);
    // Gauss-Chebyshev style substitution x = c + h sin(t) resolves the
    // square-root edges; composite Simpson in t.
    double total = 0.0;
    const double c = 0.5 * (p.alpha + p.beta), h = 0.5 * (p.alpha - p.beta);
    const int N = 2000;
    for (int k = 0; k <= N; ++k) {
      const double t = -std::numbers::pi / 2 + std::numbers::pi * k / N;
      const double w = (k == 0 || k == N) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      total += w * bk_density(c + h * std::sin(t), a) * h * std::cos(t);
    }
    total *= std::numbers::pi / N / 3.0;
    EXPECT_NEAR(2.0 * total, 1.0, 1e-6) << a;
  }
}

TEST(BkDensity, RejectsSmallA) {
  EXPECT_THROW(bk_density(0.0, 1.0), InvalidArgument);
  EXPECT_THROW(bk_density(0.0, 0.5), InvalidArgument);
}

TEST(BkSupport, EdgesForTwo) {
  const auto p = bk_support(2.0);
  EXPECT_GT(p.alpha, p.beta);
  EXPECT_GT(p.beta, 0.0);
  // Independent closed form: xi^2 = ((2a^2+1) +- sqrt(8a^2+1))/2.
  const double a2 = 4.0;
  const double big = std::sqrt(((2 * a2 + 1) + std::sqrt(8 * a2 + 1)) / 2);
  const double small = std::sqrt(((2 * a2 + 1) - std::sqrt(8 * a2 + 1)) / 2);
  EXPECT_NEAR(p.alpha, bk_map(big, 2.0).real(), 1e-12);
  EXPECT_NEAR(p.beta, bk_map(small, 2.0).real(), 1e-12);
  EXPECT_NEAR(p.alpha, 3.5203451861, 1e-9);
  EXPECT_NEAR(p.beta, 0.7380174597, 1e-9);
}

TEST(BkSupport, DensitySignChangesAtEdges) {
  const auto p = bk_support(2.0);
  EXPECT_EQ(bk_density(p.beta - 1e-3, 2.0), 0.0);
  EXPECT_GT(bk_density(p.beta + 1e-3, 2.0), 0.0);
  EXPECT_GT(bk_density(p.alpha - 1e-3, 2.0), 0.0);
  EXPECT_EQ(bk_density(p.alpha + 1e-3, 2.0), 0.0);
}

TEST(BkSupport, NearCritical) {
  const auto p = bk_support(1.0001);
  EXPECT_LT(p.beta, 1e-3);
  EXPECT_GT(p.beta, 0.0);
}

TEST(BkSupport, Rejections) {
  EXPECT_THROW(bk_support(0.5), InvalidArgument);
  EXPECT_THROW(bk_support(1.0), InvalidArgument);
}

TEST(SineKernel, Values) {
  EXPECT_EQ(sine_kernel(0.3, 0.3), 1.0);
  EXPECT_NEAR(sine_kernel(0.5, 0.0), 2.0 / std::numbers::pi, 1e-15);
  EXPECT_NEAR(sine_kernel(1.0, 0.0), 0.0, 1e-15);
  EXPECT_NEAR(sine_kernel(1e-9, 0.0), 1.0, 1e-15);
}

TEST(SineCorrelation, Values) {
  EXPECT_NEAR(sine_correlation({4.2}), 1.0, 1e-15);
  EXPECT_NEAR(sine_correlation({0.0, 1.0}), 1.0, 1e-15);
  EXPECT_NEAR(sine_correlation({0.0, 0.5}), 1.0 - 4.0 / (std::numbers::pi * std::numbers::pi), 1e-14);
  EXPECT_NEAR(1.0 - 4.0 / (std::numbers::pi * std::numbers::pi), 0.59472, 1e-5);
}

TEST(SineCorrelation, CoincidentPointsRepel) {
  EXPECT_LE(sine_correlation({0.0, 1e-6}), 1e-4);
  EXPECT_LE(sine_correlation({1.0, 1.0 + 1e-6, 1.0 - 1e-6}), 1e-4);
  EXPECT_GE(sine_correlation({0.0, 0.0}), 0.0);
}
