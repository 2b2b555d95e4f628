#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "dwl/rng.hpp"
#include "dwl/stieltjes.hpp"

using namespace dwl;

namespace {

AtomicMeasure delta0() { return make_measure({{0.0, 1.0}}); }
AtomicMeasure two_atom(double a) { return make_measure({{-a, 0.5}, {a, 0.5}}); }
AtomicMeasure three_atom() { return parse_atoms("-1:0.2,0:0.3,2:0.5"); }

}  // namespace

TEST(Semicircle, QuadraticRoot) {
  const cplx z{0.0, 2.0};
  const cplx m = semicircle_st(z);
  EXPECT_NEAR(std::abs(m * m + z * m + 1.0), 0.0, 1e-14);
  EXPECT_GT(m.imag(), 0.0);
  EXPECT_NEAR(m.imag(), std::sqrt(2.0) - 1.0, 1e-14);
}

TEST(Semicircle, NearOrigin) {
  EXPECT_NEAR(std::abs(semicircle_st({0.0, 1e-12}) - cplx{0.0, 1.0}), 0.0, 1e-10);
}

TEST(Semicircle, Asymptotic) {
  const cplx z{1e6, 1.0};
  EXPECT_NEAR(std::abs(semicircle_st(z) + 1.0 / z), 0.0, 1e-11 * std::abs(1.0 / z) + 1e-17);
}

TEST(Semicircle, HerglotzEverywhere) {
  for (double x = -5; x <= 5; x += 0.25)
    for (double y : {1e-9, 1e-3, 1.0, 1e3}) EXPECT_GT(semicircle_st({x, y}).imag(), 0.0);
}

TEST(SolvePastur, DeltaZeroIsSemicircle) {
  CounterStream rng(1, 0);
  for (int k = 0; k < 200; ++k) {
    const cplx z{rng.uniform(-4, 4), std::pow(10.0, rng.uniform(-6, 3))};
    const auto sol = solve_pastur(delta0(), z);
    EXPECT_LE(sol.residual, kResidualTolerance);
    EXPECT_NEAR(std::abs(sol.m - semicircle_st(z)), 0.0, 1e-10) << z;
  }
}

TEST(SolvePastur, TripleRootMeasure) {
  const auto mu = two_atom(std::numbers::sqrt2);
  const auto sol = solve_pastur(mu, {0.0, 1e-6});
  EXPECT_GE(sol.m.imag(), 0.0);
  EXPECT_LE(sol.residual, 1e-10);
  EXPECT_LE(density_at(mu, 0.0, 1e-6), 1e-6);
}

TEST(SolvePastur, Asymptotic) {
  const cplx z{0.0, 1e6};
  const auto sol = solve_pastur(two_atom(2.0), z);
  EXPECT_NEAR(std::abs(sol.m + 1.0 / z), 0.0, 1e-10);
}

TEST(SolvePastur, ResidualOnRandomPoints) {
  CounterStream rng(2, 0);
  for (const auto& mu : {delta0(), two_atom(2.0), three_atom()}) {
    for (int k = 0; k < 150; ++k) {
      const cplx z{rng.uniform(-6, 6), std::pow(10.0, rng.uniform(-6, 3))};
      const auto sol = solve_pastur(mu, z);
      EXPECT_LE(sol.residual, kResidualTolerance) << z;
      EXPECT_LE(pastur_residual(mu, z, sol.m), kResidualTolerance);
      EXPECT_GE(sol.m.imag(), 0.0);
    }
  }
}

TEST(SolvePastur, StrategiesAgree) {
  CounterStream rng(3, 0);
  for (const auto& mu : {two_atom(2.0), three_atom(), two_atom(1.0)}) {
    for (int k = 0; k < 40; ++k) {
      const cplx z{rng.uniform(-5, 5), std::pow(10.0, rng.uniform(-4, 2))};
      const auto a = solve_pastur_newton(mu, z);
      const auto b = solve_pastur_polynomial(mu, z);
      EXPECT_NEAR(std::abs(a.m - b.m), 0.0, 1e-9) << z;
      EXPECT_EQ(b.strategy, SolveStrategy::Polynomial);
    }
  }
}

TEST(SolvePastur, HerglotzAsymptotics) {
  for (const auto& mu : {two_atom(2.0), three_atom()})
    for (double x : {-3.0, 0.0, 7.0}) {
      const cplx z{x * 1e5, 1e5};
      const auto m = solve_pastur(mu, z).m;
      EXPECT_GT(m.imag(), 0.0);
      EXPECT_NEAR(std::abs(m * z + 1.0), 0.0, 1e-4);
    }
}

TEST(SolvePastur, RejectsRealAxis) {
  EXPECT_THROW(solve_pastur(delta0(), {0.5, 0.0}), InvalidArgument);
}

TEST(SolvePastur, UniquenessProbe) {
  for (const auto& mu : {two_atom(2.0), three_atom()}) {
    const auto probe = uniqueness_probe(mu, {0.7, 1.0}, 16, 11);
    EXPECT_EQ(probe.roots.size(), 16u);
    EXPECT_LE(probe.spread, 1e-9);
  }
}

TEST(SolvePastur, BranchContinuityAlongHeights) {
  const auto mu = two_atom(2.0);
  std::vector<double> targets;
  for (double eta = 1.0; eta >= 1e-6; eta *= 0.5) targets.push_back(eta);
  const auto sols = solve_pastur_heights(mu, 1.5, targets);
  ASSERT_EQ(sols.size(), targets.size());
  for (std::size_t k = 1; k < sols.size(); ++k) {
    const double step = targets[k - 1] - targets[k];
    // Herglotz bound |m'| <= Im m / Im z gives the admissible change per step.
    const double bound = sols[k].m.imag() / targets[k] * step;
    EXPECT_LE(std::abs(sols[k].m - sols[k - 1].m), 10.0 * bound + 1e-12);
  }
}

TEST(Density, SemicircleValues) {
  const auto p = density(delta0(), {-3.0, 0.0, 1.0, 3.0});
  EXPECT_NEAR(p.values[1], 1.0 / std::numbers::pi, 1e-6);
  EXPECT_NEAR(p.values[2], std::sqrt(3.0) / (2 * std::numbers::pi), 1e-6);
  EXPECT_NEAR(p.values[0], 0.0, 1e-8);
  EXPECT_NEAR(p.values[3], 0.0, 1e-8);
  EXPECT_EQ(p.eta_schedule, (std::vector<double>{4e-6, 2e-6, 1e-6}));
}

TEST(Density, ErrorsAreReported) {
  EXPECT_THROW(density(delta0(), {0.0, 1.0}, 0.0), InvalidArgument);
  EXPECT_THROW(density(delta0(), {0.0, 1.0}, 1e-2), InvalidArgument);
  EXPECT_THROW(density(delta0(), {1.0, 0.0}), InvalidArgument);
}

TEST(Density, IntegratesToOne) {
  for (const auto& mu : {delta0(), two_atom(2.0), three_atom(), two_atom(0.5)}) {
    const auto p = density(mu, make_grid(-6, 6, 3001));
    EXPECT_NEAR(p.total_mass(), 1.0, 2e-3);
    for (double v : p.values) EXPECT_GE(v, 0.0);
  }
}

TEST(Support, Semicircle) {
  const auto s = support_intervals(density(delta0(), make_grid(-3, 3, 1201)));
  ASSERT_EQ(s.count(), 1u);
  EXPECT_NEAR(s.intervals[0].lo, -2.0, 1e-4);
  EXPECT_NEAR(s.intervals[0].hi, 2.0, 1e-4);
  EXPECT_EQ(s.quantiles.front(), 0.0);
  EXPECT_NEAR(s.quantiles.back(), 1.0, 2e-3);
  EXPECT_TRUE(s.condition_a);
}

TEST(Support, TwoIntervals) {
  const auto s = support_intervals(density(two_atom(2.0), make_grid(-5, 5, 2001)));
  ASSERT_EQ(s.count(), 2u);
  EXPECT_NEAR(s.intervals[0].lo, -s.intervals[1].hi, 1e-6);
  EXPECT_NEAR(s.intervals[0].hi, -s.intervals[1].lo, 1e-6);
  EXPECT_NEAR(s.quantiles[1], 0.5, 1e-3);
  EXPECT_LT(s.quantiles[0], s.quantiles[1]);
  EXPECT_LT(s.quantiles[1], s.quantiles[2]);
}

TEST(Support, SingleIntervalBelowCritical) {
  const auto s = support_intervals(density(two_atom(0.5), make_grid(-4, 4, 1601)));
  EXPECT_EQ(s.count(), 1u);
  EXPECT_TRUE(s.condition_a);
}

TEST(Support, CriticalCaseFlagsConditionA) {
  const auto s = support_intervals(density(two_atom(1.0), make_grid(-4, 4, 1601)));
  EXPECT_FALSE(s.condition_a);
  EXPECT_FALSE(s.interior_zeros.empty());
}

TEST(Support, EmptySupportIsAnError) {
  EXPECT_THROW(support_intervals(density(delta0(), make_grid(5, 6, 11))), InvalidArgument);
}

TEST(BulkIndices, SingleInterval) {
  SupportProfile s;
  s.intervals = {{-2, 2}};
  s.quantiles = {0.0, 1.0};
  const auto b = bulk_indices(s, 0.1, 100);
  ASSERT_EQ(b.ranges.size(), 1u);
  EXPECT_EQ(b.ranges[0].lo, 10);
  EXPECT_EQ(b.ranges[0].hi, 90);
}

TEST(BulkIndices, TwoIntervals) {
  SupportProfile s;
  s.intervals = {{-3, -1}, {1, 3}};
  s.quantiles = {0.0, 0.5, 1.0};
  const auto b = bulk_indices(s, 0.05, 1000);
  ASSERT_EQ(b.ranges.size(), 2u);
  EXPECT_EQ(b.ranges[0].lo, 50);
  EXPECT_EQ(b.ranges[0].hi, 450);
  EXPECT_EQ(b.ranges[1].lo, 550);
  EXPECT_EQ(b.ranges[1].hi, 950);
  EXPECT_TRUE(b.contains(300));
  EXPECT_FALSE(b.contains(500));
}

TEST(BulkIndices, EmptyWhenEpsilonTooLarge) {
  SupportProfile s;
  s.intervals = {{-2, 2}};
  s.quantiles = {0.0, 1.0};
  const auto b = bulk_indices(s, 0.49, 100);
  EXPECT_FALSE(b.all_empty());
  SupportProfile t = s;
  t.intervals = {{-3, -1}, {1, 3}};
  t.quantiles = {0.0, 0.5, 1.0};
  EXPECT_TRUE(bulk_indices(t, 0.3, 100).all_empty());
  EXPECT_THROW(bulk_indices(s, 0.6, 100), InvalidArgument);
}

TEST(Holder, ExponentAtLeastOneThird) {
  const auto mu = two_atom(2.0);
  const auto s = support_intervals(density(mu, make_grid(-5, 5, 2001)));
  std::vector<double> edges;
  for (const auto& I : s.intervals) {
    edges.push_back(I.lo);
    edges.push_back(I.hi);
  }
  const auto fit = holder_fit(mu, edges, 12, 5);
  EXPECT_GE(fit.exponent, 1.0 / 3.0 - 0.05);
  EXPECT_GT(fit.constant, 0.0);
}
