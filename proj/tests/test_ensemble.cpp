#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dwl/ensemble.hpp"
#include "dwl/parallel.hpp"

using namespace dwl;

namespace {

const AtomicMeasure kTwoAtom = make_measure({{-2.0, 0.5}, {2.0, 0.5}});

}  // namespace

TEST(SampleWigner, ReproducibleFromSeedAndTrial) {
  const auto spec = EnsembleSpec::for_law(40, EntryDistribution::gaussian_complex(), 123, 7);
  EXPECT_EQ(sample_wigner(spec), sample_wigner(spec));
  EXPECT_EQ(sample_wigner(spec).digest(), sample_wigner(spec).digest());
  EXPECT_FALSE(sample_wigner(spec) == sample_wigner(spec.with_trial(8)));
  auto other = spec;
  other.seed = 124;
  EXPECT_FALSE(sample_wigner(spec) == sample_wigner(other));
}

TEST(SampleWigner, IndependentOfWorkerCount) {
  const auto spec = EnsembleSpec::for_law(30, EntryDistribution::matched4_complex(), 9);
  std::vector<std::string> one(12), four(12);
  parallel_for(12, [&](int t) { one[t] = sample_wigner(spec.with_trial(t)).digest(); }, 1);
  parallel_for(12, [&](int t) { four[t] = sample_wigner(spec.with_trial(t)).digest(); }, 4);
  EXPECT_EQ(one, four);
}

TEST(SampleWigner, ExactlyHermitian) {
  for (const auto& law : {EntryDistribution::gaussian_complex(), EntryDistribution::matched4_complex(),
                          EntryDistribution::gaussian_real(), EntryDistribution::shifted_complex(0.8)}) {
    const auto m = sample_wigner(EnsembleSpec::for_law(25, law, 3));
    EXPECT_EQ(m.hermiticity_defect(), 0.0) << law.name();
    EXPECT_EQ(m.is_real(), !law.is_complex());
    for (int i = 0; i < 25; ++i) EXPECT_EQ(m(i, i).imag(), 0.0);
  }
}

TEST(SampleWigner, GueTwoByTwoMoments) {
  const auto spec = EnsembleSpec::for_law(2, EntryDistribution::gaussian_complex(), 2024);
  const int N = 100000;
  double re = 0, im = 0, abs2 = 0;
  for (int t = 0; t < N; ++t) {
    const auto z = sample_wigner(spec.with_trial(t))(0, 1);
    re += z.real();
    im += z.imag();
    abs2 += std::norm(z);
  }
  const double se = std::sqrt(0.5 / N);
  EXPECT_LE(std::abs(re / N), 3 * se);
  EXPECT_LE(std::abs(im / N), 3 * se);
  EXPECT_NEAR(abs2 / N, 1.0, 0.02);
}

TEST(SampleWigner, GoeDiagonalVariance) {
  const auto spec = EnsembleSpec::for_law(1, EntryDistribution::gaussian_real(), 77);
  const int N = 100000;
  double s2 = 0;
  for (int t = 0; t < N; ++t) s2 += std::norm(sample_wigner(spec.with_trial(t))(0, 0));
  EXPECT_NEAR(s2 / N, 2.0, 0.04);
}

TEST(SampleWigner, DiscreteSupports) {
  const auto r = sample_wigner(EnsembleSpec::for_law(20, EntryDistribution::rademacher(), 4));
  const auto m = sample_wigner(EnsembleSpec::for_law(20, EntryDistribution::matched4_real(), 4));
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) {
      EXPECT_EQ(std::abs(r(i, j).real()), 1.0);
      const double v = std::abs(m(i, j).real());
      EXPECT_TRUE(v == 0.0 || std::abs(v - std::sqrt(3.0)) < 1e-15);
    }
  EXPECT_EQ(r.hermiticity_defect(), 0.0);
}

TEST(SampleWigner, ShiftedControlHasNonzeroMean) {
  const auto m = sample_wigner(EnsembleSpec::for_law(200, EntryDistribution::shifted_complex(0.8), 5));
  double s = 0;
  int c = 0;
  for (int i = 0; i < 200; ++i)
    for (int j = i + 1; j < 200; ++j, ++c) s += m(i, j).real();
  EXPECT_NEAR(s / c, 0.8, 0.02);
}

TEST(SampleWigner, TruncationClipsAndRecenters) {
  auto spec = EnsembleSpec::for_law(50, EntryDistribution::gaussian_complex(), 8);
  spec.truncate = true;
  spec.truncation_exponent = -0.5;  // level sqrt(log 50) ~ 1.98, so clipping happens
  const double level = truncation_level(spec);
  EXPECT_NEAR(level, std::sqrt(std::log(50.0)), 1e-12);
  const auto m = sample_wigner(spec);
  EXPECT_LE(m.max_abs(), level + 1e-12);
  auto plain = spec;
  plain.truncate = false;
  EXPECT_GT(sample_wigner(plain).max_abs(), level);
  EXPECT_EQ(m.hermiticity_defect(), 0.0);
}

TEST(SampleWigner, TruncationRecentersDiscreteLaw) {
  // Asymmetric law: clipping the large atom moves the mean, which is then
  // subtracted exactly.
  const auto law = EntryDistribution::discrete({-0.5, 2.0}, {0.8, 0.2});
  auto spec = EnsembleSpec::for_law(300, law, 1);
  spec.truncate = true;
  spec.truncation_exponent = -0.75;  // level log(300)^0.25 ~ 1.54
  const double level = truncation_level(spec);
  const double shift = 0.8 * -0.5 + 0.2 * level;
  const auto m = sample_wigner(spec);
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 6; ++j) {
      const double v = m(i, j).real();
      EXPECT_TRUE(std::abs(v - (-0.5 - shift)) < 1e-12 || std::abs(v - (level - shift)) < 1e-12) << v;
    }
}

TEST(SampleWigner, RejectsComplexLawInRealEnsemble) {
  auto spec = EnsembleSpec::for_law(4, EntryDistribution::gaussian_complex(), 1);
  spec.symmetry = Symmetry::RealSymmetric;
  EXPECT_THROW(sample_wigner(spec), InvalidArgument);
  spec.n = 0;
  EXPECT_THROW(sample_wigner(spec), InvalidArgument);
}

TEST(Assemble, ZeroDiagonalIsScaledWigner) {
  const auto spec = EnsembleSpec::for_law(16, EntryDistribution::gaussian_complex(), 2);
  const auto w = assemble(spec, realize_diagonal(make_measure({{0.0, 1.0}}), 16));
  auto m = sample_wigner(spec);
  m *= 0.25;
  EXPECT_EQ(w, m);
}

TEST(Assemble, ZeroNoiseGivesSortedDiagonal) {
  const auto diag = realize_diagonal(parse_atoms("-1:0.2,0:0.3,2:0.5"), 10);
  const auto w = assemble(HermitianMatrix::zero(10), diag);
  EXPECT_EQ(eigendecompose(w, false).eigenvalues, diag.entries);
}

TEST(Assemble, DimensionMismatch) {
  const auto spec = EnsembleSpec::for_law(6, EntryDistribution::gaussian_complex(), 2);
  EXPECT_THROW(assemble(spec, realize_diagonal(kTwoAtom, 8)), InvalidArgument);
}

// ||W|| <= ||M|| / sqrt(n) + ||D|| = O(1); with a = 2 the outer edge is
// alpha ~ 3.52, so max |lambda| <= 2 + alpha + 1 leaves a wide margin.
TEST(Assemble, NormBound) {
  const double alpha = 3.5203451861;
  const int n = 1000;
  const auto diag = realize_diagonal(kTwoAtom, n);
  const auto spec = EnsembleSpec::for_law(n, EntryDistribution::gaussian_complex(), 55);
  double worst = 0;
  std::vector<double> extreme(50);
  parallel_for(50, [&](int t) {
    const auto s = eigendecompose(assemble(spec.with_trial(t), diag), false);
    extreme[t] = std::max(-s.eigenvalues.front(), s.eigenvalues.back());
  });
  for (double e : extreme) worst = std::max(worst, e);
  EXPECT_LE(worst, 2.0 + alpha + 1.0);
}

TEST(Eigendecompose, Diagonal) {
  const auto s = eigendecompose(HermitianMatrix::diagonal({1, 2, 3}), true);
  EXPECT_EQ(s.eigenvalues, (std::vector<double>{1, 2, 3}));
  ASSERT_TRUE(s.eigenvectors);
  EXPECT_NEAR((*s.eigenvectors - Eigen::MatrixXcd::Identity(3, 3)).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(Eigendecompose, TwoByTwo) {
  Eigen::MatrixXd m(2, 2);
  m << 0, 1, 1, 0;
  const auto s = eigendecompose(HermitianMatrix(m), false);
  EXPECT_NEAR(s.eigenvalues[0], -1.0, 1e-15);
  EXPECT_NEAR(s.eigenvalues[1], 1.0, 1e-15);
}

TEST(Eigendecompose, ContractOnRandomSamples) {
  for (const auto& law : {EntryDistribution::gaussian_complex(), EntryDistribution::gaussian_real()}) {
    const int n = 120;
    const auto w = assemble(EnsembleSpec::for_law(n, law, 31), realize_diagonal(kTwoAtom, n));
    const auto values = eigendecompose(w, false);
    const auto full = eigendecompose(w, true);
    EXPECT_TRUE(std::is_sorted(values.eigenvalues.begin(), values.eigenvalues.end()));
    double sum = 0;
    for (double l : values.eigenvalues) sum += l;
    EXPECT_NEAR(sum, w.trace(), 1e-9 * n);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(values.eigenvalues[i], full.eigenvalues[i], 1e-10);
    const auto& v = *full.eigenvectors;
    const Eigen::MatrixXcd wc = w.to_complex();
    EXPECT_LE((v.adjoint() * v - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-8);
    const double norm = std::max(std::abs(values.eigenvalues.front()), std::abs(values.eigenvalues.back()));
    for (int i = 0; i < n; ++i)
      EXPECT_LE((wc * v.col(i) - full.eigenvalues[i] * v.col(i)).norm(), 1e-8 * norm);
  }
}

TEST(Eigendecompose, Deterministic) {
  const auto w = assemble(EnsembleSpec::for_law(50, EntryDistribution::gaussian_complex(), 1),
                          realize_diagonal(kTwoAtom, 50));
  EXPECT_EQ(eigendecompose(w, false).eigenvalues, eigendecompose(w, false).eigenvalues);
}

TEST(Eigendecompose, RejectsNonHermitian) {
  Eigen::MatrixXd m(2, 2);
  m << 0, 1, 0.5, 0;
  EXPECT_THROW(eigendecompose(HermitianMatrix(m), false), InvalidArgument);
}

TEST(Eigendecompose, EmptyMatrix) {
  EXPECT_TRUE(eigendecompose(HermitianMatrix::zero(0), false).eigenvalues.empty());
}

// Mean spacing of 2x2 GUE (D = 0, W = M / sqrt 2). The spacing is
// sqrt(2) chi_3 / sqrt(2) = chi_3 with E chi_3 = 2 sqrt(2/pi), and a second
// oracle samples the closed-form eigenvalues with an unrelated generator.
TEST(Eigendecompose, GueTwoByTwoSpacing) {
  const auto spec = EnsembleSpec::for_law(2, EntryDistribution::gaussian_complex(), 99);
  const auto diag = realize_diagonal(make_measure({{0.0, 1.0}}), 2);
  const int N = 100000;
  double spacing = 0;
  for (int t = 0; t < N; ++t) {
    const auto s = eigendecompose(assemble(spec.with_trial(t), diag), false);
    spacing += s.eigenvalues[1] - s.eigenvalues[0];
  }
  spacing /= N;
  std::mt19937_64 gen(1);
  std::normal_distribution<double> g(0.0, 1.0);
  double oracle = 0;
  for (int t = 0; t < N; ++t) {
    const double a = g(gen), d = g(gen);
    const double br = g(gen) / std::numbers::sqrt2, bi = g(gen) / std::numbers::sqrt2;
    const double lo = 0.5 * (a + d) - std::sqrt(0.25 * (a - d) * (a - d) + br * br + bi * bi);
    const double hi = 0.5 * (a + d) + std::sqrt(0.25 * (a - d) * (a - d) + br * br + bi * bi);
    oracle += (hi - lo) / std::numbers::sqrt2;
  }
  oracle /= N;
  EXPECT_NEAR(spacing / oracle, 1.0, 0.01);
  EXPECT_NEAR(spacing, 2.0 * std::sqrt(2.0 / std::numbers::pi), 0.01 * spacing);
}

TEST(PrincipalMinor, Cases) {
  EXPECT_EQ(principal_minor(HermitianMatrix::diagonal({5.0}), 1).size(), 0);
  EXPECT_EQ(principal_minor(HermitianMatrix::diagonal({1, 2, 3}), 2), HermitianMatrix::diagonal({1, 3}));
  EXPECT_THROW(principal_minor(HermitianMatrix::diagonal({1, 2, 3}), 0), InvalidArgument);
  EXPECT_THROW(principal_minor(HermitianMatrix::diagonal({1, 2, 3}), 4), InvalidArgument);
}

TEST(PrincipalMinor, KeepsEntries) {
  const auto w = sample_wigner(EnsembleSpec::for_law(6, EntryDistribution::gaussian_complex(), 3));
  const auto m = principal_minor(w, 3);
  EXPECT_EQ(m(0, 1), w(0, 1));
  EXPECT_EQ(m(2, 4), w(3, 5));
  EXPECT_EQ(m(1, 2), w(1, 3));
}

TEST(Digest, DependsOnSpecAndDiagonal) {
  const auto spec = EnsembleSpec::for_law(10, EntryDistribution::gaussian_complex(), 1);
  const auto d1 = realize_diagonal(kTwoAtom, 10);
  const auto d2 = realize_diagonal(make_measure({{0.0, 1.0}}), 10);
  EXPECT_EQ(digest(spec, &d1), digest(spec, &d1));
  EXPECT_NE(digest(spec, &d1), digest(spec, &d2));
  EXPECT_NE(digest(spec), digest(spec.with_trial(1)));
  EXPECT_EQ(digest(spec).size(), 16u);
}

TEST(ParallelFor, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(10, [](int k) { if (k == 5) throw InvalidArgument("boom"); }, 3), InvalidArgument);
}
