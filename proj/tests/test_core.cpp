#include <rewl1/ensembles.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

using namespace rewl1;

namespace {

const RngStream kStream{7, 3};

TEST(Rng, StreamsArePureFunctionsOfSeedAndId) {
  RngReader a(kStream), b(kStream);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  RngReader c(RngStream{7, 4});
  RngReader d(kStream);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += c.next_u64() == d.next_u64();
  EXPECT_EQ(same, 0);
  EXPECT_NE(kStream.substream(0), kStream.substream(1));
}

TEST(Rng, UniformAndNormalMoments) {
  RngReader r(kStream);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LE(u, 1.0);
  }
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(GaussianMatrix, NormalizedColumnsHaveUnitNorm) {
  const Matrix a = gen_gaussian_matrix(3, 5, true, kStream);
  for (Index j = 0; j < 5; ++j) EXPECT_NEAR(a.col(j).norm(), 1.0, 1e-12);
}

TEST(GaussianMatrix, EntryStatistics) {
  const Matrix a = gen_gaussian_matrix(100, 256, false, kStream);
  const double mean = a.mean();
  const double var = (a.array() - mean).square().sum() / static_cast<double>(a.size() - 1);
  EXPECT_NEAR(mean, 0.0, 0.02);
  EXPECT_NEAR(var, 1.0, 0.05);
}

TEST(GaussianMatrix, Deterministic) {
  EXPECT_EQ(gen_gaussian_matrix(20, 30, false, kStream), gen_gaussian_matrix(20, 30, false, kStream));
  EXPECT_NE(gen_gaussian_matrix(20, 30, false, kStream), gen_gaussian_matrix(20, 30, false, kStream.substream(1)));
}

TEST(BernoulliMatrix, EntriesAreSigns) {
  const Matrix a = gen_bernoulli_matrix(2, 2, kStream);
  for (Index i = 0; i < a.size(); ++i) EXPECT_TRUE(a.data()[i] == 1.0 || a.data()[i] == -1.0);
}

TEST(BernoulliMatrix, BalancedAndDeterministic) {
  const Matrix a = gen_bernoulli_matrix(30, 512, kStream);
  const double frac = static_cast<double>((a.array() > 0).count()) / static_cast<double>(a.size());
  EXPECT_GE(frac, 0.48);
  EXPECT_LE(frac, 0.52);
  EXPECT_EQ(a, gen_bernoulli_matrix(30, 512, kStream));
}

TEST(Signal, ZeroSparsityGivesZeroVector) {
  const auto g = gen_signal({SignalKind::sparse_gaussian, 256, 0}, kStream);
  EXPECT_TRUE(g.x0.isZero(0.0));
  EXPECT_TRUE(g.support.empty());
}

TEST(Signal, CompressibleMagnitudes) {
  const auto g = gen_signal({SignalKind::compressible, 4, 0, 0.5}, kStream);
  std::vector<double> mags;
  for (Index i = 0; i < 4; ++i) mags.push_back(std::abs(g.x0[i]));
  std::sort(mags.rbegin(), mags.rend());
  EXPECT_DOUBLE_EQ(mags[0], 1.0);
  EXPECT_DOUBLE_EQ(mags[1], 0.25);
  EXPECT_DOUBLE_EQ(mags[2], 1.0 / 9.0);
  EXPECT_DOUBLE_EQ(mags[3], 1.0 / 16.0);
}

TEST(Signal, CompressibleLinfIsOne) {
  for (double p : {0.4, 0.7, 1.1}) {
    const auto g = gen_signal({SignalKind::compressible, 256, 0, p}, kStream);
    EXPECT_EQ(g.x0.lpNorm<Eigen::Infinity>(), 1.0);
  }
}

TEST(Signal, BernoulliSpikes) {
  const auto g = gen_signal({SignalKind::sparse_bernoulli, 256, 38}, kStream);
  EXPECT_EQ(l0_count(g.x0), 38);
  EXPECT_EQ(g.support.size(), 38u);
  for (Index i : g.support) EXPECT_EQ(std::abs(g.x0[i]), 1.0);
}

TEST(Signal, SparsityIsExactAndSupportUniform) {
  std::vector<int> hits(64, 0);
  for (int t = 0; t < 2000; ++t) {
    const auto g = gen_signal({SignalKind::sparse_gaussian, 64, 8}, RngStream{1, static_cast<std::uint64_t>(t)});
    ASSERT_EQ(l0_count(g.x0), 8);
    ASSERT_EQ(static_cast<Index>(g.support.size()), l0_count(g.x0));
    for (Index i : g.support) ++hits[static_cast<std::size_t>(i)];
  }
  // expected 250 hits per position; binomial sd about 15
  for (int h : hits) {
    EXPECT_GT(h, 170);
    EXPECT_LT(h, 330);
  }
}

TEST(Signal, RejectsKAboveN) {
  EXPECT_THROW(gen_signal({SignalKind::sparse_gaussian, 4, 5}, kStream), Error);
  EXPECT_THROW(gen_dantzig_signal(4, 5, kStream), Error);
}

TEST(Signal, SameStreamSameSignal) {
  const SignalSpec spec{SignalKind::sparse_gaussian, 100, 10};
  EXPECT_EQ(gen_signal(spec, kStream).x0, gen_signal(spec, kStream).x0);
}

TEST(DantzigSignal, MagnitudesAtLeastOne) {
  const auto g = gen_dantzig_signal(256, 8, kStream);
  EXPECT_EQ(l0_count(g.x0), 8);
  for (Index i : g.support) EXPECT_GE(std::abs(g.x0[i]), 1.0);
}

TEST(DantzigSignal, MeanMagnitude) {
  double total = 0.0;
  int count = 0;
  for (int t = 0; t < 1250; ++t) {
    const auto g = gen_dantzig_signal(64, 8, RngStream{5, static_cast<std::uint64_t>(t)});
    for (Index i : g.support) {
      total += std::abs(g.x0[i]);
      ++count;
    }
  }
  EXPECT_EQ(count, 10000);
  EXPECT_NEAR(total / count, 1.0 + std::sqrt(2.0 / std::numbers::pi), 0.02);
}

TEST(ProblemInstance, Validation) {
  EXPECT_THROW(ProblemInstance(Matrix::Ones(2, 3), Vector::Ones(3)), Error);
  ProblemInstance p(Matrix::Ones(2, 3), Vector::Ones(2));
  p.column_normalized = true;
  EXPECT_THROW(p.validate(), Error);
  EXPECT_THROW(ProblemInstance(Matrix::Ones(2, 3), Vector::Ones(2), -1.0), Error);
}

}  // namespace
