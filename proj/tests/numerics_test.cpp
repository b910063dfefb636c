#include "onestep/numerics.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"

using namespace onestep;
namespace tu = onestep::testutil;

// Known-answer vectors from the Random123 distribution (philox4x32-10).
TEST(Rng, PhiloxKnownAnswerVectors) {
  auto zero = Rng::philox_block(0, 0, 0);
  EXPECT_EQ(zero[0], 0x6627e8d5u);
  EXPECT_EQ(zero[1], 0xe169c58du);
  EXPECT_EQ(zero[2], 0xbc57ac4cu);
  EXPECT_EQ(zero[3], 0x9b00dbd8u);

  auto ones = Rng::philox_block(0xFFFFFFFFFFFFFFFFull, 0xFFFFFFFFFFFFFFFFull,
                                0xFFFFFFFFFFFFFFFFull);
  EXPECT_EQ(ones[0], 0x408f276du);
  EXPECT_EQ(ones[1], 0x41c83b0eu);
  EXPECT_EQ(ones[2], 0xa20bc7c6u);
  EXPECT_EQ(ones[3], 0x6d5451fdu);

  auto pi = Rng::philox_block(0x299f31d0a4093822ull, 0x0370734413198a2eull,
                              0x85a308d3243f6a88ull);
  EXPECT_EQ(pi[0], 0xd16cfe09u);
  EXPECT_EQ(pi[1], 0x94fdccebu);
  EXPECT_EQ(pi[2], 0x5001e420u);
  EXPECT_EQ(pi[3], 0x24126ea1u);
}

TEST(Rng, EqualSeedsReproduceSequences) {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
  Rng c(42), d(43);
  bool all_equal = true;
  for (int i = 0; i < 16; ++i) all_equal &= (c.next_u64() == d.next_u64());
  EXPECT_FALSE(all_equal);
}

TEST(Rng, ChildStreamsAreIndependentAndDeterministic) {
  Rng root(7);
  Rng a = root.child(0), a2 = root.child(0), b = root.child(1);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next_u64(), a2.next_u64());
  Rng a3 = Rng(7).child(0), b2 = Rng(7).child(1);
  EXPECT_NE(a3.next_u64(), b2.next_u64());
  // grandchildren from different parents must not collide
  EXPECT_NE(Rng(7).child(0).child(1).stream(), Rng(7).child(1).child(0).stream());
}

TEST(Rng, GaussianMomentsConverge) {
  Rng rng(123);
  const int n = 1000000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double g = rng.next_gaussian();
    sum += g;
    sum2 += g * g;
  }
  double mean = sum / n;
  double var = sum2 / n - mean * mean;
  EXPECT_LT(std::abs(mean), 0.01);
  EXPECT_LT(std::abs(var - 1.0), 0.02);
}

TEST(Rng, UniformRangeStaysInBoundsAndCoversValues) {
  Rng rng(5);
  std::vector<int> hits(9, 0);
  for (int i = 0; i < 9000; ++i) {
    uint64_t v = rng.next_range(2, 10);
    ASSERT_GE(v, 2u);
    ASSERT_LE(v, 10u);
    hits[v - 2]++;
  }
  for (int h : hits) EXPECT_GT(h, 700);  // ~1000 expected per bucket
  EXPECT_THROW(rng.next_range(3, 2), std::invalid_argument);
}

TEST(ComplexGaussian, ZeroStdGivesZeroMatrix) {
  Rng rng(1);
  ComplexMatrix z = sample_complex_gaussian(rng, 3, 4, 0.0);
  for (auto& v : z.data) EXPECT_EQ(v, cdouble(0.0, 0.0));
}

TEST(ComplexGaussian, NegativeStdRejected) {
  Rng rng(1);
  EXPECT_THROW(sample_complex_gaussian(rng, 2, 2, -0.5), std::invalid_argument);
}

TEST(ComplexGaussian, UnitPowerLawOfLargeNumbers) {
  Rng rng(99);
  ComplexMatrix z = sample_complex_gaussian(rng, 250, 400, 1.0);  // 1e5 entries
  double p = squared_norm(z) / z.size();
  EXPECT_GT(p, 0.98);
  EXPECT_LT(p, 1.02);
}

TEST(ComplexGaussian, SameSeedBitIdentical) {
  Rng a(2024), b(2024);
  ComplexMatrix za = sample_complex_gaussian(a, 5, 7, 1.3);
  ComplexMatrix zb = sample_complex_gaussian(b, 5, 7, 1.3);
  EXPECT_TRUE(tu::bit_equal(za, zb));
}

TEST(ComplexGaussian, RealImagUncorrelated) {
  Rng rng(314);
  const int n = 1000000;
  double sr = 0, si = 0, srr = 0, sii = 0, sri = 0;
  for (int i = 0; i < n; ++i) {
    double a, b;
    rng.next_gaussian_pair(a, b);
    sr += a;
    si += b;
    srr += a * a;
    sii += b * b;
    sri += a * b;
  }
  double mr = sr / n, mi = si / n;
  double cov = sri / n - mr * mi;
  double rho = cov / std::sqrt((srr / n - mr * mr) * (sii / n - mi * mi));
  EXPECT_LT(std::abs(rho), 0.01);
}

TEST(ComplexMatrix, ShapeValidation) {
  EXPECT_THROW(ComplexMatrix(0, 3), std::invalid_argument);
  ComplexMatrix m(2, 3);
  EXPECT_EQ(m.size(), 6u);
  EXPECT_TRUE(all_finite(m));
  m.at(1, 2) = cdouble(std::numeric_limits<double>::quiet_NaN(), 0.0);
  EXPECT_FALSE(all_finite(m));
}

TEST(FiniteDiff, QuadraticGradient) {
  auto f = [](const std::vector<double>& p) {
    double s = 0;
    for (double v : p) s += v * v;
    return s;
  };
  auto g = finite_diff_gradient(f, {1.0, 2.0}, 1e-5);
  EXPECT_NEAR(g[0], 2.0, 1e-8);
  EXPECT_NEAR(g[1], 4.0, 1e-8);
}

TEST(FiniteDiff, ConstantFunctionZeroGradient) {
  auto f = [](const std::vector<double>&) { return 3.5; };
  auto g = finite_diff_gradient(f, {0.3, -0.7, 2.0}, 1e-5);
  for (double v : g) EXPECT_EQ(v, 0.0);
}

TEST(FiniteDiff, NonFiniteEvaluationNamesIndex) {
  auto f = [](const std::vector<double>& p) {
    return p[1] > 1.0 ? std::numeric_limits<double>::infinity() : 0.0;
  };
  try {
    finite_diff_gradient(f, {0.0, 1.0}, 1e-3);
    FAIL() << "expected throw";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("coordinate 1"), std::string::npos);
  }
}
