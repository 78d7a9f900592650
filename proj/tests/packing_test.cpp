// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tdgemm/calibration.hpp"
#include "tdgemm/error.hpp"
#include "tdgemm/packing.hpp"

using namespace tdgemm;

TEST(Rounding, MatchesStdRound) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(-1e6, 1e6);
  for (int i = 0; i < 200000; ++i) {
    const double x = d(rng);
    ASSERT_EQ(round_half_away(x), std::round(x)) << x;
    const float f = static_cast<float>(x);
    ASSERT_EQ(round_half_away(f), std::round(f)) << f;
  }
  for (double x : {0.5, -0.5, 1.5, -1.5, 2.5, -2.5, 8388607.5, -8388607.5, 0.49999999999999994, 1e300, -0.0})
    EXPECT_EQ(std::signbit(round_half_away(x)), std::signbit(std::round(x))) << x;
  for (float x : {0.5f, -0.5f, 2.5f, -2.5f, 4194303.5f, 8388607.0f, 8388608.0f, 16777215.0f, 3e20f})
    EXPECT_EQ(round_half_away(x), std::round(x)) << x;
  EXPECT_TRUE(std::isnan(round_half_away(std::nan(""))));
  EXPECT_EQ(round_half_away(INFINITY), INFINITY);
}

TEST(Quantize, Examples) {
  EXPECT_EQ(quantize_subblock(Matrix<double>{{3.14159}}, 10).values(0, 0), 31);
  EXPECT_EQ(quantize_subblock(Matrix<double>{{-0.05}}, 10).values(0, 0), -1);
  EXPECT_EQ(quantize_subblock(Matrix<float>{{-0.05f}}, 10).values(0, 0), -1);
  const Matrix<float> ints{{1, -2}, {3, 4}};
  EXPECT_EQ(quantize_subblock(ints, 1).values, ints);
}

TEST(Quantize, OverflowAndBadCompander) {
  EXPECT_THROW(quantize_subblock(Matrix<float>{{1e7f}}, 2), OverflowError);
  EXPECT_THROW(quantize_subblock(Matrix<double>{{1e15}}, 10), OverflowError);
  EXPECT_THROW(quantize_subblock(Matrix<double>{{NAN}}, 1), OverflowError);
  EXPECT_THROW(quantize_subblock(Matrix<double>{{1}}, 0), InvalidConfigError);
}

TEST(Quantize, ErrorBoundedByHalfStep) {
  std::mt19937_64 rng(2);
  for (double c : {0.3, 1.0, 17.0}) {
    const auto m = oracle::random_uniform<double>(20, 20, 50.0, rng);
    const auto q = quantize_subblock(m, c);
    for (std::size_t i = 0; i < m.size(); ++i)
      EXPECT_LE(std::fabs(dequantize(q.values.values()[i], c, 1) - m.values()[i]), 0.5 / c + 1e-12);
  }
}

TEST(Dequantize, Examples) {
  EXPECT_EQ(dequantize(7, 1, 1), 7);
  EXPECT_DOUBLE_EQ(dequantize(31, 10, 10), 0.31);
}

TEST(Rmax, Examples) {
  EXPECT_EQ(compute_rmax(1, 1, 288, 22, 63), 399168);
  EXPECT_EQ(compute_rmax(1, 1, 288, 22, 1), 6336);
  EXPECT_EQ(compute_rmax(1, 1, 288, 22, 0), 0);
}

TEST(PackingCoefficient, Examples) {
  EXPECT_EQ(compute_z(100, 50), 0x1p-8);
  EXPECT_EQ(compute_z(32768, 50), 0x1p-17);
  EXPECT_THROW(compute_z(0, 50), InvalidConfigError);
  for (double r : {1.0, 7.0, 6336.0, 320000.0, 1e9}) {
    const double z = compute_z(r, 50);
    EXPECT_LE(z, 1.0 / (2 * r + 50));
    EXPECT_GT(2 * z, 1.0 / (2 * r + 50));
    EXPECT_EQ(static_cast<float>(z) * static_cast<float>(1 / z), 1.0f);
  }
}

TEST(ErrorFreeBound, PaperWSets) {
  const double z = compute_z(32768, 50);
  EXPECT_EQ(compute_wef(z, 32768, 0x1p-24), 2);
  EXPECT_EQ(compute_wef(z, 32768, 0x1p-53), 4);
}

// The ceil form bottoms out at 2 once (2R+1)u < 1; only the strict form reaches 1.
TEST(ErrorFreeBound, ShrinksAsZVanishes) {
  int prev = 100;
  for (int e = 17; e <= 200; e += 5) {
    const int w = compute_wef(std::ldexp(1.0, -e), 32768, 0x1p-53);
    EXPECT_LE(w, prev);
    prev = w;
  }
  EXPECT_EQ(prev, 2);
}

TEST(ErrorFreeBound, StrictFormNeverExceedsPrintedForm) {
  for (double r : {100.0, 4096.0, 32768.0, 320000.0})
    for (double u : {0x1p-24, 0x1p-53}) {
      const double z = compute_z(r, 50);
      EXPECT_LE(strict_wef(z, r, u), compute_wef(z, r, u));
    }
}

TEST(PackingConfig, RejectsOverlappingFields) {
  PackingConfig c = PackingConfig::make(PackingMode::kSymmetric, 2, 1, 1, 1000, 50);
  EXPECT_NO_THROW(c.validate(50));
  c.z = 1.0 / 1000;
  EXPECT_THROW(c.validate(50), InvalidConfigError);
  c = PackingConfig::make(PackingMode::kSymmetric, 2, 1, 1, 1000, 50);
  c.c_a = 0;
  EXPECT_THROW(c.validate(50), InvalidConfigError);
}

TEST(SymmetricPacking, HandExamples) {
  QuantizedTile<double> a{Matrix<double>{{3, -5}}, 1};
  QuantizedTile<double> b{Matrix<double>{{3}, {-5}}, 1};
  auto [pa, pb] = pack_symmetric(a, b, 2, 0.0001);
  EXPECT_DOUBLE_EQ(pa.values(0, 0), 2.9995);
  EXPECT_DOUBLE_EQ(pb.values(0, 0), -49997);
  EXPECT_EQ(pa.values.cols(), 1u);
  EXPECT_EQ(pb.values.rows(), 1u);
}

TEST(SymmetricPacking, WidthOneIsIdentity) {
  std::mt19937_64 rng(3);
  QuantizedTile<float> a{oracle::random_integers<float>(6, 6, 9, rng), 1};
  QuantizedTile<float> b{oracle::random_integers<float>(6, 6, 9, rng), 1};
  auto [pa, pb] = pack_symmetric(a, b, 1, 0.5);
  EXPECT_TRUE(bitwise_equal(pa.values, a.values));
  EXPECT_TRUE(bitwise_equal(pb.values, b.values));
}

TEST(SymmetricPacking, UnpackHandTrace) {
  const Matrix<double> packed{{7 + 10000.0 * 2 + 0.0001 * -3}};
  EXPECT_DOUBLE_EQ(packed(0, 0), 20006.9997);
  EXPECT_EQ(unpack_symmetric(packed, 0.0001)(0, 0), 7);
}

TEST(SymmetricPacking, RejectsIndivisibleTile) {
  QuantizedTile<float> a{Matrix<float>(4, 6), 1};
  QuantizedTile<float> b{Matrix<float>(6, 4), 1};
  EXPECT_THROW(pack_symmetric(a, b, 4, 0.01), DimensionError);
}

TEST(AsymmetricPacking, HandExamples) {
  QuantizedTile<double> a{Matrix<double>{{7}, {-3}}, 1};
  const auto pa = pack_asymmetric(a, 2, 0.0001);
  EXPECT_DOUBLE_EQ(pa.values(0, 0), 6.9997);
  QuantizedTile<double> one{Matrix<double>{{1}}, 1};
  const auto product = multiply_packed_asymmetric(pa, one);
  EXPECT_DOUBLE_EQ(product(0, 0), 6.9997);
  const auto r = unpack_asymmetric(product, 0.0001, 2);
  EXPECT_EQ(r(0, 0), 7);
  EXPECT_EQ(r(1, 0), -3);
  EXPECT_THROW(pack_asymmetric(QuantizedTile<double>{Matrix<double>(3, 3), 1}, 2, 0.01), DimensionError);
}

TEST(PackedMultiply, RejectsMismatchedOperands) {
  QuantizedTile<float> a{Matrix<float>(4, 4), 1};
  auto [pa, pb] = pack_symmetric(a, a, 2, 0.01);
  auto [qa, qb] = pack_symmetric(a, a, 4, 0.01);
  EXPECT_THROW(multiply_packed_symmetric(pa, qb), InvalidConfigError);
  const auto asym = pack_asymmetric(a, 2, 0.01);
  EXPECT_THROW(multiply_packed_symmetric(asym, pb), InvalidConfigError);
  EXPECT_THROW(multiply_packed_asymmetric(pa, a), InvalidConfigError);
}

TEST(PackedMultiply, MacCounts) {
  EXPECT_EQ(packed_mac_count(PackingMode::kSymmetric, 48, 2), 48ull * 48 * 48 / 2);
  for (int w = 1; w <= 4; ++w) {
    EXPECT_EQ(packed_mac_count(PackingMode::kSymmetric, 48, w), packed_mac_count(PackingMode::kAsymmetric, 48, w));
    EXPECT_EQ(packed_mac_count(PackingMode::kSymmetric, 48, w) * w, gemm_mac_count(48, 48, 48));
  }
  EXPECT_EQ(packed_storage_elements(PackingMode::kAsymmetric, 48, 2), 48u * 48 * 3 / 2);
  EXPECT_EQ(packed_storage_elements(PackingMode::kSymmetric, 48, 2), 48u * 48);
}

// Inside the strict error-free region every packed product is exact.
template <class T>
void check_exact_region(PackingMode mode, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t L = 48;
  const double u = unit_roundoff<T>();
  for (int amp : {1, 3, 9}) {
    const double rmax = compute_rmax(1, 1, L, amp, amp);
    const double z = compute_z(rmax, 50);
    const int wmax = std::min(4, strict_wef(z, rmax, u));
    for (int w = 1; w <= wmax; ++w) {
      for (int trial = 0; trial < 5; ++trial) {
        QuantizedTile<T> a{oracle::random_integers<T>(L, L, amp, rng), 1};
        QuantizedTile<T> b{oracle::random_integers<T>(L, L, amp, rng), 1};
        const auto got = packed_integer_product(a, b, mode, w, z);
        const auto want = oracle::exact_integer_product(a.values, b.values);
        for (std::size_t i = 0; i < want.size(); ++i)
          ASSERT_EQ(static_cast<std::int64_t>(got.values()[i]), want[i]) << "W=" << w << " amp=" << amp;
      }
    }
  }
}

TEST(ExactRegion, SingleSymmetric) { check_exact_region<float>(PackingMode::kSymmetric, 10); }
TEST(ExactRegion, SingleAsymmetric) { check_exact_region<float>(PackingMode::kAsymmetric, 11); }
TEST(ExactRegion, DoubleSymmetric) { check_exact_region<double>(PackingMode::kSymmetric, 12); }
TEST(ExactRegion, DoubleAsymmetric) { check_exact_region<double>(PackingMode::kAsymmetric, 13); }

TEST(GracefulDegradation, BeyondErrorFreeBoundMeanStaysNearZero) {
  // Single precision, symmetric, one packing beyond the strict bound.
  std::mt19937_64 rng(14);
  const std::size_t L = 48;
  const int amp_a = calibration_amplitude_a(L);
  const int amp_b = 40;
  const double rmax = compute_rmax(1, 1, L, amp_a, amp_b);
  const double z = compute_z(rmax, 50);
  const int w = strict_wef(z, rmax, 0x1p-24) + 1;
  ASSERT_EQ(w, 2);
  double sum = 0, sq = 0;
  std::size_t n = 0;
  for (int t = 0; t < 10; ++t) {
    QuantizedTile<float> a{oracle::random_integers<float>(L, L, amp_a, rng), 1};
    QuantizedTile<float> b{oracle::random_integers<float>(L, L, amp_b, rng), 1};
    const auto got = packed_integer_product(a, b, PackingMode::kSymmetric, w, z);
    const auto want = oracle::exact_integer_product(a.values, b.values);
    for (std::size_t i = 0; i < want.size(); ++i) {
      const double d = got.values()[i] - static_cast<double>(want[i]);
      sum += d;
      sq += d * d;
      ++n;
    }
  }
  EXPECT_GT(sq, 0.0);
  EXPECT_LT(std::fabs(sum / n) / rmax, 1e-4);
}

TEST(SubblockProduct, LosslessForIntegersAtUnitCompanders) {
  std::mt19937_64 rng(15);
  const auto a = oracle::random_integers<double>(48, 48, 5, rng);
  const auto b = oracle::random_integers<double>(48, 48, 5, rng);
  const auto config = PackingConfig::make(PackingMode::kSymmetric, 2, 1, 1, compute_rmax(1, 1, 48, 5, 5), 50);
  const auto got = packed_subblock_product(a, b, config);
  const auto want = oracle::exact_integer_product(a, b);
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_EQ(got.values()[i], static_cast<double>(want[i]));
}
