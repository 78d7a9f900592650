// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tdgemm/calibration.hpp"
#include "tdgemm/calibration_table.hpp"
#include "tdgemm/error.hpp"
#include "tdgemm/noise_model.hpp"
#include "tdgemm/packing.hpp"

using namespace tdgemm;

namespace {

InputStats unit_stats(std::size_t L) { return InputStats{1, 1, 1, 1, L}; }

// Error power of quantize -> exact product -> dequantize against the exact
// real product, over every output element of `tiles` random tile pairs.
double monte_carlo_quant_power(double sa, double sb, double ca, double cb, bool gaussian, int tiles,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t L = 48;
  double sq = 0;
  std::size_t n = 0;
  for (int t = 0; t < tiles; ++t) {
    const auto a = gaussian ? oracle::random_gaussian<double>(L, L, sa, rng)
                            : oracle::random_uniform<double>(L, L, sa * std::sqrt(3.0), rng);
    const auto b = gaussian ? oracle::random_gaussian<double>(L, L, sb, rng)
                            : oracle::random_uniform<double>(L, L, sb * std::sqrt(3.0), rng);
    const auto qa = quantize_subblock(a, ca);
    const auto qb = quantize_subblock(b, cb);
    const auto exact = oracle::naive_gemm(a, b);
    const auto quant = oracle::exact_integer_product(qa.values, qb.values);
    for (std::size_t i = 0; i < quant.size(); ++i) {
      const double d = dequantize(static_cast<double>(quant[i]), ca, cb) - exact.values()[i];
      sq += d * d;
      ++n;
    }
  }
  return sq / n;
}

}  // namespace

TEST(QuantNoise, ClosedFormExample) {
  EXPECT_NEAR(quant_noise_power(unit_stats(4), 1, 1), 25.0 / 36.0, 1e-15);
  EXPECT_NEAR(expected_snr_db(unit_stats(4), 1, 1), 10 * std::log10(4 / (25.0 / 36.0)), 1e-12);
  EXPECT_NEAR(10 * std::log10(4 / (25.0 / 36.0)), 7.60, 0.005);
}

TEST(QuantNoise, VanishesWithLargeCompanders) {
  EXPECT_LT(quant_noise_power(unit_stats(48), 1e6, 1e6), 1e-10);
}

TEST(QuantNoise, TenfoldCompandersAddTwentyDecibels) {
  const InputStats s{2, 3, 6, 9, 48};
  EXPECT_NEAR(expected_snr_db(s, 100, 100) - expected_snr_db(s, 10, 10), 20.0, 0.01);
}

TEST(QuantNoise, SymmetricUnderOperandSwap) {
  const InputStats s{2, 2, 5, 5, 48};
  EXPECT_EQ(quant_noise_power(s, 3, 3), quant_noise_power(InputStats{2, 2, 5, 5, 48}, 3, 3));
  const InputStats ab{2, 5, 5, 5, 48};
  const InputStats ba{5, 2, 5, 5, 48};
  EXPECT_DOUBLE_EQ(quant_noise_power(ab, 3, 7), quant_noise_power(ba, 7, 3));
}

TEST(QuantNoise, UndefinedSnrForZeroSigma) {
  EXPECT_THROW(expected_snr_db(InputStats{0, 1, 1, 1, 4}, 1, 1), UndefinedSnrError);
}

TEST(QuantNoise, MonteCarloMatchesClosedForm) {
  for (bool gaussian : {false, true}) {
    for (auto [ca, cb] : {std::pair{1.0, 1.0}, std::pair{4.0, 2.0}, std::pair{10.0, 10.0}}) {
      const InputStats s{2.0, 1.5, 0, 0, 48};
      const double mc = monte_carlo_quant_power(2.0, 1.5, ca, cb, gaussian, 40, 7);
      EXPECT_NEAR(mc / quant_noise_power(s, ca, cb), 1.0, 0.04) << gaussian << ' ' << ca << ' ' << cb;
    }
  }
}

TEST(QuantNoise, DoublingCompanderCutsItsTermFourfold) {
  // sigma_b dominates and c_b is large, so the c_a term carries the power.
  const double base = monte_carlo_quant_power(1.0, 10.0, 20.0, 1000.0, false, 20, 8);
  const double doubled = monte_carlo_quant_power(1.0, 10.0, 40.0, 1000.0, false, 20, 8);
  EXPECT_NEAR(base / doubled, 4.0, 0.3);
}

TEST(CombinedDistortion, Terms) {
  const InputStats s{1, 2, 3, 4, 48};
  EXPECT_EQ(combined_distortion(s, 2, 3, 0).total, quant_noise_power(s, 2, 3));
  const auto b = combined_distortion(s, 1, 1, 3);
  EXPECT_EQ(b.repr_power, 9);
  EXPECT_EQ(b.total, b.quant_power + b.repr_power);
  EXPECT_EQ(snr_db(s, NoiseBudget{}), INFINITY);
}

TEST(TotalCompander, Examples) {
  const InputStats s{1, 1, 22, 63, 288};
  EXPECT_DOUBLE_EQ(total_compander(s, 399168), 1.0);
  EXPECT_DOUBLE_EQ(total_compander(s, 2 * 399168), 0.5);
}

TEST(OptimalCompanders, Examples) {
  InputStats s{1, 1, 1, 1, 1};
  const double rmax_for_ctot_001 = 100;  // c_tot = 1 * 1 * 1 / 100
  auto sol = optimal_companders(s, rmax_for_ctot_001);
  EXPECT_DOUBLE_EQ(sol.c_a, 10);
  EXPECT_DOUBLE_EQ(sol.c_b, 10);
  s = InputStats{4, 1, 1, 1, 1};
  sol = optimal_companders(s, 1);
  EXPECT_DOUBLE_EQ(sol.c_a, 0.5);
  EXPECT_DOUBLE_EQ(sol.c_b, 2);
  EXPECT_THROW(optimal_companders(InputStats{0, 1, 1, 1, 4}, 10), DegenerateInputError);
}

TEST(OptimalCompanders, ProductInvariantAndRmaxRoundTrip) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(-2, 3);
  for (int i = 0; i < 200; ++i) {
    const double sa = std::pow(10, d(rng)), sb = std::pow(10, d(rng));
    const InputStats s{sa, sb, 1.7 * sa, 1.9 * sb, 48};
    const double rmax = std::round(std::pow(10, 2 + d(rng)));
    const auto sol = optimal_companders(s, rmax);
    EXPECT_LT(std::fabs(sol.c_a * sol.c_b * total_compander(s, rmax) - 1), 1e-12);
    EXPECT_NEAR(compute_rmax(sol.c_a, sol.c_b, 48, s.max_abs_a, s.max_abs_b), rmax, 1.0);
  }
}

TEST(OptimalCompanders, MinimizeDistortionOnProductManifold) {
  const InputStats s{3, 0.2, 6, 0.5, 48};
  const double rmax = 50000, srep = 4;
  const auto sol = optimal_companders(s, rmax, srep);
  const double best = combined_distortion(s, sol.c_a, sol.c_b, srep).total;
  const double product = sol.c_a * sol.c_b;
  for (double f = 0.2; f < 5; f *= 1.05) {
    const double ca = sol.c_a * f;
    EXPECT_GE(combined_distortion(s, ca, product / ca, srep).total, best * (1 - 1e-12));
  }
}

TEST(OptimalSnr, ClosedFormEqualsSubstitution) {
  const InputStats s{3, 0.2, 6, 0.5, 48};
  for (double rmax : {1e3, 1e4, 1e5})
    for (double srep : {0.0, 2.0, 50.0})
      EXPECT_NEAR(optimal_snr_db(s, rmax, srep), optimal_companders(s, rmax, srep).expected_snr_db, 1e-9);
}

TEST(OptimizeRmax, QuantizationOnlyPicksLargestGridPoint) {
  CalibrationTable t;
  for (double r : {1000.0, 5000.0, 20000.0}) t.insert({Precision::kSingle, PackingMode::kSymmetric, 2}, {r, 0, 0, 5, 1});
  const auto sol = optimize_rmax(InputStats{1, 1, 1.7, 1.7, 48}, 2, Precision::kSingle, PackingMode::kSymmetric, t);
  EXPECT_EQ(sol.rmax, 20000);
  EXPECT_THROW(optimize_rmax(InputStats{1, 1, 1.7, 1.7, 48}, 3, Precision::kSingle, PackingMode::kSymmetric, t),
               CalibrationMissingError);
}

TEST(OptimizeRmax, KneeInRepresentationNoise) {
  CalibrationTable t;
  const CalibrationKey key{Precision::kSingle, PackingMode::kSymmetric, 2};
  std::vector<double> snr;
  for (int k = 1; k <= 40; ++k) {
    const double r = 1000.0 * k;
    const double s = k <= 20 ? 0.0 : std::pow(k - 20, 3.0) * 10;
    t.insert(key, {r, 0, s, 5, 1});
    snr.push_back(optimal_snr_db(InputStats{1, 1, 1.7, 1.7, 48}, r, s));
  }
  const auto sol = optimize_rmax(InputStats{1, 1, 1.7, 1.7, 48}, 2, Precision::kSingle, PackingMode::kSymmetric, t);
  EXPECT_GE(sol.rmax, 20000);
  EXPECT_LE(sol.rmax, 24000);
  // Unimodal: rises to the maximum, then falls.
  const auto peak = std::max_element(snr.begin(), snr.end()) - snr.begin();
  for (long i = 1; i <= peak; ++i) EXPECT_GE(snr[i], snr[i - 1]);
  for (std::size_t i = peak + 1; i < snr.size(); ++i) EXPECT_LE(snr[i], snr[i - 1]);
}

TEST(AdmissibleCompanders, InfeasibleTargetGivesNothing) {
  const InputStats s{2, 1, 4, 2, 48};
  const double top = optimal_snr_db(s, 30000, 3);
  EXPECT_TRUE(admissible_companders(s, top + 0.5, 30000, 3).empty());
}

TEST(AdmissibleCompanders, MaximumTargetCoincidesWithOptimum) {
  const InputStats s{2, 1, 4, 2, 48};
  const auto opt = optimal_companders(s, 30000, 3);
  const auto roots = admissible_companders(s, opt.expected_snr_db, 30000, 3);
  ASSERT_FALSE(roots.empty());
  for (const auto& r : roots) {
    EXPECT_NEAR(r.c_a / opt.c_a, 1.0, 1e-4);
    EXPECT_NEAR(r.c_b / opt.c_b, 1.0, 1e-4);
  }
}

TEST(AdmissibleCompanders, RootsReproduceTarget) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> d(-1, 2);
  for (int i = 0; i < 100; ++i) {
    const double sa = std::pow(10, d(rng)), sb = std::pow(10, d(rng));
    const InputStats s{sa, sb, 1.7 * sa, 1.7 * sb, 48};
    const double top = optimal_snr_db(s, 50000, 2);
    const double target = top - 1 - 10 * std::fabs(d(rng));
    const auto roots = admissible_companders(s, target, 50000, 2);
    ASSERT_EQ(roots.size(), 2u);
    for (const auto& r : roots) {
      EXPECT_NEAR(r.expected_snr_db, target, 0.01);
      EXPECT_LT(std::fabs(r.c_a * r.c_b * total_compander(s, 50000) - 1), 1e-12);
    }
  }
}

TEST(CombinedDistortion, MonteCarloPipelineWithRepresentationNoise) {
  // Single precision, symmetric, W = 2 at an R_max with real representation noise.
  const std::size_t L = 48;
  const double rmax = 6336.0 * 40;
  ReprNoiseOptions opt;
  opt.tile_side = L;
  opt.trials = 5;
  const auto calib = measure_repr_noise(Precision::kSingle, PackingMode::kSymmetric, 2, std::vector<double>{rmax}, opt);
  ASSERT_EQ(calib.points.size(), 1u);
  const double srep = calib.points[0].rmse;
  ASSERT_GT(srep, 0);

  std::mt19937_64 rng(11);
  const double ea = 3.0, eb = 0.5;
  const InputStats s{ea / std::sqrt(3.0), eb / std::sqrt(3.0), ea, eb, L};
  const auto sol = optimal_companders(s, rmax, srep);
  const auto config = PackingConfig::make(PackingMode::kSymmetric, 2, sol.c_a, sol.c_b, rmax, 50);
  double sq = 0;
  std::size_t n = 0;
  for (int t = 0; t < 30; ++t) {
    const auto a = oracle::random_uniform<float>(L, L, ea, rng);
    const auto b = oracle::random_uniform<float>(L, L, eb, rng);
    const auto got = packed_subblock_product(a, b, config);
    Matrix<double> ad(L, L), bd(L, L);
    std::copy(a.values().begin(), a.values().end(), ad.values().begin());
    std::copy(b.values().begin(), b.values().end(), bd.values().begin());
    const auto ref = oracle::naive_gemm(ad, bd);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      const double d = got.values()[i] - ref.values()[i];
      sq += d * d;
      ++n;
    }
  }
  const auto budget = combined_distortion(s, sol.c_a, sol.c_b, srep);
  ASSERT_GT(budget.repr_power, 0.1 * budget.quant_power);
  EXPECT_NEAR(sq / n / budget.total, 1.0, 0.10);
}
