// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "tdgemm/block_major.hpp"
#include "tdgemm/config.hpp"

namespace tdgemm {

class CalibrationTable;

// Second-order statistics of one A/B subblock pair plus the tile extremes.
struct InputStats {
  double sigma_a = 0;
  double sigma_b = 0;
  double max_abs_a = 0;
  double max_abs_b = 0;
  std::size_t tile_side = 0;

  static InputStats from_tiles(const TileStats& a, const TileStats& b, std::size_t tile_side);

  // Expected power L (sigma_a sigma_b)^2 of an error-free output element.
  double signal_power() const;
  bool degenerate() const;
};

// Expected squared error per output element.
struct NoiseBudget {
  double quant_power = 0;
  double repr_power = 0;
  double total = 0;
};

struct CompanderSolution {
  double c_a = 0;
  double c_b = 0;
  double rmax = 0;
  double expected_snr_db = 0;
  int w = 1;
};

// Quantization noise power L[(sa snb)^2 + (sb sna)^2 + (sna snb)^2] with
// sn = 1 / (c sqrt(12)).
double quant_noise_power(const InputStats& stats, double c_a, double c_b);

// 10 log10(signal / quantization noise). Throws UndefinedSnrError for a zero sigma.
double expected_snr_db(const InputStats& stats, double c_a, double c_b);

// Quantization noise plus (s_repr / (c_a c_b))^2, where s_repr is the
// per-element RMSE of the representation error in the integer domain.
NoiseBudget combined_distortion(const InputStats& stats, double c_a, double c_b, double s_repr);

// 10 log10(signal / budget.total); +inf for a zero budget.
double snr_db(const InputStats& stats, const NoiseBudget& budget);

// c_tot = L max|A| max|B| / R_max. Optimal companders have c_a c_b = 1 / c_tot.
double total_compander(const InputStats& stats, double rmax);

// Minimum-distortion companders on the c_a c_b = 1 / c_tot manifold:
// c_a = sqrt(sb / (sa c_tot)), c_b = sqrt(sa / (sb c_tot)).
// Throws DegenerateInputError for zero sigmas or extremes.
CompanderSolution optimal_companders(const InputStats& stats, double rmax, double s_repr = 0, int w = 1);

// SNR reached by optimal_companders at this R_max. With x = c_tot / (sa sb):
// SNR = -10 log10[x / 6 + x^2 (1 + 144 s^2 / L) / 144].
double optimal_snr_db(const InputStats& stats, double rmax, double s_repr);

// Grid point of the admitted calibration slice maximizing optimal_snr_db.
// Throws CalibrationMissingError when the slice is empty.
CompanderSolution optimize_rmax(const InputStats& stats, int w, Precision precision, PackingMode mode,
                                const CalibrationTable& calib);

// Compander pairs on the R_max manifold whose model SNR equals target_db.
// Solves sa^2 c_tot^2 p^2 - Q p + sb^2 = 0 for p = c_a^2, with
// Q = 12 sa^2 sb^2 10^(-target/10) - c_tot^2 (1/12 + 12 s^2 / L).
// Returns no pair when Q < 2 sa sb c_tot, one when the roots coincide.
std::vector<CompanderSolution> admissible_companders(const InputStats& stats, double target_db, double rmax,
                                                     double s_repr);

}  // namespace tdgemm
