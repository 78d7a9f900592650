// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tdgemm/calibration_table.hpp"
#include "tdgemm/config.hpp"
#include "tdgemm/noise_model.hpp"

namespace tdgemm {

// Mixes a base seed with a key so every grid point gets its own stream.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> key);

// R_max grid: 6336 k for k = 1..63 (max|A| = 22, max|B| = k at L = 288)
// plus 320000.
std::vector<double> default_rmax_grid();

// max|A| of calibration tiles: 22 * 288 / L, so L * max|A| is the same at
// every tile side and max|B| sweeps the same R_max values.
int calibration_amplitude_a(std::size_t tile_side);

// The floor form of the error-free bound: the largest W with
// z^(W-1) >= (2 R_max + 1) u_sys. Packing at or below it is exact.
int strict_wef(double z, double rmax, double u_sys);

struct ReprNoiseOptions {
  std::size_t tile_side = 48;
  int trials = 5;
  std::uint64_t seed = 1;
  int u_safe = 50;
};

struct ReprNoiseResult {
  std::vector<CalibrationPoint> points;
  // Grid R_max values below the smallest amplitude integer tiles can reach.
  std::vector<double> skipped;
};

// Representation noise of packed multiplication with c_a = c_b = 1: integer
// tiles uniform on [-max|A|, max|A|] and [-max|B|, max|B|] with
// max|B| = floor(R_max / (L max|A|)), z from compute_z(R_max), compared
// element-wise against the exact W = 1 product in the same precision.
ReprNoiseResult measure_repr_noise(Precision precision, PackingMode mode, int w, std::span<const double> rmax_grid,
                                   const ReprNoiseOptions& options);

// Least-squares non-decreasing fit (pool adjacent violators).
std::vector<double> isotonic_nondecreasing(std::span<const double> values);

// Adds a measured slice to the table.
void add_slice(CalibrationTable& table, Precision precision, PackingMode mode, int w, const ReprNoiseResult& result);

struct PipelineTiming {
  double plain_seconds = 0;   // median
  double packed_seconds = 0;  // median
  int reps = 0;
};

// Median wall-clock of plain_subblock_gemm versus the full packed subblock
// pipeline (quantize, pack, multiply, unpack, dequantize) on random L x L
// tiles. Throws TimerResolutionError when the plain multiply is too fast
// to time reliably.
PipelineTiming time_subblock_pipeline(std::size_t tile_side, Precision precision, PackingMode mode, int w,
                                      int repetitions, std::uint64_t seed = 1);

// F_W = (t_plain / t_W - 1) * 100% per W; F_1 = 0.
SpeedupProfile measure_speedup_profile(std::size_t tile_side, Precision precision, PackingMode mode,
                                       std::span<const int> ws, int repetitions);

// Maps a standard deviation to the tile extremes expected for it.
struct ExtremesModel {
  double max_over_sigma = 1.7320508075688772;  // uniform law

  double max_abs(double sigma) const { return max_over_sigma * sigma; }
};

// Log-spaced sigma grid over [1e-2, 1e3], 8 points per decade.
std::vector<double> default_sigma_grid();

// optimize_rmax at every (sigma_a, sigma_b) grid pair and W in ws.
OfflineSolutionTable build_offline_solutions(std::span<const double> sigma_grid, const ExtremesModel& extremes,
                                             const CalibrationTable& calib, Precision precision, PackingMode mode,
                                             std::span<const int> ws, std::size_t tile_side);

// Entry with the smallest (sa - sa')^2 + (sb - sb')^2 for this W; ties go to
// the earlier entry. Throws CalibrationMissingError when W is absent.
const OfflineSolution& lookup_nearest_solution(const OfflineSolutionTable& table, double sigma_a, double sigma_b,
                                               int w);

}  // namespace tdgemm
