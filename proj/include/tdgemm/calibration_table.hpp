// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <tuple>
#include <vector>

#include "tdgemm/config.hpp"
#include "tdgemm/noise_model.hpp"

namespace tdgemm {

// One measured representation-noise point, integer domain (c_a = c_b = 1).
struct CalibrationPoint {
  double rmax = 0;
  double mean_err = 0;  // m(R_max, W)
  double rmse = 0;      // s(R_max, W), per-element RMSE
  int trials = 1;
  std::uint64_t seed = 0;

  friend bool operator==(const CalibrationPoint&, const CalibrationPoint&) = default;
};

struct CalibrationKey {
  Precision precision;
  PackingMode mode;
  int w;

  friend auto operator<=>(const CalibrationKey&, const CalibrationKey&) = default;
};

// Largest |m| / R_max for a point to be usable by the controller.
inline constexpr double kMaxRelativeBias = 1e-4;

// R_max cap for double precision W = 4, where four packings break down.
inline constexpr double kDoubleW4RmaxCap = 120000;

// Measured m(R_max, W) and s(R_max, W) curves, one strictly increasing
// R_max grid per (precision, mode, W).
class CalibrationTable {
 public:
  // Inserts or replaces the point with the same R_max, keeping the grid sorted.
  void insert(const CalibrationKey& key, const CalibrationPoint& point);

  std::vector<CalibrationPoint> slice(const CalibrationKey& key) const;

  // Points the controller may operate at: |m| / R_max below kMaxRelativeBias
  // and, for double W = 4, R_max at or below kDoubleW4RmaxCap.
  std::vector<CalibrationPoint> admitted(const CalibrationKey& key) const;

  // Point stored at exactly this R_max.
  std::optional<CalibrationPoint> find(const CalibrationKey& key, double rmax) const;

  std::vector<CalibrationKey> keys() const;
  std::size_t size() const;
  bool empty() const { return size() == 0; }

  // Tile side the curves were measured at (0 when unknown).
  std::size_t tile_side = 0;

  friend bool operator==(const CalibrationTable&, const CalibrationTable&) = default;

 private:
  std::map<CalibrationKey, std::vector<CalibrationPoint>> curves_;
};

bool admissible_point(const CalibrationKey& key, const CalibrationPoint& point);

// Measured percentile throughput gain of a packing level over W = 1.
struct SpeedupEntry {
  Precision precision;
  PackingMode mode;
  int w;
  std::size_t tile_side;
  double fw_percent;
  double mac_ratio;
  int reps;

  friend bool operator==(const SpeedupEntry&, const SpeedupEntry&) = default;
};

class SpeedupProfile {
 public:
  void insert(const SpeedupEntry& entry);
  // F_W in percent; 0 for W = 1. Throws CalibrationMissingError when absent.
  double fw_percent(Precision precision, PackingMode mode, int w) const;
  bool contains(Precision precision, PackingMode mode, int w) const;
  const std::vector<SpeedupEntry>& entries() const { return entries_; }

  // Profile derived from MAC counts alone: F_W = (W - 1) * 100%. Useful where
  // wall-clock timing must not influence results.
  static SpeedupProfile from_mac_model(Precision precision, PackingMode mode, std::size_t tile_side, int max_w);

  friend bool operator==(const SpeedupProfile&, const SpeedupProfile&) = default;

 private:
  std::vector<SpeedupEntry> entries_;
};

struct OfflineSolution {
  double sigma_a;
  double sigma_b;
  CompanderSolution solution;

  friend bool operator==(const OfflineSolution& a, const OfflineSolution& b) {
    return a.sigma_a == b.sigma_a && a.sigma_b == b.sigma_b && a.solution.w == b.solution.w &&
           a.solution.rmax == b.solution.rmax && a.solution.c_a == b.solution.c_a &&
           a.solution.c_b == b.solution.c_b && a.solution.expected_snr_db == b.solution.expected_snr_db;
  }
};

// Precomputed optimal operating points over a (sigma_a, sigma_b) grid.
class OfflineSolutionTable {
 public:
  void insert(const OfflineSolution& s) { entries_.push_back(s); }
  const std::vector<OfflineSolution>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  Precision precision = Precision::kSingle;
  PackingMode mode = PackingMode::kSymmetric;

  friend bool operator==(const OfflineSolutionTable&, const OfflineSolutionTable&) = default;

 private:
  std::vector<OfflineSolution> entries_;
};

// Current on-disk format version of all three tables.
inline constexpr int kTableFormatVersion = 1;

void save_calibration(const CalibrationTable& table, const std::filesystem::path& path);
CalibrationTable load_calibration(const std::filesystem::path& path);

void save_speedup(const SpeedupProfile& profile, const std::filesystem::path& path);
SpeedupProfile load_speedup(const std::filesystem::path& path);

void save_solutions(const OfflineSolutionTable& table, const std::filesystem::path& path);
OfflineSolutionTable load_solutions(const std::filesystem::path& path);

}  // namespace tdgemm
