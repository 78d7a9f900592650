// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tdgemm/calibration_table.hpp"
#include "tdgemm/config.hpp"
#include "tdgemm/controller.hpp"

namespace tdgemm::cli {

struct GlobalOptions {
  std::uint64_t seed = 1;
  std::size_t tile_side = 48;
  Precision precision = Precision::kSingle;
  PackingMode mode = PackingMode::kSymmetric;
  std::filesystem::path tables = "tables";
  std::filesystem::path out = "out";
  int u_safe = 50;
};

// W > 1 levels used when none are requested: {2} single, {2, 3, 4} double.
std::vector<int> default_packing_levels(Precision p);

std::filesystem::path calibration_path(const std::filesystem::path& dir, Precision p, PackingMode m);
std::filesystem::path speedup_path(const std::filesystem::path& dir, Precision p, PackingMode m);
std::filesystem::path solutions_path(const std::filesystem::path& dir, Precision p, PackingMode m);

struct LoadedTables {
  CalibrationTable calib;
  OfflineSolutionTable solutions;
  SpeedupProfile profile;
  bool measured_profile = false;  // false: MAC-count model

  PlanningTables planning(const GlobalOptions& g, std::vector<int> ws = {}) const;
};

// Calibration and solutions are required; a missing speedup profile falls
// back to the MAC-count model.
LoadedTables load_tables(const GlobalOptions& g);

struct CalibrateOptions {
  std::vector<int> ws;
  int trials = 5;
  std::vector<double> rmax;  // empty: default grid
};
int cmd_calibrate(const GlobalOptions& g, const CalibrateOptions& o, std::ostream& log);

struct ProfileOptions {
  std::vector<int> ws;
  int reps = 21;
  bool mac_model = false;
};
int cmd_profile(const GlobalOptions& g, const ProfileOptions& o, std::ostream& log);

struct SolutionsOptions {
  std::vector<int> ws;  // empty: every calibrated W
  double sigma_min = 1e-2;
  double sigma_max = 1e3;
  int per_decade = 8;
};
int cmd_solutions(const GlobalOptions& g, const SolutionsOptions& o, std::ostream& log);

struct MultiplyOptions {
  std::filesystem::path a;
  std::filesystem::path b;
  std::optional<double> snr_db;
  std::optional<double> accel_percent;
  bool plain = false;
  bool verify = false;
  std::filesystem::path result;  // empty: <out>/C.bin
  std::filesystem::path plan_csv;
  std::vector<int> ws;
};
int cmd_multiply(const GlobalOptions& g, const MultiplyOptions& o, std::ostream& log);

struct SweepOptions {
  std::string kind = "accel";  // accel | snr
  std::size_t kernels = 4;     // matrices are (kernels L) square
  std::vector<double> snr_list{20, 30, 40, 50, 60};
  std::vector<int> ws;
};

struct SweepRow {
  std::string kind;
  double target = 0;  // accelerated fraction in percent, or target SNR in dB
  double measured_snr_db = 0;
  double model_snr_db = 0;
  double mac_ratio = 1;
  double predicted_accel_percent = 0;
  double wall_seconds = 0;
};

// Sweep inputs: every L x L tile uniform on [-e, e] with e drawn uniformly
// from {4, 5, ..., 2048}.
template <Real T>
Matrix<T> sweep_input(std::size_t tiles_r, std::size_t tiles_c, std::size_t tile_side, std::uint64_t seed);

std::vector<SweepRow> run_sweep(const GlobalOptions& g, const SweepOptions& o, const LoadedTables& tables);
int cmd_sweep(const GlobalOptions& g, const SweepOptions& o, std::ostream& log);

}  // namespace tdgemm::cli
