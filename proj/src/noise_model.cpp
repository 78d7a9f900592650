// SPDX-License-Identifier: Apache-2.0
#include "tdgemm/noise_model.hpp"

#include <cmath>
#include <limits>

#include "tdgemm/calibration_table.hpp"
#include "tdgemm/error.hpp"

namespace tdgemm {

InputStats InputStats::from_tiles(const TileStats& a, const TileStats& b, std::size_t tile_side) {
  return InputStats{a.sigma, b.sigma, a.max_abs(), b.max_abs(), tile_side};
}

double InputStats::signal_power() const {
  const double p = sigma_a * sigma_b;
  return static_cast<double>(tile_side) * p * p;
}

bool InputStats::degenerate() const {
  return !(sigma_a > 0) || !(sigma_b > 0) || !(max_abs_a > 0) || !(max_abs_b > 0);
}

double quant_noise_power(const InputStats& stats, double c_a, double c_b) {
  if (!(c_a > 0) || !(c_b > 0)) throw InvalidConfigError("companders must be positive");
  const double sqrt12 = std::sqrt(12.0);
  const double na = 1.0 / (c_a * sqrt12);
  const double nb = 1.0 / (c_b * sqrt12);
  const double t1 = stats.sigma_a * nb;
  const double t2 = stats.sigma_b * na;
  const double t3 = na * nb;
  return static_cast<double>(stats.tile_side) * (t1 * t1 + t2 * t2 + t3 * t3);
}

double expected_snr_db(const InputStats& stats, double c_a, double c_b) {
  if (!(stats.sigma_a > 0) || !(stats.sigma_b > 0)) throw UndefinedSnrError("SNR is undefined for a zero sigma");
  return 10.0 * std::log10(stats.signal_power() / quant_noise_power(stats, c_a, c_b));
}

NoiseBudget combined_distortion(const InputStats& stats, double c_a, double c_b, double s_repr) {
  NoiseBudget b;
  b.quant_power = quant_noise_power(stats, c_a, c_b);
  const double r = s_repr / (c_a * c_b);
  b.repr_power = r * r;
  b.total = b.quant_power + b.repr_power;
  return b;
}

double snr_db(const InputStats& stats, const NoiseBudget& budget) {
  if (!(stats.sigma_a > 0) || !(stats.sigma_b > 0)) throw UndefinedSnrError("SNR is undefined for a zero sigma");
  if (budget.total == 0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(stats.signal_power() / budget.total);
}

double total_compander(const InputStats& stats, double rmax) {
  if (!(rmax >= 1)) throw InvalidConfigError("c_tot requires R_max >= 1");
  return static_cast<double>(stats.tile_side) * stats.max_abs_a * stats.max_abs_b / rmax;
}

CompanderSolution optimal_companders(const InputStats& stats, double rmax, double s_repr, int w) {
  if (stats.degenerate()) throw DegenerateInputError("optimal companders need nonzero sigmas and extremes");
  const double c_tot = total_compander(stats, rmax);
  CompanderSolution s;
  s.c_a = std::sqrt(stats.sigma_b / (stats.sigma_a * c_tot));
  s.c_b = std::sqrt(stats.sigma_a / (stats.sigma_b * c_tot));
  s.rmax = rmax;
  s.w = w;
  s.expected_snr_db = snr_db(stats, combined_distortion(stats, s.c_a, s.c_b, s_repr));
  return s;
}

double optimal_snr_db(const InputStats& stats, double rmax, double s_repr) {
  if (stats.degenerate()) throw DegenerateInputError("model SNR needs nonzero sigmas and extremes");
  const double x = total_compander(stats, rmax) / (stats.sigma_a * stats.sigma_b);
  const double repr = 144.0 * s_repr * s_repr / static_cast<double>(stats.tile_side);
  return -10.0 * std::log10(x / 6.0 + x * x * (1.0 + repr) / 144.0);
}

CompanderSolution optimize_rmax(const InputStats& stats, int w, Precision precision, PackingMode mode,
                                const CalibrationTable& calib) {
  const auto points = calib.admitted({precision, mode, w});
  if (points.empty()) throw CalibrationMissingError("no admitted calibration points for this precision/mode/W");
  const CalibrationPoint* best = nullptr;
  double best_snr = -std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    const double snr = optimal_snr_db(stats, p.rmax, p.rmse);
    if (snr > best_snr) {
      best_snr = snr;
      best = &p;
    }
  }
  return optimal_companders(stats, best->rmax, best->rmse, w);
}

std::vector<CompanderSolution> admissible_companders(const InputStats& stats, double target_db, double rmax,
                                                     double s_repr) {
  if (stats.degenerate()) throw DegenerateInputError("admissible companders need nonzero sigmas and extremes");
  if (!std::isfinite(target_db)) return {};
  const double sa = stats.sigma_a;
  const double sb = stats.sigma_b;
  const double c_tot = total_compander(stats, rmax);
  const double L = static_cast<double>(stats.tile_side);
  const double q = 12.0 * sa * sa * sb * sb * std::pow(10.0, -0.1 * target_db) -
                   c_tot * c_tot * (1.0 / 12.0 + 12.0 * s_repr * s_repr / L);
  const double edge = 2.0 * sa * sb * c_tot;
  double disc = q * q - edge * edge;
  if (q <= 0) return {};
  if (disc < 0) {
    // A target equal to the maximum lands here through rounding alone.
    if (disc < -1e-9 * edge * edge) return {};
    disc = 0;
  }
  const double root = std::sqrt(disc);
  const double denom = 2.0 * sa * sa * c_tot * c_tot;
  std::vector<CompanderSolution> out;
  for (double p : {(q + root) / denom, (q - root) / denom}) {
    if (!(p > 0)) continue;
    CompanderSolution s;
    s.c_a = std::sqrt(p);
    s.c_b = 1.0 / (c_tot * s.c_a);
    s.rmax = rmax;
    s.expected_snr_db = snr_db(stats, combined_distortion(stats, s.c_a, s.c_b, s_repr));
    out.push_back(s);
    if (root == 0) break;
  }
  return out;
}

}  // namespace tdgemm
