// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tdgemm/block_major.hpp"
#include "tdgemm/calibration_table.hpp"
#include "tdgemm/config.hpp"
#include "tdgemm/error.hpp"
#include "tdgemm/noise_model.hpp"

namespace tdgemm {

// One way of computing subblock product l. D̂ is the expected error power
// per output element in the output domain; F is the speedup in percent.
struct SubblockOption {
  std::size_t l = 0;
  int w = 1;
  double c_a = 1.0;
  double c_b = 1.0;
  double rmax = 0.0;
  double d_hat = 0.0;
  double speedup_percent = 0.0;
};

// Options of one subblock, W descending; the last one is always the
// native W = 1 option with D̂ = 0.
using SubblockOptions = std::vector<SubblockOption>;

class KernelConstraint {
 public:
  static KernelConstraint snr_db(double target) { return KernelConstraint(target, std::nullopt); }
  static KernelConstraint accel_percent(double target) { return KernelConstraint(std::nullopt, target); }

  const std::optional<double>& target_snr_db() const { return snr_; }
  const std::optional<double>& target_accel_percent() const { return accel_; }

 private:
  KernelConstraint(std::optional<double> s, std::optional<double> f) : snr_(s), accel_(f) {}
  std::optional<double> snr_;
  std::optional<double> accel_;
};

struct PruneStep {
  std::size_t l = 0;
  int from_w = 1;
  int to_w = 1;
  double removed_d_hat = 0;  // D̂ of the option that was demoted
  double total_after = 0;
  double accel_after = 0;
};

struct KernelPlanEntry {
  std::vector<SubblockOption> chosen;  // indexed by l
  double predicted_distortion = 0;
  double predicted_accel_percent = 0;
  double signal_power = 0;  // L sum_l (sigma_a sigma_b)^2, the error-free output power
  std::vector<PruneStep> trace;
};

struct KernelPlan {
  PackingMode mode = PackingMode::kSymmetric;
  int u_safe = 50;
  std::size_t tile_side = 0;
  std::size_t kernel_rows = 0;  // M / L
  std::size_t kernel_cols = 0;  // N / L
  std::size_t inner = 0;        // K / L
  std::vector<KernelPlanEntry> kernels;  // row-major over (i, j)

  const KernelPlanEntry& at(std::size_t i, std::size_t j) const { return kernels.at(i * kernel_cols + j); }
  KernelPlanEntry& at(std::size_t i, std::size_t j) { return kernels.at(i * kernel_cols + j); }

  // Number of chosen subblock options per W (index = W).
  std::vector<std::size_t> w_histogram() const;

  // 10 log10(sum of kernel signal powers / sum of predicted distortions).
  double model_snr_db() const;
};

// D_kernel = 10^(-S/10) L sum_l (sigma_a,l sigma_b,l)^2; +inf dB gives 0.
double snr_to_distortion(double snr_db, std::span<const double> sigma_products, std::size_t tile_side);

// Equal-cost subblocks, so the MAC-weighted mean is a plain mean.
double predicted_accel(std::span<const SubblockOption> chosen);

// Starts every subblock at its maximum W and demotes the largest D̂ (lowest
// l on ties) one W step at a time until sum D̂ <= D_kernel.
KernelPlanEntry plan_kernel_distortion(std::span<const SubblockOptions> options, double d_kernel);

// Starts at maximum W; repeatedly demotes the largest D̂ whose demotion keeps
// the predicted acceleration >= F_kernel, skipping to the next largest
// otherwise. Throws InfeasibleConstraintError when F_kernel exceeds the
// all-maximum-W acceleration.
KernelPlanEntry plan_kernel_throughput(std::span<const SubblockOptions> options, double f_kernel);

struct PlanningTables {
  const CalibrationTable* calib = nullptr;
  const OfflineSolutionTable* solutions = nullptr;
  const SpeedupProfile* profile = nullptr;
  Precision precision = Precision::kSingle;
  PackingMode mode = PackingMode::kSymmetric;
  std::vector<int> ws;  // allowed W > 1; empty means every W in the solution table
  int u_safe = 50;
};

// Per W: nearest-sigma offline R_max*, companders recomputed from the
// runtime sigmas at that R_max*, s looked up from calibration, D̂ from the
// noise model. Degenerate statistics only get the W = 1 option.
SubblockOptions build_options(std::size_t l, const InputStats& stats, const PlanningTables& tables);

// Plans every inner kernel of a rowwise-ordered A and columnwise-ordered B.
// `constraint(i, j)` gives each kernel its own target.
template <Real T, class ConstraintFn>
KernelPlan plan_gemm(const BlockMajorMatrix<T>& a, const BlockMajorMatrix<T>& b, const PlanningTables& tables,
                     ConstraintFn&& constraint);

// All-W = 1 plan for an M x K by K x N product.
KernelPlan plain_plan(std::size_t rows, std::size_t inner, std::size_t cols, std::size_t tile_side);

// CSV dump `i,j,l,W,c_a,c_b,rmax,d_hat`.
void write_plan_csv(std::ostream& out, const KernelPlan& plan);

namespace detail {
KernelPlanEntry plan_entry(std::span<const SubblockOptions> options, std::span<const double> sigma_products,
                           std::size_t tile_side, const KernelConstraint& constraint);
}

template <Real T, class ConstraintFn>
KernelPlan plan_gemm(const BlockMajorMatrix<T>& a, const BlockMajorMatrix<T>& b, const PlanningTables& tables,
                     ConstraintFn&& constraint) {
  if (a.tile_side() != b.tile_side() || a.grid_cols() != b.grid_rows())
    throw DimensionError("block-major operands do not conform");
  KernelPlan plan;
  plan.mode = tables.mode;
  plan.u_safe = tables.u_safe;
  plan.tile_side = a.tile_side();
  plan.kernel_rows = a.grid_rows();
  plan.kernel_cols = b.grid_cols();
  plan.inner = a.grid_cols();
  plan.kernels.reserve(plan.kernel_rows * plan.kernel_cols);
  for (std::size_t i = 0; i < plan.kernel_rows; ++i) {
    for (std::size_t j = 0; j < plan.kernel_cols; ++j) {
      std::vector<SubblockOptions> options;
      std::vector<double> products;
      for (std::size_t l = 0; l < plan.inner; ++l) {
        const InputStats stats = InputStats::from_tiles(a.stats(i, l), b.stats(l, j), plan.tile_side);
        options.push_back(build_options(l, stats, tables));
        products.push_back(stats.sigma_a * stats.sigma_b);
      }
      KernelPlanEntry e = detail::plan_entry(options, products, plan.tile_side, constraint(i, j));
      for (double p : products) e.signal_power += p * p;
      e.signal_power *= static_cast<double>(plan.tile_side);
      plan.kernels.push_back(std::move(e));
    }
  }
  return plan;
}

}  // namespace tdgemm
