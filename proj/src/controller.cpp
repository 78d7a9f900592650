// SPDX-License-Identifier: Apache-2.0
#include "tdgemm/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "csv_util.hpp"
#include "tdgemm/calibration.hpp"
#include "tdgemm/error.hpp"

namespace tdgemm {

namespace {

double total_distortion(std::span<const SubblockOption> chosen) {
  double d = 0;
  for (const auto& o : chosen) d += o.d_hat;
  return d;
}

void check_options(std::span<const SubblockOptions> options) {
  for (const auto& opts : options) {
    if (opts.empty() || opts.back().w != 1) throw InvalidConfigError("every subblock needs a W=1 option");
    for (std::size_t k = 1; k < opts.size(); ++k)
      if (opts[k].w >= opts[k - 1].w) throw InvalidConfigError("subblock options must be sorted by W descending");
  }
}

}  // namespace

std::vector<std::size_t> KernelPlan::w_histogram() const {
  std::vector<std::size_t> h;
  for (const auto& k : kernels) {
    for (const auto& o : k.chosen) {
      if (h.size() <= static_cast<std::size_t>(o.w)) h.resize(o.w + 1, 0);
      ++h[o.w];
    }
  }
  return h;
}

double KernelPlan::model_snr_db() const {
  double signal = 0, noise = 0;
  for (const auto& k : kernels) {
    signal += k.signal_power;
    noise += k.predicted_distortion;
  }
  if (noise == 0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal / noise);
}

double snr_to_distortion(double snr_db, std::span<const double> sigma_products, std::size_t tile_side) {
  double power = 0;
  for (double p : sigma_products) {
    if (p < 0) throw InvalidConfigError("sigma products must be non-negative");
    power += p * p;
  }
  if (std::isinf(snr_db)) return snr_db > 0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::pow(10.0, -0.1 * snr_db) * static_cast<double>(tile_side) * power;
}

double predicted_accel(std::span<const SubblockOption> chosen) {
  if (chosen.empty()) return 0.0;
  double f = 0;
  for (const auto& o : chosen) f += o.speedup_percent;
  return f / static_cast<double>(chosen.size());
}

KernelPlanEntry plan_kernel_distortion(std::span<const SubblockOptions> options, double d_kernel) {
  if (!(d_kernel >= 0)) throw InvalidConfigError("D_kernel must be non-negative");
  check_options(options);
  std::vector<std::size_t> pos(options.size(), 0);
  KernelPlanEntry e;
  for (const auto& opts : options) e.chosen.push_back(opts.front());

  double total = total_distortion(e.chosen);
  while (total > d_kernel) {
    std::size_t worst = options.size();
    for (std::size_t l = 0; l < options.size(); ++l) {
      if (pos[l] + 1 >= options[l].size()) continue;
      if (worst == options.size() || e.chosen[l].d_hat > e.chosen[worst].d_hat) worst = l;
    }
    if (worst == options.size()) break;  // everything native; cannot happen with D̂(W=1) = 0
    PruneStep step{worst, e.chosen[worst].w, 0, e.chosen[worst].d_hat, 0, 0};
    e.chosen[worst] = options[worst][++pos[worst]];
    total = total_distortion(e.chosen);
    step.to_w = e.chosen[worst].w;
    step.total_after = total;
    step.accel_after = predicted_accel(e.chosen);
    e.trace.push_back(step);
  }
  e.predicted_distortion = total;
  e.predicted_accel_percent = predicted_accel(e.chosen);
  return e;
}

KernelPlanEntry plan_kernel_throughput(std::span<const SubblockOptions> options, double f_kernel) {
  check_options(options);
  std::vector<std::size_t> pos(options.size(), 0);
  KernelPlanEntry e;
  for (const auto& opts : options) e.chosen.push_back(opts.front());
  const double best = predicted_accel(e.chosen);
  if (f_kernel > best) throw InfeasibleConstraintError("acceleration target exceeds the all-maximum-W plan", best);

  for (;;) {
    std::vector<std::size_t> order;
    for (std::size_t l = 0; l < options.size(); ++l)
      if (pos[l] + 1 < options[l].size()) order.push_back(l);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return e.chosen[x].d_hat > e.chosen[y].d_hat; });
    bool demoted = false;
    for (std::size_t l : order) {
      SubblockOption previous = e.chosen[l];
      e.chosen[l] = options[l][pos[l] + 1];
      const double accel = predicted_accel(e.chosen);
      if (accel >= f_kernel) {
        ++pos[l];
        e.trace.push_back({l, previous.w, e.chosen[l].w, previous.d_hat, total_distortion(e.chosen), accel});
        demoted = true;
        break;
      }
      e.chosen[l] = previous;
    }
    if (!demoted) break;
  }
  e.predicted_distortion = total_distortion(e.chosen);
  e.predicted_accel_percent = predicted_accel(e.chosen);
  return e;
}

SubblockOptions build_options(std::size_t l, const InputStats& stats, const PlanningTables& tables) {
  SubblockOptions out;
  if (!stats.degenerate()) {
    if (tables.calib == nullptr || tables.solutions == nullptr)
      throw CalibrationMissingError("planning needs calibration and solution tables");
    std::vector<int> ws = tables.ws;
    if (ws.empty()) {
      for (const auto& s : tables.solutions->entries())
        if (s.solution.w > 1 && std::find(ws.begin(), ws.end(), s.solution.w) == ws.end()) ws.push_back(s.solution.w);
    }
    std::sort(ws.rbegin(), ws.rend());
    for (int w : ws) {
      if (w < 2) continue;
      const double rmax = lookup_nearest_solution(*tables.solutions, stats.sigma_a, stats.sigma_b, w).solution.rmax;
      const auto point = tables.calib->find({tables.precision, tables.mode, w}, rmax);
      if (!point) throw CalibrationMissingError("no calibration point at the stored R_max");
      const CompanderSolution c = optimal_companders(stats, rmax, point->rmse, w);
      SubblockOption o;
      o.l = l;
      o.w = w;
      o.c_a = c.c_a;
      o.c_b = c.c_b;
      o.rmax = rmax;
      o.d_hat = combined_distortion(stats, c.c_a, c.c_b, point->rmse).total;
      o.speedup_percent = tables.profile != nullptr ? tables.profile->fw_percent(tables.precision, tables.mode, w)
                                                    : (w - 1) * 100.0;
      out.push_back(o);
    }
  }
  SubblockOption native;
  native.l = l;
  out.push_back(native);
  return out;
}

KernelPlan plain_plan(std::size_t rows, std::size_t inner, std::size_t cols, std::size_t tile_side) {
  if (tile_side == 0) throw InvalidConfigError("tile side must be positive");
  KernelPlan plan;
  plan.tile_side = tile_side;
  plan.kernel_rows = rows / tile_side;
  plan.kernel_cols = cols / tile_side;
  plan.inner = inner / tile_side;
  KernelPlanEntry e;
  for (std::size_t l = 0; l < plan.inner; ++l) {
    SubblockOption o;
    o.l = l;
    e.chosen.push_back(o);
  }
  plan.kernels.assign(plan.kernel_rows * plan.kernel_cols, e);
  return plan;
}

void write_plan_csv(std::ostream& out, const KernelPlan& plan) {
  out << "# version " << kTableFormatVersion << "\n";
  out << "i,j,l,W,c_a,c_b,rmax,d_hat\n";
  for (std::size_t i = 0; i < plan.kernel_rows; ++i) {
    for (std::size_t j = 0; j < plan.kernel_cols; ++j) {
      for (const auto& o : plan.at(i, j).chosen) {
        out << i << ',' << j << ',' << o.l << ',' << o.w << ',' << csv::format_double(o.c_a) << ','
            << csv::format_double(o.c_b) << ',' << csv::format_double(o.rmax) << ',' << csv::format_double(o.d_hat)
            << '\n';
      }
    }
  }
}

namespace detail {

KernelPlanEntry plan_entry(std::span<const SubblockOptions> options, std::span<const double> sigma_products,
                           std::size_t tile_side, const KernelConstraint& constraint) {
  if (constraint.target_snr_db())
    return plan_kernel_distortion(options, snr_to_distortion(*constraint.target_snr_db(), sigma_products, tile_side));
  return plan_kernel_throughput(options, *constraint.target_accel_percent());
}

}  // namespace detail

}  // namespace tdgemm
