// SPDX-License-Identifier: Apache-2.0
#include "tdgemm/calibration.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "tdgemm/error.hpp"
#include "tdgemm/packing.hpp"

namespace tdgemm {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

template <Real T>
Matrix<T> random_integer_tile(std::size_t L, int amplitude, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dist(-amplitude, amplitude);
  Matrix<T> t(L, L);
  for (T& v : t.values()) v = static_cast<T>(dist(rng));
  return t;
}

template <Real T>
Matrix<T> random_real_tile(std::size_t L, double amplitude, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  Matrix<T> t(L, L);
  for (T& v : t.values()) v = static_cast<T>(dist(rng));
  return t;
}

template <Real T>
ReprNoiseResult measure_repr_noise_impl(PackingMode mode, int w, std::span<const double> rmax_grid,
                                        const ReprNoiseOptions& opt) {
  if (w < 2) throw InvalidConfigError("representation noise is measured for W >= 2");
  if (opt.trials < 1) throw InvalidConfigError("trials must be at least 1");
  const std::size_t L = opt.tile_side;
  if (L % static_cast<std::size_t>(w) != 0) throw DimensionError("tile side is not divisible by W");
  const int amp_a = calibration_amplitude_a(L);

  ReprNoiseResult result;
  for (double rmax : rmax_grid) {
    const double b = std::floor(rmax / (static_cast<double>(L) * amp_a));
    if (b < 1) {
      result.skipped.push_back(rmax);
      continue;
    }
    const int amp_b = static_cast<int>(b);
    const double z = compute_z(rmax, opt.u_safe);
    const std::uint64_t point_seed =
        derive_seed(opt.seed, {static_cast<std::uint64_t>(precision_of<T>()), static_cast<std::uint64_t>(mode),
                               static_cast<std::uint64_t>(w), static_cast<std::uint64_t>(rmax)});
    std::mt19937_64 rng(point_seed);

    double sum = 0;
    double sum_sq = 0;
    std::size_t n = 0;
    for (int t = 0; t < opt.trials; ++t) {
      QuantizedTile<T> qa{random_integer_tile<T>(L, amp_a, rng), 1.0};
      QuantizedTile<T> qb{random_integer_tile<T>(L, amp_b, rng), 1.0};
      const Matrix<T> exact = plain_subblock_gemm(qa.values, qb.values);
      const Matrix<T> packed = packed_integer_product(qa, qb, mode, w, z);
      auto e = exact.values();
      auto p = packed.values();
      for (std::size_t i = 0; i < e.size(); ++i) {
        const double d = static_cast<double>(p[i]) - static_cast<double>(e[i]);
        sum += d;
        sum_sq += d * d;
      }
      n += e.size();
    }
    CalibrationPoint point;
    point.rmax = rmax;
    point.mean_err = sum / static_cast<double>(n);
    point.rmse = std::sqrt(sum_sq / static_cast<double>(n));
    point.trials = opt.trials;
    point.seed = point_seed;
    result.points.push_back(point);
  }
  return result;
}

template <class F>
double median_seconds(int reps, F&& f) {
  std::vector<double> t;
  t.reserve(reps);
  for (int r = 0; r < reps; ++r) {
    const auto start = std::chrono::steady_clock::now();
    f();
    const auto stop = std::chrono::steady_clock::now();
    t.push_back(std::chrono::duration<double>(stop - start).count());
  }
  std::nth_element(t.begin(), t.begin() + t.size() / 2, t.end());
  return t[t.size() / 2];
}

// Keeps the optimizer from discarding a result that is otherwise unused.
template <Real T>
void consume(const Matrix<T>& m) {
  static volatile T sink;
  sink = m.values()[m.size() / 2];
  (void)sink;
}

template <Real T>
PipelineTiming time_pipeline_impl(std::size_t L, PackingMode mode, int w, int reps, std::uint64_t seed) {
  if (reps < 3) throw InvalidConfigError("speedup profiling needs at least 3 repetitions");
  std::mt19937_64 rng(seed);
  const Matrix<T> a = random_real_tile<T>(L, 8.0, rng);
  const Matrix<T> b = random_real_tile<T>(L, 8.0, rng);
  const InputStats stats = InputStats::from_tiles(compute_tile_stats<T>(a.values()), compute_tile_stats<T>(b.values()), L);
  const double rmax = 6336.0 * 16;
  const CompanderSolution s = optimal_companders(stats, rmax);
  const PackingConfig config = PackingConfig::make(mode, w, s.c_a, s.c_b, rmax, 50);

  // Warm-up pass for both paths.
  consume(plain_subblock_gemm(a, b));
  consume(packed_subblock_product(a, b, config));

  PipelineTiming t;
  t.reps = reps;
  t.plain_seconds = median_seconds(reps, [&] { consume(plain_subblock_gemm(a, b)); });
  t.packed_seconds = median_seconds(reps, [&] { consume(packed_subblock_product(a, b, config)); });
  if (t.plain_seconds < 20e-6)
    throw TimerResolutionError("plain subblock multiply took under 20us; use a larger tile side");
  return t;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> key) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t k : key) h = splitmix64(h ^ splitmix64(k));
  return h;
}

std::vector<double> default_rmax_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 63; ++k) grid.push_back(6336.0 * k);
  grid.push_back(320000.0);
  std::sort(grid.begin(), grid.end());
  return grid;
}

int calibration_amplitude_a(std::size_t tile_side) {
  if (tile_side == 0) throw InvalidConfigError("tile side must be positive");
  return std::max(1, static_cast<int>(std::lround(22.0 * 288.0 / static_cast<double>(tile_side))));
}

int strict_wef(double z, double rmax, double u_sys) {
  if (!(z > 0 && z < 1)) throw InvalidConfigError("strict_wef requires 0 < z < 1");
  const double bound = std::floor(std::log((2.0 * rmax + 1.0) * u_sys) / std::log(z) + 1.0);
  return bound < 1 ? 1 : static_cast<int>(bound);
}

ReprNoiseResult measure_repr_noise(Precision precision, PackingMode mode, int w, std::span<const double> rmax_grid,
                                   const ReprNoiseOptions& options) {
  return precision == Precision::kSingle ? measure_repr_noise_impl<float>(mode, w, rmax_grid, options)
                                         : measure_repr_noise_impl<double>(mode, w, rmax_grid, options);
}

std::vector<double> isotonic_nondecreasing(std::span<const double> values) {
  struct Block {
    double sum;
    std::size_t count;
    double mean() const { return sum / static_cast<double>(count); }
  };
  std::vector<Block> blocks;
  for (double v : values) {
    blocks.push_back({v, 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
      const Block top = blocks.back();
      blocks.pop_back();
      blocks.back().sum += top.sum;
      blocks.back().count += top.count;
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& b : blocks) out.insert(out.end(), b.count, b.mean());
  return out;
}

void add_slice(CalibrationTable& table, Precision precision, PackingMode mode, int w, const ReprNoiseResult& result) {
  for (const auto& p : result.points) table.insert({precision, mode, w}, p);
}

PipelineTiming time_subblock_pipeline(std::size_t tile_side, Precision precision, PackingMode mode, int w,
                                      int repetitions, std::uint64_t seed) {
  return precision == Precision::kSingle ? time_pipeline_impl<float>(tile_side, mode, w, repetitions, seed)
                                         : time_pipeline_impl<double>(tile_side, mode, w, repetitions, seed);
}

SpeedupProfile measure_speedup_profile(std::size_t tile_side, Precision precision, PackingMode mode,
                                       std::span<const int> ws, int repetitions) {
  SpeedupProfile profile;
  for (int w : ws) {
    if (w == 1) {
      profile.insert({precision, mode, 1, tile_side, 0.0, 1.0, repetitions});
      continue;
    }
    const PipelineTiming t = time_subblock_pipeline(tile_side, precision, mode, w, repetitions);
    const double mac_ratio = static_cast<double>(gemm_mac_count(tile_side, tile_side, tile_side)) /
                             static_cast<double>(packed_mac_count(mode, tile_side, w));
    profile.insert({precision, mode, w, tile_side, (t.plain_seconds / t.packed_seconds - 1.0) * 100.0, mac_ratio,
                    repetitions});
  }
  return profile;
}

std::vector<double> default_sigma_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 5 * 8; ++i) grid.push_back(std::pow(10.0, -2.0 + i / 8.0));
  return grid;
}

OfflineSolutionTable build_offline_solutions(std::span<const double> sigma_grid, const ExtremesModel& extremes,
                                             const CalibrationTable& calib, Precision precision, PackingMode mode,
                                             std::span<const int> ws, std::size_t tile_side) {
  OfflineSolutionTable table;
  table.precision = precision;
  table.mode = mode;
  for (int w : ws) {
    if (calib.admitted({precision, mode, w}).empty())
      throw CalibrationMissingError("missing calibration for W=" + std::to_string(w));
  }
  for (double sa : sigma_grid) {
    for (double sb : sigma_grid) {
      const InputStats stats{sa, sb, extremes.max_abs(sa), extremes.max_abs(sb), tile_side};
      for (int w : ws) table.insert({sa, sb, optimize_rmax(stats, w, precision, mode, calib)});
    }
  }
  return table;
}

const OfflineSolution& lookup_nearest_solution(const OfflineSolutionTable& table, double sigma_a, double sigma_b,
                                               int w) {
  const OfflineSolution* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& e : table.entries()) {
    if (e.solution.w != w) continue;
    const double da = sigma_a - e.sigma_a;
    const double db = sigma_b - e.sigma_b;
    const double d = da * da + db * db;
    if (d < best_d) {
      best_d = d;
      best = &e;
    }
  }
  if (best == nullptr) throw CalibrationMissingError("no offline solution for W=" + std::to_string(w));
  return *best;
}

}  // namespace tdgemm
