// SPDX-License-Identifier: Apache-2.0
#include "cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include <json.hpp>

#include "cli/manifest.hpp"
#include "csv_util.hpp"
#include "tdgemm/calibration.hpp"
#include "tdgemm/error.hpp"
#include "tdgemm/matrix_io.hpp"
#include "tdgemm/packing.hpp"
#include "tdgemm/tiered_gemm.hpp"

namespace tdgemm::cli {

namespace fs = std::filesystem;

namespace {

std::string table_name(const char* kind, Precision p, PackingMode m) {
  return std::string(kind) + "_" + std::string(to_string(p)) + "_" + std::string(to_string(m)) + ".csv";
}

void check_levels(std::size_t tile_side, const std::vector<int>& ws) {
  if (tile_side == 0) throw InvalidConfigError("--l must be positive");
  for (int w : ws) {
    if (w < 2) throw InvalidConfigError("packing levels must be at least 2");
    if (tile_side % static_cast<std::size_t>(w) != 0)
      throw InvalidConfigError("tile side " + std::to_string(tile_side) + " is not divisible by W=" + std::to_string(w));
  }
}

RunManifest base_manifest(const char* command, const GlobalOptions& g) {
  RunManifest m;
  m.command = command;
  m.seed = g.seed;
  m.tile_side = g.tile_side;
  m.precision = g.precision;
  m.mode = g.mode;
  m.u_safe = g.u_safe;
  return m;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (int x : v) s += (s.empty() ? "" : ",") + std::to_string(x);
  return s;
}

std::string fmt(double v) { return csv::format_double(v); }

nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  return csv::format_double(v);
}

template <Real T>
double measured_snr_db(const Matrix<T>& reference, const Matrix<T>& result) {
  double signal = 0, noise = 0;
  auto r = reference.values();
  auto x = result.values();
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double ref = r[i];
    const double d = static_cast<double>(x[i]) - ref;
    signal += ref * ref;
    noise += d * d;
  }
  if (noise == 0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal / noise);
}

template <Real T>
int multiply_impl(const GlobalOptions& g, const MultiplyOptions& o, std::ostream& log) {
  const Matrix<T> a = read_matrix<T>(o.a);
  const Matrix<T> b = read_matrix<T>(o.b);
  if (a.cols() != b.rows()) throw DimensionError("A and B are not conformable");
  const std::size_t L = g.tile_side;

  RunManifest manifest = base_manifest("multiply", g);
  manifest.input_digests[o.a.string()] = file_digest(o.a);
  manifest.input_digests[o.b.string()] = file_digest(o.b);

  KernelPlan plan;
  if (o.plain) {
    plan = plain_plan(a.rows(), a.cols(), b.cols(), L);
    manifest.flags["plain"] = "true";
  } else {
    check_levels(L, o.ws);
    const LoadedTables tables = load_tables(g);
    const PlanningTables planning = tables.planning(g, o.ws);
    const auto abm = reorder_block_major(a, L, RasterOrder::kRowwise);
    const auto bbm = reorder_block_major(b, L, RasterOrder::kColumnwise);
    const KernelConstraint constraint = o.snr_db ? KernelConstraint::snr_db(*o.snr_db)
                                                 : KernelConstraint::accel_percent(*o.accel_percent);
    plan = plan_gemm(abm, bbm, planning, [&](std::size_t, std::size_t) { return constraint; });
    if (o.snr_db) manifest.flags["snr-db"] = fmt(*o.snr_db);
    if (o.accel_percent) manifest.flags["accel-percent"] = fmt(*o.accel_percent);
    if (!o.ws.empty()) manifest.flags["w"] = join(o.ws);
    manifest.input_digests[calibration_path(g.tables, g.precision, g.mode).string()] =
        file_digest(calibration_path(g.tables, g.precision, g.mode));
    manifest.input_digests[solutions_path(g.tables, g.precision, g.mode).string()] =
        file_digest(solutions_path(g.tables, g.precision, g.mode));
    if (tables.measured_profile)
      manifest.input_digests[speedup_path(g.tables, g.precision, g.mode).string()] =
          file_digest(speedup_path(g.tables, g.precision, g.mode));
  }

  GemmCounters counters;
  const auto start = std::chrono::steady_clock::now();
  const Matrix<T> c = tiered_gemm(a, b, L, &plan, &counters);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  fs::create_directories(g.out);
  const fs::path result = o.result.empty() ? g.out / "C.bin" : o.result;
  write_matrix(result, c);
  manifest.outputs.push_back(result.string());

  nlohmann::json report;
  report["model_snr_db"] = json_number(plan.model_snr_db());
  report["mac_ratio"] = counters.mac_ratio();
  double accel = 0;
  for (const auto& k : plan.kernels) accel += k.predicted_accel_percent;
  report["predicted_accel_percent"] = plan.kernels.empty() ? 0.0 : accel / static_cast<double>(plan.kernels.size());
  nlohmann::json hist = nlohmann::json::object();
  const auto h = plan.w_histogram();
  for (std::size_t w = 1; w < h.size(); ++w)
    if (h[w]) hist[std::to_string(w)] = h[w];
  report["w_histogram"] = hist;
  if (o.verify) {
    const Matrix<T> reference = tiered_gemm<T>(a, b, L);
    const double snr = measured_snr_db(reference, c);
    report["measured_snr_db"] = json_number(snr);
    report["bitwise_equal_to_plain"] = bitwise_equal(reference, c);
    log << "measured SNR " << fmt(snr) << " dB\n";
    manifest.flags["verify"] = "true";
  }
  const fs::path report_path = g.out / "report_multiply.json";
  std::ofstream(report_path) << report.dump(2) << '\n';
  manifest.outputs.push_back(report_path.string());

  const fs::path timing_path = g.out / "timing_multiply.json";
  std::ofstream(timing_path) << nlohmann::json{{"gemm_seconds", seconds}}.dump(2) << '\n';
  manifest.timing_outputs.push_back(timing_path.string());

  if (!o.plan_csv.empty()) {
    std::ofstream pc(o.plan_csv);
    write_plan_csv(pc, plan);
    pc.close();
    manifest.outputs.push_back(o.plan_csv.string());
  }
  write_manifest(manifest, g.out);

  log << "model SNR " << fmt(plan.model_snr_db()) << " dB, MAC ratio " << fmt(counters.mac_ratio()) << ", W histogram";
  for (std::size_t w = 1; w < h.size(); ++w) log << " W" << w << "=" << h[w];
  log << ", " << seconds << " s\n";
  return 0;
}

template <Real T>
std::vector<SweepRow> sweep_impl(const GlobalOptions& g, const SweepOptions& o, const LoadedTables& tables) {
  const std::size_t L = g.tile_side;
  const std::size_t n = o.kernels;
  if (n == 0) throw InvalidConfigError("--kernels must be positive");
  check_levels(L, o.ws);
  const Matrix<T> a = sweep_input<T>(n, n, L, derive_seed(g.seed, {0xA}));
  const Matrix<T> b = sweep_input<T>(n, n, L, derive_seed(g.seed, {0xB}));
  const auto abm = reorder_block_major(a, L, RasterOrder::kRowwise);
  const auto bbm = reorder_block_major(b, L, RasterOrder::kColumnwise);
  const Matrix<T> reference = tiered_gemm<T>(a, b, L);
  const PlanningTables planning = tables.planning(g, o.ws);

  auto run = [&](const std::string& kind, double target, auto&& constraint) {
    const KernelPlan plan = plan_gemm(abm, bbm, planning, constraint);
    GemmCounters counters;
    const auto start = std::chrono::steady_clock::now();
    const Matrix<T> c = tiered_gemm(a, b, L, &plan, &counters);
    SweepRow row;
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    row.kind = kind;
    row.target = target;
    row.measured_snr_db = measured_snr_db(reference, c);
    row.model_snr_db = plan.model_snr_db();
    row.mac_ratio = counters.mac_ratio();
    double accel = 0;
    for (const auto& k : plan.kernels) accel += k.predicted_accel_percent;
    row.predicted_accel_percent = accel / static_cast<double>(plan.kernels.size());
    return row;
  };

  std::vector<SweepRow> rows;
  if (o.kind == "accel") {
    std::vector<std::size_t> order(n * n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(derive_seed(g.seed, {0xC}));
    std::shuffle(order.begin(), order.end(), rng);
    for (int step = 0; step <= 10; ++step) {
      const auto count = static_cast<std::size_t>(std::lround(step / 10.0 * static_cast<double>(n * n)));
      std::vector<char> accelerated(n * n, 0);
      for (std::size_t k = 0; k < count; ++k) accelerated[order[k]] = 1;
      const double inf = std::numeric_limits<double>::infinity();
      rows.push_back(run("accel", step * 10.0, [&](std::size_t i, std::size_t j) {
        return KernelConstraint::snr_db(accelerated[i * n + j] ? -inf : inf);
      }));
    }
  } else if (o.kind == "snr") {
    for (double s : o.snr_list)
      rows.push_back(run("snr", s, [&](std::size_t, std::size_t) { return KernelConstraint::snr_db(s); }));
  } else {
    throw InvalidConfigError("--kind must be accel or snr");
  }
  return rows;
}

}  // namespace

std::vector<int> default_packing_levels(Precision p) {
  return p == Precision::kSingle ? std::vector<int>{2} : std::vector<int>{2, 3, 4};
}

fs::path calibration_path(const fs::path& dir, Precision p, PackingMode m) {
  return dir / table_name("calibration", p, m);
}
fs::path speedup_path(const fs::path& dir, Precision p, PackingMode m) { return dir / table_name("speedup", p, m); }
fs::path solutions_path(const fs::path& dir, Precision p, PackingMode m) {
  return dir / table_name("solutions", p, m);
}

PlanningTables LoadedTables::planning(const GlobalOptions& g, std::vector<int> ws) const {
  PlanningTables t;
  t.calib = &calib;
  t.solutions = &solutions;
  t.profile = &profile;
  t.precision = g.precision;
  t.mode = g.mode;
  t.ws = std::move(ws);
  t.u_safe = g.u_safe;
  return t;
}

LoadedTables load_tables(const GlobalOptions& g) {
  LoadedTables t;
  const auto cpath = calibration_path(g.tables, g.precision, g.mode);
  const auto spath = solutions_path(g.tables, g.precision, g.mode);
  if (!fs::exists(cpath)) throw CalibrationMissingError("missing " + cpath.string() + "; run calibrate first");
  if (!fs::exists(spath)) throw CalibrationMissingError("missing " + spath.string() + "; run solutions first");
  t.calib = load_calibration(cpath);
  if (t.calib.tile_side != g.tile_side)
    throw InvalidConfigError("calibration was measured at L=" + std::to_string(t.calib.tile_side) + ", not L=" +
                             std::to_string(g.tile_side));
  t.solutions = load_solutions(spath);
  const auto ppath = speedup_path(g.tables, g.precision, g.mode);
  if (fs::exists(ppath)) {
    t.profile = load_speedup(ppath);
    t.measured_profile = true;
  } else {
    t.profile = SpeedupProfile::from_mac_model(g.precision, g.mode, g.tile_side, 4);
  }
  return t;
}

int cmd_calibrate(const GlobalOptions& g, const CalibrateOptions& o, std::ostream& log) {
  const std::vector<int> ws = o.ws.empty() ? default_packing_levels(g.precision) : o.ws;
  check_levels(g.tile_side, ws);
  const std::vector<double> grid = o.rmax.empty() ? default_rmax_grid() : o.rmax;

  CalibrationTable table;
  table.tile_side = g.tile_side;
  ReprNoiseOptions opt;
  opt.tile_side = g.tile_side;
  opt.trials = o.trials;
  opt.seed = g.seed;
  opt.u_safe = g.u_safe;
  for (int w : ws) {
    const ReprNoiseResult r = measure_repr_noise(g.precision, g.mode, w, grid, opt);
    add_slice(table, g.precision, g.mode, w, r);
    for (double skipped : r.skipped) log << "skipped R_max " << fmt(skipped) << " (below the reachable amplitude)\n";
  }

  fs::create_directories(g.tables);
  const auto path = calibration_path(g.tables, g.precision, g.mode);
  save_calibration(table, path);

  // Exact-region boundary: the printed bound and the strict one per grid point.
  const double u_sys = unit_roundoff(g.precision);
  log << "rmax,z,wef,strict_wef";
  for (int w : ws) log << ",rmse_w" << w;
  log << '\n';
  for (double rmax : grid) {
    if (rmax < 1) continue;
    const double z = compute_z(rmax, g.u_safe);
    log << fmt(rmax) << ',' << fmt(z) << ',' << compute_wef(z, rmax, u_sys) << ',' << strict_wef(z, rmax, u_sys);
    for (int w : ws) {
      const auto p = table.find({g.precision, g.mode, w}, rmax);
      log << ',' << (p ? fmt(p->rmse) : std::string("-"));
    }
    log << '\n';
  }

  RunManifest m = base_manifest("calibrate", g);
  m.flags["w"] = join(ws);
  m.flags["trials"] = std::to_string(o.trials);
  m.flags["grid_points"] = std::to_string(grid.size());
  m.outputs.push_back(path.string());
  write_manifest(m, g.out);
  return 0;
}

int cmd_profile(const GlobalOptions& g, const ProfileOptions& o, std::ostream& log) {
  std::vector<int> ws = o.ws.empty() ? default_packing_levels(g.precision) : o.ws;
  check_levels(g.tile_side, ws);
  ws.insert(ws.begin(), 1);
  SpeedupProfile profile;
  if (o.mac_model) {
    for (const auto& e : SpeedupProfile::from_mac_model(g.precision, g.mode, g.tile_side, *std::max_element(ws.begin(), ws.end())).entries())
      if (std::find(ws.begin(), ws.end(), e.w) != ws.end()) profile.insert(e);
  } else {
    profile = measure_speedup_profile(g.tile_side, g.precision, g.mode, ws, o.reps);
  }
  fs::create_directories(g.tables);
  const auto path = speedup_path(g.tables, g.precision, g.mode);
  save_speedup(profile, path);
  for (const auto& e : profile.entries())
    log << "W=" << e.w << " F_W=" << fmt(e.fw_percent) << "% MAC ratio " << fmt(e.mac_ratio) << '\n';

  RunManifest m = base_manifest("profile", g);
  m.flags["w"] = join(ws);
  m.flags["reps"] = std::to_string(o.reps);
  m.flags["mac_model"] = o.mac_model ? "true" : "false";
  // Measured profiles are timing data.
  (o.mac_model ? m.outputs : m.timing_outputs).push_back(path.string());
  write_manifest(m, g.out);
  return 0;
}

int cmd_solutions(const GlobalOptions& g, const SolutionsOptions& o, std::ostream& log) {
  const auto cpath = calibration_path(g.tables, g.precision, g.mode);
  if (!fs::exists(cpath)) throw CalibrationMissingError("missing " + cpath.string() + "; run calibrate first");
  const CalibrationTable calib = load_calibration(cpath);
  std::vector<int> ws = o.ws;
  if (ws.empty()) {
    for (const auto& k : calib.keys())
      if (k.precision == g.precision && k.mode == g.mode && k.w > 1) ws.push_back(k.w);
  }
  if (ws.empty()) throw CalibrationMissingError("calibration holds no packed levels");
  if (!(o.sigma_min > 0 && o.sigma_max >= o.sigma_min && o.per_decade > 0))
    throw InvalidConfigError("bad sigma grid");

  std::vector<double> sigmas;
  const double decades = std::log10(o.sigma_max / o.sigma_min);
  const int steps = static_cast<int>(std::lround(decades * o.per_decade));
  for (int i = 0; i <= steps; ++i) sigmas.push_back(o.sigma_min * std::pow(10.0, static_cast<double>(i) / o.per_decade));

  const OfflineSolutionTable table =
      build_offline_solutions(sigmas, ExtremesModel{}, calib, g.precision, g.mode, ws, calib.tile_side);
  fs::create_directories(g.tables);
  const auto path = solutions_path(g.tables, g.precision, g.mode);
  save_solutions(table, path);
  log << table.entries().size() << " solutions over " << sigmas.size() << "^2 sigma pairs\n";

  RunManifest m = base_manifest("solutions", g);
  m.flags["w"] = join(ws);
  m.flags["sigma_min"] = fmt(o.sigma_min);
  m.flags["sigma_max"] = fmt(o.sigma_max);
  m.flags["per_decade"] = std::to_string(o.per_decade);
  m.input_digests[cpath.string()] = file_digest(cpath);
  m.outputs.push_back(path.string());
  write_manifest(m, g.out);
  return 0;
}

int cmd_multiply(const GlobalOptions& g, const MultiplyOptions& o, std::ostream& log) {
  const int modes = (o.plain ? 1 : 0) + (o.snr_db ? 1 : 0) + (o.accel_percent ? 1 : 0);
  if (modes != 1) throw InvalidConfigError("give exactly one of --plain, --snr-db, --accel-percent");
  if (peek_matrix_precision(o.a) != g.precision && o.a.extension() != ".csv")
    throw InvalidConfigError("A is stored in a different precision than --precision");
  if (peek_matrix_precision(o.b) != g.precision && o.b.extension() != ".csv")
    throw InvalidConfigError("B is stored in a different precision than --precision");
  return g.precision == Precision::kSingle ? multiply_impl<float>(g, o, log) : multiply_impl<double>(g, o, log);
}

template <Real T>
Matrix<T> sweep_input(std::size_t tiles_r, std::size_t tiles_c, std::size_t L, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(4, 2048);
  Matrix<T> m(tiles_r * L, tiles_c * L);
  for (std::size_t tr = 0; tr < tiles_r; ++tr) {
    for (std::size_t tc = 0; tc < tiles_c; ++tc) {
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      const double e = pick(rng);
      for (std::size_t r = 0; r < L; ++r)
        for (std::size_t c = 0; c < L; ++c) m(tr * L + r, tc * L + c) = static_cast<T>(e * u(rng));
    }
  }
  return m;
}

template Matrix<float> sweep_input<float>(std::size_t, std::size_t, std::size_t, std::uint64_t);
template Matrix<double> sweep_input<double>(std::size_t, std::size_t, std::size_t, std::uint64_t);

std::vector<SweepRow> run_sweep(const GlobalOptions& g, const SweepOptions& o, const LoadedTables& tables) {
  return g.precision == Precision::kSingle ? sweep_impl<float>(g, o, tables) : sweep_impl<double>(g, o, tables);
}

int cmd_sweep(const GlobalOptions& g, const SweepOptions& o, std::ostream& log) {
  const LoadedTables tables = load_tables(g);
  const auto rows = run_sweep(g, o, tables);

  fs::create_directories(g.out);
  const fs::path path = g.out / ("sweep_" + o.kind + ".csv");
  const fs::path timing = g.out / ("sweep_" + o.kind + "_timing.csv");
  std::ofstream out(path);
  std::ofstream tout(timing);
  out << "# version " << kTableFormatVersion << "\n";
  out << "kind,target,measured_snr_db,model_snr_db,mac_ratio,predicted_accel_percent\n";
  tout << "# version " << kTableFormatVersion << "\n";
  tout << "kind,target,wall_seconds\n";
  for (const auto& r : rows) {
    out << r.kind << ',' << fmt(r.target) << ',' << fmt(r.measured_snr_db) << ',' << fmt(r.model_snr_db) << ','
        << fmt(r.mac_ratio) << ',' << fmt(r.predicted_accel_percent) << '\n';
    tout << r.kind << ',' << fmt(r.target) << ',' << r.wall_seconds << '\n';
    log << r.kind << ' ' << fmt(r.target) << ": measured " << fmt(r.measured_snr_db) << " dB, model "
        << fmt(r.model_snr_db) << " dB, MAC ratio " << fmt(r.mac_ratio) << ", " << r.wall_seconds << " s\n";
  }
  out.close();
  tout.close();

  RunManifest m = base_manifest("sweep", g);
  m.flags["kind"] = o.kind;
  m.flags["kernels"] = std::to_string(o.kernels);
  if (!o.ws.empty()) m.flags["w"] = join(o.ws);
  m.input_digests[calibration_path(g.tables, g.precision, g.mode).string()] =
      file_digest(calibration_path(g.tables, g.precision, g.mode));
  m.input_digests[solutions_path(g.tables, g.precision, g.mode).string()] =
      file_digest(solutions_path(g.tables, g.precision, g.mode));
  m.outputs.push_back(path.string());
  m.timing_outputs.push_back(timing.string());
  write_manifest(m, g.out);
  return 0;
}

}  // namespace tdgemm::cli
