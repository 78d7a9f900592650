// SPDX-License-Identifier: Apache-2.0
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "tdgemm/error.hpp"

using namespace tdgemm;

int main(int argc, char** argv) {
  CLI::App app{"tiered-precision GEMM with packed arithmetic"};
  app.require_subcommand(1);

  cli::GlobalOptions g;
  std::string precision = "single";
  std::string mode = "symmetric";
  app.add_option("--seed", g.seed, "base seed")->capture_default_str();
  app.add_option("--l", g.tile_side, "tile side L")->capture_default_str();
  app.add_option("--precision", precision)->check(CLI::IsMember({"single", "double"}))->capture_default_str();
  app.add_option("--mode", mode)->check(CLI::IsMember({"symmetric", "asymmetric"}))->capture_default_str();
  app.add_option("--tables", g.tables, "directory holding calibration, speedup and solution tables")
      ->capture_default_str();
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_option("--u-safe", g.u_safe, "packing guard term")->capture_default_str();

  cli::CalibrateOptions cal;
  auto* calibrate = app.add_subcommand("calibrate", "measure representation noise over the R_max grid");
  calibrate->add_option("--w", cal.ws, "packing levels (repeatable)");
  calibrate->add_option("--trials", cal.trials)->capture_default_str();
  calibrate->add_option("--rmax", cal.rmax, "explicit R_max grid");

  cli::ProfileOptions prof;
  auto* profile = app.add_subcommand("profile", "measure per-W speedup of the packed subblock pipeline");
  profile->add_option("--w", prof.ws, "packing levels (repeatable)");
  profile->add_option("--reps", prof.reps)->capture_default_str();
  profile->add_flag("--mac-model", prof.mac_model, "write F_W = (W-1)*100% instead of timing");

  cli::SolutionsOptions sol;
  auto* solutions = app.add_subcommand("solutions", "precompute optimal R_max over a sigma grid");
  solutions->add_option("--w", sol.ws, "packing levels (repeatable)");
  solutions->add_option("--sigma-min", sol.sigma_min)->capture_default_str();
  solutions->add_option("--sigma-max", sol.sigma_max)->capture_default_str();
  solutions->add_option("--per-decade", sol.per_decade)->capture_default_str();

  cli::MultiplyOptions mul;
  double snr = 0, accel = 0;
  auto* multiply = app.add_subcommand("multiply", "constrained multiply of two matrix files");
  multiply->add_option("--a", mul.a)->required();
  multiply->add_option("--b", mul.b)->required();
  auto* snr_opt = multiply->add_option("--snr-db", snr, "per-kernel SNR target");
  auto* accel_opt = multiply->add_option("--accel-percent", accel, "per-kernel acceleration target");
  auto* plain_opt = multiply->add_flag("--plain", mul.plain, "native precision everywhere");
  snr_opt->excludes(accel_opt)->excludes(plain_opt);
  accel_opt->excludes(plain_opt);
  multiply->add_flag("--verify", mul.verify, "compare against a plain run");
  multiply->add_option("--result", mul.result, "output matrix file");
  multiply->add_option("--plan-csv", mul.plan_csv, "dump the chosen plan");
  multiply->add_option("--w", mul.ws, "packing levels (repeatable)");

  cli::SweepOptions sw;
  auto* sweep = app.add_subcommand("sweep", "SNR or acceleration sweep on generated inputs");
  sweep->add_option("--kind", sw.kind)->check(CLI::IsMember({"accel", "snr"}))->capture_default_str();
  sweep->add_option("--kernels", sw.kernels, "inner kernels per matrix side")->capture_default_str();
  sweep->add_option("--snr", sw.snr_list, "SNR targets for --kind snr");
  sweep->add_option("--w", sw.ws, "packing levels (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    g.precision = parse_precision(precision);
    g.mode = parse_mode(mode);
    if (*calibrate) return cli::cmd_calibrate(g, cal, std::cout);
    if (*profile) return cli::cmd_profile(g, prof, std::cout);
    if (*solutions) return cli::cmd_solutions(g, sol, std::cout);
    if (*multiply) {
      if (*snr_opt) mul.snr_db = snr;
      if (*accel_opt) mul.accel_percent = accel;
      return cli::cmd_multiply(g, mul, std::cout);
    }
    if (*sweep) return cli::cmd_sweep(g, sw, std::cout);
  } catch (const InfeasibleConstraintError& e) {
    std::cerr << "infeasible: " << e.what() << " (achievable " << e.achievable() << "%)\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
