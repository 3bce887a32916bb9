#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcmplan/scenario_io.hpp"
#include "mcmplan/seabed_domain.hpp"
#include "mcmplan/trajectory_optimizer.hpp"

namespace mcmplan {

namespace cli_detail {

struct CommonArgs {
  std::string scenario_path;
  std::string out_dir = "out";
  std::string ripples;  // empty means keep the scenario's setting
  std::uint64_t seed = 0;
  bool seed_set = false;
  int samples = 0;  // 0 means keep the scenario's counts
  int threads = 1;
  int grid_n = 101;
  std::string case_label;  // empty means derive from the scenario name
};

inline void add_common_flags(CLI::App* cmd, CommonArgs* args,
                             bool with_scenario = true) {
  if (with_scenario)
    cmd->add_option("--scenario", args->scenario_path, "Scenario file")
        ->required();
  cmd->add_option("--out", args->out_dir, "Output directory");
  cmd->add_option("--ripples", args->ripples,
                  "Override the scenario's ripple setting")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--seed", args->seed, "Override the scenario seed")
      ->each([args](const std::string&) { args->seed_set = true; });
  cmd->add_option("--samples", args->samples,
                  "Override both Monte Carlo sample counts")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--threads", args->threads, "Worker threads")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--grid", args->grid_n, "Coverage grid cells per side")
      ->check(CLI::Range(2, 4096));
  cmd->add_option("--case", args->case_label, "Label for the summary line");
}

inline Scenario load_scenario(const CommonArgs& args) {
  Scenario sc = parse_scenario(args.scenario_path);
  if (args.ripples == "on") sc.ripples_enabled = true;
  if (args.ripples == "off") sc.ripples_enabled = false;
  if (args.seed_set) {
    sc.seed = args.seed;
    sc.opt.seed = args.seed;
  }
  if (args.samples > 0) {
    sc.mc_samples_opt = args.samples;
    sc.mc_samples_report = args.samples;
  }
  return sc;
}

inline std::string default_label(const CommonArgs& args) {
  if (!args.case_label.empty()) return args.case_label;
  return std::filesystem::path(args.scenario_path).stem().string();
}

inline std::vector<Trajectory> roll_plan(
    const Scenario& sc, const std::vector<ControlSchedule>& schedules) {
  std::vector<Trajectory> out;
  out.reserve(schedules.size());
  const std::vector<VehicleState> starts = sc.start_states();
  const std::vector<VehicleParams> params = sc.vehicle_params();
  for (std::size_t v = 0; v < schedules.size(); ++v)
    out.push_back(rollout(starts[v], schedules[v], sc.dt, params[v]));
  return out;
}

inline CoverageGrid plan_coverage(const Scenario& sc,
                                  const std::vector<ControlSchedule>& schedules,
                                  int grid_n, int threads) {
  const std::optional<RippleField> field = sc.field_if_enabled();
  return coverage_grid(roll_plan(sc, schedules), sc.domain(), grid_n, grid_n,
                       sc.sensor_params(), field ? &*field : nullptr, threads);
}

inline void print_summary(const std::string& label, double risk,
                          double mission_time, double compute_seconds) {
  std::printf("case=%s risk=%.2f%% mission=%.2fs compute=%.2fs\n", label.c_str(),
              100.0 * risk, mission_time, compute_seconds);
}

inline int run_plan(const CommonArgs& args, double fixed_time) {
  const Scenario sc = load_scenario(args);
  const PlanResult plan = fixed_time > 0.0
                              ? plan_fixed_time(sc, fixed_time, args.threads)
                              : outer_min_time(sc, sc.opt, args.threads);
  const RiskReport report =
      evaluate_fixed_plan(sc, plan.schedules, plan.mission_time, args.threads);
  const CoverageGrid grid =
      plan_coverage(sc, plan.schedules, args.grid_n, args.threads);
  const std::string label = default_label(args);
  write_outputs(sc, plan, report, grid, args.out_dir, label);
  print_summary(label, report.residual_risk, plan.mission_time, plan.wall_clock);
  return 0;
}

inline int run_evaluate(const CommonArgs& args, const std::string& plan_path) {
  const auto t0 = std::chrono::steady_clock::now();
  const StoredPlan stored = load_plan(plan_path);
  const Scenario sc = load_scenario(args);
  const RiskReport report = evaluate_fixed_plan(sc, stored.schedules,
                                                stored.mission_time, args.threads);
  const CoverageGrid grid =
      plan_coverage(sc, stored.schedules, args.grid_n, args.threads);
  PlanResult as_planned;
  as_planned.mission_time = stored.mission_time;
  as_planned.schedules = stored.schedules;
  as_planned.achieved_risk = stored.achieved_risk;
  as_planned.wall_clock =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::string label = default_label(args);
  write_outputs(sc, as_planned, report, grid, args.out_dir, label);
  print_summary(label, report.residual_risk, stored.mission_time,
                as_planned.wall_clock);
  return 0;
}

inline int run_coverage(const CommonArgs& args, const std::string& plan_path) {
  const StoredPlan stored = load_plan(plan_path);
  const Scenario sc = load_scenario(args);
  const CoverageGrid grid =
      plan_coverage(sc, stored.schedules, args.grid_n, args.threads);
  std::error_code ec;
  std::filesystem::create_directories(args.out_dir, ec);
  if (ec)
    throw std::runtime_error("cannot create output directory '" +
                             args.out_dir + "': " + ec.message());
  const auto csv = std::filesystem::path(args.out_dir) / "coverage.csv";
  const auto pgm = std::filesystem::path(args.out_dir) / "coverage.pgm";
  write_coverage_csv(csv, grid);
  write_coverage_pgm(pgm, grid);
  std::printf("wrote %s and %s\n", csv.string().c_str(), pgm.string().c_str());
  return 0;
}

/// Samples the sensor and seabed weighting functions for plotting: the
/// detection-rate field around a vehicle, the heading gain curve, and
/// the position weight at a fixed heading.
inline int run_rec_grid(const CommonArgs& args, double heading_deg) {
  const Scenario sc = load_scenario(args);
  std::error_code ec;
  std::filesystem::create_directories(args.out_dir, ec);
  if (ec)
    throw std::runtime_error("cannot create output directory '" +
                             args.out_dir + "': " + ec.message());
  const SensorParams sensor = sc.vehicles[0].sensor_params();
  const RippleField field = sc.ripple_field();
  const int n = args.grid_n;

  // Detection rate around a vehicle at the origin heading east. The
  // extent tracks the outer edge of the elevation band when it exists.
  double extent = 500.0;
  const double hi_angle = sensor.eps_de + 0.5 * sensor.eps_fov;
  if (hi_angle < 0.0)
    extent = 1.5 * (sensor.height_h / std::tan(-hi_angle));
  {
    std::ofstream out(std::filesystem::path(args.out_dir) / "rec_gamma.csv");
    if (!out) throw std::runtime_error("cannot write rec_gamma.csv");
    out << "x,y,gamma\n";
    const VehicleState pose{0.0, 0.0, 0.0, 0.0};
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        const double x = -extent + (ix + 0.5) * 2.0 * extent / n;
        const double y = -extent + (iy + 0.5) * 2.0 * extent / n;
        out << detail::fmt_double(x) << ',' << detail::fmt_double(y) << ','
            << detail::fmt_double(gamma_rate(pose, Target{x, y}, sensor))
            << '\n';
      }
  }
  {
    std::ofstream out(std::filesystem::path(args.out_dir) / "rec_gain.csv");
    if (!out) throw std::runtime_error("cannot write rec_gain.csv");
    out << "heading_deg,gain\n";
    for (int i = 0; i < 720; ++i) {
      const double deg = 0.5 * i;
      out << detail::fmt_double(deg) << ','
          << detail::fmt_double(ripple_gain(deg_to_rad(deg), field)) << '\n';
    }
  }
  {
    std::ofstream out(std::filesystem::path(args.out_dir) / "rec_dom.csv");
    if (!out) throw std::runtime_error("cannot write rec_dom.csv");
    out << "x,y,dom\n";
    const DomainRect box = sc.domain();
    const double heading = deg_to_rad(heading_deg);
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        const double x = box.lo_x + (ix + 0.5) * box.width() / n;
        const double y = box.lo_y + (iy + 0.5) * box.height() / n;
        out << detail::fmt_double(x) << ',' << detail::fmt_double(y) << ','
            << detail::fmt_double(dom_weight(x, y, heading, field)) << '\n';
      }
  }
  std::printf("wrote rec_gamma.csv, rec_gain.csv, rec_dom.csv under %s\n",
              args.out_dir.c_str());
  return 0;
}

}  // namespace cli_detail

/// Entry point behind the command-line binary, exposed for testing.
inline int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Minimum-time search planning for underwater survey vehicles"};
  app.require_subcommand(1);

  cli_detail::CommonArgs plan_args;
  double fixed_time = 0.0;
  CLI::App* plan_cmd =
      app.add_subcommand("plan", "Optimize trajectories for a scenario");
  cli_detail::add_common_flags(plan_cmd, &plan_args);
  plan_cmd->add_option("--fixed-time", fixed_time,
                       "Skip the time search; optimize at this duration (s)")
      ->check(CLI::PositiveNumber);

  cli_detail::CommonArgs eval_args;
  std::string eval_plan_path;
  CLI::App* eval_cmd = app.add_subcommand(
      "evaluate", "Re-evaluate a stored plan, optionally with ripples toggled");
  cli_detail::add_common_flags(eval_cmd, &eval_args);
  eval_cmd->add_option("--plan", eval_plan_path, "Stored plan file")->required();

  cli_detail::CommonArgs cov_args;
  std::string cov_plan_path;
  CLI::App* cov_cmd =
      app.add_subcommand("coverage", "Write the coverage grid for a stored plan");
  cli_detail::add_common_flags(cov_cmd, &cov_args);
  cov_cmd->add_option("--plan", cov_plan_path, "Stored plan file")->required();

  cli_detail::CommonArgs rec_args;
  double rec_heading_deg = 45.0;
  CLI::App* rec_cmd = app.add_subcommand(
      "rec-grid", "Sample the sensor and seabed weighting functions");
  cli_detail::add_common_flags(rec_cmd, &rec_args);
  rec_cmd->add_option("--heading-deg", rec_heading_deg,
                      "Vehicle heading for the position-weight sample");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    if (rc == 0) return 0;  // help or version request
    std::cerr << app.help() << std::flush;
    return 1;
  }

  try {
    if (plan_cmd->parsed()) return cli_detail::run_plan(plan_args, fixed_time);
    if (eval_cmd->parsed())
      return cli_detail::run_evaluate(eval_args, eval_plan_path);
    if (cov_cmd->parsed()) return cli_detail::run_coverage(cov_args, cov_plan_path);
    if (rec_cmd->parsed()) return cli_detail::run_rec_grid(rec_args, rec_heading_deg);
    std::cerr << app.help() << std::flush;
    return 1;
  } catch (const InfeasibleBracketError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace mcmplan
