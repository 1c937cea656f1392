// Command-line entry points: dataset simulation, odometry, session reuse,
// trajectory evaluation and map export.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "glio/dataset.hpp"
#include "glio/mapping.hpp"
#include "glio/pipeline.hpp"
#include "glio/simulator.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitDatasetError = 3;
constexpr int kExitRelocFailed = 4;

struct CommonArgs {
  std::string config_path;
  std::string dataset_dir;
  std::string out_dir;
  bool no_gps = false;
  bool no_imu_factors = false;
  bool debug_dump = false;
};

glio::PipelineConfig build_config(const CommonArgs& args) {
  glio::PipelineConfig cfg;
  if (!args.config_path.empty()) {
    cfg = glio::load_pipeline_config(args.config_path);
  }
  if (!args.dataset_dir.empty()) cfg.dataset_dir = args.dataset_dir;
  if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
  if (args.no_gps) cfg.use_gps = false;
  if (args.no_imu_factors) cfg.use_imu_factors = false;
  if (args.debug_dump) cfg.debug_dump = true;
  if (cfg.dataset_dir.empty()) {
    throw std::runtime_error("config: no dataset directory given");
  }
  if (cfg.output_dir.empty()) {
    throw std::runtime_error("config: no output directory given");
  }
  return cfg;
}

int run_sim(const std::string& world_name, const std::string& out,
            std::uint64_t seed, double duration, int points_per_ring,
            double gps_sigma, double range_sigma, double speed) {
  glio::WorldSpec wspec;
  if (world_name != "empty") wspec.preset = world_name;

  glio::TrajectoryParams tp;
  tp.cruise_speed = speed;

  glio::SimConfig sim;
  sim.duration = duration;
  sim.seed = seed;
  sim.lidar.points_per_ring = points_per_ring;
  sim.lidar.range_sigma = range_sigma;
  sim.gps.horizontal_sigma = gps_sigma;
  sim.gps.vertical_sigma = 2.5 * gps_sigma;
  sim.imu_bias_truth.gyro = {2e-4, -1e-4, 3e-4};
  sim.imu_bias_truth.accel = {0.02, -0.015, 0.01};
  sim.trajectory_first_stamp = -2.0 * tp.knot_interval;
  sim.knot_interval = tp.knot_interval;

  if (world_name == "box-street") {
    sim.trajectory_control = glio::make_loop_trajectory(
        wspec.loop_x, wspec.loop_y, 12.0, duration, tp,
        sim.trajectory_first_stamp);
  } else {
    sim.trajectory_control = glio::make_straight_trajectory(
        duration, tp, sim.trajectory_first_stamp);
  }

  const glio::WorldModel world = glio::generate_world(wspec);
  const glio::SimDataset dataset = glio::simulate_dataset(world, sim);
  glio::write_dataset(dataset, sim, out);
  std::printf("dataset written to %s: %zu imu, %zu scans, %zu gps\n",
              out.c_str(), dataset.imu.size(), dataset.scans.size(),
              dataset.gps.size());
  return kExitOk;
}

void print_ate_table(const std::string& name,
                     const glio::TrajectoryErrorStats& s) {
  std::printf("%-20s %9s %9s %9s %9s\n", "dataset", "max (m)", "min (m)",
              "mean (m)", "SD (m)");
  std::printf("%-20s %9.4f %9.4f %9.4f %9.4f\n", name.c_str(), s.max_m, s.min_m,
              s.mean_m, s.sd_m);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GPS-aided LiDAR-inertial odometry and mapping"};
  app.require_subcommand(1);

  // sim
  auto* sim = app.add_subcommand("sim", "generate a synthetic dataset");
  std::string sim_world = "box-street";
  std::string sim_out;
  std::uint64_t sim_seed = 1;
  double sim_duration = 30.0;
  int sim_ppr = 900;
  double sim_gps_sigma = 2.0;
  double sim_range_sigma = 0.02;
  double sim_speed = 8.0;
  sim->add_option("--world", sim_world, "empty | box-street | open-harbor");
  sim->add_option("--out", sim_out, "output dataset directory")->required();
  sim->add_option("--seed", sim_seed, "random seed");
  sim->add_option("--duration", sim_duration, "session length [s]");
  sim->add_option("--points-per-ring", sim_ppr, "LiDAR azimuth steps");
  sim->add_option("--gps-sigma", sim_gps_sigma, "horizontal GPS sigma [m]");
  sim->add_option("--range-sigma", sim_range_sigma, "LiDAR range sigma [m]");
  sim->add_option("--speed", sim_speed, "cruise speed [m/s]");

  // shared run/reloc flags
  CommonArgs run_args, reloc_args;
  auto add_common = [](CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON config file");
    cmd->add_option("--dataset", args.dataset_dir, "dataset directory");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_flag("--no-gps", args.no_gps, "disable GPS fusion");
    cmd->add_flag("--no-imu-factors", args.no_imu_factors,
                  "disable preintegration factors");
    cmd->add_flag("--debug-dump", args.debug_dump,
                  "dump registration correspondences");
  };
  auto* run = app.add_subcommand("run", "run odometry on a dataset");
  add_common(run, run_args);
  auto* reloc = app.add_subcommand("reloc", "reuse a prior session");
  add_common(reloc, reloc_args);
  std::string reloc_session;
  reloc->add_option("--session", reloc_session, "prior session.gfz")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "trajectory vs ground truth");
  std::string eval_traj, eval_gt, eval_name = "run";
  eval->add_option("--traj", eval_traj, "estimated trajectory (TUM)")
      ->required();
  eval->add_option("--gt", eval_gt, "ground-truth trajectory (TUM)")
      ->required();
  eval->add_option("--name", eval_name, "row label");

  // export-map
  auto* exp = app.add_subcommand("export-map", "session map to ASCII points");
  std::string exp_session, exp_out;
  exp->add_option("--session", exp_session, "session.gfz")->required();
  exp->add_option("--out", exp_out, "output text file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      return run_sim(sim_world, sim_out, sim_seed, sim_duration, sim_ppr,
                     sim_gps_sigma, sim_range_sigma, sim_speed);
    }
    if (run->parsed()) {
      glio::PipelineConfig cfg;
      try {
        cfg = build_config(run_args);
      } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return kExitConfigError;
      }
      const glio::DatasetView data = glio::make_disk_dataset(cfg.dataset_dir);
      const glio::OdometryOutput out = glio::run_odometry(cfg, data);
      glio::write_outputs(out, cfg);
      std::cout << glio::format_report(out.report, cfg);
      return kExitOk;
    }
    if (reloc->parsed()) {
      glio::PipelineConfig cfg;
      try {
        cfg = build_config(reloc_args);
      } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return kExitConfigError;
      }
      const glio::Session prior = glio::load_session(reloc_session);
      const glio::DatasetView data = glio::make_disk_dataset(cfg.dataset_dir);
      try {
        const glio::OdometryOutput out = glio::run_relocalize(cfg, data, prior);
        glio::write_outputs(out, cfg);
        std::cout << glio::format_report(out.report, cfg);
      } catch (const glio::RelocalizationFailedError& e) {
        std::cerr << e.what() << '\n';
        return kExitRelocFailed;
      }
      return kExitOk;
    }
    if (eval->parsed()) {
      const auto traj = glio::read_tum_trajectory(eval_traj);
      const auto gt = glio::read_tum_trajectory(eval_gt);
      print_ate_table(eval_name, glio::evaluate_trajectory(traj, gt));
      return kExitOk;
    }
    if (exp->parsed()) {
      const glio::Session session = glio::load_session(exp_session);
      glio::export_map_ascii(session.map, exp_out);
      std::printf("%zu voxels written to %s\n", session.map.voxel_count(),
                  exp_out.c_str());
      return kExitOk;
    }
  } catch (const glio::DatasetError& e) {
    std::cerr << e.what() << '\n';
    return kExitDatasetError;
  } catch (const glio::SessionLoadError& e) {
    std::cerr << "session load failed in section '" << e.section()
              << "': " << e.what() << '\n';
    return kExitDatasetError;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kExitConfigError;
  }
  return kExitOk;
}
