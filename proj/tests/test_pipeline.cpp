#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "glio/pipeline.hpp"

using namespace glio;

namespace {

// Small seeded box-street dataset shared by the pipeline tests.
struct MiniWorld {
  WorldModel world;
  SimConfig sim;
  SimDataset data;

  explicit MiniWorld(double duration = 8.0, std::uint64_t seed = 7) {
    WorldSpec spec;
    spec.preset = "box-street";
    spec.loop_x = 80.0;
    spec.loop_y = 50.0;
    spec.building_spacing = 18.0;
    world = generate_world(spec);

    TrajectoryParams tp;
    tp.stationary_time = 1.5;
    tp.cruise_speed = 6.0;
    sim.duration = duration;
    sim.seed = seed;
    sim.lidar.points_per_ring = 360;
    sim.lidar.range_sigma = 0.02;
    sim.gps.horizontal_sigma = 2.0;
    sim.gps.vertical_sigma = 5.0;
    sim.imu_bias_truth.gyro = {2e-4, -1e-4, 3e-4};
    sim.imu_bias_truth.accel = {0.02, -0.015, 0.01};
    sim.trajectory_first_stamp = -1.0;
    sim.knot_interval = tp.knot_interval;
    sim.trajectory_control =
        make_loop_trajectory(spec.loop_x, spec.loop_y, 10.0, duration, tp, -1.0);
    data = simulate_dataset(world, sim);
  }
};

PipelineConfig mini_config() {
  PipelineConfig cfg;
  cfg.features.azimuth_bins = 360;
  return cfg;
}

std::string temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace

TEST_CASE("pipeline: fused run on a mini loop stays close to ground truth") {
  const MiniWorld mini;
  const DatasetView view = make_memory_dataset(mini.data);
  const PipelineConfig cfg = mini_config();

  const OdometryOutput out = run_odometry(cfg, view);
  CHECK(out.report.frames == static_cast<int>(mini.data.scans.size()));
  CHECK(out.report.nodes == out.report.frames);
  CHECK(out.report.stationary_init);
  CHECK(out.report.keyframes > 0);
  REQUIRE(out.report.ate.has_value());
  CHECK(out.report.ate->mean_m < 0.5);

  // Every GPS fix is accounted for.
  CHECK(out.report.gps.total() == static_cast<int>(mini.data.gps.size()));
  CHECK(out.report.gps.accepted > 0);

  // The session snapshot carries the anchor and a bounded map.
  CHECK(out.session.graph.anchor().has_value());
  CHECK(out.session.map.voxel_count() > 0);
}

TEST_CASE("pipeline: determinism of repeated runs") {
  const MiniWorld mini(5.0);
  const DatasetView view = make_memory_dataset(mini.data);
  const PipelineConfig cfg = mini_config();

  const OdometryOutput a = run_odometry(cfg, view);
  const OdometryOutput b = run_odometry(cfg, view);
  REQUIRE(a.trajectory.size() == b.trajectory.size());
  for (std::size_t k = 0; k < a.trajectory.size(); ++k) {
    CHECK(a.trajectory[k].stamp == b.trajectory[k].stamp);
    CHECK((a.trajectory[k].pose.translation - b.trajectory[k].pose.translation)
              .norm() == 0.0);
    CHECK(a.trajectory[k].pose.rotation.quaternion().coeffs() ==
          b.trajectory[k].pose.rotation.quaternion().coeffs());
  }
}

TEST_CASE("pipeline: every non-initial node carries at least one factor") {
  const MiniWorld mini(5.0);
  const DatasetView view = make_memory_dataset(mini.data);
  const OdometryOutput out = run_odometry(mini_config(), view);

  std::vector<int> touched(out.session.graph.node_count(), 0);
  for (const auto& slot : out.session.graph.factors()) {
    if (!slot) continue;
    if (const auto* p = std::get_if<PreintegrationFactor>(&*slot)) {
      touched[p->i]++;
      touched[p->j]++;
    } else if (const auto* l = std::get_if<LidarOdometryFactor>(&*slot)) {
      touched[l->i]++;
      touched[l->j]++;
    } else if (const auto* lc = std::get_if<LoopClosureFactor>(&*slot)) {
      touched[lc->i]++;
      touched[lc->j]++;
    } else if (const auto* g = std::get_if<GpsFactor>(&*slot)) {
      touched[g->i]++;
    }
  }
  for (std::size_t k = 1; k < touched.size(); ++k) {
    CHECK(touched[k] > 0);
  }
}

TEST_CASE("pipeline: open harbor degrades gracefully, fusion still bounded") {
  WorldSpec spec;
  spec.preset = "open-harbor";
  const WorldModel world = generate_world(spec);

  TrajectoryParams tp;
  tp.stationary_time = 1.5;
  tp.cruise_speed = 6.0;
  SimConfig sim;
  // Long enough for dead-reckoning drift to dominate once registration
  // degenerates.
  sim.duration = 90.0;
  sim.seed = 3;
  sim.lidar.points_per_ring = 360;
  sim.gps.horizontal_sigma = 2.0;
  sim.gps.vertical_sigma = 5.0;
  sim.imu_bias_truth.gyro = {2e-4, -1e-4, 3e-4};
  sim.imu_bias_truth.accel = {0.02, -0.015, 0.01};
  sim.trajectory_first_stamp = -1.0;
  sim.trajectory_control = make_straight_trajectory(sim.duration, tp, -1.0);
  const SimDataset data = simulate_dataset(world, sim);
  const DatasetView view = make_memory_dataset(data);

  PipelineConfig fused = mini_config();
  const OdometryOutput with_gps = run_odometry(fused, view);
  CHECK(with_gps.report.registration_failures > 0);  // featureless scans
  REQUIRE(with_gps.report.ate.has_value());

  PipelineConfig lidar_only = fused;
  lidar_only.use_gps = false;
  const OdometryOutput without_gps = run_odometry(lidar_only, view);
  REQUIRE(without_gps.report.ate.has_value());

  CHECK(with_gps.report.ate->mean_m < without_gps.report.ate->mean_m);
}

TEST_CASE("pipeline: GPS dropouts are counted as invalid quality") {
  MiniWorld mini(5.0);
  mini.sim.gps.dropouts = {{2.0, 4.0}};
  mini.data = simulate_dataset(mini.world, mini.sim);
  const DatasetView view = make_memory_dataset(mini.data);
  const OdometryOutput out = run_odometry(mini_config(), view);
  CHECK(out.report.gps.invalid_quality == 2);
  CHECK(out.report.gps.total() == static_cast<int>(mini.data.gps.size()));
}

TEST_CASE("config file load, echo and validation") {
  const std::string dir = temp_dir("glio_cfg_test");
  const std::string path = dir + "/config.json";
  {
    std::ofstream os(path);
    os << R"({"keyframe_every_n": 3, "features": {"edge_threshold": 0.7},
             "solver": {"gps_information_diag": [0.5, 0.5, 0.05]}})";
  }
  const PipelineConfig cfg = load_pipeline_config(path);
  CHECK(cfg.keyframe_every_n == 3);
  CHECK(cfg.features.edge_threshold == 0.7);
  CHECK(cfg.solver.gps_information_diag.x() == 0.5);

  // Echo is deterministic and reparses onto the same values.
  const std::string echo1 = config_echo(cfg);
  const std::string echo2 = config_echo(cfg);
  CHECK(echo1 == echo2);

  {
    std::ofstream os(path);
    os << R"({"not_a_key": 1})";
  }
  CHECK_THROWS(load_pipeline_config(path));
}

TEST_CASE("pipeline: relocalization against the prior session") {
  const MiniWorld mini(8.0, 11);
  const DatasetView view = make_memory_dataset(mini.data);
  const PipelineConfig cfg = mini_config();

  const OdometryOutput first = run_odometry(cfg, view);

  // Second pass over the same loop (a rerun of the recorded session).
  MiniWorld second(8.0, 11);
  const DatasetView view2 = make_memory_dataset(second.data);
  const OdometryOutput merged = run_relocalize(cfg, view2, first.session);

  CHECK(merged.session.graph.node_count() >
        first.session.graph.node_count());
  REQUIRE(merged.report.ate.has_value());
  CHECK(merged.report.ate->mean_m < 1.0);

  // The scene was already covered: merged map growth stays small.
  const double growth =
      static_cast<double>(merged.session.map.voxel_count()) /
      static_cast<double>(first.session.map.voxel_count());
  CHECK(growth < 1.10);

  // Merged session round trips through persistence.
  const std::string path = temp_dir("glio_reloc") + "/merged.gfz";
  save_session(merged.session, path);
  const Session reloaded = load_session(path);
  CHECK(reloaded.graph.node_count() == merged.session.graph.node_count());
}

TEST_CASE("pipeline: disjoint dataset fails relocalization") {
  const MiniWorld mini(5.0, 21);
  const DatasetView view = make_memory_dataset(mini.data);
  const PipelineConfig cfg = mini_config();
  const OdometryOutput first = run_odometry(cfg, view);

  // A session far away: shift the prior's anchor so the new run lands 500 m
  // off every prior node.
  Session moved = first.session;
  GeoLla anchor = *moved.graph.anchor();
  anchor.latitude += 500.0 / 6378137.0;  // ~500 m north
  moved.graph.anchor() = anchor;

  CHECK_THROWS_AS(run_relocalize(cfg, view, moved), RelocalizationFailedError);
}
