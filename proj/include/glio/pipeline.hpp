#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "glio/dataset.hpp"
#include "glio/geo.hpp"
#include "glio/imu.hpp"
#include "glio/io_util.hpp"
#include "glio/lidar_features.hpp"
#include "glio/mapping.hpp"
#include "glio/pose_graph.hpp"
#include "glio/registration.hpp"
#include "glio/simulator.hpp"

namespace glio {

struct PipelineConfig {
  std::string dataset_dir;
  std::string output_dir;

  Se3Pose lidar_extrinsic;  // LiDAR pose in the IMU frame
  Eigen::Vector3d gps_lever_arm{0.0, 0.0, 0.0};

  FeatureConfig features;
  RegistrationConfig registration;
  GraphConfig graph;
  SolverConfig solver;
  ImuNoiseModel imu_noise;

  double map_voxel_size = 0.2;         // [m]
  double target_cell_size = 0.5;       // [m] registration feature grid
  double spline_knot_interval = 0.1;   // [s]
  int keyframe_every_n = 5;
  double keyframe_distance = 0.5;      // [m]
  double keyframe_angle_deg = 10.0;
  int target_keyframes = 20;

  double gps_assoc_tolerance = 0.05;   // [s]
  bool use_gps = true;
  bool use_imu_factors = true;

  // A registration disagreeing with the one-frame IMU prediction beyond
  // these bounds is treated as failed; the prediction bridges the frame.
  double registration_innovation_translation = 0.5;   // [m]
  double registration_innovation_rotation_deg = 3.0;  // [deg]
  // Scan matching only yields an odometry factor when its own data
  // constrains all six degrees of freedom this well; noise on a
  // structureless scene fabricates conditioning up to ~0.04.
  double lidar_factor_min_conditioning = 0.04;
  // ... and when the converged fit is tight. A match onto inconsistent map
  // geometry "converges" with residuals orders of magnitude above a genuine
  // alignment.
  double lidar_factor_max_cost = 0.005;  // [m^2] mean cost per correspondence

  double loop_radius = 8.0;            // [m]
  int loop_exclusion = 100;            // nodes
  double loop_cost_threshold = 0.02;   // [m^2] mean cost per correspondence
  // Session links register scan features against map voxel centroids, which
  // is coarser than feature-to-feature matching; weights reflect that.
  Vector6d reloc_link_information_diag =
      (Vector6d() << 25.0, 25.0, 25.0, 100.0, 100.0, 100.0).finished();
  int reloc_link_spacing = 20;         // nodes between link attempts

  double init_window = 1.0;            // [s] stationary initialization span
  double rebase_threshold = 1e-4;      // bias movement triggering recompute

  // "auto": anchor from the dataset header when present, else the first valid
  // fix. "first-fix": always the first valid fix.
  std::string anchor_policy = "auto";
  bool debug_dump = false;
};

/// Loads a JSON config file; unknown keys are rejected. Throws
/// std::runtime_error with a descriptive message on any problem.
PipelineConfig load_pipeline_config(const std::string& path);
/// Deterministic JSON echo of the effective configuration.
std::string config_echo(const PipelineConfig& config);

/// Sensor streams feeding one run; either disk-backed or in-memory.
struct DatasetView {
  std::vector<ImuSample> imu;
  std::vector<GpsFix> gps;
  std::vector<ScanIndexEntry> scan_index;
  std::function<PointCloudFrame(int frame, double stamp)> load_scan;
  std::optional<GeoLla> anchor_hint;
  std::vector<TimedPose> ground_truth;  // empty when unavailable
};

DatasetView make_disk_dataset(const std::string& dir);
DatasetView make_memory_dataset(const SimDataset& sim);

struct GpsAccounting {
  int accepted = 0;
  int gated = 0;
  int invalid_quality = 0;
  int unassociated = 0;
  int total() const { return accepted + gated + invalid_quality + unassociated; }
};

struct OdometryReport {
  int frames = 0;
  int nodes = 0;
  int keyframes = 0;
  int registration_failures = 0;
  int loop_closures = 0;
  bool stationary_init = false;
  GpsAccounting gps;
  std::optional<TrajectoryErrorStats> ate;
};

struct OdometryOutput {
  std::vector<TimedPose> trajectory;
  Session session;
  OdometryReport report;
};

/// The staged offline pipeline: per scan, IMU prediction -> feature
/// extraction -> registration -> node + factors -> window optimization; per
/// GPS fix, ENU conversion -> gated unary factor -> window optimization; per
/// keyframe, spline undistortion -> map insertion. Output is a pure function
/// of the dataset and config bytes.
OdometryOutput run_odometry(const PipelineConfig& config,
                            const DatasetView& dataset);

class RelocalizationFailedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs odometry on a new dataset while relocalizing against a prior session;
/// merges the graphs and maps on success. Throws RelocalizationFailedError
/// when no verified link is found.
OdometryOutput run_relocalize(const PipelineConfig& config,
                              const DatasetView& dataset,
                              const Session& prior);

/// Writes trajectory.tum, session.gfz and report.txt under
/// config.output_dir.
void write_outputs(const OdometryOutput& output, const PipelineConfig& config);

std::string format_report(const OdometryReport& report,
                          const PipelineConfig& config);

}  // namespace glio
