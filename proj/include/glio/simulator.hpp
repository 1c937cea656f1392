#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "glio/dataset.hpp"
#include "glio/geo.hpp"
#include "glio/geometry.hpp"
#include "glio/imu.hpp"
#include "glio/io_util.hpp"
#include "glio/lidar_features.hpp"

namespace glio {

/// Finite rectangular patch: center, outward normal, in-plane axes and half
/// extents.
struct PlanePrimitive {
  Eigen::Vector3d center{0.0, 0.0, 0.0};
  Eigen::Vector3d normal{0.0, 0.0, 1.0};
  Eigen::Vector3d u_axis{1.0, 0.0, 0.0};
  Eigen::Vector3d v_axis{0.0, 1.0, 0.0};
  double half_u = 1.0, half_v = 1.0;
  bool is_ground = false;
};

struct EdgeSegment {
  Eigen::Vector3d a{0.0, 0.0, 0.0};
  Eigen::Vector3d b{0.0, 0.0, 0.0};
};

struct WorldModel {
  std::vector<PlanePrimitive> planes;
  std::vector<EdgeSegment> edges;
  GeoLla anchor;
};

/// Declarative world description. Built-in presets: "" (ground plane only),
/// "box-street" (building facades lining a rectangular street loop) and
/// "open-harbor" (a single wide ground plane).
struct WorldSpec {
  std::string preset;
  GeoLla anchor = GeoLla::from_degrees(47.39, 8.54, 420.0);
  double ground_z = -1.5;         // [m] ground height; the ENU origin is the
                                  // vehicle start point, above the ground
  double ground_extent = 800.0;   // [m] half-extent of the ground plane
  double loop_x = 300.0;          // [m] street rectangle, x side
  double loop_y = 200.0;          // [m] street rectangle, y side
  double building_offset = 10.0;  // [m] facade distance from the street line
  double building_spacing = 16.0; // [m] distance between building centers
  double building_width = 9.0;    // [m]
  double building_depth = 6.0;    // [m]
  double building_height = 7.0;   // [m]
};

WorldModel generate_world(const WorldSpec& spec);

/// Evaluates a uniform cumulative B-spline trajectory and its analytic first
/// and second derivatives; supplies poses, body angular rates and world
/// accelerations for sensor synthesis.
class TrajectorySampler {
 public:
  TrajectorySampler(std::vector<Se3Pose> control, double first_control_stamp,
                    double knot_interval);

  Se3Pose pose(double t) const;
  Eigen::Vector3d body_angular_velocity(double t) const;
  Eigen::Vector3d world_velocity(double t) const;
  Eigen::Vector3d world_acceleration(double t) const;

  double min_time() const { return t0_ + dt_; }
  double max_time() const {
    return t0_ + dt_ * static_cast<double>(control_.size() - 2);
  }
  bool covers(double t) const {
    return t >= min_time() - 1e-12 && t < max_time() - 1e-12;
  }

 private:
  struct Derivatives {
    Eigen::Matrix4d t, dt, ddt;  // value and time derivatives
  };
  Derivatives eval(double t) const;

  std::vector<Se3Pose> control_;
  double t0_;
  double dt_;
};

struct LidarSimConfig {
  int rings = 16;
  double rate = 10.0;          // [Hz]
  int points_per_ring = 900;
  double range_sigma = 0.0;    // [m]
  double min_range = 0.5;      // [m]
  double max_range = 80.0;     // [m]
  double elevation_min_deg = -15.0;
  double elevation_max_deg = 15.0;
};

struct GpsSimConfig {
  double rate = 1.0;             // [Hz]
  double horizontal_sigma = 2.0; // [m]
  double vertical_sigma = 5.0;   // [m]
  // [start, end) intervals during which fixes report quality 0.
  std::vector<std::pair<double, double>> dropouts;
};

struct SimConfig {
  std::vector<Se3Pose> trajectory_control;
  double trajectory_first_stamp = -0.5;  // stamp of control[0]
  double knot_interval = 0.5;            // [s]
  double duration = 10.0;                // [s], session starts at t = 0
  double imu_rate = 400.0;               // [Hz]
  LidarSimConfig lidar;
  GpsSimConfig gps;
  ImuNoiseModel imu_noise;
  double imu_noise_scale = 1.0;  // 0 disables IMU noise and bias walk
  ImuBias imu_bias_truth;
  std::uint64_t seed = 1;
};

enum class TrueLabel : std::uint8_t { Surface = 0, Ground = 1, Edge = 2 };

struct LabeledFrame {
  PointCloudFrame frame;
  std::vector<TrueLabel> labels;  // parallel to frame.points
};

struct SimDataset {
  std::vector<ImuSample> imu;
  std::vector<LabeledFrame> scans;
  std::vector<GpsFix> gps;
  std::vector<TimedPose> ground_truth;  // at IMU rate
  GeoLla anchor;
  std::uint64_t seed = 0;
};

/// Generates mutually consistent IMU, LiDAR and GPS streams from one
/// trajectory. Every LiDAR point is ray-cast from the true pose at its own
/// emission time, so the in-scan motion skew is exact. A fixed seed yields a
/// byte-identical dataset.
SimDataset simulate_dataset(const WorldModel& world, const SimConfig& config);

void write_dataset(const SimDataset& dataset, const SimConfig& config,
                   const std::string& dir);

struct TrajectoryErrorStats {
  double max_m = 0.0;
  double min_m = 0.0;
  double mean_m = 0.0;
  double sd_m = 0.0;
  std::size_t count = 0;
};

/// Absolute translation error of `estimate` against `ground_truth`, both in
/// the shared ENU frame; the estimate is resampled to ground-truth stamps by
/// linear interpolation. Throws when the time spans do not overlap.
TrajectoryErrorStats evaluate_trajectory(std::span<const TimedPose> estimate,
                                         std::span<const TimedPose> ground_truth);

/// Trajectory builders: a stationary hold followed by a trapezoidal speed
/// profile along a path, emitted as uniform spline control poses. The vehicle
/// starts at the origin heading +x; z is the constant sensor height.
struct TrajectoryParams {
  double stationary_time = 2.0;  // [s]
  double acceleration = 1.0;     // [m/s^2]
  double cruise_speed = 8.0;     // [m/s]
  double knot_interval = 0.5;    // [s]
  double height = 0.0;           // [m] vehicle plane; the start point is origin
};

/// Rectangular loop with rounded corners matching the box-street preset.
std::vector<Se3Pose> make_loop_trajectory(double loop_x, double loop_y,
                                          double corner_radius, double duration,
                                          const TrajectoryParams& params,
                                          double first_stamp);

/// Straight line along +x.
std::vector<Se3Pose> make_straight_trajectory(double duration,
                                              const TrajectoryParams& params,
                                              double first_stamp);

}  // namespace glio
