#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "glio/geometry.hpp"

namespace glio {

/// One inertial measurement in the sensor frame.
struct ImuSample {
  double stamp = 0.0;                              // [s]
  Eigen::Vector3d angular_velocity{0.0, 0.0, 0.0};  // [rad/s]
  Eigen::Vector3d acceleration{0.0, 0.0, 0.0};      // [m/s^2]
};

struct ImuBias {
  Eigen::Vector3d gyro{0.0, 0.0, 0.0};   // [rad/s]
  Eigen::Vector3d accel{0.0, 0.0, 0.0};  // [m/s^2]
};

/// Continuous-time noise densities of the inertial sensor.
struct ImuNoiseModel {
  double gyro_noise_density = 1.7e-4;   // [rad/s/sqrt(Hz)]
  double accel_noise_density = 2.0e-3;  // [m/s^2/sqrt(Hz)]
  double gyro_bias_walk = 2.0e-5;       // [rad/s^2/sqrt(Hz)]
  double accel_bias_walk = 1.0e-4;      // [m/s^3/sqrt(Hz)]
};

/// Gravity in the world frame; norm stays within [9.7, 9.9] after
/// initialization.
struct GravityVector {
  Eigen::Vector3d v{0.0, 0.0, -9.81};  // [m/s^2]
};

/// Full vehicle state: pose and velocity in the world frame plus the current
/// bias estimate.
struct NavState {
  Se3Pose pose;
  Eigen::Vector3d velocity{0.0, 0.0, 0.0};  // [m/s]
  ImuBias bias;
  double stamp = 0.0;  // [s]
};

/// Relative-motion summary of an IMU window, independent of the absolute
/// states it links. The information matrix is diagonal, one weight per
/// rotation/velocity/position block.
///
/// The d*_d* blocks are sensitivities of the deltas to the reference bias,
/// accumulated alongside the deltas. They steer the optimizer only; the
/// deltas themselves are recomputed exactly (rebase_bias) once a bias
/// estimate moves.
struct PreintegratedImu {
  Rotation delta_rotation;
  Eigen::Vector3d delta_velocity{0.0, 0.0, 0.0};
  Eigen::Vector3d delta_position{0.0, 0.0, 0.0};
  double duration = 0.0;  // [s]
  ImuBias bias_reference;
  Eigen::Matrix<double, 9, 9> information =
      Eigen::Matrix<double, 9, 9>::Identity();
  Eigen::Matrix3d drot_dbg = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d dvel_dbg = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d dvel_dba = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d dpos_dbg = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d dpos_dba = Eigen::Matrix3d::Zero();
  /// Weight of the bias random-walk coupling [gyro; accel] between the two
  /// states the factor links, from the bias-walk densities.
  Eigen::Matrix<double, 6, 6> bias_walk_information =
      Eigen::Matrix<double, 6, 6>::Identity();
};

/// Forward integration of the IMU kinematics: midpoint rule on the angular
/// rate, Euler on the acceleration. Samples must be non-empty with strictly
/// increasing stamps, the first at or after start.stamp.
NavState predict_state(const NavState& start, std::span<const ImuSample> samples,
                       const GravityVector& gravity);

/// Accumulates the relative rotation/velocity/position of the window in the
/// frame of its first state; gravity is excluded and re-enters in the
/// residual. Requires at least two samples.
PreintegratedImu preintegrate(std::span<const ImuSample> samples,
                              const ImuBias& bias, const ImuNoiseModel& noise);

/// Stacked residual [rot; vel; pos] comparing two states against the
/// preintegrated window. The stamp gap of the states must match the factor
/// duration within 1e-6 s.
Eigen::Matrix<double, 9, 1> preintegration_residual(
    const PreintegratedImu& factor, const NavState& state_i,
    const NavState& state_j, const GravityVector& gravity);

/// Full recomputation of a factor with a new reference bias; the samples must
/// be the factor's original window.
PreintegratedImu rebase_bias(const PreintegratedImu& factor,
                             std::span<const ImuSample> samples,
                             const ImuBias& new_bias,
                             const ImuNoiseModel& noise);

/// Chains two contiguous windows preintegrated with the same bias.
PreintegratedImu compose_preintegrated(const PreintegratedImu& a,
                                       const PreintegratedImu& b);

}  // namespace glio
