#include "glio/imu.hpp"

#include <cmath>
#include <stdexcept>

namespace glio {

namespace {

void check_samples(std::span<const ImuSample> samples, std::size_t min_count) {
  if (samples.size() < min_count) {
    throw std::invalid_argument("imu: too few samples");
  }
  for (std::size_t k = 1; k < samples.size(); ++k) {
    if (!(samples[k].stamp > samples[k - 1].stamp)) {
      throw std::invalid_argument("imu: sample stamps not strictly increasing");
    }
  }
}

}  // namespace

NavState predict_state(const NavState& start, std::span<const ImuSample> samples,
                       const GravityVector& gravity) {
  check_samples(samples, 1);
  if (samples.front().stamp < start.stamp - 1e-9) {
    throw std::invalid_argument("predict_state: samples begin before the state");
  }

  Rotation r = start.pose.rotation;
  Eigen::Vector3d t = start.pose.translation;
  Eigen::Vector3d v = start.velocity;
  const Eigen::Vector3d bg = start.bias.gyro;
  const Eigen::Vector3d ba = start.bias.accel;
  const Eigen::Vector3d g = gravity.v;

  auto step = [&](const Eigen::Vector3d& omega_mid, const Eigen::Vector3d& acc,
                  double dt) {
    const Eigen::Vector3d a_world = r * (acc - ba) + g;
    t += v * dt + 0.5 * a_world * dt * dt;
    v += a_world * dt;
    r = r * rot_exp((omega_mid - bg) * dt);
  };

  // Lead-in gap before the first sample, holding that sample's measurement.
  const double lead = samples.front().stamp - start.stamp;
  if (lead > 1e-9) {
    step(samples.front().angular_velocity, samples.front().acceleration, lead);
  }
  for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
    const double dt = samples[k + 1].stamp - samples[k].stamp;
    const Eigen::Vector3d omega_mid =
        0.5 * (samples[k].angular_velocity + samples[k + 1].angular_velocity);
    step(omega_mid, samples[k].acceleration, dt);
  }

  NavState out;
  out.pose = {r, t};
  out.velocity = v;
  out.bias = start.bias;
  out.stamp = samples.back().stamp;
  return out;
}

PreintegratedImu preintegrate(std::span<const ImuSample> samples,
                              const ImuBias& bias, const ImuNoiseModel& noise) {
  check_samples(samples, 2);

  Rotation dr;
  Eigen::Vector3d dv = Eigen::Vector3d::Zero();
  Eigen::Vector3d dp = Eigen::Vector3d::Zero();
  Eigen::Matrix3d j_r = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d j_v_bg = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d j_v_ba = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d j_p_bg = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d j_p_ba = Eigen::Matrix3d::Zero();

  for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
    const double dt = samples[k + 1].stamp - samples[k].stamp;
    const Eigen::Vector3d omega_mid =
        0.5 * (samples[k].angular_velocity + samples[k + 1].angular_velocity) -
        bias.gyro;
    const Eigen::Vector3d acc = samples[k].acceleration - bias.accel;
    const Eigen::Matrix3d r_k = dr.matrix();
    const Eigen::Vector3d a_i = r_k * acc;  // in the frame of state i

    // Bias sensitivities, accumulated with the pre-update values.
    j_p_bg += j_v_bg * dt - 0.5 * r_k * skew(acc) * j_r * dt * dt;
    j_p_ba += j_v_ba * dt - 0.5 * r_k * dt * dt;
    j_v_bg -= r_k * skew(acc) * j_r * dt;
    j_v_ba -= r_k * dt;
    const Rotation increment = rot_exp(omega_mid * dt);
    j_r = increment.matrix().transpose() * j_r -
          so3_right_jacobian(omega_mid * dt) * dt;

    dp += dv * dt + 0.5 * a_i * dt * dt;
    dv += a_i * dt;
    dr = dr * increment;
  }

  PreintegratedImu out;
  out.delta_rotation = dr;
  out.delta_velocity = dv;
  out.delta_position = dp;
  out.drot_dbg = j_r;
  out.dvel_dbg = j_v_bg;
  out.dvel_dba = j_v_ba;
  out.dpos_dbg = j_p_bg;
  out.dpos_dba = j_p_ba;
  out.duration = samples.back().stamp - samples.front().stamp;
  out.bias_reference = bias;

  const double sg2 = noise.gyro_noise_density * noise.gyro_noise_density;
  const double sa2 = noise.accel_noise_density * noise.accel_noise_density;
  Eigen::Matrix<double, 9, 1> info_diag;
  info_diag.segment<3>(0).setConstant(1.0 / (sg2 * out.duration));
  info_diag.segment<3>(3).setConstant(1.0 / (sa2 * out.duration));
  info_diag.segment<3>(6).setConstant(1.0 / (sa2 * out.duration));
  out.information = info_diag.asDiagonal();

  const double wg2 = noise.gyro_bias_walk * noise.gyro_bias_walk;
  const double wa2 = noise.accel_bias_walk * noise.accel_bias_walk;
  Eigen::Matrix<double, 6, 1> walk_diag;
  walk_diag.segment<3>(0).setConstant(1.0 / (wg2 * out.duration));
  walk_diag.segment<3>(3).setConstant(1.0 / (wa2 * out.duration));
  out.bias_walk_information = walk_diag.asDiagonal();
  return out;
}

Eigen::Matrix<double, 9, 1> preintegration_residual(
    const PreintegratedImu& factor, const NavState& state_i,
    const NavState& state_j, const GravityVector& gravity) {
  const double dt = state_j.stamp - state_i.stamp;
  if (std::abs(dt - factor.duration) > 1e-6) {
    throw std::invalid_argument(
        "preintegration_residual: state stamps do not match factor duration");
  }
  const Rotation ri_inv = state_i.pose.rotation.inverse();
  const Eigen::Vector3d g = gravity.v;

  Eigen::Matrix<double, 9, 1> r;
  r.segment<3>(0) = rot_log(factor.delta_rotation.inverse() *
                            (ri_inv * state_j.pose.rotation));
  r.segment<3>(3) =
      ri_inv * (state_j.velocity - state_i.velocity - g * dt) -
      factor.delta_velocity;
  r.segment<3>(6) =
      ri_inv * (state_j.pose.translation - state_i.pose.translation -
                state_i.velocity * dt - 0.5 * g * dt * dt) -
      factor.delta_position;
  return r;
}

PreintegratedImu rebase_bias(const PreintegratedImu& factor,
                             std::span<const ImuSample> samples,
                             const ImuBias& new_bias,
                             const ImuNoiseModel& noise) {
  check_samples(samples, 2);
  const double span = samples.back().stamp - samples.front().stamp;
  if (std::abs(span - factor.duration) > 1e-9) {
    throw std::invalid_argument(
        "rebase_bias: samples are not the factor's original window");
  }
  return preintegrate(samples, new_bias, noise);
}

PreintegratedImu compose_preintegrated(const PreintegratedImu& a,
                                       const PreintegratedImu& b) {
  PreintegratedImu out;
  out.delta_rotation = a.delta_rotation * b.delta_rotation;
  out.delta_velocity = a.delta_velocity + a.delta_rotation * b.delta_velocity;
  out.delta_position = a.delta_position + a.delta_velocity * b.duration +
                       a.delta_rotation * b.delta_position;
  out.duration = a.duration + b.duration;
  out.bias_reference = a.bias_reference;
  out.information = a.information;  // same noise model, longer window
  const double scale = a.duration / out.duration;
  out.information *= scale;
  return out;
}

}  // namespace glio
