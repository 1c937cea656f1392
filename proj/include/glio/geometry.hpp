#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace glio {

/// SO(3) element stored as a unit quaternion on the canonical hemisphere
/// (w >= 0). The quaternion is renormalized after every 16 compositions or
/// whenever |norm - 1| exceeds 1e-12, so drift stays below 1e-12 across long
/// composition chains.
class Rotation {
 public:
  Rotation() : q_(1.0, 0.0, 0.0, 0.0) {}

  /// Builds from quaternion components (w, x, y, z); normalizes and fixes the
  /// hemisphere.
  static Rotation from_quaternion(double w, double x, double y, double z);
  static Rotation from_matrix(const Eigen::Matrix3d& m);

  Rotation operator*(const Rotation& other) const;
  Eigen::Vector3d operator*(const Eigen::Vector3d& v) const { return q_ * v; }

  Rotation inverse() const;

  Eigen::Matrix3d matrix() const { return q_.toRotationMatrix(); }
  const Eigen::Quaterniond& quaternion() const { return q_; }

  /// Rotation angle to another rotation, in [0, pi].
  double angle_to(const Rotation& other) const;

  bool is_finite() const;

 private:
  friend Rotation rot_exp(const Eigen::Vector3d&);
  Rotation(const Eigen::Quaterniond& q, int compositions);

  void canonicalize();

  Eigen::Quaterniond q_;
  int compositions_ = 0;
};

/// Rigid-body pose: rotation plus translation in meters.
struct Se3Pose {
  Rotation rotation;
  Eigen::Vector3d translation{0.0, 0.0, 0.0};

  static Se3Pose identity() { return {}; }

  Se3Pose inverse() const;
  /// Applies the pose to a point: R p + t.
  Eigen::Vector3d operator*(const Eigen::Vector3d& p) const {
    return rotation * p + translation;
  }
  Se3Pose operator*(const Se3Pose& other) const;
};

/// se(3) tangent element: angular part in radians, linear part in meters.
struct Twist {
  Eigen::Vector3d angular{0.0, 0.0, 0.0};
  Eigen::Vector3d linear{0.0, 0.0, 0.0};

  Twist() = default;
  Twist(const Eigen::Vector3d& ang, const Eigen::Vector3d& lin)
      : angular(ang), linear(lin) {}

  Twist scaled(double s) const { return {angular * s, linear * s}; }
};

/// Exponential map of SO(3). Falls back to a second-order Taylor series below
/// 1e-8 rad. Throws std::invalid_argument on non-finite input.
Rotation rot_exp(const Eigen::Vector3d& omega);

/// Logarithm map of SO(3); minimal axis-angle vector with |result| <= pi.
Eigen::Vector3d rot_log(const Rotation& r);

/// Full SE(3) exponential with the V-matrix coupling translation to rotation.
Se3Pose pose_exp(const Twist& xi);

/// Inverse of pose_exp away from rotation angle pi.
Twist pose_log(const Se3Pose& p);

/// (R_a R_b, R_a t_b + t_a).
Se3Pose pose_compose(const Se3Pose& a, const Se3Pose& b);

Se3Pose pose_inverse(const Se3Pose& p);

Eigen::Matrix3d skew(const Eigen::Vector3d& v);

/// Right Jacobian of SO(3) and its inverse, used when linearizing residuals
/// that end in a rotation logarithm.
Eigen::Matrix3d so3_right_jacobian(const Eigen::Vector3d& phi);
Eigen::Matrix3d so3_right_jacobian_inverse(const Eigen::Vector3d& phi);

}  // namespace glio
