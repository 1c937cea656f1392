#include "glio/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace glio {

namespace {

constexpr double kSmallAngle = 1e-8;
constexpr int kRenormalizeEvery = 16;

bool finite3(const Eigen::Vector3d& v) {
  return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z());
}

// Coefficients of the closed-form SO(3)/SE(3) series:
//   A = sin(t)/t, B = (1-cos(t))/t^2, C = (1-A)/t^2,
//   D = (1 - A/(2B))/t^2   (the V^-1 / Jr^-1 second-order coefficient).
struct SeriesCoeffs {
  double a, b, c, d;
};

SeriesCoeffs series_coeffs(double theta) {
  SeriesCoeffs s;
  const double t2 = theta * theta;
  if (theta < 1e-4) {
    s.a = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
    s.b = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
    s.c = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0;
    s.d = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0;
  } else {
    s.a = std::sin(theta) / theta;
    s.b = (1.0 - std::cos(theta)) / t2;
    s.c = (1.0 - s.a) / t2;
    s.d = (1.0 - s.a / (2.0 * s.b)) / t2;
  }
  return s;
}

}  // namespace

Rotation::Rotation(const Eigen::Quaterniond& q, int compositions)
    : q_(q), compositions_(compositions) {
  canonicalize();
}

void Rotation::canonicalize() {
  if (compositions_ >= kRenormalizeEvery ||
      std::abs(q_.squaredNorm() - 1.0) > 2e-12) {
    q_.normalize();
    compositions_ = 0;
  }
  if (q_.w() < 0.0) {
    q_.coeffs() = -q_.coeffs();
  }
}

Rotation Rotation::from_quaternion(double w, double x, double y, double z) {
  Eigen::Quaterniond q(w, x, y, z);
  if (!std::isfinite(q.squaredNorm()) || q.squaredNorm() < 1e-24) {
    throw std::invalid_argument("Rotation: quaternion not finite or near-zero");
  }
  // Normalization happens in canonicalize() only when the norm has actually
  // drifted, so persisted unit quaternions reload bit-exactly.
  return Rotation(q, 0);
}

Rotation Rotation::from_matrix(const Eigen::Matrix3d& m) {
  return Rotation(Eigen::Quaterniond(m), kRenormalizeEvery);
}

Rotation Rotation::operator*(const Rotation& other) const {
  return Rotation(q_ * other.q_,
                  std::max(compositions_, other.compositions_) + 1);
}

Rotation Rotation::inverse() const {
  return Rotation(q_.conjugate(), compositions_);
}

double Rotation::angle_to(const Rotation& other) const {
  return rot_log(inverse() * other).norm();
}

bool Rotation::is_finite() const { return std::isfinite(q_.squaredNorm()); }

Rotation rot_exp(const Eigen::Vector3d& omega) {
  if (!finite3(omega)) {
    throw std::invalid_argument("rot_exp: non-finite input");
  }
  const double theta2 = omega.squaredNorm();
  Eigen::Quaterniond q;
  if (theta2 < kSmallAngle * kSmallAngle) {
    // Second-order Taylor expansion of cos(t/2) and sin(t/2)/t.
    q.w() = 1.0 - theta2 / 8.0;
    q.vec() = (0.5 - theta2 / 48.0) * omega;
    q.normalize();
  } else {
    const double theta = std::sqrt(theta2);
    const double half = 0.5 * theta;
    q.w() = std::cos(half);
    q.vec() = (std::sin(half) / theta) * omega;
  }
  return Rotation(q, 0);
}

Eigen::Vector3d rot_log(const Rotation& r) {
  const Eigen::Quaterniond& q = r.quaternion();
  const double vn = q.vec().norm();
  const double w = std::abs(q.w());
  if (vn < kSmallAngle) {
    // theta ~ 2 vn; series of 2*atan2(vn, w)/vn.
    return (2.0 / w) * (1.0 - vn * vn / (3.0 * w * w)) * q.vec();
  }
  const double theta = 2.0 * std::atan2(vn, w);
  return (theta / vn) * q.vec();
}

Se3Pose Se3Pose::inverse() const {
  Rotation rinv = rotation.inverse();
  return {rinv, -(rinv * translation)};
}

Se3Pose Se3Pose::operator*(const Se3Pose& other) const {
  return pose_compose(*this, other);
}

Se3Pose pose_compose(const Se3Pose& a, const Se3Pose& b) {
  return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

Se3Pose pose_inverse(const Se3Pose& p) { return p.inverse(); }

Se3Pose pose_exp(const Twist& xi) {
  if (!finite3(xi.angular) || !finite3(xi.linear)) {
    throw std::invalid_argument("pose_exp: non-finite input");
  }
  const double theta = xi.angular.norm();
  const SeriesCoeffs s = series_coeffs(theta);
  const Eigen::Matrix3d wx = skew(xi.angular);
  const Eigen::Matrix3d v =
      Eigen::Matrix3d::Identity() + s.b * wx + s.c * wx * wx;
  return {rot_exp(xi.angular), v * xi.linear};
}

Twist pose_log(const Se3Pose& p) {
  const Eigen::Vector3d omega = rot_log(p.rotation);
  const double theta = omega.norm();
  const SeriesCoeffs s = series_coeffs(theta);
  const Eigen::Matrix3d wx = skew(omega);
  const Eigen::Matrix3d vinv =
      Eigen::Matrix3d::Identity() - 0.5 * wx + s.d * wx * wx;
  return {omega, vinv * p.translation};
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

Eigen::Matrix3d so3_right_jacobian(const Eigen::Vector3d& phi) {
  const double theta = phi.norm();
  const SeriesCoeffs s = series_coeffs(theta);
  const Eigen::Matrix3d px = skew(phi);
  return Eigen::Matrix3d::Identity() - s.b * px + s.c * px * px;
}

Eigen::Matrix3d so3_right_jacobian_inverse(const Eigen::Vector3d& phi) {
  const double theta = phi.norm();
  const SeriesCoeffs s = series_coeffs(theta);
  const Eigen::Matrix3d px = skew(phi);
  return Eigen::Matrix3d::Identity() + 0.5 * px + s.d * px * px;
}

}  // namespace glio
