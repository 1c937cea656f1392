#include "glio/spline.hpp"

#include <cmath>
#include <stdexcept>

namespace glio {

CumulativeBasis cumulative_basis(double u) {
  if (!(u >= 0.0 && u < 1.0)) {
    throw std::invalid_argument("cumulative_basis: u outside [0, 1)");
  }
  const double u2 = u * u;
  const double u3 = u2 * u;
  CumulativeBasis b;
  b.b0 = 1.0;
  b.b1 = (5.0 + 3.0 * u - 3.0 * u2 + u3) / 6.0;
  b.b2 = (1.0 + 3.0 * u + 3.0 * u2 - 2.0 * u3) / 6.0;
  b.b3 = u3 / 6.0;
  return b;
}

Se3Pose interpolate_pose(const SplineSegment& seg, double t) {
  if (seg.knot_interval <= 0.0) {
    throw std::invalid_argument("interpolate_pose: non-positive knot interval");
  }
  const double u = (t - seg.knot_stamp) / seg.knot_interval;
  if (!(u >= 0.0 && u < 1.0)) {
    throw std::invalid_argument("interpolate_pose: t outside the segment");
  }
  const CumulativeBasis b = cumulative_basis(u);
  const Twist xi1 = pose_log(seg.control[0].inverse() * seg.control[1]);
  const Twist xi2 = pose_log(seg.control[1].inverse() * seg.control[2]);
  const Twist xi3 = pose_log(seg.control[2].inverse() * seg.control[3]);
  return seg.control[0] * pose_exp(xi1.scaled(b.b1)) *
         pose_exp(xi2.scaled(b.b2)) * pose_exp(xi3.scaled(b.b3));
}

PoseSpline::PoseSpline(std::vector<Se3Pose> control, double first_control_stamp,
                       double knot_interval)
    : control_(std::move(control)), t0_(first_control_stamp), dt_(knot_interval) {
  if (control_.size() < 4) {
    throw std::invalid_argument("PoseSpline: needs at least four control poses");
  }
  if (!(dt_ > 0.0)) {
    throw std::invalid_argument("PoseSpline: non-positive knot interval");
  }
}

PoseSpline PoseSpline::clamped(
    const std::vector<std::pair<double, Se3Pose>>& poses, double knot_interval) {
  if (poses.empty()) {
    throw std::invalid_argument("PoseSpline: no input poses");
  }
  // Resample to a uniform grid by holding the latest available pose, then
  // duplicate the terminals so every query inside the data span has a full
  // segment.
  std::vector<Se3Pose> control;
  const double start = poses.front().first;
  const double end = poses.back().first;
  control.push_back(poses.front().second);  // duplicated head
  std::size_t cursor = 0;
  for (double t = start; t <= end + 1e-9; t += knot_interval) {
    while (cursor + 1 < poses.size() && poses[cursor + 1].first <= t + 1e-9) {
      ++cursor;
    }
    control.push_back(poses[cursor].second);
  }
  control.push_back(poses.back().second);  // duplicated tail
  control.push_back(poses.back().second);
  return PoseSpline(std::move(control), start - knot_interval, knot_interval);
}

double PoseSpline::min_time() const { return t0_ + dt_; }

double PoseSpline::max_time() const {
  return t0_ + dt_ * static_cast<double>(control_.size() - 2);
}

bool PoseSpline::covers(double t) const {
  return t >= min_time() - 1e-12 && t < max_time() - 1e-12;
}

Se3Pose PoseSpline::pose(double t) const {
  if (!covers(t)) {
    throw std::invalid_argument("PoseSpline: query outside coverage");
  }
  double s = (t - t0_) / dt_;
  auto idx = static_cast<std::ptrdiff_t>(std::floor(s));
  idx = std::max<std::ptrdiff_t>(
      1, std::min<std::ptrdiff_t>(idx, static_cast<std::ptrdiff_t>(control_.size()) - 3));
  SplineSegment seg;
  seg.control = {control_[idx - 1], control_[idx], control_[idx + 1],
                 control_[idx + 2]};
  seg.knot_stamp = t0_ + dt_ * static_cast<double>(idx);
  seg.knot_interval = dt_;
  return interpolate_pose(seg, t);
}

PointCloudFrame undistort_scan(const PointCloudFrame& frame,
                               const PoseSpline& spline, double reference_time) {
  if (!spline.covers(reference_time)) {
    throw std::invalid_argument("undistort_scan: reference time not covered");
  }
  const Se3Pose ref_inv = spline.pose(reference_time).inverse();

  PointCloudFrame out;
  out.frame_stamp = frame.frame_stamp;
  out.points.reserve(frame.points.size());
  for (const ScanPoint& p : frame.points) {
    const double tp = frame.frame_stamp + p.relative_time;
    if (!spline.covers(tp)) {
      throw std::invalid_argument("undistort_scan: spline coverage gap");
    }
    ScanPoint q = p;
    q.position = ref_inv * (spline.pose(tp) * p.position);
    out.points.push_back(q);
  }
  return out;
}

}  // namespace glio
