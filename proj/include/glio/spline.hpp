#pragma once

#include <array>
#include <vector>

#include "glio/geometry.hpp"
#include "glio/lidar_features.hpp"

namespace glio {

/// Cumulative cubic B-spline basis values; b0 is always 1 and the
/// coefficients decrease monotonically on u in [0, 1).
struct CumulativeBasis {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0, b3 = 0.0;
};

/// (1, (5+3u-3u^2+u^3)/6, (1+3u+3u^2-2u^3)/6, u^3/6). Throws when u is
/// outside [0, 1).
CumulativeBasis cumulative_basis(double u);

/// One spline segment: four control poses; evaluation runs over
/// [knot_stamp, knot_stamp + knot_interval) where knot_stamp is the time of
/// the second control pose.
struct SplineSegment {
  std::array<Se3Pose, 4> control;
  double knot_stamp = 0.0;     // [s], time of control[1]
  double knot_interval = 0.1;  // [s]
};

/// T(t) = T0 * exp(b1 log(T0^-1 T1)) * exp(b2 log(T1^-1 T2))
///            * exp(b3 log(T2^-1 T3)).
Se3Pose interpolate_pose(const SplineSegment& seg, double t);

/// Uniform cumulative cubic B-spline over a run of control poses. Control
/// pose k sits at first_control_stamp + k * knot_interval; the spline is
/// evaluable on [stamp(control[1]), stamp(control[n-2])).
class PoseSpline {
 public:
  PoseSpline(std::vector<Se3Pose> control, double first_control_stamp,
             double knot_interval);

  /// Builds a clamped spline through timestamped poses resampled to a uniform
  /// knot grid (terminal poses duplicated).
  static PoseSpline clamped(const std::vector<std::pair<double, Se3Pose>>& poses,
                            double knot_interval);

  Se3Pose pose(double t) const;
  bool covers(double t) const;
  double min_time() const;
  double max_time() const;

  const std::vector<Se3Pose>& control() const { return control_; }
  double knot_interval() const { return dt_; }
  double first_control_stamp() const { return t0_; }

 private:
  std::vector<Se3Pose> control_;
  double t0_;
  double dt_;
};

/// Re-expresses every point of the frame in the sensor pose at
/// reference_time: p' = T(reference_time)^-1 * T(t_p) * p. Ring and
/// relative_time are preserved. Throws when the spline does not cover the
/// scan interval or the reference time.
PointCloudFrame undistort_scan(const PointCloudFrame& frame,
                               const PoseSpline& spline, double reference_time);

}  // namespace glio
