#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "glio/geometry.hpp"

namespace glio {

/// One LiDAR return in the sensor frame. relative_time is the emission offset
/// from the frame stamp, in [0, scan_period).
struct ScanPoint {
  Eigen::Vector3d position{0.0, 0.0, 0.0};  // [m]
  int ring = 0;
  double relative_time = 0.0;  // [s]
};

struct PointCloudFrame {
  double frame_stamp = 0.0;  // [s]
  std::vector<ScanPoint> points;
};

enum class GroundLabel : std::uint8_t { NonGround = 0, Ground = 1 };

struct FeatureConfig {
  int ring_count = 16;
  double scan_period = 0.1;         // [s]
  int smoothness_window = 5;        // points each side
  int sectors_per_ring = 6;
  int max_edges_per_sector = 4;
  int max_surfaces_per_sector = 8;
  double edge_threshold = 0.5;
  double surface_threshold = 0.05;
  double min_range = 1.0;           // [m]
  double max_range = 80.0;          // [m]
  double ground_angle_max_deg = 10.0;
  double sensor_height = 1.5;       // [m]
  double ground_z_band = 0.2;       // [m] tolerance around z = -sensor_height
  double ground_voxel = 1.0;        // [m] downsample cell for the ground set
  int azimuth_bins = 900;           // columns used by ground segmentation
  double occlusion_gap = 0.3;       // [m] range jump marking an occlusion
};

/// Edge, surface and ground feature points of one frame, pairwise disjoint,
/// all in the sensor frame with relative_time retained.
struct FeatureSet {
  std::vector<ScanPoint> edges;
  std::vector<ScanPoint> surfaces;
  std::vector<ScanPoint> ground;

  bool empty() const {
    return edges.empty() && surfaces.empty() && ground.empty();
  }
  std::size_t size() const {
    return edges.size() + surfaces.size() + ground.size();
  }
};

/// Labels every point ground/non-ground by inter-ring vertical-angle
/// thresholding on same-azimuth columns. Throws on an empty frame.
std::vector<GroundLabel> segment_ground(const PointCloudFrame& frame,
                                        double sensor_height,
                                        const FeatureConfig& config = {});

/// Local smoothness score c_i = |sum_j (x_i - x_j)| / (|window| * |x_i|) over
/// `window` neighbors each side of an azimuth-ordered ring. Points within
/// `window` of the ring ends receive NaN; a ring shorter than 2*window+1
/// yields an empty result.
std::vector<double> compute_smoothness(std::span<const ScanPoint> ring_points,
                                       int window = 5);

FeatureSet extract_features(const PointCloudFrame& frame,
                            const std::vector<GroundLabel>& labels,
                            const FeatureConfig& config = {});

}  // namespace glio
