#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "glio/geo.hpp"
#include "glio/geometry.hpp"
#include "glio/lidar_features.hpp"
#include "glio/pose_graph.hpp"

namespace glio {

/// Voxel-downsampled world map: one representative point (running centroid)
/// and a hit count per occupied cell. Memory is bounded by occupied voxels,
/// never by raw point count.
class MapCloud {
 public:
  explicit MapCloud(double voxel_size = 0.2) : voxel_size_(voxel_size) {}

  struct VoxelKey {
    std::int32_t x = 0, y = 0, z = 0;
    bool operator==(const VoxelKey&) const = default;
  };
  struct Voxel {
    Eigen::Vector3d sum{0.0, 0.0, 0.0};
    std::uint32_t count = 0;
    Eigen::Vector3d representative() const { return sum / count; }
  };

  /// Transforms every point to the world frame and folds it into its voxel's
  /// running centroid. The scan should already be undistorted.
  void insert_scan(const Se3Pose& pose, const PointCloudFrame& scan);
  void insert_point(const Eigen::Vector3d& world_point,
                    std::uint32_t weight = 1);

  /// Folds another map's representatives, transformed by `alignment`, into
  /// this one (centroid update weighted by hit counts). Throws on a voxel
  /// size mismatch.
  void merge_from(const MapCloud& incoming, const Se3Pose& alignment);

  /// Exact voxel restore used by session loading; bypasses the centroid fold
  /// so a save -> load -> save round trip reproduces the stored bits.
  void restore_voxel(const VoxelKey& key, const Eigen::Vector3d& sum,
                     std::uint32_t count);

  std::size_t voxel_count() const { return voxels_.size(); }
  double voxel_size() const { return voxel_size_; }
  VoxelKey key_of(const Eigen::Vector3d& p) const;

  /// Deterministic snapshot sorted by cell key.
  std::vector<std::pair<VoxelKey, Voxel>> sorted_voxels() const;

  std::optional<GeoLla>& anchor() { return anchor_; }
  const std::optional<GeoLla>& anchor() const { return anchor_; }

 private:
  struct KeyHash {
    std::size_t operator()(const VoxelKey& k) const {
      std::uint64_t h = static_cast<std::uint32_t>(k.x);
      h = h * 0x9E3779B97F4A7C15ull + static_cast<std::uint32_t>(k.y);
      h = h * 0x9E3779B97F4A7C15ull + static_cast<std::uint32_t>(k.z);
      return static_cast<std::size_t>(h);
    }
  };

  double voxel_size_;
  std::unordered_map<VoxelKey, Voxel, KeyHash> voxels_;
  std::optional<GeoLla> anchor_;
};

/// A persisted run: the pose-graph snapshot plus the map built from it.
struct Session {
  PoseGraph graph;
  MapCloud map;
  int format_version = 1;
};

/// Raised by load_session; names the file section that failed and whether the
/// graph section had already parsed cleanly.
class SessionLoadError : public std::runtime_error {
 public:
  SessionLoadError(std::string section, const std::string& what,
                   bool graph_parsed)
      : std::runtime_error(what),
        section_(std::move(section)),
        graph_parsed_(graph_parsed) {}
  const std::string& section() const { return section_; }
  bool graph_parsed() const { return graph_parsed_; }

 private:
  std::string section_;
  bool graph_parsed_;
};

/// Text graph section plus a length-prefixed binary voxel block with a
/// trailing checksum. A save -> load -> save round trip is byte-identical.
void save_session(const Session& session, const std::string& path);
Session load_session(const std::string& path);

/// ASCII export `x y z count`, one occupied voxel per line, sorted by cell.
void export_map_ascii(const MapCloud& map, const std::string& path);

}  // namespace glio
