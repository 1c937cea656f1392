#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "glio/geometry.hpp"
#include "glio/lidar_features.hpp"

namespace glio {

/// Perpendicular distance from p to the infinite line through a and b.
/// Throws when the endpoints are closer than 1e-6 m.
double point_line_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                           const Eigen::Vector3d& b);

/// Distance from p to the plane spanned by q1, q2, q3. Throws when the points
/// are collinear (triangle area below 1e-8 m^2).
double point_plane_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& q1,
                            const Eigen::Vector3d& q2, const Eigen::Vector3d& q3);

/// A source point (sensor frame) paired with a target line (world frame).
struct LineCorrespondence {
  Eigen::Vector3d point;
  Eigen::Vector3d line_a;
  Eigen::Vector3d line_b;
};

/// A source point (sensor frame) paired with a target plane (world frame).
struct PlaneCorrespondence {
  Eigen::Vector3d point;
  Eigen::Vector3d q1, q2, q3;
};

struct Correspondences {
  std::vector<LineCorrespondence> lines;
  std::vector<PlaneCorrespondence> planes;
  std::size_t size() const { return lines.size() + planes.size(); }
};

/// Spatially hashed target features for nearest-neighbor association:
/// edge points (with their ring) and planar points (surface + ground), in the
/// world frame. Cell size defaults to 0.5 m.
class FeatureMap {
 public:
  explicit FeatureMap(double cell_size = 0.5);

  void insert_edge(const Eigen::Vector3d& p, int ring);
  void insert_planar(const Eigen::Vector3d& p);
  void clear();

  std::size_t edge_count() const { return edges_.size(); }
  std::size_t planar_count() const { return planars_.size(); }
  bool empty() const { return edges_.empty() && planars_.empty(); }
  double cell_size() const { return cell_; }

  struct EdgePoint {
    Eigen::Vector3d position;
    int ring;
  };

  /// k nearest edge points within max_dist of p, ordered by distance with
  /// deterministic tie-breaks.
  std::vector<int> nearest_edges(const Eigen::Vector3d& p, int k,
                                 double max_dist) const;
  std::vector<int> nearest_planars(const Eigen::Vector3d& p, int k,
                                   double max_dist) const;

  const EdgePoint& edge(int i) const { return edges_[i]; }
  const Eigen::Vector3d& planar(int i) const { return planars_[i]; }

 private:
  using CellMap = std::unordered_map<std::uint64_t, std::vector<int>>;

  std::uint64_t cell_key(const Eigen::Vector3d& p) const;
  template <typename Dist>
  std::vector<int> nearest(const CellMap& cells, const Eigen::Vector3d& p,
                           int k, double max_dist, Dist&& dist2) const;

  double cell_;
  std::vector<EdgePoint> edges_;
  std::vector<Eigen::Vector3d> planars_;
  CellMap edge_cells_;
  CellMap planar_cells_;
};

struct RegistrationConfig {
  int max_iterations = 30;
  double translation_tolerance = 1e-5;  // [m]
  double rotation_tolerance = 1e-5;     // [rad]
  double max_correspondence_distance = 1.0;  // [m]
  double huber_delta = 0.1;             // [m]
  double initial_damping = 1e-4;
  int min_correspondences = 10;
  double degeneracy_threshold = 0.03;   // per-correspondence lambda_min floor
  // Optional quadratic pull toward the initial guess (a motion prior): keeps
  // weakly observed directions at the prediction instead of letting them
  // slide. Zero disables it, leaving the pure least-squares objective.
  double prior_translation_information = 0.0;  // [1/m^2]
  double prior_rotation_information = 0.0;     // [1/rad^2]
  std::optional<std::string> debug_dump_path;
};

struct RegistrationResult {
  Se3Pose pose;
  double final_cost = 0.0;  // [m^2]
  int iterations = 0;
  bool converged = false;
  int inlier_count = 0;
  // Smallest eigenvalue of the correspondence normal equations per
  // correspondence; how well the data itself constrains all six degrees of
  // freedom.
  double conditioning = 0.0;
};

/// Thrown when the scan geometry cannot constrain the pose; carries the best
/// estimate reached so far.
class DegenerateGeometryError : public std::runtime_error {
 public:
  DegenerateGeometryError(const std::string& what, RegistrationResult partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const RegistrationResult& partial() const { return partial_; }

 private:
  RegistrationResult partial_;
};

/// Associates every source feature transformed by `guess` with its nearest
/// target primitives: two nearest edge points (different rings when
/// available) form a line, three nearest planar points form a plane. Pairs
/// beyond max_distance are rejected.
Correspondences find_correspondences(const FeatureSet& features,
                                     const FeatureMap& target,
                                     const Se3Pose& guess,
                                     double max_distance = 1.0);

/// Damped iterative least squares on the 6-dof pose minimizing the squared
/// point-line and point-plane distances, correspondences refreshed each
/// outer iteration, Huber loss on every residual.
RegistrationResult register_features(const FeatureSet& features,
                                     const FeatureMap& target,
                                     const Se3Pose& guess,
                                     const RegistrationConfig& config = {});

}  // namespace glio
