#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "glio/geo.hpp"
#include "glio/geometry.hpp"
#include "glio/imu.hpp"

namespace glio {

using NodeId = std::int64_t;
using FactorId = std::int64_t;

using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Vector6d = Eigen::Matrix<double, 6, 1>;

/// One vehicle state in the graph. A fixed node is never moved by
/// optimization.
struct StateNode {
  NodeId id = 0;
  NavState state;
  bool fixed = false;
};

struct PreintegrationFactor {
  NodeId i = 0, j = 0;
  PreintegratedImu preint;
};

/// Relative-pose constraint from scan registration. Residual ordering is
/// [translation; rotation], matching the information diagonal convention.
struct LidarOdometryFactor {
  NodeId i = 0, j = 0;
  Se3Pose relative_pose;
  Matrix6d information = Matrix6d::Identity();
};

/// Unary position constraint in the local ENU frame. The lever arm maps the
/// node translation to the antenna position before the residual.
struct GpsFactor {
  NodeId i = 0;
  EnuPoint position;
  Eigen::Matrix3d information = Eigen::Matrix3d::Identity();
  int fix_quality = 1;
  Eigen::Vector3d lever_arm{0.0, 0.0, 0.0};
};

struct LoopClosureFactor {
  NodeId i = 0, j = 0;
  Se3Pose relative_pose;
  Matrix6d information = Matrix6d::Identity();
};

using Factor = std::variant<PreintegrationFactor, LidarOdometryFactor,
                            GpsFactor, LoopClosureFactor>;

struct GraphConfig {
  int window_size = 20;
  double gps_gate_chi2 = 13.8;  // chi-square, 3 dof, 0.997
  // After this many consecutive chi-square rejections the next fix is
  // accepted unconditionally, so a diverged estimate can re-acquire GPS
  // instead of gating it forever. Zero disables recovery.
  int gps_gate_recovery = 5;
  GravityVector gravity;
};

/// Solver settings plus the per-factor-type default information scales used
/// when constructing factors.
struct SolverConfig {
  int max_iterations = 20;
  double translation_tolerance = 1e-8;  // [m]
  double rotation_tolerance = 1e-8;     // [rad]
  double initial_damping = 1e-8;
  Vector6d lidar_information_diag =
      (Vector6d() << 100.0, 100.0, 100.0, 400.0, 400.0, 400.0).finished();
  Eigen::Vector3d gps_information_diag{0.25, 0.25, 0.025};
  Vector6d loop_information_diag =
      (Vector6d() << 100.0, 100.0, 100.0, 400.0, 400.0, 400.0).finished();
  // Scale on the noise-density-derived preintegration information, covering
  // bias drift the pure-noise formula does not model.
  double preintegration_information_scale = 1e-2;
  // Sequential factors into the frozen boundary are discounted: an
  // uncertainty floor standing in for the covariance a marginalization
  // scheme would carry. While scan matching is alive the whole factor is
  // scaled down, letting registration and GPS steer the window; once the
  // window holds no odometry factor, only position and velocity are capped
  // and the gyro-derived attitude plus the bias chain stay authoritative.
  double boundary_scale_tracking = 0.05;
  double boundary_cap_lost = 25.0;
};

struct OptimizeReport {
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  bool converged = false;
};

class AnchorMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sliding-window pose graph: NavState nodes plus preintegration, LiDAR
/// odometry, GPS and loop-closure factors. Single writer; optimization runs
/// damped Gauss-Newton over sparse block normal equations (blocks of 3/6/15).
class PoseGraph {
 public:
  explicit PoseGraph(GraphConfig config = {});

  /// Appends a node; stamps must be strictly increasing. The first node is
  /// fixed as the gauge anchor. Nodes leaving the window are frozen.
  NodeId add_state_node(const NavState& state);

  /// Stores a factor. GPS factors are gated: invalid fix quality or a
  /// chi-square residual beyond the gate rejects the factor (returns nullopt
  /// and records the reason).
  std::optional<FactorId> add_factor(Factor factor);
  void remove_factor(FactorId id);
  void replace_preintegration(FactorId id, const PreintegratedImu& preint);

  /// Damped Gauss-Newton over the active window; never increases total cost.
  OptimizeReport optimize_window(const SolverConfig& config);

  /// Same solver over an explicit set of free nodes (used by session merge).
  OptimizeReport optimize_nodes(std::span<const NodeId> free_ids,
                                const SolverConfig& config);

  /// Frozen nodes (outside the active window) whose translation lies within
  /// radius of the current node's, excluding the most recent `exclusion`
  /// nodes; sorted by distance.
  std::vector<NodeId> detect_loop_candidates(NodeId current, double radius,
                                             int exclusion) const;

  struct SessionLink {
    NodeId old_node = 0;
    NodeId new_node = 0;
    Se3Pose relative_pose;
    Matrix6d information = Matrix6d::Identity();
  };
  struct MergeConfig {
    bool old_nodes_fixed = true;
    double max_anchor_distance = 1000.0;  // [m]
    SolverConfig solver;
  };

  /// Joins two sessions through verified link factors; new-session states are
  /// re-expressed in the old anchor's ENU frame and one joint optimization
  /// pass runs over the union. Throws on an empty link set or an anchor
  /// mismatch beyond max_anchor_distance.
  static PoseGraph merge_sessions(const PoseGraph& old_graph,
                                  const PoseGraph& new_graph,
                                  std::span<const SessionLink> links,
                                  const MergeConfig& config);

  struct GpsRejection {
    NodeId node = 0;
    std::string reason;
  };

  std::size_t node_count() const { return nodes_.size(); }
  const StateNode& node(NodeId id) const;
  const std::vector<StateNode>& nodes() const { return nodes_; }
  const std::vector<std::optional<Factor>>& factors() const { return factors_; }
  const std::vector<GpsRejection>& gps_rejections() const { return rejections_; }
  const GraphConfig& config() const { return config_; }

  /// First id of the active window.
  NodeId active_begin() const;

  std::optional<GeoLla>& anchor() { return anchor_; }
  const std::optional<GeoLla>& anchor() const { return anchor_; }

  /// Rebuilds a graph from persisted parts, bypassing incremental checks.
  static PoseGraph from_parts(GraphConfig config, std::vector<StateNode> nodes,
                              std::vector<Factor> factors,
                              std::optional<GeoLla> anchor);

 private:
  void check_node_exists(NodeId id) const;
  double total_cost(std::span<const NodeId> free_ids, bool tracking,
                    double boundary_scale, double boundary_cap) const;

  GraphConfig config_;
  std::vector<StateNode> nodes_;  // index == id
  std::vector<std::optional<Factor>> factors_;
  std::vector<GpsRejection> rejections_;
  int consecutive_gps_rejections_ = 0;
  std::optional<GeoLla> anchor_;
};

}  // namespace glio
