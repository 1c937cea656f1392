#include "glio/pose_graph.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace glio {

namespace {

constexpr int kBlockDim = 15;  // [theta, t, v, bg, ba]

struct Linearized {
  Eigen::VectorXd residual;
  Eigen::MatrixXd information;
  // (node id, residual_dim x 15 jacobian)
  std::vector<std::pair<NodeId, Eigen::MatrixXd>> jacobians;
};

Linearized linearize_preintegration(const PreintegrationFactor& f,
                                    const NavState& si, const NavState& sj,
                                    const GravityVector& gravity,
                                    bool with_jacobians) {
  Linearized lin;
  const double dt = f.preint.duration;
  const Eigen::Matrix3d ri_t = si.pose.rotation.matrix().transpose();
  const Eigen::Vector3d g = gravity.v;

  // First-order correction of the frozen deltas onto node i's current bias;
  // the pipeline recomputes the deltas once the gap exceeds its threshold.
  const Eigen::Vector3d dbg = si.bias.gyro - f.preint.bias_reference.gyro;
  const Eigen::Vector3d dba = si.bias.accel - f.preint.bias_reference.accel;

  const Eigen::Vector3d phi =
      rot_log(rot_exp(-(f.preint.drot_dbg * dbg)) *
              (f.preint.delta_rotation.inverse() *
               (si.pose.rotation.inverse() * sj.pose.rotation)));
  const Eigen::Vector3d vel_term =
      ri_t * (sj.velocity - si.velocity - g * dt);
  const Eigen::Vector3d pos_term =
      ri_t * (sj.pose.translation - si.pose.translation - si.velocity * dt -
              0.5 * g * dt * dt);

  // Rows 0..8: the preintegration residual; rows 9..14: the bias random walk
  // between the linked states, anchoring the bias chain.
  lin.residual.resize(15);
  lin.residual.segment<3>(0) = phi;
  lin.residual.segment<3>(3) =
      vel_term - (f.preint.delta_velocity + f.preint.dvel_dbg * dbg +
                  f.preint.dvel_dba * dba);
  lin.residual.segment<3>(6) =
      pos_term - (f.preint.delta_position + f.preint.dpos_dbg * dbg +
                  f.preint.dpos_dba * dba);
  lin.residual.segment<3>(9) = sj.bias.gyro - si.bias.gyro;
  lin.residual.segment<3>(12) = sj.bias.accel - si.bias.accel;
  lin.information = Eigen::MatrixXd::Zero(15, 15);
  lin.information.topLeftCorner<9, 9>() = f.preint.information;
  lin.information.bottomRightCorner<6, 6>() = f.preint.bias_walk_information;

  if (with_jacobians) {
    const Eigen::Matrix3d jr_inv = so3_right_jacobian_inverse(phi);
    const Eigen::Matrix3d jl_inv = so3_right_jacobian_inverse(-phi);
    const Eigen::Matrix3d rj_t_ri =
        sj.pose.rotation.matrix().transpose() * si.pose.rotation.matrix();

    Eigen::MatrixXd ji = Eigen::MatrixXd::Zero(15, kBlockDim);
    ji.block<3, 3>(0, 0) = -jr_inv * rj_t_ri;
    ji.block<3, 3>(0, 9) = -jl_inv * f.preint.drot_dbg;
    ji.block<3, 3>(3, 0) = skew(vel_term);
    ji.block<3, 3>(3, 6) = -ri_t;
    ji.block<3, 3>(3, 9) = -f.preint.dvel_dbg;
    ji.block<3, 3>(3, 12) = -f.preint.dvel_dba;
    ji.block<3, 3>(6, 0) = skew(pos_term);
    ji.block<3, 3>(6, 3) = -ri_t;
    ji.block<3, 3>(6, 6) = -ri_t * dt;
    ji.block<3, 3>(6, 9) = -f.preint.dpos_dbg;
    ji.block<3, 3>(6, 12) = -f.preint.dpos_dba;
    ji.block<3, 3>(9, 9) = -Eigen::Matrix3d::Identity();
    ji.block<3, 3>(12, 12) = -Eigen::Matrix3d::Identity();

    Eigen::MatrixXd jj = Eigen::MatrixXd::Zero(15, kBlockDim);
    jj.block<3, 3>(0, 0) = jr_inv;
    jj.block<3, 3>(3, 6) = ri_t;
    jj.block<3, 3>(6, 3) = ri_t;
    jj.block<3, 3>(9, 9) = Eigen::Matrix3d::Identity();
    jj.block<3, 3>(12, 12) = Eigen::Matrix3d::Identity();

    lin.jacobians.emplace_back(f.i, std::move(ji));
    lin.jacobians.emplace_back(f.j, std::move(jj));
  }
  return lin;
}

Linearized linearize_relative_pose(NodeId id_i, NodeId id_j,
                                   const Se3Pose& measured,
                                   const Matrix6d& information,
                                   const NavState& si, const NavState& sj,
                                   bool with_jacobians) {
  Linearized lin;
  const Eigen::Matrix3d ri_t = si.pose.rotation.matrix().transpose();
  const Eigen::Vector3d trans_term =
      ri_t * (sj.pose.translation - si.pose.translation);
  const Eigen::Vector3d phi =
      rot_log(measured.rotation.inverse() *
              (si.pose.rotation.inverse() * sj.pose.rotation));

  lin.residual.resize(6);
  lin.residual.segment<3>(0) = trans_term - measured.translation;
  lin.residual.segment<3>(3) = phi;
  lin.information = information;

  if (with_jacobians) {
    const Eigen::Matrix3d jr_inv = so3_right_jacobian_inverse(phi);
    const Eigen::Matrix3d rj_t_ri =
        sj.pose.rotation.matrix().transpose() * si.pose.rotation.matrix();

    Eigen::MatrixXd ji = Eigen::MatrixXd::Zero(6, kBlockDim);
    ji.block<3, 3>(0, 0) = skew(trans_term);
    ji.block<3, 3>(0, 3) = -ri_t;
    ji.block<3, 3>(3, 0) = -jr_inv * rj_t_ri;

    Eigen::MatrixXd jj = Eigen::MatrixXd::Zero(6, kBlockDim);
    jj.block<3, 3>(0, 3) = ri_t;
    jj.block<3, 3>(3, 0) = jr_inv;

    lin.jacobians.emplace_back(id_i, std::move(ji));
    lin.jacobians.emplace_back(id_j, std::move(jj));
  }
  return lin;
}

Linearized linearize_gps(const GpsFactor& f, const NavState& si,
                         bool with_jacobians) {
  Linearized lin;
  lin.residual.resize(3);
  lin.residual = si.pose.translation + si.pose.rotation * f.lever_arm -
                 f.position.vec();
  lin.information = f.information;
  if (with_jacobians) {
    Eigen::MatrixXd ji = Eigen::MatrixXd::Zero(3, kBlockDim);
    ji.block<3, 3>(0, 0) = -si.pose.rotation.matrix() * skew(f.lever_arm);
    ji.block<3, 3>(0, 3) = Eigen::Matrix3d::Identity();
    lin.jacobians.emplace_back(f.i, std::move(ji));
  }
  return lin;
}

// Discounts a sequential factor into the frozen boundary. Tracking: scale
// everything (registration re-anchors the window). Lost: cap position and
// velocity so GPS can pull, but keep the gyro attitude and the bias chain.
void apply_boundary_cap(Linearized* lin, bool tracking, double scale,
                        double cap) {
  if (tracking) {
    lin->information *= scale;
    return;
  }
  if (lin->residual.size() == 15) {
    // Preintegration rows: [rot 0:3, vel 3:6, pos 6:9, walk 9:15].
    lin->information.block<6, 6>(3, 3) =
        lin->information.block<6, 6>(3, 3).cwiseMin(cap);
  } else if (lin->residual.size() == 6) {
    // Relative pose rows: [trans 0:3, rot 3:6].
    lin->information.topLeftCorner<3, 3>() =
        lin->information.topLeftCorner<3, 3>().cwiseMin(cap);
  }
}

void apply_delta(NavState& state, const Eigen::Ref<const Eigen::VectorXd>& d) {
  state.pose.rotation = state.pose.rotation * rot_exp(d.segment<3>(0));
  state.pose.translation += d.segment<3>(3);
  state.velocity += d.segment<3>(6);
  state.bias.gyro += d.segment<3>(9);
  state.bias.accel += d.segment<3>(12);
}

}  // namespace

PoseGraph::PoseGraph(GraphConfig config) : config_(std::move(config)) {}

void PoseGraph::check_node_exists(NodeId id) const {
  if (id < 0 || id >= static_cast<NodeId>(nodes_.size())) {
    throw std::invalid_argument("PoseGraph: unknown node id");
  }
}

NodeId PoseGraph::active_begin() const {
  const auto n = static_cast<NodeId>(nodes_.size());
  return std::max<NodeId>(0, n - config_.window_size);
}

NodeId PoseGraph::add_state_node(const NavState& state) {
  if (!nodes_.empty() && !(state.stamp > nodes_.back().state.stamp)) {
    throw std::invalid_argument("add_state_node: non-monotone stamp");
  }
  if (!std::isfinite(state.stamp) || state.stamp < 0.0) {
    throw std::invalid_argument("add_state_node: invalid stamp");
  }
  StateNode node;
  node.id = static_cast<NodeId>(nodes_.size());
  node.state = state;
  node.fixed = nodes_.empty();  // the first node anchors the gauge
  nodes_.push_back(node);

  // Freeze the boundary node once the graph exceeds the window.
  if (static_cast<int>(nodes_.size()) > config_.window_size) {
    nodes_[active_begin()].fixed = true;
  }
  return node.id;
}

std::optional<FactorId> PoseGraph::add_factor(Factor factor) {
  if (const auto* p = std::get_if<PreintegrationFactor>(&factor)) {
    check_node_exists(p->i);
    check_node_exists(p->j);
  } else if (const auto* l = std::get_if<LidarOdometryFactor>(&factor)) {
    check_node_exists(l->i);
    check_node_exists(l->j);
  } else if (const auto* lc = std::get_if<LoopClosureFactor>(&factor)) {
    check_node_exists(lc->i);
    check_node_exists(lc->j);
  } else if (const auto* g = std::get_if<GpsFactor>(&factor)) {
    check_node_exists(g->i);
    if (g->fix_quality < 1) {
      rejections_.push_back({g->i, "invalid-quality"});
      return std::nullopt;
    }
    const Linearized lin = linearize_gps(*g, nodes_[g->i].state, false);
    const double m2 = lin.residual.dot(lin.information * lin.residual);
    const bool recover = config_.gps_gate_recovery > 0 &&
                         consecutive_gps_rejections_ >= config_.gps_gate_recovery;
    if (m2 > config_.gps_gate_chi2 && !recover) {
      rejections_.push_back({g->i, "chi-square-gate"});
      ++consecutive_gps_rejections_;
      return std::nullopt;
    }
    consecutive_gps_rejections_ = 0;
  }
  factors_.push_back(std::move(factor));
  return static_cast<FactorId>(factors_.size() - 1);
}

void PoseGraph::remove_factor(FactorId id) {
  if (id < 0 || id >= static_cast<FactorId>(factors_.size()) || !factors_[id]) {
    throw std::invalid_argument("remove_factor: unknown factor id");
  }
  factors_[id].reset();
}

void PoseGraph::replace_preintegration(FactorId id,
                                       const PreintegratedImu& preint) {
  if (id < 0 || id >= static_cast<FactorId>(factors_.size()) || !factors_[id] ||
      !std::holds_alternative<PreintegrationFactor>(*factors_[id])) {
    throw std::invalid_argument("replace_preintegration: not a preintegration");
  }
  std::get<PreintegrationFactor>(*factors_[id]).preint = preint;
}

const StateNode& PoseGraph::node(NodeId id) const {
  check_node_exists(id);
  return nodes_[id];
}

double PoseGraph::total_cost(std::span<const NodeId> free_ids, bool tracking,
                             double boundary_scale,
                             double boundary_cap) const {
  std::vector<char> is_free(nodes_.size(), 0);
  for (NodeId id : free_ids) is_free[id] = 1;

  double cost = 0.0;
  for (const auto& slot : factors_) {
    if (!slot) continue;
    Linearized lin;
    bool at_boundary = false;
    if (const auto* p = std::get_if<PreintegrationFactor>(&*slot)) {
      if (!is_free[p->i] && !is_free[p->j]) continue;
      at_boundary = !is_free[p->i] || !is_free[p->j];
      lin = linearize_preintegration(*p, nodes_[p->i].state, nodes_[p->j].state,
                                     config_.gravity, false);
    } else if (const auto* l = std::get_if<LidarOdometryFactor>(&*slot)) {
      if (!is_free[l->i] && !is_free[l->j]) continue;
      at_boundary = !is_free[l->i] || !is_free[l->j];
      lin = linearize_relative_pose(l->i, l->j, l->relative_pose, l->information,
                                    nodes_[l->i].state, nodes_[l->j].state,
                                    false);
    } else if (const auto* lc = std::get_if<LoopClosureFactor>(&*slot)) {
      if (!is_free[lc->i] && !is_free[lc->j]) continue;
      lin = linearize_relative_pose(lc->i, lc->j, lc->relative_pose,
                                    lc->information, nodes_[lc->i].state,
                                    nodes_[lc->j].state, false);
    } else if (const auto* g = std::get_if<GpsFactor>(&*slot)) {
      if (!is_free[g->i]) continue;
      lin = linearize_gps(*g, nodes_[g->i].state, false);
    }
    if (at_boundary) {
      apply_boundary_cap(&lin, tracking, boundary_scale, boundary_cap);
    }
    cost += lin.residual.dot(lin.information * lin.residual);
  }
  return cost;
}

OptimizeReport PoseGraph::optimize_window(const SolverConfig& config) {
  std::vector<NodeId> free_ids;
  for (NodeId id = active_begin(); id < static_cast<NodeId>(nodes_.size());
       ++id) {
    if (!nodes_[id].fixed) free_ids.push_back(id);
  }
  return optimize_nodes(free_ids, config);
}

OptimizeReport PoseGraph::optimize_nodes(std::span<const NodeId> free_ids,
                                         const SolverConfig& config) {
  if (free_ids.empty()) {
    throw std::invalid_argument("optimize: no free nodes");
  }
  std::unordered_map<NodeId, int> block_of;
  for (std::size_t k = 0; k < free_ids.size(); ++k) {
    check_node_exists(free_ids[k]);
    block_of.emplace(free_ids[k], static_cast<int>(k));
  }
  const int dim = static_cast<int>(free_ids.size()) * kBlockDim;

  // The boundary uncertainty floor depends on whether scan matching is
  // currently feeding the window.
  std::vector<char> is_free_flag(nodes_.size(), 0);
  for (NodeId id : free_ids) is_free_flag[id] = 1;
  bool window_has_lidar = false;
  for (const auto& slot : factors_) {
    if (!slot) continue;
    if (const auto* l = std::get_if<LidarOdometryFactor>(&*slot)) {
      if (is_free_flag[l->i] && is_free_flag[l->j]) {
        window_has_lidar = true;
        break;
      }
    }
  }
  OptimizeReport report;
  report.initial_cost =
      total_cost(free_ids, window_has_lidar, config.boundary_scale_tracking,
                 config.boundary_cap_lost);
  report.final_cost = report.initial_cost;

  double lambda = config.initial_damping;
  bool accepted_any = false;
  int factor_count = 0;

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    report.iterations = iter + 1;

    // Assemble the sparse block normal equations.
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(dim);
    factor_count = 0;
    for (const auto& slot : factors_) {
      if (!slot) continue;
      Linearized lin;
      bool at_boundary = false;
      if (const auto* p = std::get_if<PreintegrationFactor>(&*slot)) {
        if (!block_of.count(p->i) && !block_of.count(p->j)) continue;
        at_boundary = !block_of.count(p->i) || !block_of.count(p->j);
        lin = linearize_preintegration(*p, nodes_[p->i].state,
                                       nodes_[p->j].state, config_.gravity,
                                       true);
      } else if (const auto* l = std::get_if<LidarOdometryFactor>(&*slot)) {
        if (!block_of.count(l->i) && !block_of.count(l->j)) continue;
        at_boundary = !block_of.count(l->i) || !block_of.count(l->j);
        lin = linearize_relative_pose(l->i, l->j, l->relative_pose,
                                      l->information, nodes_[l->i].state,
                                      nodes_[l->j].state, true);
      } else if (const auto* lc = std::get_if<LoopClosureFactor>(&*slot)) {
        if (!block_of.count(lc->i) && !block_of.count(lc->j)) continue;
        lin = linearize_relative_pose(lc->i, lc->j, lc->relative_pose,
                                      lc->information, nodes_[lc->i].state,
                                      nodes_[lc->j].state, true);
      } else if (const auto* g = std::get_if<GpsFactor>(&*slot)) {
        if (!block_of.count(g->i)) continue;
        lin = linearize_gps(*g, nodes_[g->i].state, true);
      }
      if (at_boundary) {
        apply_boundary_cap(&lin, window_has_lidar,
                           config.boundary_scale_tracking,
                           config.boundary_cap_lost);
      }
      ++factor_count;

      const Eigen::VectorXd weighted = lin.information * lin.residual;
      for (const auto& [id_a, ja] : lin.jacobians) {
        const auto it_a = block_of.find(id_a);
        if (it_a == block_of.end()) continue;
        const int a = it_a->second * kBlockDim;
        grad.segment<kBlockDim>(a) += ja.transpose() * weighted;
        for (const auto& [id_b, jb] : lin.jacobians) {
          const auto it_b = block_of.find(id_b);
          if (it_b == block_of.end()) continue;
          const int b = it_b->second * kBlockDim;
          const Eigen::MatrixXd h = ja.transpose() * lin.information * jb;
          for (int r = 0; r < kBlockDim; ++r) {
            for (int c = 0; c < kBlockDim; ++c) {
              if (h(r, c) != 0.0) trips.emplace_back(a + r, b + c, h(r, c));
            }
          }
        }
      }
    }
    if (iter == 0 && factor_count == 0) {
      throw std::invalid_argument("optimize: free nodes have no factors");
    }
    if (grad.lpNorm<Eigen::Infinity>() < 1e-12) {
      report.converged = true;
      break;
    }

    Eigen::SparseMatrix<double> h(dim, dim);
    h.setFromTriplets(trips.begin(), trips.end());
    const Eigen::VectorXd h_diag = h.diagonal();

    // Snapshot for rollback.
    std::vector<NavState> backup;
    backup.reserve(free_ids.size());
    for (NodeId id : free_ids) backup.push_back(nodes_[id].state);

    bool accepted = false;
    Eigen::VectorXd step = Eigen::VectorXd::Zero(dim);
    for (int attempt = 0; attempt < 12; ++attempt) {
      Eigen::SparseMatrix<double> damped = h;
      Eigen::SparseMatrix<double> reg(dim, dim);
      std::vector<Eigen::Triplet<double>> diag_trips;
      diag_trips.reserve(dim);
      for (int k = 0; k < dim; ++k) {
        diag_trips.emplace_back(k, k, lambda * (h_diag(k) + 1.0));
      }
      reg.setFromTriplets(diag_trips.begin(), diag_trips.end());
      damped += reg;

      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
      solver.compute(damped);
      if (solver.info() != Eigen::Success) {
        lambda *= 10.0;
        continue;
      }
      step = solver.solve(-grad);
      if (solver.info() != Eigen::Success || !step.allFinite()) {
        lambda *= 10.0;
        continue;
      }

      for (std::size_t k = 0; k < free_ids.size(); ++k) {
        apply_delta(nodes_[free_ids[k]].state,
                    step.segment<kBlockDim>(static_cast<int>(k) * kBlockDim));
      }
      const double cost =
          total_cost(free_ids, window_has_lidar, config.boundary_scale_tracking,
                     config.boundary_cap_lost);
      if (cost < report.final_cost) {
        report.final_cost = cost;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        accepted_any = true;
        break;
      }
      for (std::size_t k = 0; k < free_ids.size(); ++k) {
        nodes_[free_ids[k]].state = backup[k];
      }
      lambda *= 10.0;
    }

    if (!accepted) {
      report.converged = accepted_any;  // stall after progress = local optimum
      break;
    }

    double max_rot = 0.0, max_lin = 0.0;
    for (std::size_t k = 0; k < free_ids.size(); ++k) {
      const auto d = step.segment<kBlockDim>(static_cast<int>(k) * kBlockDim);
      max_rot = std::max(max_rot, d.segment<3>(0).lpNorm<Eigen::Infinity>());
      max_lin = std::max(max_lin, d.tail<12>().lpNorm<Eigen::Infinity>());
    }
    if (max_rot < config.rotation_tolerance &&
        max_lin < config.translation_tolerance) {
      report.converged = true;
      break;
    }
  }
  return report;
}

std::vector<NodeId> PoseGraph::detect_loop_candidates(NodeId current,
                                                      double radius,
                                                      int exclusion) const {
  check_node_exists(current);
  const Eigen::Vector3d t = nodes_[current].state.pose.translation;
  const NodeId frozen_end = active_begin();
  const NodeId newest_allowed = current - exclusion;

  std::vector<std::pair<double, NodeId>> hits;
  for (NodeId id = 0; id < frozen_end; ++id) {
    if (id > newest_allowed) continue;
    const double d = (nodes_[id].state.pose.translation - t).norm();
    if (d <= radius) hits.emplace_back(d, id);
  }
  std::sort(hits.begin(), hits.end());
  std::vector<NodeId> out;
  out.reserve(hits.size());
  for (const auto& [d, id] : hits) out.push_back(id);
  return out;
}

PoseGraph PoseGraph::merge_sessions(const PoseGraph& old_graph,
                                    const PoseGraph& new_graph,
                                    std::span<const SessionLink> links,
                                    const MergeConfig& config) {
  if (links.empty()) {
    throw std::invalid_argument("merge_sessions: no link factors");
  }

  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
  if (old_graph.anchor_ && new_graph.anchor_) {
    const EnuAnchor old_anchor = EnuAnchor::from_lla(*old_graph.anchor_);
    const EnuPoint rel = lla_to_enu(*new_graph.anchor_, old_anchor);
    offset = rel.vec();
    if (offset.norm() > config.max_anchor_distance) {
      throw AnchorMismatchError("merge_sessions: anchors too far apart");
    }
  }

  PoseGraph merged(old_graph.config_);
  merged.anchor_ = old_graph.anchor_;
  merged.nodes_ = old_graph.nodes_;
  if (config.old_nodes_fixed) {
    for (StateNode& n : merged.nodes_) n.fixed = true;
  }
  merged.factors_ = old_graph.factors_;

  const auto id_offset = static_cast<NodeId>(old_graph.nodes_.size());
  for (const StateNode& n : new_graph.nodes_) {
    StateNode copy = n;
    copy.id = n.id + id_offset;
    copy.state.pose.translation += offset;
    copy.fixed = false;
    merged.nodes_.push_back(copy);
  }
  for (const auto& slot : new_graph.factors_) {
    if (!slot) continue;
    Factor f = *slot;
    if (auto* p = std::get_if<PreintegrationFactor>(&f)) {
      p->i += id_offset;
      p->j += id_offset;
    } else if (auto* l = std::get_if<LidarOdometryFactor>(&f)) {
      l->i += id_offset;
      l->j += id_offset;
    } else if (auto* lc = std::get_if<LoopClosureFactor>(&f)) {
      lc->i += id_offset;
      lc->j += id_offset;
    } else if (auto* g = std::get_if<GpsFactor>(&f)) {
      g->i += id_offset;
      g->position = {g->position.e + offset.x(), g->position.n + offset.y(),
                     g->position.u + offset.z()};
    }
    merged.factors_.push_back(std::move(f));
  }
  for (const SessionLink& link : links) {
    old_graph.check_node_exists(link.old_node);
    new_graph.check_node_exists(link.new_node);
    merged.factors_.push_back(LoopClosureFactor{
        link.old_node, link.new_node + id_offset, link.relative_pose,
        link.information});
  }

  std::vector<NodeId> free_ids;
  for (const StateNode& n : merged.nodes_) {
    if (!n.fixed) free_ids.push_back(n.id);
  }
  if (!free_ids.empty()) {
    merged.optimize_nodes(free_ids, config.solver);
  }
  return merged;
}

PoseGraph PoseGraph::from_parts(GraphConfig config, std::vector<StateNode> nodes,
                                std::vector<Factor> factors,
                                std::optional<GeoLla> anchor) {
  PoseGraph g(std::move(config));
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k].id != static_cast<NodeId>(k)) {
      throw std::invalid_argument("from_parts: node ids must be 0..N-1");
    }
  }
  g.nodes_ = std::move(nodes);
  g.factors_.reserve(factors.size());
  for (auto& f : factors) g.factors_.emplace_back(std::move(f));
  g.anchor_ = std::move(anchor);
  return g;
}

}  // namespace glio
