#include "glio/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "glio/spline.hpp"

namespace glio {

namespace {

using nlohmann::json;

// Samples covering [t0, t1] with boundary samples interpolated onto the exact
// endpoints, so preintegration durations match node stamp gaps.
std::vector<ImuSample> slice_imu(const std::vector<ImuSample>& samples,
                                 double t0, double t1) {
  std::vector<ImuSample> out;
  if (samples.empty() || !(t1 > t0)) return out;

  auto interp = [&](double t) {
    auto it = std::lower_bound(
        samples.begin(), samples.end(), t,
        [](const ImuSample& s, double v) { return s.stamp < v; });
    if (it == samples.begin()) {
      ImuSample s = *it;
      s.stamp = t;
      return s;
    }
    if (it == samples.end()) {
      ImuSample s = samples.back();
      s.stamp = t;
      return s;
    }
    const ImuSample& b = *it;
    const ImuSample& a = *(it - 1);
    const double w = (t - a.stamp) / (b.stamp - a.stamp);
    ImuSample s;
    s.stamp = t;
    s.angular_velocity =
        (1.0 - w) * a.angular_velocity + w * b.angular_velocity;
    s.acceleration = (1.0 - w) * a.acceleration + w * b.acceleration;
    return s;
  };

  out.push_back(interp(t0));
  for (const ImuSample& s : samples) {
    if (s.stamp > t0 + 1e-9 && s.stamp < t1 - 1e-9) {
      out.push_back(s);
    }
  }
  out.push_back(interp(t1));
  return out;
}

Se3Pose transform_guess(const Se3Pose& pose, const Eigen::Vector3d& offset) {
  Se3Pose out = pose;
  out.translation += offset;
  return out;
}

struct Keyframe {
  NodeId node = 0;
  FeatureSet features;     // IMU frame
  PointCloudFrame frame;   // IMU frame, full resolution
  bool finalized = false;
};

class Pipeline {
 public:
  Pipeline(const PipelineConfig& config, const DatasetView& data)
      : cfg_(config), data_(data), target_(config.target_cell_size),
        map_(config.map_voxel_size) {}

  OdometryOutput run(const Session* prior) {
    prior_ = prior;
    initialize();
    if (cfg_.debug_dump && !cfg_.output_dir.empty()) {
      std::filesystem::create_directories(cfg_.output_dir + "/debug");
    }

    graph_ = PoseGraph(graph_config_);
    graph_.anchor() = anchor_lla_;
    map_.anchor() = anchor_lla_;

    if (prior_) {
      prepare_prior_target();
    }

    for (const ScanIndexEntry& entry : data_.scan_index) {
      process_scan(entry);
    }
    process_gps_until(std::numeric_limits<double>::infinity());
    finalize_keyframes(true);

    return assemble_output();
  }

 private:
  void initialize() {
    if (data_.imu.empty()) {
      throw DatasetError("pipeline: dataset has no IMU samples");
    }
    if (data_.scan_index.empty()) {
      throw DatasetError("pipeline: dataset has no scans");
    }

    // Gravity and bias from the stationary prefix.
    const double t_end = data_.imu.front().stamp + cfg_.init_window;
    Eigen::Vector3d mean_w = Eigen::Vector3d::Zero();
    Eigen::Vector3d mean_a = Eigen::Vector3d::Zero();
    int n = 0;
    for (const ImuSample& s : data_.imu) {
      if (s.stamp > t_end) break;
      mean_w += s.angular_velocity;
      mean_a += s.acceleration;
      ++n;
    }
    mean_w /= std::max(1, n);
    mean_a /= std::max(1, n);

    double max_w_dev = 0.0, max_a_dev = 0.0;
    int k = 0;
    for (const ImuSample& s : data_.imu) {
      if (s.stamp > t_end) break;
      max_w_dev = std::max(max_w_dev, (s.angular_velocity - mean_w).norm());
      max_a_dev = std::max(max_a_dev, (s.acceleration - mean_a).norm());
      ++k;
    }
    stationary_init_ = n > 10 && max_w_dev < 0.05 && max_a_dev < 0.5;

    graph_config_ = cfg_.graph;
    if (stationary_init_) {
      init_bias_.gyro = mean_w;
      init_bias_.accel = {mean_a.x(), mean_a.y(), 0.0};
      graph_config_.gravity.v = {0.0, 0.0,
                                 -std::clamp(mean_a.z(), 9.7, 9.9)};
    } else {
      init_bias_ = ImuBias{};
      graph_config_.gravity.v = {0.0, 0.0, -9.81};
    }

    // ENU anchor: dataset header when present (auto policy), else the first
    // valid fix.
    anchor_lla_.reset();
    if (cfg_.use_gps) {
      if (cfg_.anchor_policy == "auto" && data_.anchor_hint) {
        anchor_lla_ = data_.anchor_hint;
      } else {
        for (const GpsFix& f : data_.gps) {
          if (f.fix_quality >= 1) {
            anchor_lla_ = f.lla;
            break;
          }
        }
      }
      if (anchor_lla_) {
        anchor_ = EnuAnchor::from_lla(*anchor_lla_);
      }
    }
  }

  void prepare_prior_target() {
    prior_target_ = FeatureMap(cfg_.target_cell_size);
    for (const auto& [key, voxel] : prior_->map.sorted_voxels()) {
      prior_target_.insert_planar(voxel.representative());
    }
    prior_offset_.setZero();
    if (prior_->graph.anchor() && anchor_lla_) {
      const EnuAnchor prior_anchor = EnuAnchor::from_lla(*prior_->graph.anchor());
      prior_offset_ = lla_to_enu(*anchor_lla_, prior_anchor).vec();
    }
  }

  FeatureSet extract(const PointCloudFrame& raw, PointCloudFrame* imu_frame) {
    const auto labels = segment_ground(raw, cfg_.features.sensor_height,
                                       cfg_.features);
    FeatureSet features = extract_features(raw, labels, cfg_.features);

    // Re-express in the IMU frame when the extrinsic is non-trivial.
    const bool identity =
        cfg_.lidar_extrinsic.translation.norm() < 1e-12 &&
        rot_log(cfg_.lidar_extrinsic.rotation).norm() < 1e-12;
    *imu_frame = raw;
    if (!identity) {
      for (auto* set : {&features.edges, &features.surfaces, &features.ground}) {
        for (ScanPoint& p : *set) p.position = cfg_.lidar_extrinsic * p.position;
      }
      for (ScanPoint& p : imu_frame->points) {
        p.position = cfg_.lidar_extrinsic * p.position;
      }
    }
    return features;
  }

  void process_scan(const ScanIndexEntry& entry) {
    const PointCloudFrame raw = data_.load_scan(entry.frame, entry.stamp);
    ++report_.frames;
    if (raw.points.empty()) return;

    PointCloudFrame imu_frame;
    FeatureSet features = extract(raw, &imu_frame);

    reg_config_ = cfg_.registration;
    if (reg_config_.prior_translation_information == 0.0 &&
        reg_config_.prior_rotation_information == 0.0) {
      // The IMU prediction serves as a motion prior unless the user pinned
      // their own weights.
      reg_config_.prior_translation_information = 25.0;
      reg_config_.prior_rotation_information = 1000.0;
    }
    if (cfg_.debug_dump) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "/debug/corr_%06d.csv", entry.frame);
      reg_config_.debug_dump_path = cfg_.output_dir + buf;
    }

    if (graph_.node_count() == 0) {
      NavState first;
      first.stamp = entry.stamp;
      first.bias = init_bias_;
      const NodeId id = graph_.add_state_node(first);
      make_keyframe(id, std::move(features), std::move(imu_frame));
      last_node_stamp_ = entry.stamp;
      process_gps_until(entry.stamp);
      return;
    }

    // IMU prediction from the previous node.
    const StateNode& prev = graph_.nodes().back();
    const NodeId prev_id = prev.id;
    const std::vector<ImuSample> window =
        slice_imu(data_.imu, prev.state.stamp, entry.stamp);
    NavState predicted = prev.state;
    if (window.size() >= 2) {
      predicted = predict_state(prev.state, window, graph_config_.gravity);
    } else {
      predicted.stamp = entry.stamp;
    }

    // Deskew the feature points with the IMU-predicted motion across the
    // sweep, so scan matching sees motion-free geometry. The map keeps the
    // finer spline-based undistortion at keyframe time.
    deskew_features(&features, entry.stamp);

    // Registration against the keyframe target, IMU prediction as the guess.
    bool registered = false;
    Se3Pose registered_pose;
    if (!target_.empty() && !features.empty()) {
      try {
        const RegistrationResult res =
            register_features(features, target_, predicted.pose, reg_config_);
        const double innov_t =
            (res.pose.translation - predicted.pose.translation).norm();
        const double innov_r =
            res.pose.rotation.angle_to(predicted.pose.rotation);
        const double mean_cost =
            res.final_cost / std::max(1, res.inlier_count);
        if (res.converged &&
            res.conditioning >= cfg_.lidar_factor_min_conditioning &&
            mean_cost <= cfg_.lidar_factor_max_cost &&
            innov_t <= cfg_.registration_innovation_translation &&
            innov_r <= cfg_.registration_innovation_rotation_deg *
                           3.14159265358979323846 / 180.0) {
          registered = true;
          registered_pose = res.pose;
        } else if (res.converged) {
          ++report_.registration_failures;  // weakly constrained or
                                            // implausible vs the IMU
          if (std::getenv("GLIO_REJ")) {
            std::fprintf(stderr,
                         "t %.2f cond %.4f innov_t %.3f innov_r %.3f deg\n",
                         entry.stamp, res.conditioning, innov_t,
                         innov_r * 57.2958);
          }
        }
      } catch (const DegenerateGeometryError&) {
        ++report_.registration_failures;
      }
    }

    if (!registered && !cfg_.use_imu_factors) {
      // Nothing would constrain the node; skip the frame entirely.
      return;
    }

    NavState next = predicted;
    if (registered) next.pose = registered_pose;
    const NodeId id = graph_.add_state_node(next);
    last_node_stamp_ = entry.stamp;

    if (cfg_.use_imu_factors && window.size() >= 2) {
      PreintegratedImu preint =
          preintegrate(window, prev.state.bias, cfg_.imu_noise);
      preint.information *= cfg_.solver.preintegration_information_scale;
      const auto fid =
          graph_.add_factor(PreintegrationFactor{prev_id, id, preint});
      if (fid) preint_windows_[*fid] = window;
    }
    if (registered) {
      LidarOdometryFactor f;
      f.i = prev_id;
      f.j = id;
      f.relative_pose = prev.state.pose.inverse() * registered_pose;
      f.information = cfg_.solver.lidar_information_diag.asDiagonal();
      graph_.add_factor(f);
    }

    optimize();
    process_gps_until(entry.stamp);

    maybe_make_keyframe(id, std::move(features), std::move(imu_frame));
    finalize_keyframes(false);
  }

  // Re-expresses feature points in the sweep-start frame under the
  // constant-twist motion predicted by the IMU over one scan period.
  void deskew_features(FeatureSet* features, double scan_stamp) {
    const double period = cfg_.features.scan_period;
    const std::vector<ImuSample> sweep =
        slice_imu(data_.imu, scan_stamp, scan_stamp + period);
    if (sweep.size() < 2) return;
    NavState start;
    start.stamp = scan_stamp;
    start.bias = graph_.nodes().back().state.bias;
    start.velocity =
        graph_.nodes().back().state.pose.rotation.inverse() *
        graph_.nodes().back().state.velocity;
    const NavState end = predict_state(start, sweep, graph_config_.gravity);
    const Twist motion = pose_log(end.pose);  // start pose is the identity

    for (auto* set : {&features->edges, &features->surfaces,
                      &features->ground}) {
      for (ScanPoint& p : *set) {
        const double s = std::clamp(p.relative_time / period, 0.0, 1.0);
        p.position = pose_exp(motion.scaled(s)) * p.position;
      }
    }
  }

  void optimize() {
    if (graph_.node_count() < 2) return;
    graph_.optimize_window(cfg_.solver);
    rebase_if_needed();
  }

  void rebase_if_needed() {
    for (auto& [fid, window] : preint_windows_) {
      const auto& slot = graph_.factors()[fid];
      if (!slot) continue;
      const auto& f = std::get<PreintegrationFactor>(*slot);
      const ImuBias& current = graph_.node(f.i).state.bias;
      const ImuBias& ref = f.preint.bias_reference;
      const double moved =
          std::max((current.gyro - ref.gyro).lpNorm<Eigen::Infinity>(),
                   (current.accel - ref.accel).lpNorm<Eigen::Infinity>());
      if (moved > cfg_.rebase_threshold) {
        PreintegratedImu rebased =
            rebase_bias(f.preint, window, current, cfg_.imu_noise);
        rebased.information *= cfg_.solver.preintegration_information_scale;
        graph_.replace_preintegration(fid, rebased);
      }
    }
  }

  void process_gps_until(double t) {
    if (!cfg_.use_gps || !anchor_lla_) return;
    while (gps_cursor_ < data_.gps.size() &&
           data_.gps[gps_cursor_].stamp <= t + 1e-9) {
      const GpsFix& fix = data_.gps[gps_cursor_++];
      if (fix.fix_quality < 1) {
        ++report_.gps.invalid_quality;
        continue;
      }
      const NodeId node = nearest_node(fix.stamp);
      if (node < 0) {
        ++report_.gps.unassociated;
        continue;
      }
      GpsFactor f;
      f.i = node;
      f.position = lla_to_enu(fix.lla, anchor_);
      f.information = cfg_.solver.gps_information_diag.asDiagonal();
      f.fix_quality = fix.fix_quality;
      f.lever_arm = cfg_.gps_lever_arm;
      if (graph_.add_factor(f)) {
        ++report_.gps.accepted;
        optimize();
      } else {
        ++report_.gps.gated;
      }
    }
  }

  NodeId nearest_node(double stamp) const {
    NodeId best = -1;
    double best_gap = cfg_.gps_assoc_tolerance + 1e-12;
    const auto& nodes = graph_.nodes();
    for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
      const double gap = std::abs(it->state.stamp - stamp);
      if (gap < best_gap) {
        best_gap = gap;
        best = it->id;
      }
      if (it->state.stamp < stamp - cfg_.gps_assoc_tolerance) break;
    }
    return best;
  }

  void maybe_make_keyframe(NodeId id, FeatureSet&& features,
                           PointCloudFrame&& frame) {
    if (keyframes_.empty()) {
      make_keyframe(id, std::move(features), std::move(frame));
      return;
    }
    ++nodes_since_keyframe_;
    const Se3Pose& pose = graph_.node(id).state.pose;
    const Se3Pose& last = graph_.node(keyframes_.back().node).state.pose;
    const double dist = (pose.translation - last.translation).norm();
    const double angle = pose.rotation.angle_to(last.rotation);
    if (nodes_since_keyframe_ >= cfg_.keyframe_every_n ||
        dist >= cfg_.keyframe_distance ||
        angle >= cfg_.keyframe_angle_deg * 3.14159265358979323846 / 180.0) {
      make_keyframe(id, std::move(features), std::move(frame));
    }
  }

  void make_keyframe(NodeId id, FeatureSet&& features, PointCloudFrame&& frame) {
    Keyframe kf;
    kf.node = id;
    kf.features = std::move(features);
    kf.frame = std::move(frame);
    keyframes_.push_back(std::move(kf));
    nodes_since_keyframe_ = 0;
    ++report_.keyframes;
    rebuild_target();

    if (prior_) {
      try_relocalize(keyframes_.back());
    } else {
      try_loop_closure(keyframes_.back());
    }
  }

  void rebuild_target() {
    target_.clear();
    const std::size_t begin =
        keyframes_.size() > static_cast<std::size_t>(cfg_.target_keyframes)
            ? keyframes_.size() - cfg_.target_keyframes
            : 0;
    for (std::size_t k = begin; k < keyframes_.size(); ++k) {
      const Keyframe& kf = keyframes_[k];
      const Se3Pose pose = graph_.node(kf.node).state.pose;
      for (const ScanPoint& p : kf.features.edges) {
        target_.insert_edge(pose * p.position, p.ring);
      }
      for (const ScanPoint& p : kf.features.surfaces) {
        target_.insert_planar(pose * p.position);
      }
      for (const ScanPoint& p : kf.features.ground) {
        target_.insert_planar(pose * p.position);
      }
    }
  }

  void try_loop_closure(const Keyframe& kf) {
    const auto candidates = graph_.detect_loop_candidates(
        kf.node, cfg_.loop_radius, cfg_.loop_exclusion);
    if (candidates.empty()) return;
    const NodeId candidate = candidates.front();

    // Local target from keyframes around the candidate, at current estimates.
    FeatureMap local(cfg_.target_cell_size);
    const Eigen::Vector3d center =
        graph_.node(candidate).state.pose.translation;
    for (const Keyframe& other : keyframes_) {
      if (other.node == kf.node) continue;
      const Se3Pose pose = graph_.node(other.node).state.pose;
      if ((pose.translation - center).norm() > 3.0 * cfg_.loop_radius) continue;
      if (other.node > candidate + cfg_.loop_exclusion / 2) continue;
      for (const ScanPoint& p : other.features.edges) {
        local.insert_edge(pose * p.position, p.ring);
      }
      for (const ScanPoint& p : other.features.surfaces) {
        local.insert_planar(pose * p.position);
      }
      for (const ScanPoint& p : other.features.ground) {
        local.insert_planar(pose * p.position);
      }
    }
    if (local.empty()) return;

    try {
      const Se3Pose guess = graph_.node(kf.node).state.pose;
      const RegistrationResult res =
          register_features(kf.features, local, guess, reg_config_);
      if (!res.converged ||
          res.final_cost / std::max(1, res.inlier_count) >
              cfg_.loop_cost_threshold) {
        return;
      }
      LoopClosureFactor f;
      f.i = candidate;
      f.j = kf.node;
      f.relative_pose =
          graph_.node(candidate).state.pose.inverse() * res.pose;
      f.information = cfg_.solver.loop_information_diag.asDiagonal();
      graph_.add_factor(f);
      ++report_.loop_closures;
      optimize();
    } catch (const DegenerateGeometryError&) {
    }
  }

  void try_relocalize(const Keyframe& kf) {
    if (prior_target_.empty() || kf.features.empty()) return;
    if (!links_.empty() &&
        kf.node < last_link_node_ + cfg_.reloc_link_spacing) {
      return;
    }
    const Se3Pose current = graph_.node(kf.node).state.pose;
    const Eigen::Vector3d pos_in_prior = current.translation + prior_offset_;

    // Nearest prior node within the search radius.
    NodeId nearest = -1;
    double best = cfg_.loop_radius;
    for (const StateNode& n : prior_->graph.nodes()) {
      const double d = (n.state.pose.translation - pos_in_prior).norm();
      if (d < best) {
        best = d;
        nearest = n.id;
      }
    }
    if (nearest < 0) return;

    try {
      const Se3Pose guess = transform_guess(current, prior_offset_);
      const RegistrationResult res =
          register_features(kf.features, prior_target_, guess, reg_config_);
      if (!res.converged ||
          res.final_cost / std::max(1, res.inlier_count) >
              cfg_.loop_cost_threshold) {
        return;
      }
      PoseGraph::SessionLink link;
      link.old_node = nearest;
      link.new_node = kf.node;
      link.relative_pose =
          prior_->graph.node(nearest).state.pose.inverse() * res.pose;
      link.information = cfg_.reloc_link_information_diag.asDiagonal();
      links_.push_back(link);
      last_link_node_ = kf.node;

    } catch (const DegenerateGeometryError&) {
    }
  }

  // Deferred map insertion: a keyframe is undistorted once the spline over
  // its scan interval is available from later node poses.
  void finalize_keyframes(bool force) {
    for (Keyframe& kf : keyframes_) {
      if (kf.finalized) continue;
      const double kf_stamp = graph_.node(kf.node).state.stamp;
      const double need = kf_stamp + cfg_.features.scan_period +
                          cfg_.spline_knot_interval;
      if (!force && last_node_stamp_ < need) continue;

      std::vector<std::pair<double, Se3Pose>> poses;
      for (const StateNode& n : graph_.nodes()) {
        if (n.state.stamp < kf_stamp - 4.0 * cfg_.spline_knot_interval) {
          continue;
        }
        poses.emplace_back(n.state.stamp, n.state.pose);
        if (n.state.stamp > need + 3.0 * cfg_.spline_knot_interval) break;
      }
      if (poses.empty()) continue;

      try {
        const PoseSpline spline =
            PoseSpline::clamped(poses, cfg_.spline_knot_interval);
        const PointCloudFrame undistorted =
            undistort_scan(kf.frame, spline, kf_stamp);
        map_.insert_scan(spline.pose(kf_stamp), undistorted);
      } catch (const std::invalid_argument&) {
        // Coverage gap (keyframe at the very start); fall back to the rigid
        // node pose.
        map_.insert_scan(graph_.node(kf.node).state.pose, kf.frame);
      }
      kf.frame.points.clear();
      kf.frame.points.shrink_to_fit();
      kf.finalized = true;
    }
  }

  OdometryOutput assemble_output() {
    OdometryOutput out;
    report_.nodes = static_cast<int>(graph_.node_count());

    if (prior_) {
      if (links_.empty()) {
        throw RelocalizationFailedError(
            "relocalization failed: no verified link into the prior session");
      }
      PoseGraph::MergeConfig mc;
      mc.solver = cfg_.solver;
      PoseGraph merged =
          PoseGraph::merge_sessions(prior_->graph, graph_, links_, mc);

      // Map alignment. Sessions sharing a GPS anchor already live in one ENU
      // frame: the anchor offset is the whole rigid correction, and the fine
      // adjustments belong to the graph, not to a map shift. Without anchors
      // the mean link correction is all the data supports.
      const auto prior_nodes = static_cast<NodeId>(prior_->graph.node_count());
      Se3Pose alignment;
      if (prior_->graph.anchor() && anchor_lla_) {
        alignment.translation = prior_offset_;
      } else {
        Eigen::Vector3d mean = Eigen::Vector3d::Zero();
        for (const PoseGraph::SessionLink& link : links_) {
          const Eigen::Vector3d implied =
              (prior_->graph.node(link.old_node).state.pose *
               link.relative_pose)
                  .translation;
          mean += implied - graph_.node(link.new_node).state.pose.translation;
        }
        alignment.translation = mean / static_cast<double>(links_.size());
      }

      MapCloud merged_map = prior_->map;
      merged_map.merge_from(map_, alignment);

      for (const StateNode& n : merged.nodes()) {
        if (n.id >= prior_nodes) {
          out.trajectory.push_back({n.state.stamp, n.state.pose});
        }
      }
      out.session.graph = std::move(merged);
      out.session.map = std::move(merged_map);
    } else {
      for (const StateNode& n : graph_.nodes()) {
        out.trajectory.push_back({n.state.stamp, n.state.pose});
      }
      out.session.graph = graph_;
      out.session.map = map_;
    }

    report_.stationary_init = stationary_init_;
    if (!data_.ground_truth.empty() && !out.trajectory.empty()) {
      report_.ate = evaluate_trajectory(out.trajectory, data_.ground_truth);
    }
    out.report = report_;
    return out;
  }

  PipelineConfig cfg_;
  const DatasetView& data_;

  GraphConfig graph_config_;
  PoseGraph graph_{GraphConfig{}};
  FeatureMap target_;
  MapCloud map_;
  RegistrationConfig reg_config_;

  std::optional<GeoLla> anchor_lla_;
  EnuAnchor anchor_;
  ImuBias init_bias_;
  bool stationary_init_ = false;

  std::vector<Keyframe> keyframes_;
  int nodes_since_keyframe_ = 0;
  double last_node_stamp_ = 0.0;
  std::size_t gps_cursor_ = 0;
  std::unordered_map<FactorId, std::vector<ImuSample>> preint_windows_;

  const Session* prior_ = nullptr;
  FeatureMap prior_target_{0.5};
  Eigen::Vector3d prior_offset_ = Eigen::Vector3d::Zero();
  std::vector<PoseGraph::SessionLink> links_;
  NodeId last_link_node_ = 0;

  OdometryReport report_;
};

}  // namespace

DatasetView make_disk_dataset(const std::string& dir) {
  DatasetView view;
  view.imu = read_imu_csv(dir + "/imu.csv");
  view.gps = std::filesystem::exists(dir + "/gps.csv")
                 ? read_gps_csv(dir + "/gps.csv")
                 : std::vector<GpsFix>{};
  view.scan_index = read_scan_index(dir);
  view.load_scan = [dir](int frame, double stamp) {
    return read_scan_bin(dir, frame, stamp);
  };
  view.anchor_hint = read_dataset_anchor(dir);
  if (std::filesystem::exists(dir + "/gt.csv")) {
    view.ground_truth = read_tum_trajectory(dir + "/gt.csv");
  }
  return view;
}

DatasetView make_memory_dataset(const SimDataset& sim) {
  DatasetView view;
  view.imu = sim.imu;
  view.gps = sim.gps;
  for (int k = 0; k < static_cast<int>(sim.scans.size()); ++k) {
    view.scan_index.push_back({k, sim.scans[k].frame.frame_stamp});
  }
  const SimDataset* ptr = &sim;
  view.load_scan = [ptr](int frame, double) {
    return ptr->scans[frame].frame;
  };
  view.anchor_hint = sim.anchor;
  view.ground_truth = sim.ground_truth;
  return view;
}

OdometryOutput run_odometry(const PipelineConfig& config,
                            const DatasetView& dataset) {
  Pipeline pipeline(config, dataset);
  return pipeline.run(nullptr);
}

OdometryOutput run_relocalize(const PipelineConfig& config,
                              const DatasetView& dataset, const Session& prior) {
  Pipeline pipeline(config, dataset);
  return pipeline.run(&prior);
}

namespace {

void apply_json(PipelineConfig& cfg, const json& j);  // forward

json vec3_to_json(const Eigen::Vector3d& v) {
  return json::array({v.x(), v.y(), v.z()});
}

Eigen::Vector3d vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw std::runtime_error("config: expected a 3-element array");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json pose_to_json(const Se3Pose& p) {
  const Eigen::Quaterniond& q = p.rotation.quaternion();
  return json{{"translation", vec3_to_json(p.translation)},
              {"quaternion", json::array({q.w(), q.x(), q.y(), q.z()})}};
}

Se3Pose pose_from_json(const json& j) {
  Se3Pose p;
  if (j.contains("translation")) p.translation = vec3_from_json(j["translation"]);
  if (j.contains("quaternion")) {
    const auto& q = j["quaternion"];
    if (!q.is_array() || q.size() != 4) {
      throw std::runtime_error("config: quaternion must be [w, x, y, z]");
    }
    p.rotation = Rotation::from_quaternion(q[0].get<double>(), q[1].get<double>(),
                                           q[2].get<double>(), q[3].get<double>());
  }
  return p;
}

json config_to_json(const PipelineConfig& c) {
  json j;
  j["dataset_dir"] = c.dataset_dir;
  j["output_dir"] = c.output_dir;
  j["lidar_extrinsic"] = pose_to_json(c.lidar_extrinsic);
  j["gps_lever_arm"] = vec3_to_json(c.gps_lever_arm);
  j["features"] = {
      {"ring_count", c.features.ring_count},
      {"scan_period", c.features.scan_period},
      {"smoothness_window", c.features.smoothness_window},
      {"sectors_per_ring", c.features.sectors_per_ring},
      {"max_edges_per_sector", c.features.max_edges_per_sector},
      {"max_surfaces_per_sector", c.features.max_surfaces_per_sector},
      {"edge_threshold", c.features.edge_threshold},
      {"surface_threshold", c.features.surface_threshold},
      {"min_range", c.features.min_range},
      {"max_range", c.features.max_range},
      {"ground_angle_max_deg", c.features.ground_angle_max_deg},
      {"sensor_height", c.features.sensor_height},
      {"ground_voxel", c.features.ground_voxel},
      {"azimuth_bins", c.features.azimuth_bins},
  };
  j["registration"] = {
      {"max_iterations", c.registration.max_iterations},
      {"translation_tolerance", c.registration.translation_tolerance},
      {"rotation_tolerance", c.registration.rotation_tolerance},
      {"max_correspondence_distance",
       c.registration.max_correspondence_distance},
      {"huber_delta", c.registration.huber_delta},
      {"initial_damping", c.registration.initial_damping},
      {"min_correspondences", c.registration.min_correspondences},
      {"degeneracy_threshold", c.registration.degeneracy_threshold},
      {"prior_translation_information",
       c.registration.prior_translation_information},
      {"prior_rotation_information",
       c.registration.prior_rotation_information},
  };
  j["graph"] = {
      {"window_size", c.graph.window_size},
      {"gps_gate_chi2", c.graph.gps_gate_chi2},
  };
  j["solver"] = {
      {"max_iterations", c.solver.max_iterations},
      {"translation_tolerance", c.solver.translation_tolerance},
      {"rotation_tolerance", c.solver.rotation_tolerance},
      {"initial_damping", c.solver.initial_damping},
      {"lidar_information_diag",
       json::array({c.solver.lidar_information_diag(0),
                    c.solver.lidar_information_diag(1),
                    c.solver.lidar_information_diag(2),
                    c.solver.lidar_information_diag(3),
                    c.solver.lidar_information_diag(4),
                    c.solver.lidar_information_diag(5)})},
      {"gps_information_diag", vec3_to_json(c.solver.gps_information_diag)},
      {"loop_information_diag",
       json::array({c.solver.loop_information_diag(0),
                    c.solver.loop_information_diag(1),
                    c.solver.loop_information_diag(2),
                    c.solver.loop_information_diag(3),
                    c.solver.loop_information_diag(4),
                    c.solver.loop_information_diag(5)})},
      {"preintegration_information_scale",
       c.solver.preintegration_information_scale},
      {"boundary_scale_tracking", c.solver.boundary_scale_tracking},
      {"boundary_cap_lost", c.solver.boundary_cap_lost},
  };
  j["imu_noise"] = {
      {"gyro_noise_density", c.imu_noise.gyro_noise_density},
      {"accel_noise_density", c.imu_noise.accel_noise_density},
      {"gyro_bias_walk", c.imu_noise.gyro_bias_walk},
      {"accel_bias_walk", c.imu_noise.accel_bias_walk},
  };
  j["map_voxel_size"] = c.map_voxel_size;
  j["target_cell_size"] = c.target_cell_size;
  j["spline_knot_interval"] = c.spline_knot_interval;
  j["keyframe_every_n"] = c.keyframe_every_n;
  j["keyframe_distance"] = c.keyframe_distance;
  j["keyframe_angle_deg"] = c.keyframe_angle_deg;
  j["target_keyframes"] = c.target_keyframes;
  j["gps_assoc_tolerance"] = c.gps_assoc_tolerance;
  j["use_gps"] = c.use_gps;
  j["use_imu_factors"] = c.use_imu_factors;
  j["registration_innovation_translation"] =
      c.registration_innovation_translation;
  j["registration_innovation_rotation_deg"] =
      c.registration_innovation_rotation_deg;
  j["lidar_factor_min_conditioning"] = c.lidar_factor_min_conditioning;
  j["lidar_factor_max_cost"] = c.lidar_factor_max_cost;
  j["loop_radius"] = c.loop_radius;
  j["loop_exclusion"] = c.loop_exclusion;
  j["loop_cost_threshold"] = c.loop_cost_threshold;
  j["reloc_link_information_diag"] =
      json::array({c.reloc_link_information_diag(0),
                   c.reloc_link_information_diag(1),
                   c.reloc_link_information_diag(2),
                   c.reloc_link_information_diag(3),
                   c.reloc_link_information_diag(4),
                   c.reloc_link_information_diag(5)});
  j["reloc_link_spacing"] = c.reloc_link_spacing;
  j["init_window"] = c.init_window;
  j["rebase_threshold"] = c.rebase_threshold;
  j["anchor_policy"] = c.anchor_policy;
  j["debug_dump"] = c.debug_dump;
  return j;
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void apply_json(PipelineConfig& c, const json& j) {
  static const std::vector<std::string> known = {
      "dataset_dir", "output_dir", "lidar_extrinsic", "gps_lever_arm",
      "features", "registration", "graph", "solver", "imu_noise",
      "map_voxel_size", "target_cell_size", "spline_knot_interval",
      "keyframe_every_n", "keyframe_distance", "keyframe_angle_deg",
      "target_keyframes", "gps_assoc_tolerance", "use_gps", "use_imu_factors",
      "loop_radius", "loop_exclusion", "loop_cost_threshold", "init_window",
      "reloc_link_information_diag", "reloc_link_spacing",
      "registration_innovation_translation",
      "registration_innovation_rotation_deg", "lidar_factor_min_conditioning",
      "lidar_factor_max_cost",
      "rebase_threshold", "anchor_policy", "debug_dump"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw std::runtime_error("config: unknown key '" + key + "'");
    }
  }
  maybe(j, "dataset_dir", c.dataset_dir);
  maybe(j, "output_dir", c.output_dir);
  if (j.contains("lidar_extrinsic")) {
    c.lidar_extrinsic = pose_from_json(j["lidar_extrinsic"]);
  }
  if (j.contains("gps_lever_arm")) {
    c.gps_lever_arm = vec3_from_json(j["gps_lever_arm"]);
  }
  if (j.contains("features")) {
    const json& f = j["features"];
    maybe(f, "ring_count", c.features.ring_count);
    maybe(f, "scan_period", c.features.scan_period);
    maybe(f, "smoothness_window", c.features.smoothness_window);
    maybe(f, "sectors_per_ring", c.features.sectors_per_ring);
    maybe(f, "max_edges_per_sector", c.features.max_edges_per_sector);
    maybe(f, "max_surfaces_per_sector", c.features.max_surfaces_per_sector);
    maybe(f, "edge_threshold", c.features.edge_threshold);
    maybe(f, "surface_threshold", c.features.surface_threshold);
    maybe(f, "min_range", c.features.min_range);
    maybe(f, "max_range", c.features.max_range);
    maybe(f, "ground_angle_max_deg", c.features.ground_angle_max_deg);
    maybe(f, "sensor_height", c.features.sensor_height);
    maybe(f, "ground_voxel", c.features.ground_voxel);
    maybe(f, "azimuth_bins", c.features.azimuth_bins);
  }
  if (j.contains("registration")) {
    const json& r = j["registration"];
    maybe(r, "max_iterations", c.registration.max_iterations);
    maybe(r, "translation_tolerance", c.registration.translation_tolerance);
    maybe(r, "rotation_tolerance", c.registration.rotation_tolerance);
    maybe(r, "max_correspondence_distance",
          c.registration.max_correspondence_distance);
    maybe(r, "huber_delta", c.registration.huber_delta);
    maybe(r, "initial_damping", c.registration.initial_damping);
    maybe(r, "min_correspondences", c.registration.min_correspondences);
    maybe(r, "degeneracy_threshold", c.registration.degeneracy_threshold);
    maybe(r, "prior_translation_information",
          c.registration.prior_translation_information);
    maybe(r, "prior_rotation_information",
          c.registration.prior_rotation_information);
  }
  if (j.contains("graph")) {
    const json& g = j["graph"];
    maybe(g, "window_size", c.graph.window_size);
    maybe(g, "gps_gate_chi2", c.graph.gps_gate_chi2);
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    maybe(s, "max_iterations", c.solver.max_iterations);
    maybe(s, "translation_tolerance", c.solver.translation_tolerance);
    maybe(s, "rotation_tolerance", c.solver.rotation_tolerance);
    maybe(s, "initial_damping", c.solver.initial_damping);
    if (s.contains("lidar_information_diag")) {
      const auto& a = s["lidar_information_diag"];
      for (int k = 0; k < 6; ++k) {
        c.solver.lidar_information_diag(k) = a.at(k).get<double>();
      }
    }
    if (s.contains("gps_information_diag")) {
      c.solver.gps_information_diag = vec3_from_json(s["gps_information_diag"]);
    }
    if (s.contains("loop_information_diag")) {
      const auto& a = s["loop_information_diag"];
      for (int k = 0; k < 6; ++k) {
        c.solver.loop_information_diag(k) = a.at(k).get<double>();
      }
    }
    maybe(s, "preintegration_information_scale",
          c.solver.preintegration_information_scale);
    maybe(s, "boundary_scale_tracking", c.solver.boundary_scale_tracking);
    maybe(s, "boundary_cap_lost", c.solver.boundary_cap_lost);
  }
  if (j.contains("imu_noise")) {
    const json& n = j["imu_noise"];
    maybe(n, "gyro_noise_density", c.imu_noise.gyro_noise_density);
    maybe(n, "accel_noise_density", c.imu_noise.accel_noise_density);
    maybe(n, "gyro_bias_walk", c.imu_noise.gyro_bias_walk);
    maybe(n, "accel_bias_walk", c.imu_noise.accel_bias_walk);
  }
  maybe(j, "map_voxel_size", c.map_voxel_size);
  maybe(j, "target_cell_size", c.target_cell_size);
  maybe(j, "spline_knot_interval", c.spline_knot_interval);
  maybe(j, "keyframe_every_n", c.keyframe_every_n);
  maybe(j, "keyframe_distance", c.keyframe_distance);
  maybe(j, "keyframe_angle_deg", c.keyframe_angle_deg);
  maybe(j, "target_keyframes", c.target_keyframes);
  maybe(j, "gps_assoc_tolerance", c.gps_assoc_tolerance);
  maybe(j, "use_gps", c.use_gps);
  maybe(j, "use_imu_factors", c.use_imu_factors);
  maybe(j, "registration_innovation_translation",
        c.registration_innovation_translation);
  maybe(j, "registration_innovation_rotation_deg",
        c.registration_innovation_rotation_deg);
  maybe(j, "lidar_factor_min_conditioning", c.lidar_factor_min_conditioning);
  maybe(j, "lidar_factor_max_cost", c.lidar_factor_max_cost);
  maybe(j, "loop_radius", c.loop_radius);
  maybe(j, "loop_exclusion", c.loop_exclusion);
  maybe(j, "loop_cost_threshold", c.loop_cost_threshold);
  if (j.contains("reloc_link_information_diag")) {
    const auto& a = j["reloc_link_information_diag"];
    for (int k = 0; k < 6; ++k) {
      c.reloc_link_information_diag(k) = a.at(k).get<double>();
    }
  }
  maybe(j, "reloc_link_spacing", c.reloc_link_spacing);
  maybe(j, "init_window", c.init_window);
  maybe(j, "rebase_threshold", c.rebase_threshold);
  maybe(j, "anchor_policy", c.anchor_policy);
  maybe(j, "debug_dump", c.debug_dump);
}

}  // namespace

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) {
    throw std::runtime_error("config: cannot open " + path);
  }
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("config: parse error in " + path + ": " + e.what());
  }
  PipelineConfig cfg;
  apply_json(cfg, j);
  return cfg;
}

std::string config_echo(const PipelineConfig& config) {
  return config_to_json(config).dump();
}

std::string format_report(const OdometryReport& r, const PipelineConfig& cfg) {
  std::ostringstream os;
  os << "glio odometry report\n";
  os << "frames " << r.frames << '\n';
  os << "nodes " << r.nodes << '\n';
  os << "keyframes " << r.keyframes << '\n';
  os << "registration_failures " << r.registration_failures << '\n';
  os << "loop_closures " << r.loop_closures << '\n';
  os << "stationary_init " << (r.stationary_init ? 1 : 0) << '\n';
  os << "gps_accepted " << r.gps.accepted << '\n';
  os << "gps_gated " << r.gps.gated << '\n';
  os << "gps_invalid_quality " << r.gps.invalid_quality << '\n';
  os << "gps_unassociated " << r.gps.unassociated << '\n';
  if (r.ate) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "ate max %.4f min %.4f mean %.4f sd %.4f count %zu\n",
                  r.ate->max_m, r.ate->min_m, r.ate->mean_m, r.ate->sd_m,
                  r.ate->count);
    os << buf;
  }
  os << "config " << config_echo(cfg) << '\n';
  return os.str();
}

void write_outputs(const OdometryOutput& output, const PipelineConfig& config) {
  std::filesystem::create_directories(config.output_dir);
  const std::vector<std::string> header = {"glio trajectory",
                                           "config " + config_echo(config)};
  write_tum_trajectory(config.output_dir + "/trajectory.tum", output.trajectory,
                       header);
  save_session(output.session, config.output_dir + "/session.gfz");
  std::ofstream os(config.output_dir + "/report.txt");
  os << format_report(output.report, config);
}

}  // namespace glio
