#include "glio/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <stdexcept>

#include "glio/random.hpp"

namespace glio {

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::Matrix4d pose_matrix(const Se3Pose& p) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = p.rotation.matrix();
  m.topRightCorner<3, 1>() = p.translation;
  return m;
}

Eigen::Matrix4d se3_generator(const Twist& xi) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m.topLeftCorner<3, 3>() = skew(xi.angular);
  m.topRightCorner<3, 1>() = xi.linear;
  return m;
}

// Axis-aligned box walls (no roof) plus its corner/top edge segments; the box
// stands on the ground plane at base_z.
void add_box_building(WorldModel& world, const Eigen::Vector2d& center,
                      double width_x, double width_y, double height,
                      double base_z) {
  const double hx = width_x / 2.0, hy = width_y / 2.0, hz = height / 2.0;
  const Eigen::Vector3d c3(center.x(), center.y(), base_z + hz);

  auto add_wall = [&](const Eigen::Vector3d& n, const Eigen::Vector3d& u,
                      double half_u, const Eigen::Vector3d& offset) {
    PlanePrimitive w;
    w.center = c3 + offset;
    w.normal = n;
    w.u_axis = u;
    w.v_axis = Eigen::Vector3d(0.0, 0.0, 1.0);
    w.half_u = half_u;
    w.half_v = hz;
    world.planes.push_back(w);
  };
  add_wall({1, 0, 0}, {0, 1, 0}, hy, {hx, 0, 0});
  add_wall({-1, 0, 0}, {0, 1, 0}, hy, {-hx, 0, 0});
  add_wall({0, 1, 0}, {1, 0, 0}, hx, {0, hy, 0});
  add_wall({0, -1, 0}, {1, 0, 0}, hx, {0, -hy, 0});

  const double xs[2] = {center.x() - hx, center.x() + hx};
  const double ys[2] = {center.y() - hy, center.y() + hy};
  const double top = base_z + height;
  for (double x : xs) {
    for (double y : ys) {
      world.edges.push_back({{x, y, base_z}, {x, y, top}});
    }
  }
  for (int k = 0; k < 2; ++k) {
    world.edges.push_back({{xs[0], ys[k], top}, {xs[1], ys[k], top}});
    world.edges.push_back({{xs[k], ys[0], top}, {xs[k], ys[1], top}});
  }
}

}  // namespace

WorldModel generate_world(const WorldSpec& spec) {
  WorldModel world;
  world.anchor = spec.anchor;

  PlanePrimitive ground;
  ground.center = {spec.loop_x / 2.0, spec.loop_y / 2.0, spec.ground_z};
  ground.normal = {0.0, 0.0, 1.0};
  ground.u_axis = {1.0, 0.0, 0.0};
  ground.v_axis = {0.0, 1.0, 0.0};
  ground.half_u = spec.ground_extent;
  ground.half_v = spec.ground_extent;
  ground.is_ground = true;
  world.planes.push_back(ground);

  if (spec.preset.empty() || spec.preset == "open-harbor") {
    return world;
  }
  if (spec.preset != "box-street") {
    throw std::invalid_argument("generate_world: unknown preset " + spec.preset);
  }

  // Buildings lining both sides of the rectangular street loop. The loop
  // centerline runs (0,0) -> (loop_x,0) -> (loop_x,loop_y) -> (0,loop_y).
  const double off = spec.building_offset;
  const double bw = spec.building_width, bd = spec.building_depth;
  const double bh = spec.building_height;

  auto line_of_buildings = [&](const Eigen::Vector2d& from,
                               const Eigen::Vector2d& to,
                               const Eigen::Vector2d& lateral) {
    const double len = (to - from).norm();
    const Eigen::Vector2d dir = (to - from) / len;
    for (double s = spec.building_spacing / 2.0; s + bw / 2.0 < len;
         s += spec.building_spacing) {
      const Eigen::Vector2d center =
          from + dir * s + lateral * (off + bd / 2.0);
      const bool along_x = std::abs(dir.x()) > 0.5;
      add_box_building(world, center, along_x ? bw : bd, along_x ? bd : bw, bh,
                       spec.ground_z);
    }
  };

  const Eigen::Vector2d c00(0.0, 0.0), c10(spec.loop_x, 0.0),
      c11(spec.loop_x, spec.loop_y), c01(0.0, spec.loop_y);
  line_of_buildings(c00, c10, {0.0, -1.0});
  line_of_buildings(c00, c10, {0.0, 1.0});
  line_of_buildings(c10, c11, {1.0, 0.0});
  line_of_buildings(c10, c11, {-1.0, 0.0});
  line_of_buildings(c11, c01, {0.0, 1.0});
  line_of_buildings(c11, c01, {0.0, -1.0});
  line_of_buildings(c01, c00, {-1.0, 0.0});
  line_of_buildings(c01, c00, {1.0, 0.0});
  return world;
}

TrajectorySampler::TrajectorySampler(std::vector<Se3Pose> control,
                                     double first_control_stamp,
                                     double knot_interval)
    : control_(std::move(control)), t0_(first_control_stamp), dt_(knot_interval) {
  if (control_.size() < 4) {
    throw std::invalid_argument("TrajectorySampler: needs >= 4 control poses");
  }
  if (!(dt_ > 0.0)) {
    throw std::invalid_argument("TrajectorySampler: bad knot interval");
  }
}

TrajectorySampler::Derivatives TrajectorySampler::eval(double t) const {
  if (!covers(t)) {
    throw std::invalid_argument("TrajectorySampler: query outside coverage");
  }
  double s = (t - t0_) / dt_;
  auto idx = static_cast<std::ptrdiff_t>(std::floor(s));
  idx = std::max<std::ptrdiff_t>(
      1, std::min<std::ptrdiff_t>(
             idx, static_cast<std::ptrdiff_t>(control_.size()) - 3));
  const double u = s - static_cast<double>(idx);

  const double u2 = u * u, u3 = u2 * u;
  const double b[3] = {(5.0 + 3.0 * u - 3.0 * u2 + u3) / 6.0,
                       (1.0 + 3.0 * u + 3.0 * u2 - 2.0 * u3) / 6.0, u3 / 6.0};
  const double db[3] = {(1.0 - 2.0 * u + u2) / 2.0,
                        (1.0 + 2.0 * u - 2.0 * u2) / 2.0, u2 / 2.0};
  const double ddb[3] = {u - 1.0, 1.0 - 2.0 * u, u};

  Eigen::Matrix4d a[3], da[3], dda[3];
  for (int k = 0; k < 3; ++k) {
    const Twist xi =
        pose_log(control_[idx + k - 1].inverse() * control_[idx + k]);
    a[k] = pose_matrix(pose_exp(xi.scaled(b[k])));
    const Eigen::Matrix4d gen = se3_generator(xi);
    const Eigen::Matrix4d p = db[k] * gen;
    da[k] = a[k] * p;
    dda[k] = a[k] * (ddb[k] * gen + p * p);
  }

  const Eigen::Matrix4d c0 = pose_matrix(control_[idx - 1]);
  Derivatives out;
  out.t = c0 * a[0] * a[1] * a[2];
  out.dt = c0 * (da[0] * a[1] * a[2] + a[0] * da[1] * a[2] +
                 a[0] * a[1] * da[2]) /
           dt_;
  out.ddt = c0 *
            (dda[0] * a[1] * a[2] + a[0] * dda[1] * a[2] + a[0] * a[1] * dda[2] +
             2.0 * (da[0] * da[1] * a[2] + da[0] * a[1] * da[2] +
                    a[0] * da[1] * da[2])) /
            (dt_ * dt_);
  return out;
}

Se3Pose TrajectorySampler::pose(double t) const {
  const Derivatives d = eval(t);
  Se3Pose p;
  p.rotation = Rotation::from_matrix(d.t.topLeftCorner<3, 3>());
  p.translation = d.t.topRightCorner<3, 1>();
  return p;
}

Eigen::Vector3d TrajectorySampler::body_angular_velocity(double t) const {
  const Derivatives d = eval(t);
  const Eigen::Matrix3d s =
      d.t.topLeftCorner<3, 3>().transpose() * d.dt.topLeftCorner<3, 3>();
  const Eigen::Matrix3d omega = 0.5 * (s - s.transpose());
  return {omega(2, 1), omega(0, 2), omega(1, 0)};
}

Eigen::Vector3d TrajectorySampler::world_velocity(double t) const {
  return eval(t).dt.topRightCorner<3, 1>();
}

Eigen::Vector3d TrajectorySampler::world_acceleration(double t) const {
  return eval(t).ddt.topRightCorner<3, 1>();
}

namespace {

struct RayHit {
  double range = 0.0;
  int plane = -1;
};

std::optional<RayHit> cast_ray(const WorldModel& world,
                               std::span<const int> plane_subset,
                               const Eigen::Vector3d& origin,
                               const Eigen::Vector3d& dir, double min_range,
                               double max_range) {
  RayHit best;
  best.range = max_range + 1.0;
  for (int pi : plane_subset) {
    const PlanePrimitive& pl = world.planes[pi];
    const double denom = pl.normal.dot(dir);
    if (std::abs(denom) < 1e-12) continue;
    const double s = pl.normal.dot(pl.center - origin) / denom;
    if (s < min_range || s > max_range || s >= best.range) continue;
    const Eigen::Vector3d hit = origin + s * dir;
    const Eigen::Vector3d rel = hit - pl.center;
    if (std::abs(rel.dot(pl.u_axis)) > pl.half_u) continue;
    if (std::abs(rel.dot(pl.v_axis)) > pl.half_v) continue;
    best.range = s;
    best.plane = pi;
  }
  if (best.plane < 0) return std::nullopt;
  return best;
}

double point_segment_distance(const Eigen::Vector3d& p, const EdgeSegment& e) {
  const Eigen::Vector3d d = e.b - e.a;
  const double len2 = d.squaredNorm();
  if (len2 < 1e-18) return (p - e.a).norm();
  const double s = std::clamp((p - e.a).dot(d) / len2, 0.0, 1.0);
  return (p - (e.a + s * d)).norm();
}

}  // namespace

SimDataset simulate_dataset(const WorldModel& world, const SimConfig& config) {
  SimDataset out;
  out.anchor = world.anchor;
  out.seed = config.seed;

  TrajectorySampler traj(config.trajectory_control,
                         config.trajectory_first_stamp, config.knot_interval);
  if (!traj.covers(0.0) || !traj.covers(config.duration)) {
    throw std::invalid_argument(
        "simulate_dataset: trajectory does not cover the session span");
  }
  const GravityVector gravity;

  // IMU + ground truth at the IMU rate.
  {
    GaussianSampler noise(config.seed + 1);
    const double dt = 1.0 / config.imu_rate;
    const double gyro_sigma =
        config.imu_noise.gyro_noise_density * std::sqrt(config.imu_rate) *
        config.imu_noise_scale;
    const double accel_sigma =
        config.imu_noise.accel_noise_density * std::sqrt(config.imu_rate) *
        config.imu_noise_scale;
    const double gyro_walk =
        config.imu_noise.gyro_bias_walk * std::sqrt(dt) * config.imu_noise_scale;
    const double accel_walk = config.imu_noise.accel_bias_walk * std::sqrt(dt) *
                              config.imu_noise_scale;

    ImuBias bias = config.imu_bias_truth;
    const auto count = static_cast<std::size_t>(
        std::llround(config.duration * config.imu_rate));
    for (std::size_t k = 0; k <= count; ++k) {
      const double t = static_cast<double>(k) * dt;
      const Se3Pose pose = traj.pose(t);
      const Eigen::Matrix3d rt = pose.rotation.matrix().transpose();

      ImuSample s;
      s.stamp = t;
      s.angular_velocity = traj.body_angular_velocity(t) + bias.gyro;
      s.acceleration = rt * (traj.world_acceleration(t) - gravity.v) + bias.accel;
      for (int i = 0; i < 3; ++i) {
        s.angular_velocity(i) += noise.next(gyro_sigma);
        s.acceleration(i) += noise.next(accel_sigma);
      }
      out.imu.push_back(s);
      out.ground_truth.push_back({t, pose});

      for (int i = 0; i < 3; ++i) {
        bias.gyro(i) += noise.next(gyro_walk);
        bias.accel(i) += noise.next(accel_walk);
      }
    }
  }

  // LiDAR scans, each point ray-cast from the true pose at its emission time.
  {
    GaussianSampler noise(config.seed + 2);
    const LidarSimConfig& lc = config.lidar;
    const double period = 1.0 / lc.rate;
    const double el_min = lc.elevation_min_deg * kPi / 180.0;
    const double el_max = lc.elevation_max_deg * kPi / 180.0;

    std::vector<int> all_planes(world.planes.size());
    for (std::size_t i = 0; i < all_planes.size(); ++i) {
      all_planes[i] = static_cast<int>(i);
    }

    for (double t_f = 0.0; t_f + period <= config.duration + 1e-9;
         t_f += period) {
      LabeledFrame lf;
      lf.frame.frame_stamp = t_f;

      // Cull primitives far outside sensor reach for this frame.
      const Eigen::Vector3d frame_origin = traj.pose(t_f).translation;
      std::vector<int> nearby;
      for (int pi : all_planes) {
        const PlanePrimitive& pl = world.planes[pi];
        const double radius = std::hypot(pl.half_u, pl.half_v);
        if ((pl.center - frame_origin).norm() - radius <
            lc.max_range + 10.0) {
          nearby.push_back(pi);
        }
      }
      std::vector<int> nearby_edges;
      for (int ei = 0; ei < static_cast<int>(world.edges.size()); ++ei) {
        const EdgeSegment& e = world.edges[ei];
        const double d = std::min((e.a - frame_origin).norm(),
                                  (e.b - frame_origin).norm());
        if (d < lc.max_range + 20.0) nearby_edges.push_back(ei);
      }

      for (int a = 0; a < lc.points_per_ring; ++a) {
        const double rel = static_cast<double>(a) /
                           static_cast<double>(lc.points_per_ring) * period;
        const double az = -kPi + 2.0 * kPi * static_cast<double>(a) /
                                     static_cast<double>(lc.points_per_ring);
        const Se3Pose pose = traj.pose(t_f + rel);
        for (int r = 0; r < lc.rings; ++r) {
          const double el =
              el_min + (el_max - el_min) * static_cast<double>(r) /
                           static_cast<double>(lc.rings - 1);
          const Eigen::Vector3d d_sensor(std::cos(el) * std::cos(az),
                                         std::cos(el) * std::sin(az),
                                         std::sin(el));
          const Eigen::Vector3d d_world = pose.rotation * d_sensor;
          const auto hit = cast_ray(world, nearby, pose.translation, d_world,
                                    lc.min_range, lc.max_range);
          if (!hit) continue;

          double range = hit->range;
          if (lc.range_sigma > 0.0) range += noise.next(lc.range_sigma);

          ScanPoint p;
          p.position = d_sensor * range;
          p.ring = r;
          p.relative_time = rel;
          lf.frame.points.push_back(p);

          const Eigen::Vector3d true_hit =
              pose.translation + hit->range * d_world;
          TrueLabel label = world.planes[hit->plane].is_ground
                                ? TrueLabel::Ground
                                : TrueLabel::Surface;
          if (label != TrueLabel::Ground) {
            for (int ei : nearby_edges) {
              if (point_segment_distance(true_hit, world.edges[ei]) < 0.15) {
                label = TrueLabel::Edge;
                break;
              }
            }
          }
          lf.labels.push_back(label);
        }
      }
      out.scans.push_back(std::move(lf));
    }
  }

  // GPS fixes through the inverse geodetic chain.
  {
    GaussianSampler noise(config.seed + 3);
    const EnuAnchor anchor = EnuAnchor::from_lla(world.anchor);
    const double period = 1.0 / config.gps.rate;
    for (double t = 0.0; t <= config.duration + 1e-9; t += period) {
      const Eigen::Vector3d p = traj.pose(t).translation;
      EnuPoint enu{p.x() + noise.next(config.gps.horizontal_sigma),
                   p.y() + noise.next(config.gps.horizontal_sigma),
                   p.z() + noise.next(config.gps.vertical_sigma)};
      GpsFix fix;
      fix.stamp = t;
      fix.lla = enu_to_lla(enu, anchor);
      fix.fix_quality = 1;
      for (const auto& [d0, d1] : config.gps.dropouts) {
        if (t >= d0 && t < d1) {
          fix.fix_quality = 0;
          break;
        }
      }
      out.gps.push_back(fix);
    }
  }
  return out;
}

void write_dataset(const SimDataset& dataset, const SimConfig& config,
                   const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_imu_csv(dir + "/imu.csv", dataset.imu);
  write_gps_csv(dir + "/gps.csv", dataset.gps);

  std::vector<ScanIndexEntry> index;
  for (int k = 0; k < static_cast<int>(dataset.scans.size()); ++k) {
    write_scan_bin(dir, k, dataset.scans[k].frame);
    index.push_back({k, dataset.scans[k].frame.frame_stamp});
  }
  write_scan_index(dir, index);
  write_tum_trajectory(dir + "/gt.csv", dataset.ground_truth);

  std::ofstream os(dir + "/dataset.toml");
  char buf[256];
  os << "# glio dataset header\n";
  os << "seed = " << dataset.seed << '\n';
  os << "noise_algorithm = \"" << GaussianSampler::kAlgorithmId << "\"\n";
  std::snprintf(buf, sizeof(buf), "anchor_lla = [%.12f, %.12f, %.6f]\n",
                dataset.anchor.latitude * 180.0 / kPi,
                dataset.anchor.longitude * 180.0 / kPi,
                dataset.anchor.altitude);
  os << buf;
  std::snprintf(buf, sizeof(buf), "imu_rate = %.3f\n", config.imu_rate);
  os << buf;
  std::snprintf(buf, sizeof(buf), "lidar_rate = %.3f\n", config.lidar.rate);
  os << buf;
  std::snprintf(buf, sizeof(buf), "lidar_rings = %d\n", config.lidar.rings);
  os << buf;
  std::snprintf(buf, sizeof(buf), "points_per_ring = %d\n",
                config.lidar.points_per_ring);
  os << buf;
  std::snprintf(buf, sizeof(buf), "lidar_range_sigma = %.6f\n",
                config.lidar.range_sigma);
  os << buf;
  std::snprintf(buf, sizeof(buf), "gps_rate = %.3f\n", config.gps.rate);
  os << buf;
  std::snprintf(buf, sizeof(buf), "gps_horizontal_sigma = %.3f\n",
                config.gps.horizontal_sigma);
  os << buf;
  std::snprintf(buf, sizeof(buf), "gps_vertical_sigma = %.3f\n",
                config.gps.vertical_sigma);
  os << buf;
  std::snprintf(buf, sizeof(buf), "duration = %.3f\n", config.duration);
  os << buf;
}

TrajectoryErrorStats evaluate_trajectory(
    std::span<const TimedPose> estimate, std::span<const TimedPose> ground_truth) {
  if (estimate.empty() || ground_truth.empty()) {
    throw std::invalid_argument("evaluate_trajectory: empty trajectory");
  }
  const double t_begin = estimate.front().stamp;
  const double t_end = estimate.back().stamp;

  TrajectoryErrorStats stats;
  stats.min_m = std::numeric_limits<double>::infinity();
  std::vector<double> errors;
  std::size_t cursor = 0;
  for (const TimedPose& gt : ground_truth) {
    if (gt.stamp < t_begin - 1e-9 || gt.stamp > t_end + 1e-9) continue;
    while (cursor + 1 < estimate.size() &&
           estimate[cursor + 1].stamp < gt.stamp) {
      ++cursor;
    }
    Eigen::Vector3d interp;
    if (cursor + 1 >= estimate.size()) {
      interp = estimate.back().pose.translation;
    } else {
      const TimedPose& a = estimate[cursor];
      const TimedPose& b = estimate[cursor + 1];
      const double span = b.stamp - a.stamp;
      const double w = span > 1e-12
                           ? std::clamp((gt.stamp - a.stamp) / span, 0.0, 1.0)
                           : 0.0;
      interp = (1.0 - w) * a.pose.translation + w * b.pose.translation;
    }
    const double err = (interp - gt.pose.translation).norm();
    stats.max_m = std::max(stats.max_m, err);
    stats.min_m = std::min(stats.min_m, err);
    errors.push_back(err);
  }
  if (errors.empty()) {
    throw std::invalid_argument("evaluate_trajectory: no overlapping stamps");
  }
  stats.count = errors.size();
  double sum = 0.0;
  for (double e : errors) sum += e;
  stats.mean_m = sum / static_cast<double>(errors.size());
  double var = 0.0;
  for (double e : errors) var += (e - stats.mean_m) * (e - stats.mean_m);
  stats.sd_m = std::sqrt(var / static_cast<double>(errors.size()));
  return stats;
}

namespace {

// Rounded-rectangle loop: position and heading as functions of arc length.
struct LoopPath {
  double d_x, d_y, r, total;

  LoopPath(double loop_x, double loop_y, double radius)
      : d_x(loop_x - 2.0 * radius), d_y(loop_y - 2.0 * radius), r(radius) {
    total = 2.0 * d_x + 2.0 * d_y + 2.0 * kPi * r;
  }

  void at(double s, Eigen::Vector2d* pos, double* heading) const {
    s = std::fmod(s, total);
    if (s < 0.0) s += total;
    const double quarter = kPi * r / 2.0;
    // Piece layout: straight, arc, straight, arc, straight, arc, straight, arc.
    struct Piece {
      double len;
      int type;  // 0 straight, 1 arc
    };
    const Piece pieces[8] = {{d_x, 0}, {quarter, 1}, {d_y, 0}, {quarter, 1},
                             {d_x, 0}, {quarter, 1}, {d_y, 0}, {quarter, 1}};

    double base_heading = 0.0;
    Eigen::Vector2d cursor(0.0, 0.0);
    for (const Piece& piece : pieces) {
      if (s <= piece.len + 1e-12) {
        if (piece.type == 0) {
          const Eigen::Vector2d dir(std::cos(base_heading),
                                    std::sin(base_heading));
          *pos = cursor + dir * s;
          *heading = base_heading;
        } else {
          // Arc center sits 90 deg to the left of the current heading.
          const Eigen::Vector2d left(-std::sin(base_heading),
                                     std::cos(base_heading));
          const Eigen::Vector2d center = cursor + left * r;
          const double sweep = s / r;
          const double h = base_heading + sweep;
          *pos = center + Eigen::Vector2d(std::sin(h), -std::cos(h)) * r;
          *heading = h;
        }
        return;
      }
      // Advance the cursor past this piece.
      if (piece.type == 0) {
        cursor += Eigen::Vector2d(std::cos(base_heading), std::sin(base_heading)) *
                  piece.len;
      } else {
        const Eigen::Vector2d left(-std::sin(base_heading),
                                   std::cos(base_heading));
        const Eigen::Vector2d center = cursor + left * r;
        const double h = base_heading + kPi / 2.0;
        cursor = center + Eigen::Vector2d(std::sin(h), -std::cos(h)) * r;
        base_heading = h;
      }
      s -= piece.len;
    }
    *pos = cursor;
    *heading = base_heading;
  }
};

double trapezoid_arclength(double t, const TrajectoryParams& p) {
  if (t <= p.stationary_time) return 0.0;
  const double tm = t - p.stationary_time;
  const double t_accel = p.cruise_speed / p.acceleration;
  if (tm <= t_accel) return 0.5 * p.acceleration * tm * tm;
  return 0.5 * p.acceleration * t_accel * t_accel +
         p.cruise_speed * (tm - t_accel);
}

std::vector<Se3Pose> build_controls(double duration,
                                    const TrajectoryParams& params,
                                    double first_stamp,
                                    const std::function<Se3Pose(double)>& at_s) {
  std::vector<Se3Pose> out;
  const double dt = params.knot_interval;
  // Coverage [t0+dt, t0+(n-2)dt) must include [0, duration].
  const auto count = static_cast<std::size_t>(
      std::ceil((duration + 2.0 * dt - first_stamp) / dt)) + 2;
  for (std::size_t k = 0; k < count; ++k) {
    const double t = first_stamp + static_cast<double>(k) * dt;
    out.push_back(at_s(trapezoid_arclength(std::max(0.0, t), params)));
  }
  return out;
}

}  // namespace

std::vector<Se3Pose> make_loop_trajectory(double loop_x, double loop_y,
                                          double corner_radius, double duration,
                                          const TrajectoryParams& params,
                                          double first_stamp) {
  const LoopPath path(loop_x, loop_y, corner_radius);
  return build_controls(duration, params, first_stamp, [&](double s) {
    Eigen::Vector2d pos;
    double heading = 0.0;
    path.at(s, &pos, &heading);
    Se3Pose p;
    p.rotation = rot_exp({0.0, 0.0, heading});
    p.translation = {pos.x(), pos.y(), params.height};
    return p;
  });
}

std::vector<Se3Pose> make_straight_trajectory(double duration,
                                              const TrajectoryParams& params,
                                              double first_stamp) {
  return build_controls(duration, params, first_stamp, [&](double s) {
    Se3Pose p;
    p.translation = {s, 0.0, params.height};
    return p;
  });
}

}  // namespace glio
