#include "glio/registration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/Dense>

namespace glio {

double point_line_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                           const Eigen::Vector3d& b) {
  const Eigen::Vector3d ab = b - a;
  const double len = ab.norm();
  if (len < 1e-6) {
    throw std::invalid_argument("point_line_distance: degenerate endpoints");
  }
  return (p - a).cross(p - b).norm() / len;
}

double point_plane_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& q1,
                            const Eigen::Vector3d& q2,
                            const Eigen::Vector3d& q3) {
  const Eigen::Vector3d n = (q2 - q1).cross(q3 - q1);
  if (0.5 * n.norm() < 1e-8) {
    throw std::invalid_argument("point_plane_distance: collinear plane points");
  }
  return std::abs((p - q1).dot(n.normalized()));
}

FeatureMap::FeatureMap(double cell_size) : cell_(cell_size) {}

std::uint64_t FeatureMap::cell_key(const Eigen::Vector3d& p) const {
  const auto ix = static_cast<std::int64_t>(std::floor(p.x() / cell_));
  const auto iy = static_cast<std::int64_t>(std::floor(p.y() / cell_));
  const auto iz = static_cast<std::int64_t>(std::floor(p.z() / cell_));
  return (static_cast<std::uint64_t>(ix & 0x1FFFFF) << 42) |
         (static_cast<std::uint64_t>(iy & 0x1FFFFF) << 21) |
         static_cast<std::uint64_t>(iz & 0x1FFFFF);
}

void FeatureMap::insert_edge(const Eigen::Vector3d& p, int ring) {
  edge_cells_[cell_key(p)].push_back(static_cast<int>(edges_.size()));
  edges_.push_back({p, ring});
}

void FeatureMap::insert_planar(const Eigen::Vector3d& p) {
  planar_cells_[cell_key(p)].push_back(static_cast<int>(planars_.size()));
  planars_.push_back(p);
}

void FeatureMap::clear() {
  edges_.clear();
  planars_.clear();
  edge_cells_.clear();
  planar_cells_.clear();
}

template <typename Dist>
std::vector<int> FeatureMap::nearest(const CellMap& cells,
                                     const Eigen::Vector3d& p, int k,
                                     double max_dist, Dist&& dist2) const {
  const int reach = static_cast<int>(std::ceil(max_dist / cell_));
  const auto cx = static_cast<std::int64_t>(std::floor(p.x() / cell_));
  const auto cy = static_cast<std::int64_t>(std::floor(p.y() / cell_));
  const auto cz = static_cast<std::int64_t>(std::floor(p.z() / cell_));
  const double max_d2 = max_dist * max_dist;

  // Best-k by (distance^2, index); small k, insertion sort.
  std::vector<std::pair<double, int>> best;
  best.reserve(k + 1);
  for (int dx = -reach; dx <= reach; ++dx) {
    for (int dy = -reach; dy <= reach; ++dy) {
      for (int dz = -reach; dz <= reach; ++dz) {
        const std::uint64_t key =
            (static_cast<std::uint64_t>((cx + dx) & 0x1FFFFF) << 42) |
            (static_cast<std::uint64_t>((cy + dy) & 0x1FFFFF) << 21) |
            static_cast<std::uint64_t>((cz + dz) & 0x1FFFFF);
        const auto it = cells.find(key);
        if (it == cells.end()) continue;
        for (int idx : it->second) {
          const double d2 = dist2(idx);
          if (d2 > max_d2) continue;
          const std::pair<double, int> cand{d2, idx};
          if (static_cast<int>(best.size()) == k && cand >= best.back()) {
            continue;
          }
          auto pos = std::lower_bound(best.begin(), best.end(), cand);
          best.insert(pos, cand);
          if (static_cast<int>(best.size()) > k) best.pop_back();
        }
      }
    }
  }
  std::vector<int> out;
  out.reserve(best.size());
  for (const auto& [d2, idx] : best) out.push_back(idx);
  return out;
}

std::vector<int> FeatureMap::nearest_edges(const Eigen::Vector3d& p, int k,
                                           double max_dist) const {
  return nearest(edge_cells_, p, k, max_dist, [&](int idx) {
    return (edges_[idx].position - p).squaredNorm();
  });
}

std::vector<int> FeatureMap::nearest_planars(const Eigen::Vector3d& p, int k,
                                             double max_dist) const {
  return nearest(planar_cells_, p, k, max_dist, [&](int idx) {
    return (planars_[idx] - p).squaredNorm();
  });
}

Correspondences find_correspondences(const FeatureSet& features,
                                     const FeatureMap& target,
                                     const Se3Pose& guess, double max_distance) {
  Correspondences out;

  for (const ScanPoint& src : features.edges) {
    const Eigen::Vector3d q = guess * src.position;
    // Ask for a few extra so a different-ring partner can be found.
    const std::vector<int> nn = target.nearest_edges(q, 5, max_distance);
    if (nn.size() < 2) continue;
    const FeatureMap::EdgePoint& first = target.edge(nn[0]);
    int second = -1;
    for (std::size_t i = 1; i < nn.size(); ++i) {
      if (target.edge(nn[i]).ring != first.ring) {
        second = nn[i];
        break;
      }
    }
    if (second < 0) second = nn[1];
    const Eigen::Vector3d a = first.position;
    const Eigen::Vector3d b = target.edge(second).position;
    if ((a - b).norm() < 1e-6) continue;
    out.lines.push_back({src.position, a, b});
  }

  auto match_planes = [&](const std::vector<ScanPoint>& pts) {
    for (const ScanPoint& src : pts) {
      const Eigen::Vector3d q = guess * src.position;
      const std::vector<int> nn = target.nearest_planars(q, 3, max_distance);
      if (nn.size() < 3) continue;
      const Eigen::Vector3d& q1 = target.planar(nn[0]);
      const Eigen::Vector3d& q2 = target.planar(nn[1]);
      const Eigen::Vector3d& q3 = target.planar(nn[2]);
      if (0.5 * (q2 - q1).cross(q3 - q1).norm() < 1e-8) continue;
      out.planes.push_back({src.position, q1, q2, q3});
    }
  };
  match_planes(features.surfaces);
  match_planes(features.ground);
  return out;
}

namespace {

struct NormalEquations {
  Eigen::Matrix<double, 6, 6> h = Eigen::Matrix<double, 6, 6>::Zero();
  // Correspondence-only part of h; the degeneracy test must not see the
  // guess prior, which is full-rank by construction.
  Eigen::Matrix<double, 6, 6> h_data = Eigen::Matrix<double, 6, 6>::Zero();
  Eigen::Matrix<double, 6, 1> g = Eigen::Matrix<double, 6, 1>::Zero();
  double cost = 0.0;
};

double huber_cost(double e, double delta) {
  return (e <= delta) ? e * e : delta * (2.0 * e - delta);
}

// Residuals and normal equations at `pose` for a fixed correspondence set.
// Tangent ordering: [rotation; translation].
NormalEquations evaluate(const Correspondences& corr, const Se3Pose& pose,
                         const Se3Pose& guess, const RegistrationConfig& config,
                         bool build_system) {
  const double huber_delta = config.huber_delta;
  NormalEquations ne;
  const Eigen::Matrix3d rot = pose.rotation.matrix();

  if (config.prior_translation_information > 0.0 ||
      config.prior_rotation_information > 0.0) {
    const Eigen::Vector3d r_rot = rot_log(guess.rotation.inverse() * pose.rotation);
    const Eigen::Vector3d r_trans = pose.translation - guess.translation;
    ne.cost += config.prior_rotation_information * r_rot.squaredNorm() +
               config.prior_translation_information * r_trans.squaredNorm();
    if (build_system) {
      // d r_rot / d(theta) = Jr^-1(r_rot), d r_trans / d(t) = I.
      const Eigen::Matrix3d jr_inv = so3_right_jacobian_inverse(r_rot);
      ne.h.topLeftCorner<3, 3>() +=
          config.prior_rotation_information * jr_inv.transpose() * jr_inv;
      ne.h.bottomRightCorner<3, 3>() +=
          config.prior_translation_information * Eigen::Matrix3d::Identity();
      ne.g.head<3>() +=
          config.prior_rotation_information * jr_inv.transpose() * r_rot;
      ne.g.tail<3>() += config.prior_translation_information * r_trans;
    }
  }

  for (const LineCorrespondence& c : corr.lines) {
    const Eigen::Vector3d u = (c.line_b - c.line_a).normalized();
    const Eigen::Matrix3d perp = Eigen::Matrix3d::Identity() - u * u.transpose();
    const Eigen::Vector3d pw = pose * c.point;
    const Eigen::Vector3d r = perp * (pw - c.line_a);
    const double e = r.norm();
    ne.cost += huber_cost(e, huber_delta);
    if (!build_system) continue;
    const double w = (e <= huber_delta) ? 1.0 : huber_delta / e;
    Eigen::Matrix<double, 3, 6> j;
    j.leftCols<3>() = perp * (-rot * skew(c.point));
    j.rightCols<3>() = perp;
    const Eigen::Matrix<double, 6, 6> jtj = w * j.transpose() * j;
    ne.h += jtj;
    ne.h_data += jtj;
    ne.g += w * j.transpose() * r;
  }

  for (const PlaneCorrespondence& c : corr.planes) {
    const Eigen::Vector3d n = (c.q2 - c.q1).cross(c.q3 - c.q1).normalized();
    const Eigen::Vector3d pw = pose * c.point;
    const double r = n.dot(pw - c.q1);
    const double e = std::abs(r);
    ne.cost += huber_cost(e, huber_delta);
    if (!build_system) continue;
    const double w = (e <= huber_delta) ? 1.0 : huber_delta / e;
    Eigen::Matrix<double, 1, 6> j;
    j.leftCols<3>() = n.transpose() * (-rot * skew(c.point));
    j.rightCols<3>() = n.transpose();
    const Eigen::Matrix<double, 6, 6> jtj = w * j.transpose() * j;
    ne.h += jtj;
    ne.h_data += jtj;
    ne.g += w * j.transpose() * r;
  }
  return ne;
}

Se3Pose retract(const Se3Pose& pose, const Eigen::Matrix<double, 6, 1>& delta) {
  Se3Pose out;
  out.rotation = pose.rotation * rot_exp(delta.head<3>());
  out.translation = pose.translation + delta.tail<3>();
  return out;
}

void dump_correspondences(const std::string& path, const Correspondences& corr,
                          const Se3Pose& pose) {
  std::ofstream os(path);
  os << "type,px,py,pz,residual\n";
  for (const LineCorrespondence& c : corr.lines) {
    const Eigen::Vector3d pw = pose * c.point;
    os << "line," << pw.x() << ',' << pw.y() << ',' << pw.z() << ','
       << point_line_distance(pw, c.line_a, c.line_b) << '\n';
  }
  for (const PlaneCorrespondence& c : corr.planes) {
    const Eigen::Vector3d pw = pose * c.point;
    os << "plane," << pw.x() << ',' << pw.y() << ',' << pw.z() << ','
       << point_plane_distance(pw, c.q1, c.q2, c.q3) << '\n';
  }
}

}  // namespace

RegistrationResult register_features(const FeatureSet& features,
                                     const FeatureMap& target,
                                     const Se3Pose& guess,
                                     const RegistrationConfig& config) {
  if (features.empty() || target.empty()) {
    throw std::invalid_argument("register_features: empty features or target");
  }

  RegistrationResult result;
  result.pose = guess;
  double lambda = config.initial_damping;
  Correspondences corr;

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    result.iterations = iter + 1;
    corr = find_correspondences(features, target, result.pose,
                                config.max_correspondence_distance);
    result.inlier_count = static_cast<int>(corr.size());
    if (result.inlier_count < config.min_correspondences) {
      result.final_cost =
          evaluate(corr, result.pose, guess, config, false).cost;
      throw DegenerateGeometryError("register_features: too few correspondences",
                                    result);
    }

    NormalEquations ne = evaluate(corr, result.pose, guess, config, true);
    result.final_cost = ne.cost;

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> eig(ne.h_data);
    result.conditioning =
        eig.eigenvalues()(0) / static_cast<double>(corr.size());
    if (result.conditioning < config.degeneracy_threshold) {
      throw DegenerateGeometryError("register_features: degenerate geometry",
                                    result);
    }
    if (ne.cost <= 1e-14 || ne.g.norm() < 1e-12) {
      result.converged = true;
      break;
    }

    bool accepted = false;
    Eigen::Matrix<double, 6, 1> step = Eigen::Matrix<double, 6, 1>::Zero();
    for (int attempt = 0; attempt < 10; ++attempt) {
      Eigen::Matrix<double, 6, 6> damped = ne.h;
      damped.diagonal() += lambda * ne.h.diagonal();
      step = damped.ldlt().solve(-ne.g);
      const Se3Pose candidate = retract(result.pose, step);
      const double cost =
          evaluate(corr, candidate, guess, config, false).cost;
      if (cost < ne.cost) {
        result.pose = candidate;
        result.final_cost = cost;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      // No descent direction left; treat as converged at the current pose.
      result.converged = iter > 0;
      break;
    }
    if (step.head<3>().norm() < config.rotation_tolerance &&
        step.tail<3>().norm() < config.translation_tolerance) {
      result.converged = true;
      break;
    }
  }

  if (config.debug_dump_path) {
    dump_correspondences(*config.debug_dump_path, corr, result.pose);
  }
  return result;
}

}  // namespace glio
