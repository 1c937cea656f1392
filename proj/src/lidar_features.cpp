#include "glio/lidar_features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <unordered_set>

namespace glio {

namespace {

constexpr double kPi = 3.14159265358979323846;

double azimuth(const Eigen::Vector3d& p) { return std::atan2(p.y(), p.x()); }

struct RingEntry {
  int point_index;   // into frame.points
  double az;
};

// Range-gated per-ring listings sorted by azimuth.
std::vector<std::vector<RingEntry>> build_rings(const PointCloudFrame& frame,
                                                const FeatureConfig& cfg) {
  std::vector<std::vector<RingEntry>> rings(cfg.ring_count);
  for (int i = 0; i < static_cast<int>(frame.points.size()); ++i) {
    const ScanPoint& p = frame.points[i];
    if (p.ring < 0 || p.ring >= cfg.ring_count) continue;
    const double r = p.position.norm();
    if (!(r >= cfg.min_range && r <= cfg.max_range)) continue;
    rings[p.ring].push_back({i, azimuth(p.position)});
  }
  for (auto& ring : rings) {
    std::sort(ring.begin(), ring.end(), [](const RingEntry& a, const RingEntry& b) {
      if (a.az != b.az) return a.az < b.az;
      return a.point_index < b.point_index;
    });
  }
  return rings;
}

}  // namespace

std::vector<GroundLabel> segment_ground(const PointCloudFrame& frame,
                                        double sensor_height,
                                        const FeatureConfig& config) {
  if (frame.points.empty()) {
    throw std::invalid_argument("segment_ground: empty frame");
  }

  const int bins = std::max(1, config.azimuth_bins);
  // column -> (ring -> points in that cell). The nearest return serves as the
  // cell representative for the inter-ring test; a passing pair labels every
  // member of both cells.
  struct Cell {
    int representative = -1;
    std::vector<int> members;
  };
  std::vector<std::map<int, Cell>> columns(bins);
  for (int i = 0; i < static_cast<int>(frame.points.size()); ++i) {
    const ScanPoint& p = frame.points[i];
    const double az = azimuth(p.position);
    int bin = static_cast<int>(std::floor((az + kPi) / (2.0 * kPi) * bins));
    bin = std::clamp(bin, 0, bins - 1);
    Cell& cell = columns[bin][p.ring];
    cell.members.push_back(i);
    if (cell.representative < 0 ||
        p.position.squaredNorm() <
            frame.points[cell.representative].position.squaredNorm()) {
      cell.representative = i;
    }
  }

  const double angle_max = config.ground_angle_max_deg * kPi / 180.0;
  // Ground must also sit near the z = -sensor_height plane; grazing hits on
  // vertical structure can satisfy the angle test alone.
  const double z_lo = -sensor_height - config.ground_z_band;
  const double z_hi = -sensor_height + config.ground_z_band;
  std::vector<GroundLabel> labels(frame.points.size(), GroundLabel::NonGround);
  auto label_cell = [&](const Cell& cell) {
    for (int idx : cell.members) {
      const double z = frame.points[idx].position.z();
      if (z >= z_lo && z <= z_hi) {
        labels[idx] = GroundLabel::Ground;
      }
    }
  };
  for (const auto& column : columns) {
    const Cell* prev = nullptr;
    bool prev_is_lowest = true;
    for (const auto& [ring, cell] : column) {
      if (prev) {
        const Eigen::Vector3d& lo = frame.points[prev->representative].position;
        const Eigen::Vector3d& hi = frame.points[cell.representative].position;
        const Eigen::Vector3d d = hi - lo;
        const double dd = std::hypot(d.x(), d.y());
        const double angle = std::atan2(std::abs(d.z()), dd);
        if (dd > 1e-6 && angle < angle_max) {
          label_cell(cell);
          if (prev_is_lowest) label_cell(*prev);  // seed the lowest ring
        }
        prev_is_lowest = false;
      }
      prev = &cell;
    }
  }
  return labels;
}

std::vector<double> compute_smoothness(std::span<const ScanPoint> ring_points,
                                       int window) {
  const int n = static_cast<int>(ring_points.size());
  if (n < 2 * window + 1) return {};
  std::vector<double> scores(n, std::numeric_limits<double>::quiet_NaN());
  for (int i = window; i < n - window; ++i) {
    Eigen::Vector3d diff = Eigen::Vector3d::Zero();
    for (int j = i - window; j <= i + window; ++j) {
      if (j == i) continue;
      diff += ring_points[i].position - ring_points[j].position;
    }
    const double norm_i = ring_points[i].position.norm();
    scores[i] = diff.norm() / (2.0 * window * norm_i);
  }
  return scores;
}

FeatureSet extract_features(const PointCloudFrame& frame,
                            const std::vector<GroundLabel>& labels,
                            const FeatureConfig& config) {
  FeatureSet out;
  if (frame.points.empty()) return out;
  if (labels.size() != frame.points.size()) {
    throw std::invalid_argument("extract_features: label/point count mismatch");
  }

  const auto rings = build_rings(frame, config);
  const int w = config.smoothness_window;

  for (const auto& ring : rings) {
    const int n = static_cast<int>(ring.size());
    if (n < 2 * w + 1) continue;

    std::vector<ScanPoint> ordered(n);
    for (int i = 0; i < n; ++i) ordered[i] = frame.points[ring[i].point_index];
    const std::vector<double> scores = compute_smoothness(ordered, w);

    // Suppress the far side of occlusion boundaries so reveal points behind a
    // nearer object never become edges.
    std::vector<char> blocked(n, 0);
    for (int i = 0; i + 1 < n; ++i) {
      const double r0 = ordered[i].position.norm();
      const double r1 = ordered[i + 1].position.norm();
      if (r0 - r1 > config.occlusion_gap) {
        for (int k = std::max(0, i - w + 1); k <= i; ++k) blocked[k] = 1;
      } else if (r1 - r0 > config.occlusion_gap) {
        for (int k = i + 1; k <= std::min(n - 1, i + w); ++k) blocked[k] = 1;
      }
    }

    const int sectors = std::max(1, config.sectors_per_ring);
    for (int s = 0; s < sectors; ++s) {
      const int begin = s * n / sectors;
      const int end = (s + 1) * n / sectors;

      std::vector<int> candidates;
      for (int i = begin; i < end; ++i) {
        if (std::isnan(scores[i])) continue;
        candidates.push_back(i);
      }

      // Edges: highest scores above threshold, non-ground, spread out by
      // suppressing the window neighbors of each pick.
      std::vector<int> by_score = candidates;
      std::sort(by_score.begin(), by_score.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
      });
      std::vector<char> picked(n, 0);
      int edge_count = 0;
      for (int i : by_score) {
        if (edge_count >= config.max_edges_per_sector) break;
        if (scores[i] <= config.edge_threshold) break;
        if (blocked[i] || picked[i]) continue;
        if (labels[ring[i].point_index] == GroundLabel::Ground) continue;
        out.edges.push_back(ordered[i]);
        ++edge_count;
        for (int k = std::max(0, i - w); k <= std::min(n - 1, i + w); ++k) {
          picked[k] = 1;
        }
      }

      // Surfaces: lowest scores below threshold, non-ground.
      std::sort(by_score.begin(), by_score.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] < scores[b];
        return a < b;
      });
      int surf_count = 0;
      for (int i : by_score) {
        if (surf_count >= config.max_surfaces_per_sector) break;
        if (scores[i] >= config.surface_threshold) break;
        if (picked[i]) continue;
        if (labels[ring[i].point_index] == GroundLabel::Ground) continue;
        out.surfaces.push_back(ordered[i]);
        ++surf_count;
      }
    }
  }

  // Ground: voxel-downsampled, first gated point per cell in ring/azimuth
  // order.
  const double cell = std::max(config.ground_voxel, 1e-3);
  std::unordered_set<std::uint64_t> occupied;
  for (const auto& ring : rings) {
    for (const RingEntry& e : ring) {
      if (labels[e.point_index] != GroundLabel::Ground) continue;
      const Eigen::Vector3d& p = frame.points[e.point_index].position;
      const auto ix = static_cast<std::int64_t>(std::floor(p.x() / cell));
      const auto iy = static_cast<std::int64_t>(std::floor(p.y() / cell));
      const auto iz = static_cast<std::int64_t>(std::floor(p.z() / cell));
      const std::uint64_t key = (static_cast<std::uint64_t>(ix & 0x1FFFFF) << 42) |
                                (static_cast<std::uint64_t>(iy & 0x1FFFFF) << 21) |
                                static_cast<std::uint64_t>(iz & 0x1FFFFF);
      if (occupied.insert(key).second) {
        out.ground.push_back(frame.points[e.point_index]);
      }
    }
  }
  return out;
}

}  // namespace glio
