#include "glio/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "glio/io_util.hpp"

namespace glio {

MapCloud::VoxelKey MapCloud::key_of(const Eigen::Vector3d& p) const {
  return {static_cast<std::int32_t>(std::floor(p.x() / voxel_size_)),
          static_cast<std::int32_t>(std::floor(p.y() / voxel_size_)),
          static_cast<std::int32_t>(std::floor(p.z() / voxel_size_))};
}

void MapCloud::insert_point(const Eigen::Vector3d& world_point,
                            std::uint32_t weight) {
  Voxel& v = voxels_[key_of(world_point)];
  v.sum += world_point * static_cast<double>(weight);
  v.count += weight;
}

void MapCloud::insert_scan(const Se3Pose& pose, const PointCloudFrame& scan) {
  for (const ScanPoint& p : scan.points) {
    insert_point(pose * p.position);
  }
}

void MapCloud::restore_voxel(const VoxelKey& key, const Eigen::Vector3d& sum,
                             std::uint32_t count) {
  Voxel& v = voxels_[key];
  v.sum = sum;
  v.count = count;
}

void MapCloud::merge_from(const MapCloud& incoming, const Se3Pose& alignment) {
  if (std::abs(incoming.voxel_size_ - voxel_size_) > 1e-12) {
    throw std::invalid_argument("merge_from: voxel size mismatch");
  }
  for (const auto& [key, voxel] : incoming.sorted_voxels()) {
    insert_point(alignment * voxel.representative(), voxel.count);
  }
}

std::vector<std::pair<MapCloud::VoxelKey, MapCloud::Voxel>>
MapCloud::sorted_voxels() const {
  std::vector<std::pair<VoxelKey, Voxel>> out(voxels_.begin(), voxels_.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.first.x, a.first.y, a.first.z) <
           std::tie(b.first.x, b.first.y, b.first.z);
  });
  return out;
}

namespace {

constexpr char kMagic[] = "GLIO-SESSION v1";
constexpr std::size_t kVoxelRecordSize = 3 * 4 + 3 * 8 + 4;

void write_vec3(std::ostream& os, const Eigen::Vector3d& v) {
  os << ' ' << format_g17(v.x()) << ' ' << format_g17(v.y()) << ' '
     << format_g17(v.z());
}

std::string factor_line(const Factor& f) {
  std::ostringstream os;
  if (const auto* p = std::get_if<PreintegrationFactor>(&f)) {
    os << "PREINT " << p->i << ' ' << p->j << ' '
       << format_g17(p->preint.duration);
    const Eigen::Quaterniond& q = p->preint.delta_rotation.quaternion();
    os << ' ' << format_g17(q.x()) << ' ' << format_g17(q.y()) << ' '
       << format_g17(q.z()) << ' ' << format_g17(q.w());
    write_vec3(os, p->preint.delta_velocity);
    write_vec3(os, p->preint.delta_position);
    write_vec3(os, p->preint.bias_reference.gyro);
    write_vec3(os, p->preint.bias_reference.accel);
    for (int k = 0; k < 9; ++k) {
      os << ' ' << format_g17(p->preint.information(k, k));
    }
    for (int k = 0; k < 6; ++k) {
      os << ' ' << format_g17(p->preint.bias_walk_information(k, k));
    }
  } else if (const auto* l = std::get_if<LidarOdometryFactor>(&f)) {
    os << "ODOM " << l->i << ' ' << l->j;
    write_vec3(os, l->relative_pose.translation);
    const Eigen::Quaterniond& q = l->relative_pose.rotation.quaternion();
    os << ' ' << format_g17(q.x()) << ' ' << format_g17(q.y()) << ' '
       << format_g17(q.z()) << ' ' << format_g17(q.w());
    for (int k = 0; k < 6; ++k) os << ' ' << format_g17(l->information(k, k));
  } else if (const auto* g = std::get_if<GpsFactor>(&f)) {
    os << "GPS " << g->i << ' ' << format_g17(g->position.e) << ' '
       << format_g17(g->position.n) << ' ' << format_g17(g->position.u);
    for (int k = 0; k < 3; ++k) os << ' ' << format_g17(g->information(k, k));
    os << ' ' << g->fix_quality;
    write_vec3(os, g->lever_arm);
  } else if (const auto* lc = std::get_if<LoopClosureFactor>(&f)) {
    os << "LOOP " << lc->i << ' ' << lc->j;
    write_vec3(os, lc->relative_pose.translation);
    const Eigen::Quaterniond& q = lc->relative_pose.rotation.quaternion();
    os << ' ' << format_g17(q.x()) << ' ' << format_g17(q.y()) << ' '
       << format_g17(q.z()) << ' ' << format_g17(q.w());
    for (int k = 0; k < 6; ++k) os << ' ' << format_g17(lc->information(k, k));
  }
  return os.str();
}

Eigen::Vector3d read_vec3(std::istringstream& ss, const char* section,
                          bool graph_ok) {
  double x, y, z;
  if (!(ss >> x >> y >> z)) {
    throw SessionLoadError(section, "truncated vector", graph_ok);
  }
  return {x, y, z};
}

}  // namespace

void save_session(const Session& session, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw std::runtime_error("save_session: cannot open " + path);
  }
  os << kMagic << '\n';
  os << "version " << session.format_version << '\n';
  const auto& anchor = session.graph.anchor();
  if (anchor) {
    os << "anchor " << format_g17(anchor->latitude) << ' '
       << format_g17(anchor->longitude) << ' ' << format_g17(anchor->altitude)
       << '\n';
  } else {
    os << "anchor none\n";
  }
  const GraphConfig& gc = session.graph.config();
  os << "graphconfig " << gc.window_size << ' ' << format_g17(gc.gps_gate_chi2)
     << ' ' << format_g17(gc.gravity.v.x()) << ' '
     << format_g17(gc.gravity.v.y()) << ' ' << format_g17(gc.gravity.v.z())
     << '\n';

  os << "nodes " << session.graph.node_count() << '\n';
  for (const StateNode& n : session.graph.nodes()) {
    const Eigen::Quaterniond& q = n.state.pose.rotation.quaternion();
    os << n.id << ' ' << format_g17(n.state.stamp) << ' '
       << format_g17(n.state.pose.translation.x()) << ' '
       << format_g17(n.state.pose.translation.y()) << ' '
       << format_g17(n.state.pose.translation.z()) << ' ' << format_g17(q.x())
       << ' ' << format_g17(q.y()) << ' ' << format_g17(q.z()) << ' '
       << format_g17(q.w());
    write_vec3(os, n.state.velocity);
    write_vec3(os, n.state.bias.gyro);
    write_vec3(os, n.state.bias.accel);
    os << ' ' << (n.fixed ? 1 : 0) << '\n';
  }

  std::vector<std::string> lines;
  for (const auto& slot : session.graph.factors()) {
    if (slot) lines.push_back(factor_line(*slot));
  }
  os << "factors " << lines.size() << '\n';
  for (const std::string& line : lines) os << line << '\n';

  const auto voxels = session.map.sorted_voxels();
  std::vector<std::uint8_t> block(voxels.size() * kVoxelRecordSize);
  std::uint8_t* dst = block.data();
  for (const auto& [key, voxel] : voxels) {
    std::memcpy(dst, &key.x, 4);
    std::memcpy(dst + 4, &key.y, 4);
    std::memcpy(dst + 8, &key.z, 4);
    const double s[3] = {voxel.sum.x(), voxel.sum.y(), voxel.sum.z()};
    std::memcpy(dst + 12, s, 24);
    std::memcpy(dst + 36, &voxel.count, 4);
    dst += kVoxelRecordSize;
  }
  os << "map " << format_g17(session.map.voxel_size()) << ' ' << voxels.size()
     << ' ' << block.size() << '\n';
  os.write(reinterpret_cast<const char*>(block.data()),
           static_cast<std::streamsize>(block.size()));
  os << "\nchecksum " << crc32(block) << '\n';
  os << "end\n";
}

Session load_session(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw SessionLoadError("header", "cannot open " + path, false);
  }
  std::string line;
  auto next_line = [&](const char* section, bool graph_ok) -> std::string {
    if (!std::getline(is, line)) {
      throw SessionLoadError(section, "unexpected end of file", graph_ok);
    }
    return line;
  };

  if (next_line("header", false) != kMagic) {
    throw SessionLoadError("header", "bad magic", false);
  }
  Session session;
  {
    std::istringstream ss(next_line("header", false));
    std::string tag;
    int version = 0;
    if (!(ss >> tag >> version) || tag != "version") {
      throw SessionLoadError("header", "missing version", false);
    }
    if (version != 1) {
      throw SessionLoadError("header", "unsupported version", false);
    }
    session.format_version = version;
  }

  std::optional<GeoLla> anchor;
  {
    std::istringstream ss(next_line("header", false));
    std::string tag, first;
    if (!(ss >> tag >> first) || tag != "anchor") {
      throw SessionLoadError("header", "missing anchor", false);
    }
    if (first != "none") {
      GeoLla lla;
      lla.latitude = std::stod(first);
      if (!(ss >> lla.longitude >> lla.altitude)) {
        throw SessionLoadError("header", "truncated anchor", false);
      }
      anchor = lla;
    }
  }
  GraphConfig gc;
  {
    std::istringstream ss(next_line("header", false));
    std::string tag;
    if (!(ss >> tag >> gc.window_size >> gc.gps_gate_chi2 >> gc.gravity.v.x() >>
          gc.gravity.v.y() >> gc.gravity.v.z()) ||
        tag != "graphconfig") {
      throw SessionLoadError("header", "missing graph config", false);
    }
  }

  std::size_t node_count = 0;
  {
    std::istringstream ss(next_line("nodes", false));
    std::string tag;
    if (!(ss >> tag >> node_count) || tag != "nodes") {
      throw SessionLoadError("nodes", "missing node count", false);
    }
  }
  std::vector<StateNode> nodes;
  nodes.reserve(node_count);
  for (std::size_t k = 0; k < node_count; ++k) {
    std::istringstream ss(next_line("nodes", false));
    StateNode n;
    double qx, qy, qz, qw;
    int fixed = 0;
    if (!(ss >> n.id >> n.state.stamp >> n.state.pose.translation.x() >>
          n.state.pose.translation.y() >> n.state.pose.translation.z() >> qx >>
          qy >> qz >> qw)) {
      throw SessionLoadError("nodes", "malformed node line", false);
    }
    n.state.pose.rotation = Rotation::from_quaternion(qw, qx, qy, qz);
    n.state.velocity = read_vec3(ss, "nodes", false);
    n.state.bias.gyro = read_vec3(ss, "nodes", false);
    n.state.bias.accel = read_vec3(ss, "nodes", false);
    if (!(ss >> fixed)) {
      throw SessionLoadError("nodes", "malformed node line", false);
    }
    n.fixed = fixed != 0;
    nodes.push_back(n);
  }

  std::size_t factor_count = 0;
  {
    std::istringstream ss(next_line("factors", false));
    std::string tag;
    if (!(ss >> tag >> factor_count) || tag != "factors") {
      throw SessionLoadError("factors", "missing factor count", false);
    }
  }
  std::vector<Factor> factors;
  factors.reserve(factor_count);
  for (std::size_t k = 0; k < factor_count; ++k) {
    std::istringstream ss(next_line("factors", false));
    std::string type;
    ss >> type;
    if (type == "PREINT") {
      PreintegrationFactor f;
      double qx, qy, qz, qw;
      if (!(ss >> f.i >> f.j >> f.preint.duration >> qx >> qy >> qz >> qw)) {
        throw SessionLoadError("factors", "malformed PREINT line", false);
      }
      f.preint.delta_rotation = Rotation::from_quaternion(qw, qx, qy, qz);
      f.preint.delta_velocity = read_vec3(ss, "factors", false);
      f.preint.delta_position = read_vec3(ss, "factors", false);
      f.preint.bias_reference.gyro = read_vec3(ss, "factors", false);
      f.preint.bias_reference.accel = read_vec3(ss, "factors", false);
      Eigen::Matrix<double, 9, 1> diag;
      for (int d = 0; d < 9; ++d) {
        if (!(ss >> diag(d))) {
          throw SessionLoadError("factors", "malformed PREINT info", false);
        }
      }
      f.preint.information = diag.asDiagonal();
      Eigen::Matrix<double, 6, 1> walk;
      for (int d = 0; d < 6; ++d) {
        if (!(ss >> walk(d))) {
          throw SessionLoadError("factors", "malformed PREINT walk info", false);
        }
      }
      f.preint.bias_walk_information = walk.asDiagonal();
      factors.emplace_back(f);
    } else if (type == "ODOM" || type == "LOOP") {
      NodeId i, j;
      double qx, qy, qz, qw;
      Se3Pose rel;
      if (!(ss >> i >> j >> rel.translation.x() >> rel.translation.y() >>
            rel.translation.z() >> qx >> qy >> qz >> qw)) {
        throw SessionLoadError("factors", "malformed relative-pose line", false);
      }
      rel.rotation = Rotation::from_quaternion(qw, qx, qy, qz);
      Vector6d diag;
      for (int d = 0; d < 6; ++d) {
        if (!(ss >> diag(d))) {
          throw SessionLoadError("factors", "malformed info diagonal", false);
        }
      }
      if (type == "ODOM") {
        factors.emplace_back(
            LidarOdometryFactor{i, j, rel, diag.asDiagonal()});
      } else {
        factors.emplace_back(LoopClosureFactor{i, j, rel, diag.asDiagonal()});
      }
    } else if (type == "GPS") {
      GpsFactor f;
      Eigen::Vector3d diag;
      if (!(ss >> f.i >> f.position.e >> f.position.n >> f.position.u >>
            diag.x() >> diag.y() >> diag.z() >> f.fix_quality)) {
        throw SessionLoadError("factors", "malformed GPS line", false);
      }
      f.information = diag.asDiagonal();
      f.lever_arm = read_vec3(ss, "factors", false);
      factors.emplace_back(f);
    } else {
      throw SessionLoadError("factors", "unknown factor type: " + type, false);
    }
  }

  // Graph section parsed; failures below name the map/checksum sections.
  session.graph =
      PoseGraph::from_parts(gc, std::move(nodes), std::move(factors), anchor);

  double voxel_size = 0.2;
  std::size_t voxel_count = 0, block_size = 0;
  {
    std::istringstream ss(next_line("map", true));
    std::string tag;
    if (!(ss >> tag >> voxel_size >> voxel_count >> block_size) ||
        tag != "map") {
      throw SessionLoadError("map", "missing map section", true);
    }
    if (block_size != voxel_count * kVoxelRecordSize) {
      throw SessionLoadError("map", "inconsistent map block size", true);
    }
  }
  std::vector<std::uint8_t> block(block_size);
  is.read(reinterpret_cast<char*>(block.data()),
          static_cast<std::streamsize>(block.size()));
  if (static_cast<std::size_t>(is.gcount()) != block_size) {
    throw SessionLoadError("map", "truncated map block", true);
  }

  next_line("checksum", true);  // newline after the binary block
  {
    std::istringstream ss(next_line("checksum", true));
    std::string tag;
    std::uint32_t stored = 0;
    if (!(ss >> tag >> stored) || tag != "checksum") {
      throw SessionLoadError("checksum", "missing checksum", true);
    }
    if (stored != crc32(block)) {
      throw SessionLoadError("map", "checksum failure in map section", true);
    }
  }
  if (next_line("end", true) != "end") {
    throw SessionLoadError("end", "missing end marker", true);
  }

  session.map = MapCloud(voxel_size);
  session.map.anchor() = anchor;
  const std::uint8_t* src = block.data();
  for (std::size_t k = 0; k < voxel_count; ++k) {
    MapCloud::VoxelKey key;
    std::memcpy(&key.x, src, 4);
    std::memcpy(&key.y, src + 4, 4);
    std::memcpy(&key.z, src + 8, 4);
    double s[3];
    std::memcpy(s, src + 12, 24);
    std::uint32_t count = 0;
    std::memcpy(&count, src + 36, 4);
    src += kVoxelRecordSize;
    session.map.restore_voxel(key, Eigen::Vector3d(s[0], s[1], s[2]), count);
  }
  return session;
}

void export_map_ascii(const MapCloud& map, const std::string& path) {
  std::ofstream os(path);
  if (!os) {
    throw std::runtime_error("export_map_ascii: cannot open " + path);
  }
  char buf[128];
  for (const auto& [key, voxel] : map.sorted_voxels()) {
    const Eigen::Vector3d c = voxel.representative();
    std::snprintf(buf, sizeof(buf), "%.6f %.6f %.6f %u\n", c.x(), c.y(), c.z(),
                  voxel.count);
    os << buf;
  }
}

}  // namespace glio
