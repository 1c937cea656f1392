#include <filesystem>
#include <fstream>
#include <random>

#include <doctest.h>

#include "glio/mapping.hpp"

using namespace glio;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

PointCloudFrame wall_scan() {
  PointCloudFrame scan;
  scan.frame_stamp = 1.0;
  for (double y = -5.0; y <= 5.0; y += 0.05) {
    for (double z = -1.0; z <= 2.0; z += 0.05) {
      scan.points.push_back({{4.0, y, z}, 0, 0.0});
    }
  }
  return scan;
}

Session small_session() {
  Session s;
  PoseGraph g;
  NavState n0;
  n0.stamp = 0.0;
  g.add_state_node(n0);
  NavState n1;
  n1.stamp = 0.1;
  n1.pose.translation = {1.0, 2.0, 3.0};
  n1.pose.rotation = rot_exp({0.1, -0.2, 0.3});
  n1.velocity = {0.5, 0.0, -0.1};
  n1.bias.gyro = {1e-3, 2e-3, -1e-3};
  n1.bias.accel = {0.01, -0.02, 0.03};
  g.add_state_node(n1);

  LidarOdometryFactor odom;
  odom.i = 0;
  odom.j = 1;
  odom.relative_pose = n1.pose;
  odom.information = (Vector6d() << 100, 100, 100, 400, 400, 400)
                         .finished()
                         .asDiagonal();
  g.add_factor(odom);

  PreintegrationFactor pre;
  pre.i = 0;
  pre.j = 1;
  pre.preint.duration = 0.1;
  pre.preint.delta_rotation = rot_exp({0.01, 0.0, 0.02});
  pre.preint.delta_velocity = {0.1, 0.0, 0.0};
  pre.preint.delta_position = {0.005, 0.0, 0.0};
  pre.preint.information = Eigen::Matrix<double, 9, 9>::Identity() * 1e4;
  g.add_factor(pre);

  GpsFactor gps;
  gps.i = 1;
  gps.position = {1.1, 1.9, 3.2};
  gps.information = Eigen::Vector3d(0.25, 0.25, 0.025).asDiagonal();
  g.add_factor(gps);

  LoopClosureFactor loop;
  loop.i = 0;
  loop.j = 1;
  loop.relative_pose = n1.pose;
  loop.information = odom.information;
  g.add_factor(loop);

  g.anchor() = GeoLla::from_degrees(47.39, 8.54, 420.0);

  s.graph = std::move(g);
  s.map = MapCloud(0.2);
  s.map.anchor() = s.graph.anchor();
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int k = 0; k < 500; ++k) {
    s.map.insert_point({u(rng), u(rng), u(rng)});
  }
  return s;
}

}  // namespace

TEST_CASE("insert_scan basics") {
  MapCloud map(0.2);
  const PointCloudFrame scan = wall_scan();

  map.insert_scan(Se3Pose::identity(), scan);
  const std::size_t occupied = map.voxel_count();
  CHECK(occupied > 0);

  auto first = map.sorted_voxels();
  map.insert_scan(Se3Pose::identity(), scan);
  auto second = map.sorted_voxels();
  REQUIRE(map.voxel_count() == occupied);  // same voxel set
  for (std::size_t k = 0; k < first.size(); ++k) {
    CHECK(second[k].second.count == 2 * first[k].second.count);
  }

  // Empty scan leaves the map unchanged.
  map.insert_scan(Se3Pose::identity(), PointCloudFrame{});
  CHECK(map.voxel_count() == occupied);

  // Representatives stay inside their voxels.
  for (const auto& [key, voxel] : map.sorted_voxels()) {
    const Eigen::Vector3d c = voxel.representative();
    CHECK(map.key_of(c) == key);
  }
}

TEST_CASE("insert_scan from two poses lands on the true wall plane") {
  MapCloud map(0.2);
  // The scan observes the plane x = 4 in the sensor frame; from pose B the
  // same wall is at x = 5 world with the sensor at x = 1.
  map.insert_scan(Se3Pose::identity(), wall_scan());
  Se3Pose b;
  b.translation = {1.0, 0.5, 0.0};
  MapCloud second(0.2);
  PointCloudFrame from_b = wall_scan();
  for (auto& p : from_b.points) p.position.x() = 4.0 - 1.0;
  second.insert_scan(b, from_b);

  for (const auto& [key, voxel] : second.sorted_voxels()) {
    CHECK(std::abs(voxel.representative().x() - 4.0) <= 0.2 + 1e-9);
  }
}

TEST_CASE("insert order does not change the occupied set") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<Eigen::Vector3d> points;
  for (int k = 0; k < 2000; ++k) points.push_back({u(rng), u(rng), u(rng)});

  MapCloud forward(0.25), backward(0.25);
  for (const auto& p : points) forward.insert_point(p);
  for (auto it = points.rbegin(); it != points.rend(); ++it) {
    backward.insert_point(*it);
  }
  const auto fa = forward.sorted_voxels();
  const auto ba = backward.sorted_voxels();
  REQUIRE(fa.size() == ba.size());
  for (std::size_t k = 0; k < fa.size(); ++k) {
    CHECK(fa[k].first == ba[k].first);
    CHECK(fa[k].second.count == ba[k].second.count);
    CHECK((fa[k].second.representative() - ba[k].second.representative())
              .norm() < 1e-12);
  }
}

TEST_CASE("merge_map") {
  MapCloud a(0.2);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int k = 0; k < 300; ++k) a.insert_point({u(rng), u(rng), u(rng)});

  // Identity self-merge doubles the counts over the same voxel set.
  MapCloud merged = a;
  merged.merge_from(a, Se3Pose::identity());
  const auto before = a.sorted_voxels();
  const auto after = merged.sorted_voxels();
  REQUIRE(before.size() == after.size());
  for (std::size_t k = 0; k < before.size(); ++k) {
    CHECK(after[k].second.count == 2 * before[k].second.count);
  }

  // Voxel-size mismatch.
  MapCloud other(0.5);
  CHECK_THROWS_AS(merged.merge_from(other, Se3Pose::identity()),
                  std::invalid_argument);
}

TEST_CASE("merging half-coverage maps approximates the union build") {
  // A wall observed in two halves versus all at once.
  PointCloudFrame scan = wall_scan();
  PointCloudFrame left, right;
  left.frame_stamp = right.frame_stamp = scan.frame_stamp;
  for (const auto& p : scan.points) {
    (p.position.y() < 0.0 ? left : right).points.push_back(p);
  }
  MapCloud full(0.2), half_a(0.2), half_b(0.2);
  full.insert_scan(Se3Pose::identity(), scan);
  half_a.insert_scan(Se3Pose::identity(), left);
  half_b.insert_scan(Se3Pose::identity(), right);
  half_a.merge_from(half_b, Se3Pose::identity());

  // Every occupied voxel of the merged map is within one voxel shell of an
  // occupied voxel of the union build, and the counts agree in total.
  const auto union_voxels = full.sorted_voxels();
  std::size_t total_union = 0, total_merged = 0;
  for (const auto& [k, v] : union_voxels) total_union += v.count;
  for (const auto& [k, v] : half_a.sorted_voxels()) total_merged += v.count;
  CHECK(total_union == total_merged);
  for (const auto& [key, voxel] : half_a.sorted_voxels()) {
    bool near = false;
    for (const auto& [ukey, uv] : union_voxels) {
      if (std::abs(ukey.x - key.x) <= 1 && std::abs(ukey.y - key.y) <= 1 &&
          std::abs(ukey.z - key.z) <= 1) {
        near = true;
        break;
      }
    }
    CHECK(near);
  }
}

TEST_CASE("session save/load round trip") {
  const Session s = small_session();
  const std::string p1 = temp_path("glio_session_a.gfz");
  const std::string p2 = temp_path("glio_session_b.gfz");
  save_session(s, p1);
  const Session loaded = load_session(p1);
  save_session(loaded, p2);
  CHECK(slurp(p1) == slurp(p2));

  // Idempotence: one more cycle stays identical.
  const Session again = load_session(p2);
  const std::string p3 = temp_path("glio_session_c.gfz");
  save_session(again, p3);
  CHECK(slurp(p2) == slurp(p3));

  CHECK(loaded.graph.node_count() == s.graph.node_count());
  CHECK(loaded.map.voxel_count() == s.map.voxel_count());
  CHECK(loaded.graph.anchor().has_value());
  CHECK((loaded.graph.node(1).state.pose.translation -
         s.graph.node(1).state.pose.translation)
            .norm() == 0.0);
}

TEST_CASE("empty session round trips") {
  Session s;
  const std::string p = temp_path("glio_session_empty.gfz");
  save_session(s, p);
  const Session loaded = load_session(p);
  CHECK(loaded.graph.node_count() == 0);
  CHECK(loaded.map.voxel_count() == 0);
}

TEST_CASE("corrupted map section names the section, graph still parseable") {
  const Session s = small_session();
  const std::string p = temp_path("glio_session_corrupt.gfz");
  save_session(s, p);

  // Flip one byte inside the binary voxel block.
  std::string bytes = slurp(p);
  const auto map_pos = bytes.find("\nmap ");
  REQUIRE(map_pos != std::string::npos);
  const auto block_start = bytes.find('\n', map_pos + 1) + 1;
  bytes[block_start + 20] ^= 0xFF;
  std::ofstream(p, std::ios::binary) << bytes;

  bool threw = false;
  try {
    load_session(p);
  } catch (const SessionLoadError& e) {
    threw = true;
    CHECK(e.section() == "map");
    CHECK(e.graph_parsed());
  }
  CHECK(threw);
}

TEST_CASE("export_map_ascii") {
  MapCloud map(0.2);
  map.insert_point({1.0, 2.0, 3.0});
  map.insert_point({1.01, 2.01, 3.01});
  const std::string p = temp_path("glio_map_export.txt");
  export_map_ascii(map, p);
  std::ifstream is(p);
  double x, y, z;
  int count;
  REQUIRE((is >> x >> y >> z >> count));
  CHECK(count == 2);
  CHECK(x == doctest::Approx(1.005));
}
