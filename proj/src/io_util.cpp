#include "glio/io_util.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace glio {

namespace {

std::array<std::uint32_t, 256> make_crc_table() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k) {
      c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    }
    table[i] = c;
  }
  return table;
}

}  // namespace

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  static const std::array<std::uint32_t, 256> table = make_crc_table();
  std::uint32_t c = 0xFFFFFFFFu;
  for (std::uint8_t b : bytes) {
    c = table[(c ^ b) & 0xFFu] ^ (c >> 8);
  }
  return c ^ 0xFFFFFFFFu;
}

std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_tum_trajectory(const std::string& path,
                          std::span<const TimedPose> trajectory,
                          std::span<const std::string> header_comments) {
  std::ofstream os(path);
  if (!os) {
    throw std::runtime_error("write_tum_trajectory: cannot open " + path);
  }
  for (const std::string& c : header_comments) {
    os << "# " << c << '\n';
  }
  char buf[256];
  for (const TimedPose& tp : trajectory) {
    const Eigen::Quaterniond& q = tp.pose.rotation.quaternion();
    std::snprintf(buf, sizeof(buf),
                  "%.9f %.9f %.9f %.9f %.9f %.9f %.9f %.9f\n", tp.stamp,
                  tp.pose.translation.x(), tp.pose.translation.y(),
                  tp.pose.translation.z(), q.x(), q.y(), q.z(), q.w());
    os << buf;
  }
}

std::vector<TimedPose> read_tum_trajectory(const std::string& path) {
  std::ifstream is(path);
  if (!is) {
    throw std::runtime_error("read_tum_trajectory: cannot open " + path);
  }
  std::vector<TimedPose> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    double t, x, y, z, qx, qy, qz, qw;
    if (!(ss >> t >> x >> y >> z >> qx >> qy >> qz >> qw)) {
      throw std::runtime_error("read_tum_trajectory: malformed line: " + line);
    }
    TimedPose tp;
    tp.stamp = t;
    tp.pose.rotation = Rotation::from_quaternion(qw, qx, qy, qz);
    tp.pose.translation = {x, y, z};
    out.push_back(tp);
  }
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace glio
