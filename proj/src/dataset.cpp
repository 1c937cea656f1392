#include "glio/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "glio/io_util.hpp"

namespace glio {

namespace {

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw DatasetError("dataset: cannot open " + path);
  }
  return is;
}

double parse_double(const std::string& s, const std::string& path, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == 0) throw std::invalid_argument("empty");
    return v;
  } catch (const std::exception&) {
    throw DatasetError("dataset: bad number '" + s + "' in " + path + ":" +
                       std::to_string(line));
  }
}

}  // namespace

std::string scan_file_name(int frame) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06d.bin", frame);
  return buf;
}

std::vector<ImuSample> read_imu_csv(const std::string& path) {
  std::ifstream is = open_or_throw(path);
  std::vector<ImuSample> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (lineno == 1 || line.empty()) continue;  // header
    const auto f = split_csv_line(line);
    if (f.size() != 7) {
      throw DatasetError("dataset: expected 7 fields in " + path + ":" +
                         std::to_string(lineno));
    }
    ImuSample s;
    s.stamp = parse_double(f[0], path, lineno);
    for (int k = 0; k < 3; ++k) {
      s.angular_velocity(k) = parse_double(f[1 + k], path, lineno);
      s.acceleration(k) = parse_double(f[4 + k], path, lineno);
    }
    if (!out.empty() && s.stamp <= out.back().stamp) {
      throw DatasetError("dataset: non-increasing stamp in " + path + ":" +
                         std::to_string(lineno));
    }
    out.push_back(s);
  }
  return out;
}

void write_imu_csv(const std::string& path,
                   const std::vector<ImuSample>& samples) {
  std::ofstream os(path);
  os << "t,wx,wy,wz,ax,ay,az\n";
  char buf[256];
  for (const ImuSample& s : samples) {
    std::snprintf(buf, sizeof(buf),
                  "%.9f,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e\n", s.stamp,
                  s.angular_velocity.x(), s.angular_velocity.y(),
                  s.angular_velocity.z(), s.acceleration.x(),
                  s.acceleration.y(), s.acceleration.z());
    os << buf;
  }
}

std::vector<GpsFix> read_gps_csv(const std::string& path) {
  std::ifstream is = open_or_throw(path);
  std::vector<GpsFix> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (lineno == 1 || line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 5) {
      throw DatasetError("dataset: expected 5 fields in " + path + ":" +
                         std::to_string(lineno));
    }
    GpsFix fix;
    fix.stamp = parse_double(f[0], path, lineno);
    const double lat_deg = parse_double(f[1], path, lineno);
    const double lon_deg = parse_double(f[2], path, lineno);
    const double alt = parse_double(f[3], path, lineno);
    fix.fix_quality = static_cast<int>(parse_double(f[4], path, lineno));
    try {
      fix.lla = GeoLla::from_degrees(lat_deg, lon_deg, alt);
    } catch (const std::invalid_argument& e) {
      throw DatasetError("dataset: " + std::string(e.what()) + " in " + path +
                         ":" + std::to_string(lineno));
    }
    out.push_back(fix);
  }
  return out;
}

void write_gps_csv(const std::string& path, const std::vector<GpsFix>& fixes) {
  std::ofstream os(path);
  os << "t,lat_deg,lon_deg,alt_m,fix_quality\n";
  char buf[256];
  for (const GpsFix& f : fixes) {
    std::snprintf(buf, sizeof(buf), "%.9f,%.12f,%.12f,%.6f,%d\n", f.stamp,
                  f.lla.latitude * 180.0 / 3.14159265358979323846,
                  f.lla.longitude * 180.0 / 3.14159265358979323846,
                  f.lla.altitude, f.fix_quality);
    os << buf;
  }
}

std::vector<ScanIndexEntry> read_scan_index(const std::string& dataset_dir) {
  const std::string path = dataset_dir + "/scans/index.csv";
  std::ifstream is = open_or_throw(path);
  std::vector<ScanIndexEntry> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (lineno == 1 || line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 2) {
      throw DatasetError("dataset: expected 2 fields in " + path + ":" +
                         std::to_string(lineno));
    }
    ScanIndexEntry e;
    e.frame = static_cast<int>(parse_double(f[0], path, lineno));
    e.stamp = parse_double(f[1], path, lineno);
    out.push_back(e);
  }
  return out;
}

PointCloudFrame read_scan_bin(const std::string& dataset_dir, int frame,
                              double stamp) {
  const std::string path = dataset_dir + "/scans/" + scan_file_name(frame);
  std::ifstream is = open_or_throw(path);
  is.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(is.tellg());
  is.seekg(0);
  if (size % 20 != 0) {
    throw DatasetError("dataset: truncated scan record in " + path);
  }
  std::vector<float> raw(size / 4);
  is.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(size));

  PointCloudFrame out;
  out.frame_stamp = stamp;
  out.points.resize(size / 20);
  for (std::size_t k = 0; k < out.points.size(); ++k) {
    ScanPoint& p = out.points[k];
    p.position = {raw[5 * k + 0], raw[5 * k + 1], raw[5 * k + 2]};
    p.ring = static_cast<int>(raw[5 * k + 3]);
    p.relative_time = raw[5 * k + 4];
  }
  return out;
}

void write_scan_bin(const std::string& dataset_dir, int frame,
                    const PointCloudFrame& scan) {
  std::filesystem::create_directories(dataset_dir + "/scans");
  const std::string path = dataset_dir + "/scans/" + scan_file_name(frame);
  std::ofstream os(path, std::ios::binary);
  std::vector<float> raw;
  raw.reserve(scan.points.size() * 5);
  for (const ScanPoint& p : scan.points) {
    raw.push_back(static_cast<float>(p.position.x()));
    raw.push_back(static_cast<float>(p.position.y()));
    raw.push_back(static_cast<float>(p.position.z()));
    raw.push_back(static_cast<float>(p.ring));
    raw.push_back(static_cast<float>(p.relative_time));
  }
  os.write(reinterpret_cast<const char*>(raw.data()),
           static_cast<std::streamsize>(raw.size() * 4));
}

void write_scan_index(const std::string& dataset_dir,
                      const std::vector<ScanIndexEntry>& index) {
  std::filesystem::create_directories(dataset_dir + "/scans");
  std::ofstream os(dataset_dir + "/scans/index.csv");
  os << "frame,stamp\n";
  char buf[64];
  for (const ScanIndexEntry& e : index) {
    std::snprintf(buf, sizeof(buf), "%d,%.9f\n", e.frame, e.stamp);
    os << buf;
  }
}

std::optional<GeoLla> read_dataset_anchor(const std::string& dataset_dir) {
  std::ifstream is(dataset_dir + "/dataset.toml");
  if (!is) return std::nullopt;
  std::string line;
  while (std::getline(is, line)) {
    const auto pos = line.find("anchor_lla = [");
    if (pos == std::string::npos) continue;
    double lat, lon, alt;
    if (std::sscanf(line.c_str() + pos, "anchor_lla = [%lf, %lf, %lf]", &lat,
                    &lon, &alt) == 3) {
      return GeoLla::from_degrees(lat, lon, alt);
    }
  }
  return std::nullopt;
}

}  // namespace glio
