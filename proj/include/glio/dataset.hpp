#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "glio/geo.hpp"
#include "glio/imu.hpp"
#include "glio/lidar_features.hpp"

namespace glio {

/// One GPS reading as it appears in gps.csv; quality 0 means unusable.
struct GpsFix {
  double stamp = 0.0;
  GeoLla lla;
  int fix_quality = 1;
};

/// Malformed dataset input; names the file (and line when known).
class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// imu.csv: header line, then `t,wx,wy,wz,ax,ay,az`, strictly increasing t.
std::vector<ImuSample> read_imu_csv(const std::string& path);
void write_imu_csv(const std::string& path,
                   const std::vector<ImuSample>& samples);

/// gps.csv: header line, then `t,lat_deg,lon_deg,alt_m,fix_quality`.
std::vector<GpsFix> read_gps_csv(const std::string& path);
void write_gps_csv(const std::string& path, const std::vector<GpsFix>& fixes);

struct ScanIndexEntry {
  int frame = 0;
  double stamp = 0.0;
};

/// scans/index.csv: header line, then `frame,stamp`.
std::vector<ScanIndexEntry> read_scan_index(const std::string& dataset_dir);
/// scans/NNNNNN.bin: little-endian float32 records `x y z ring rel_time`.
PointCloudFrame read_scan_bin(const std::string& dataset_dir, int frame,
                              double stamp);
void write_scan_bin(const std::string& dataset_dir, int frame,
                    const PointCloudFrame& scan);
void write_scan_index(const std::string& dataset_dir,
                      const std::vector<ScanIndexEntry>& index);

/// Reads `anchor_lla = [lat_deg, lon_deg, alt_m]` from dataset.toml when the
/// file exists.
std::optional<GeoLla> read_dataset_anchor(const std::string& dataset_dir);

std::string scan_file_name(int frame);

}  // namespace glio
