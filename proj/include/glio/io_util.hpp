#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "glio/geometry.hpp"

namespace glio {

/// CRC-32 (IEEE 802.3 polynomial) over a byte range.
std::uint32_t crc32(std::span<const std::uint8_t> bytes);

/// Shortest decimal form that round-trips a double exactly ("%.17g").
std::string format_g17(double v);

struct TimedPose {
  double stamp = 0.0;
  Se3Pose pose;
};

/// TUM trajectory convention: `t x y z qx qy qz qw`, one record per line,
/// timestamps with nine fractional digits.
void write_tum_trajectory(const std::string& path,
                          std::span<const TimedPose> trajectory,
                          std::span<const std::string> header_comments = {});
std::vector<TimedPose> read_tum_trajectory(const std::string& path);

/// Splits one CSV line on commas (no quoting; the dataset files never quote).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace glio
