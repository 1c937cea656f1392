#pragma once

#include <Eigen/Core>

namespace glio {

/// Reference ellipsoid given by equatorial and polar radii.
struct EarthEllipsoid {
  double a = 6378137.0;        // equatorial radius [m]
  double b = 6356752.314245;   // polar radius [m]

  static EarthEllipsoid wgs84() { return {}; }
  double eccentricity_squared() const { return 1.0 - (b * b) / (a * a); }
};

/// Geodetic coordinates. Latitude in [-pi/2, pi/2], longitude in (-pi, pi],
/// altitude in meters above the ellipsoid.
struct GeoLla {
  double latitude = 0.0;   // [rad]
  double longitude = 0.0;  // [rad]
  double altitude = 0.0;   // [m]

  static GeoLla from_degrees(double lat_deg, double lon_deg, double alt_m);
  /// Throws std::invalid_argument when outside the valid ranges.
  void validate() const;
};

struct EcefPoint {
  double x = 0.0, y = 0.0, z = 0.0;  // [m]
  Eigen::Vector3d vec() const { return {x, y, z}; }
};

/// Position in a local east-north-up frame relative to a fixed origin.
struct EnuPoint {
  double e = 0.0, n = 0.0, u = 0.0;  // [m]
  Eigen::Vector3d vec() const { return {e, n, u}; }
};

/// A local tangent-frame origin: the geodetic origin together with its ECEF
/// image, fixed for the whole session.
struct EnuAnchor {
  GeoLla origin_lla;
  EcefPoint origin_ecef;

  static EnuAnchor from_lla(const GeoLla& lla,
                            const EarthEllipsoid& ell = EarthEllipsoid::wgs84());
};

/// East-west curvature radius R = a^2 / sqrt((a cos phi)^2 + (b sin phi)^2).
double prime_vertical_radius(double phi, const EarthEllipsoid& ell);

EcefPoint lla_to_ecef(const GeoLla& lla,
                      const EarthEllipsoid& ell = EarthEllipsoid::wgs84());

/// Iterative inverse of lla_to_ecef (converges to ~1e-12 rad).
GeoLla ecef_to_lla(const EcefPoint& p,
                   const EarthEllipsoid& ell = EarthEllipsoid::wgs84());

/// Rotation taking ECEF deltas into the ENU frame at (phi, lambda). Rows are
/// the east, north and up unit vectors.
Eigen::Matrix3d enu_rotation(double phi, double lambda);

EnuPoint ecef_to_enu(const EcefPoint& p, const EnuAnchor& anchor);
EcefPoint enu_to_ecef(const EnuPoint& p, const EnuAnchor& anchor);

EnuPoint lla_to_enu(const GeoLla& lla, const EnuAnchor& anchor,
                    const EarthEllipsoid& ell = EarthEllipsoid::wgs84());
GeoLla enu_to_lla(const EnuPoint& p, const EnuAnchor& anchor,
                  const EarthEllipsoid& ell = EarthEllipsoid::wgs84());

}  // namespace glio
