#include "glio/geo.hpp"

#include <cmath>
#include <stdexcept>

namespace glio {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

GeoLla GeoLla::from_degrees(double lat_deg, double lon_deg, double alt_m) {
  GeoLla lla{lat_deg * kPi / 180.0, lon_deg * kPi / 180.0, alt_m};
  lla.validate();
  return lla;
}

void GeoLla::validate() const {
  if (!(std::isfinite(latitude) && std::isfinite(longitude) &&
        std::isfinite(altitude))) {
    throw std::invalid_argument("GeoLla: non-finite coordinate");
  }
  if (latitude < -kPi / 2.0 - 1e-12 || latitude > kPi / 2.0 + 1e-12) {
    throw std::invalid_argument("GeoLla: latitude outside [-pi/2, pi/2]");
  }
  if (longitude <= -kPi - 1e-12 || longitude > kPi + 1e-12) {
    throw std::invalid_argument("GeoLla: longitude outside (-pi, pi]");
  }
}

EnuAnchor EnuAnchor::from_lla(const GeoLla& lla, const EarthEllipsoid& ell) {
  return {lla, lla_to_ecef(lla, ell)};
}

double prime_vertical_radius(double phi, const EarthEllipsoid& ell) {
  const double ac = ell.a * std::cos(phi);
  const double bs = ell.b * std::sin(phi);
  return ell.a * ell.a / std::sqrt(ac * ac + bs * bs);
}

EcefPoint lla_to_ecef(const GeoLla& lla, const EarthEllipsoid& ell) {
  const double r = prime_vertical_radius(lla.latitude, ell);
  const double cphi = std::cos(lla.latitude);
  const double sphi = std::sin(lla.latitude);
  const double clam = std::cos(lla.longitude);
  const double slam = std::sin(lla.longitude);
  EcefPoint p;
  p.x = (r + lla.altitude) * cphi * clam;
  p.y = (r + lla.altitude) * cphi * slam;
  p.z = ((ell.b * ell.b) / (ell.a * ell.a) * r + lla.altitude) * sphi;
  return p;
}

GeoLla ecef_to_lla(const EcefPoint& p, const EarthEllipsoid& ell) {
  const double e2 = ell.eccentricity_squared();
  const double rho = std::hypot(p.x, p.y);
  GeoLla lla;
  lla.longitude = std::atan2(p.y, p.x);
  if (rho < 1e-9) {
    // On the polar axis.
    lla.latitude = (p.z >= 0.0) ? kPi / 2.0 : -kPi / 2.0;
    lla.altitude = std::abs(p.z) - ell.b;
    return lla;
  }
  double phi = std::atan2(p.z, rho * (1.0 - e2));
  double h = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double n = ell.a / std::sqrt(1.0 - e2 * std::sin(phi) * std::sin(phi));
    h = rho / std::cos(phi) - n;
    const double phi_next = std::atan2(p.z, rho * (1.0 - e2 * n / (n + h)));
    if (std::abs(phi_next - phi) < 1e-14) {
      phi = phi_next;
      break;
    }
    phi = phi_next;
  }
  lla.latitude = phi;
  lla.altitude = h;
  return lla;
}

Eigen::Matrix3d enu_rotation(double phi, double lambda) {
  const double sphi = std::sin(phi), cphi = std::cos(phi);
  const double slam = std::sin(lambda), clam = std::cos(lambda);
  Eigen::Matrix3d r;
  r << -slam, clam, 0.0,
       -clam * sphi, -slam * sphi, cphi,
        clam * cphi, slam * cphi, sphi;
  return r;
}

EnuPoint ecef_to_enu(const EcefPoint& p, const EnuAnchor& anchor) {
  const Eigen::Matrix3d r =
      enu_rotation(anchor.origin_lla.latitude, anchor.origin_lla.longitude);
  const Eigen::Vector3d d = r * (p.vec() - anchor.origin_ecef.vec());
  return {d.x(), d.y(), d.z()};
}

EcefPoint enu_to_ecef(const EnuPoint& p, const EnuAnchor& anchor) {
  const Eigen::Matrix3d r =
      enu_rotation(anchor.origin_lla.latitude, anchor.origin_lla.longitude);
  const Eigen::Vector3d d = r.transpose() * p.vec() + anchor.origin_ecef.vec();
  return {d.x(), d.y(), d.z()};
}

EnuPoint lla_to_enu(const GeoLla& lla, const EnuAnchor& anchor,
                    const EarthEllipsoid& ell) {
  return ecef_to_enu(lla_to_ecef(lla, ell), anchor);
}

GeoLla enu_to_lla(const EnuPoint& p, const EnuAnchor& anchor,
                  const EarthEllipsoid& ell) {
  return ecef_to_lla(enu_to_ecef(p, anchor), ell);
}

}  // namespace glio
