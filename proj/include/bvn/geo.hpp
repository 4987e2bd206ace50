#ifndef BVN_GEO_HPP
#define BVN_GEO_HPP

#include <cmath>

namespace bvn {

/// WGS-84 mean earth radius, meters.
inline constexpr double kEarthRadiusM = 6371008.8;

struct GpsPoint {
    double longitude_deg = 0.0;
    double latitude_deg = 0.0;
};

inline bool gps_in_bounds(const GpsPoint& p) {
    return p.longitude_deg >= -180.0 && p.longitude_deg <= 180.0 &&
           p.latitude_deg >= -90.0 && p.latitude_deg <= 90.0;
}

inline double deg_to_rad(double deg) {
    return deg * M_PI / 180.0;
}

/// Great-circle distance between two GPS points, meters (haversine).
inline double great_circle_distance_m(const GpsPoint& a, const GpsPoint& b) {
    const double lat1 = deg_to_rad(a.latitude_deg);
    const double lat2 = deg_to_rad(b.latitude_deg);
    const double dlat = lat2 - lat1;
    const double dlon = deg_to_rad(b.longitude_deg - a.longitude_deg);
    const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                     std::cos(lat1) * std::cos(lat2) * std::sin(dlon / 2) * std::sin(dlon / 2);
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

/// Initial bearing from `from` to `to`, degrees in [0, 360).
inline double bearing_deg(const GpsPoint& from, const GpsPoint& to) {
    const double lat1 = deg_to_rad(from.latitude_deg);
    const double lat2 = deg_to_rad(to.latitude_deg);
    const double dlon = deg_to_rad(to.longitude_deg - from.longitude_deg);
    const double y = std::sin(dlon) * std::cos(lat2);
    const double x = std::cos(lat1) * std::sin(lat2) -
                     std::sin(lat1) * std::cos(lat2) * std::cos(dlon);
    double deg = std::atan2(y, x) * 180.0 / M_PI;
    if (deg < 0) deg += 360.0;
    return deg;
}

/// Smallest absolute difference between two headings, degrees in [0, 180].
inline double heading_difference_deg(double a, double b) {
    double d = std::fmod(std::fabs(a - b), 360.0);
    return d > 180.0 ? 360.0 - d : d;
}

/// Offset a point by `north_m`/`east_m` meters on the sphere. Small-offset
/// approximation, adequate for intersection-scale scenario construction.
inline GpsPoint offset_m(const GpsPoint& origin, double east_m, double north_m) {
    const double dlat = north_m / kEarthRadiusM * 180.0 / M_PI;
    const double dlon = east_m / (kEarthRadiusM * std::cos(deg_to_rad(origin.latitude_deg))) * 180.0 / M_PI;
    return GpsPoint{origin.longitude_deg + dlon, origin.latitude_deg + dlat};
}

}  // namespace bvn

#endif  // BVN_GEO_HPP
