#ifndef BVN_VEHICLE_HPP
#define BVN_VEHICLE_HPP

#include <cstdint>
#include <cstring>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bvn/geo.hpp"

namespace bvn {

struct Trajectory {
    double speed_mps = 0.0;          // >= 0
    double acceleration_mps2 = 0.0;  // signed
};

/// Arrival-vehicle record as claimed by a broadcaster: everything except
/// the ledger-assigned record id and timestamp.
struct VehicleClaim {
    std::string vin;  // 17 chars, alphanumeric, no I/O/Q
    GpsPoint gps;
    Trajectory trajectory;
};

/// One row of the distributed ledger.
struct VehicleInfo {
    std::uint64_t record_id = 0;   // ledger-assigned, monotone from 1
    std::string vin;
    GpsPoint gps;
    Trajectory trajectory;
    std::uint64_t timestamp_ms = 0;  // simulated ms, ledger-assigned

    VehicleClaim claim() const { return VehicleClaim{vin, gps, trajectory}; }
};

/// Standard VIN alphabet: 17 alphanumeric characters excluding I, O, Q.
inline bool vin_is_valid(const std::string& vin) {
    if (vin.size() != 17) return false;
    for (char c : vin) {
        const bool digit = c >= '0' && c <= '9';
        const bool upper = c >= 'A' && c <= 'Z' && c != 'I' && c != 'O' && c != 'Q';
        const bool lower = c >= 'a' && c <= 'z' && c != 'i' && c != 'o' && c != 'q';
        if (!digit && !upper && !lower) return false;
    }
    return true;
}

/// Names the first claim field that fails validation, or nullopt if all pass.
inline std::optional<std::string> find_malformed_field(const VehicleClaim& claim) {
    if (!vin_is_valid(claim.vin)) return "vin";
    if (claim.gps.longitude_deg < -180.0 || claim.gps.longitude_deg > 180.0) return "gps.longitude";
    if (claim.gps.latitude_deg < -90.0 || claim.gps.latitude_deg > 90.0) return "gps.latitude";
    if (!(claim.trajectory.speed_mps >= 0.0)) return "trajectory.speed";
    if (std::isnan(claim.trajectory.acceleration_mps2)) return "trajectory.acceleration";
    return std::nullopt;
}

struct MalformedRecord : std::invalid_argument {
    std::string field;
    explicit MalformedRecord(std::string f)
        : std::invalid_argument("malformed record field: " + f), field(std::move(f)) {}
};

namespace detail {

inline void put_u64_le(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

inline void put_f64_le(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    put_u64_le(out, bits);
}

}  // namespace detail

/// Canonical byte serialization used for hashing and message sizing.
/// Field order: record_id, vin, longitude, latitude, speed, acceleration,
/// timestamp. Integers little-endian 64-bit, reals IEEE-754 64-bit LE.
inline std::vector<std::uint8_t> canonical_bytes(const VehicleInfo& info) {
    std::vector<std::uint8_t> out;
    out.reserve(8 + info.vin.size() + 5 * 8);
    detail::put_u64_le(out, info.record_id);
    out.insert(out.end(), info.vin.begin(), info.vin.end());
    detail::put_f64_le(out, info.gps.longitude_deg);
    detail::put_f64_le(out, info.gps.latitude_deg);
    detail::put_f64_le(out, info.trajectory.speed_mps);
    detail::put_f64_le(out, info.trajectory.acceleration_mps2);
    detail::put_u64_le(out, info.timestamp_ms);
    return out;
}

/// Wire size of a broadcast claim under the canonical serialization.
inline std::size_t claim_wire_size(const VehicleClaim& claim) {
    return claim.vin.size() + 4 * 8;
}

}  // namespace bvn

#endif  // BVN_VEHICLE_HPP
