#ifndef BVN_CONSENSUS_HPP
#define BVN_CONSENSUS_HPP

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "bvn/geo.hpp"
#include "bvn/vehicle.hpp"

namespace bvn {

/// Source data: what a vehicle asserts about itself over the air.
struct BroadcastRecord {
    VehicleClaim claimed;
    std::string origin_node;
    std::uint64_t broadcast_time_ms = 0;
};

enum class ObserverKind { RSU, WitnessVehicle };

/// Reference data: what a nearby RSU or witness vehicle actually saw.
struct ReferenceObservation {
    std::string observer;
    ObserverKind observer_kind = ObserverKind::RSU;
    std::string observed_vin;
    GpsPoint observed_gps;
    double observed_speed_mps = 0.0;
    double observed_acceleration_mps2 = 0.0;
    std::uint64_t observation_time_ms = 0;
};

struct ReferenceSet {
    std::vector<ReferenceObservation> observations;
};

struct BlacklistEntry {
    std::uint64_t first_offense_time_ms = 0;
    std::uint64_t offense_count = 0;
    bool operator==(const BlacklistEntry&) const = default;
};

/// Replicated registry of attacker VINs. Set semantics keyed by VIN;
/// repeat offenses bump the count and keep the first offense time.
class Blacklist {
public:
    void add(const std::string& vin, std::uint64_t time_ms) {
        auto [it, inserted] = entries_.try_emplace(vin, BlacklistEntry{time_ms, 1});
        if (!inserted) it->second.offense_count += 1;
    }

    bool contains(const std::string& vin) const { return entries_.count(vin) != 0; }

    const BlacklistEntry* find(const std::string& vin) const {
        auto it = entries_.find(vin);
        return it == entries_.end() ? nullptr : &it->second;
    }

    std::size_t size() const { return entries_.size(); }

    const std::map<std::string, BlacklistEntry>& entries() const { return entries_; }

    bool operator==(const Blacklist& other) const = default;

private:
    std::map<std::string, BlacklistEntry> entries_;
};

/// Matching semantics for the source-vs-reference comparison: strict
/// equality relaxed into tolerance-based agreement plus a quorum rule.
struct ConsensusPolicy {
    double gps_tolerance_m = 5.0;
    double speed_tolerance_mps = 1.0;
    double accel_tolerance_mps2 = 0.5;
    std::size_t min_rsu_refs = 1;
    std::size_t min_witness_refs = 1;
    // Literal pseudo-code mode: an unverifiable broadcast is treated as
    // spoofed and blacklisted instead of being set aside.
    bool strict_unverifiable_blacklist = false;
};

struct VinMismatch : std::invalid_argument {
    VinMismatch(const std::string& expected, const std::string& got)
        : std::invalid_argument("reference for VIN " + got + " routed to record of VIN " + expected) {}
};

/// One reference agrees with the claim iff position, speed, and
/// acceleration all fall within policy tolerances.
inline bool match_observation(const BroadcastRecord& source, const ReferenceObservation& ref,
                              const ConsensusPolicy& policy) {
    if (ref.observed_vin != source.claimed.vin) {
        throw VinMismatch(source.claimed.vin, ref.observed_vin);
    }
    const double dist = great_circle_distance_m(source.claimed.gps, ref.observed_gps);
    if (dist > policy.gps_tolerance_m) return false;
    if (std::fabs(source.claimed.trajectory.speed_mps - ref.observed_speed_mps) >
        policy.speed_tolerance_mps) return false;
    if (std::fabs(source.claimed.trajectory.acceleration_mps2 - ref.observed_acceleration_mps2) >
        policy.accel_tolerance_mps2) return false;
    return true;
}

enum class Decision { Accepted, RejectedSpoof, RejectedBlacklisted, RejectedUnverifiable };

inline const char* decision_name(Decision d) {
    switch (d) {
        case Decision::Accepted: return "Accepted";
        case Decision::RejectedSpoof: return "RejectedSpoof";
        case Decision::RejectedBlacklisted: return "RejectedBlacklisted";
        case Decision::RejectedUnverifiable: return "RejectedUnverifiable";
    }
    return "?";
}

struct ValidationVerdict {
    Decision decision = Decision::RejectedUnverifiable;
    std::size_t matched_refs = 0;
    std::size_t mismatched_refs = 0;
};

/// Consensus validation of one broadcast.
///
/// Blacklisted VINs are rejected before any reference comparison. With a
/// quorum of references (per-kind minimums), a strict majority of matching
/// observations accepts; otherwise the broadcast is a spoof and the VIN is
/// blacklisted. A tie counts as spoof. Below quorum the broadcast is
/// unverifiable and, outside strict mode, nobody is blacklisted.
inline ValidationVerdict validate(const BroadcastRecord& source, const ReferenceSet& refs,
                                  Blacklist& blacklist, const ConsensusPolicy& policy) {
    if (blacklist.contains(source.claimed.vin)) {
        return ValidationVerdict{Decision::RejectedBlacklisted, 0, 0};
    }
    std::size_t rsu_refs = 0;
    std::size_t witness_refs = 0;
    std::size_t matched = 0;
    std::size_t mismatched = 0;
    for (const auto& ref : refs.observations) {
        if (ref.observer_kind == ObserverKind::RSU) ++rsu_refs;
        else ++witness_refs;
        if (match_observation(source, ref, policy)) ++matched;
        else ++mismatched;
    }
    if (rsu_refs < policy.min_rsu_refs || witness_refs < policy.min_witness_refs) {
        if (policy.strict_unverifiable_blacklist) {
            blacklist.add(source.claimed.vin, source.broadcast_time_ms);
        }
        return ValidationVerdict{Decision::RejectedUnverifiable, matched, mismatched};
    }
    if (matched > mismatched) {
        return ValidationVerdict{Decision::Accepted, matched, mismatched};
    }
    blacklist.add(source.claimed.vin, source.broadcast_time_ms);
    return ValidationVerdict{Decision::RejectedSpoof, matched, mismatched};
}

}  // namespace bvn

#endif  // BVN_CONSENSUS_HPP
