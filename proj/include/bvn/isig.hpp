#ifndef BVN_ISIG_HPP
#define BVN_ISIG_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bvn/consensus.hpp"
#include "bvn/geo.hpp"
#include "bvn/ledger.hpp"

namespace bvn {

// ---------------------------------------------------------------------------
// Intersection geometry

struct Approach {
    std::string name;
    double heading_deg = 0.0;      // bearing from center toward incoming traffic
    std::size_t lanes = 1;
    double min_distance_m = 0.0;   // stop-line distance span
    double max_distance_m = 400.0;
};

struct IntersectionGeometry {
    GpsPoint center;
    std::vector<Approach> approaches;  // 2-8, distinct headings

    void check() const {
        if (approaches.size() < 2 || approaches.size() > 8) {
            throw std::invalid_argument("intersection needs 2-8 approaches");
        }
        for (std::size_t i = 0; i < approaches.size(); ++i) {
            if (approaches[i].lanes < 1) throw std::invalid_argument("lane count must be >= 1");
            for (std::size_t j = i + 1; j < approaches.size(); ++j) {
                if (approaches[i].heading_deg == approaches[j].heading_deg) {
                    throw std::invalid_argument("approach headings must be distinct");
                }
            }
        }
    }
};

/// Standard four-leg intersection, approaches named by compass direction.
inline IntersectionGeometry four_way_intersection(const GpsPoint& center,
                                                  double max_distance_m = 400.0) {
    IntersectionGeometry g;
    g.center = center;
    g.approaches = {
        {"north", 0.0, 1, 0.0, max_distance_m},
        {"east", 90.0, 1, 0.0, max_distance_m},
        {"south", 180.0, 1, 0.0, max_distance_m},
        {"west", 270.0, 1, 0.0, max_distance_m},
    };
    return g;
}

// ---------------------------------------------------------------------------
// Arrival table

inline constexpr double kQueuedEta = std::numeric_limits<double>::infinity();

struct ArrivalRecord {
    std::string vin;
    std::string approach;
    std::size_t lane = 1;
    double distance_to_stopline_m = 0.0;
    double speed_mps = 0.0;
    double estimated_arrival_s = 0.0;  // kQueuedEta when below the stop threshold
};

struct ArrivalTable {
    std::vector<ArrivalRecord> records;      // sorted by estimated arrival
    std::size_t skipped_outside_approaches = 0;

    bool operator==(const ArrivalTable& other) const {
        if (records.size() != other.records.size()) return false;
        for (std::size_t i = 0; i < records.size(); ++i) {
            const auto& a = records[i];
            const auto& b = other.records[i];
            if (a.vin != b.vin || a.approach != b.approach || a.lane != b.lane ||
                a.distance_to_stopline_m != b.distance_to_stopline_m ||
                a.speed_mps != b.speed_mps ||
                !(a.estimated_arrival_s == b.estimated_arrival_s ||
                  (std::isinf(a.estimated_arrival_s) && std::isinf(b.estimated_arrival_s)))) {
                return false;
            }
        }
        return true;
    }
};

struct PlannerParams {
    double cycle_s = 60.0;
    double min_green_s = 5.0;
    double max_green_s = 50.0;
    double lost_time_s = 5.0;            // per-cycle startup/clearance allowance
    double demand_horizon_s = 60.0;
    double stop_threshold_mps = 0.5;     // below this a vehicle counts as queued
    double saturation_flow_vphpl = 1800.0;
    double lookahead_window_s = 60.0;
};

namespace detail {

inline std::optional<std::size_t> assign_approach(const IntersectionGeometry& geometry,
                                                  const GpsPoint& pos, double distance_m) {
    std::size_t best = 0;
    double best_diff = std::numeric_limits<double>::infinity();
    const double brg = bearing_deg(geometry.center, pos);
    for (std::size_t i = 0; i < geometry.approaches.size(); ++i) {
        const double diff = heading_difference_deg(brg, geometry.approaches[i].heading_deg);
        if (diff < best_diff) {
            best_diff = diff;
            best = i;
        }
    }
    const Approach& a = geometry.approaches[best];
    if (distance_m < a.min_distance_m || distance_m > a.max_distance_m) return std::nullopt;
    return best;
}

inline ArrivalRecord arrival_from_claim(const VehicleClaim& claim, const Approach& approach,
                                        double distance_m, const PlannerParams& params) {
    ArrivalRecord rec;
    rec.vin = claim.vin;
    rec.approach = approach.name;
    rec.lane = 1;
    rec.distance_to_stopline_m = distance_m;
    rec.speed_mps = claim.trajectory.speed_mps;
    rec.estimated_arrival_s = claim.trajectory.speed_mps < params.stop_threshold_mps
                                  ? kQueuedEta
                                  : distance_m / claim.trajectory.speed_mps;
    return rec;
}

inline void sort_table(ArrivalTable& table) {
    std::stable_sort(table.records.begin(), table.records.end(),
                     [](const ArrivalRecord& a, const ArrivalRecord& b) {
                         if (a.estimated_arrival_s != b.estimated_arrival_s) {
                             return a.estimated_arrival_s < b.estimated_arrival_s;
                         }
                         return a.vin < b.vin;
                     });
}

}  // namespace detail

/// Arrival table from raw claims, with no validation in between. This is
/// the unprotected input path a spoofed record can poison.
inline ArrivalTable arrival_table_from_claims(const std::vector<VehicleClaim>& claims,
                                              const IntersectionGeometry& geometry,
                                              const PlannerParams& params = {}) {
    geometry.check();
    ArrivalTable table;
    for (const auto& claim : claims) {
        const double d = great_circle_distance_m(geometry.center, claim.gps);
        auto idx = detail::assign_approach(geometry, claim.gps, d);
        if (!idx) {
            ++table.skipped_outside_approaches;
            continue;
        }
        table.records.push_back(
            detail::arrival_from_claim(claim, geometry.approaches[*idx], d, params));
    }
    detail::sort_table(table);
    return table;
}

/// Arrival table from the validated ledger: only records inside the
/// lookahead window, latest record per VIN, never raw broadcasts.
inline ArrivalTable build_arrival_table(const Ledger& ledger, const IntersectionGeometry& geometry,
                                        std::uint64_t now_ms, double window_s,
                                        const PlannerParams& params = {}) {
    geometry.check();
    const std::uint64_t window_ms = static_cast<std::uint64_t>(window_s * 1000.0);
    const std::uint64_t cutoff = now_ms >= window_ms ? now_ms - window_ms : 0;
    std::map<std::string, VehicleInfo> latest;  // VIN -> newest in-window record
    for (const auto& e : ledger.entries()) {
        if (e.payload.timestamp_ms < cutoff || e.payload.timestamp_ms > now_ms) continue;
        auto it = latest.find(e.payload.vin);
        if (it == latest.end() || it->second.timestamp_ms <= e.payload.timestamp_ms) {
            latest[e.payload.vin] = e.payload;
        }
    }
    std::vector<VehicleClaim> claims;
    claims.reserve(latest.size());
    for (const auto& [vin, info] : latest) claims.push_back(info.claim());
    return arrival_table_from_claims(claims, geometry, params);
}

// ---------------------------------------------------------------------------
// Signal planner

struct SignalPhase {
    std::string approach;
    double green_s = 0.0;
    double start_s = 0.0;  // offset within the cycle
};

struct SignalPlan {
    std::vector<SignalPhase> phases;
    double cycle_s = 0.0;  // sum of greens plus lost time
};

/// Allocate the green budget (cycle minus lost time) across phases in
/// proportion to predicted demand, clamped to [min_green, max_green].
/// Zero total demand leaves every phase at minimum green.
inline SignalPlan plan_signals(const ArrivalTable& table, const IntersectionGeometry& geometry,
                               const PlannerParams& params = {}) {
    geometry.check();
    const std::size_t n = geometry.approaches.size();
    std::vector<double> demand(n, 0.0);
    for (const auto& rec : table.records) {
        for (std::size_t i = 0; i < n; ++i) {
            if (geometry.approaches[i].name != rec.approach) continue;
            if (rec.estimated_arrival_s == kQueuedEta ||
                rec.estimated_arrival_s <= params.demand_horizon_s) {
                demand[i] += 1.0;
            }
            break;
        }
    }
    const double total = std::accumulate(demand.begin(), demand.end(), 0.0);
    const double budget = params.cycle_s - params.lost_time_s;

    SignalPlan plan;
    double offset = 0.0;
    const double clearance = params.lost_time_s / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        double green = params.min_green_s;
        if (total > 0.0) {
            green = std::clamp(budget * demand[i] / total, params.min_green_s, params.max_green_s);
        }
        plan.phases.push_back({geometry.approaches[i].name, green, offset});
        offset += green + clearance;
    }
    plan.cycle_s = offset;
    return plan;
}

// ---------------------------------------------------------------------------
// Point-queue intersection simulation

struct TrueArrival {
    std::string vin;
    std::string approach;
    double arrival_s = 0.0;  // unimpeded arrival at the stop line
};

struct VehicleDelay {
    std::string vin;
    std::string approach;
    double arrival_s = 0.0;
    double discharge_s = 0.0;
    double delay_s = 0.0;
};

struct DelayMetrics {
    std::vector<VehicleDelay> per_vehicle;
    double total_delay_s = 0.0;
    std::map<std::string, std::size_t> max_queue;  // per approach
};

/// Deterministic point-queue model: vehicles join their approach queue at
/// the true arrival time and discharge in order at the saturation headway
/// during that approach's green windows.
inline DelayMetrics simulate_intersection(const SignalPlan& plan,
                                          const IntersectionGeometry& geometry,
                                          std::vector<TrueArrival> arrivals,
                                          const PlannerParams& params = {}) {
    geometry.check();
    DelayMetrics metrics;
    std::stable_sort(arrivals.begin(), arrivals.end(), [](const TrueArrival& a, const TrueArrival& b) {
        if (a.arrival_s != b.arrival_s) return a.arrival_s < b.arrival_s;
        return a.vin < b.vin;
    });

    auto phase_of = [&](const std::string& approach) -> const SignalPhase* {
        for (const auto& p : plan.phases) {
            if (p.approach == approach) return &p;
        }
        return nullptr;
    };
    auto lanes_of = [&](const std::string& approach) -> double {
        for (const auto& a : geometry.approaches) {
            if (a.name == approach) return static_cast<double>(a.lanes);
        }
        return 1.0;
    };

    // Earliest time >= t inside the phase's green window; green starts are
    // periodic with the plan cycle.
    auto next_green_slot = [&](const SignalPhase& phase, double t) {
        if (plan.cycle_s <= 0.0) return t;
        double k = std::floor((t - phase.start_s) / plan.cycle_s);
        for (;; k += 1.0) {
            const double open = phase.start_s + k * plan.cycle_s;
            const double close = open + phase.green_s;
            if (t < open) return open;
            if (t < close) return t;
        }
    };

    std::map<std::string, double> last_discharge;
    std::map<std::string, std::vector<std::pair<double, double>>> served;  // arrival, discharge
    for (const auto& v : arrivals) {
        const SignalPhase* phase = phase_of(v.approach);
        if (phase == nullptr) continue;  // not a modeled approach
        const double headway = 3600.0 / (params.saturation_flow_vphpl * lanes_of(v.approach));
        double t = v.arrival_s;
        auto it = last_discharge.find(v.approach);
        if (it != last_discharge.end()) t = std::max(t, it->second + headway);
        t = next_green_slot(*phase, t);
        last_discharge[v.approach] = t;
        served[v.approach].emplace_back(v.arrival_s, t);

        VehicleDelay d;
        d.vin = v.vin;
        d.approach = v.approach;
        d.arrival_s = v.arrival_s;
        d.discharge_s = t;
        d.delay_s = t - v.arrival_s;
        metrics.total_delay_s += d.delay_s;
        metrics.per_vehicle.push_back(std::move(d));
    }

    for (const auto& [approach, pairs] : served) {
        std::size_t max_q = 0;
        for (const auto& [arr_i, dis_i] : pairs) {
            std::size_t q = 0;
            for (const auto& [arr_j, dis_j] : pairs) {
                if (arr_j <= arr_i && dis_j > arr_i) ++q;
            }
            max_q = std::max(max_q, q);
        }
        metrics.max_queue[approach] = max_q;
    }
    return metrics;
}

// ---------------------------------------------------------------------------
// Protected vs. unprotected comparison

struct DemoVehicle {
    VehicleClaim truth;  // actual state, what references observe
};

struct DemoScenario {
    IntersectionGeometry geometry;
    PlannerParams params;
    std::vector<DemoVehicle> truthful;
    VehicleClaim spoofed_claim;       // what the attacker broadcasts
    VehicleClaim attacker_truth;      // where the attacker actually is
    ConsensusPolicy policy;
    std::uint64_t now_ms = 0;
};

struct DemoReport {
    ArrivalTable baseline_table;
    ArrivalTable unprotected_table;
    ArrivalTable protected_table;
    DelayMetrics baseline;
    DelayMetrics unprotected_run;
    DelayMetrics protected_run;
    ValidationVerdict spoof_verdict;
    Blacklist blacklist;
};

namespace detail {

inline std::vector<TrueArrival> true_arrivals(const std::vector<DemoVehicle>& vehicles,
                                              const IntersectionGeometry& geometry,
                                              const PlannerParams& params) {
    std::vector<TrueArrival> out;
    for (const auto& v : vehicles) {
        const double d = great_circle_distance_m(geometry.center, v.truth.gps);
        auto idx = assign_approach(geometry, v.truth.gps, d);
        if (!idx) continue;
        TrueArrival a;
        a.vin = v.truth.vin;
        a.approach = geometry.approaches[*idx].name;
        a.arrival_s = v.truth.trajectory.speed_mps < params.stop_threshold_mps
                          ? 0.0
                          : d / v.truth.trajectory.speed_mps;
        out.push_back(std::move(a));
    }
    return out;
}

}  // namespace detail

/// Run the arrival-table pipeline three ways: no attack, attack with the
/// spoofed claim fed straight to the planner, and attack with the claim
/// forced through consensus validation first. Delays are always measured
/// against the true traffic.
inline DemoReport congestion_attack_demo(const DemoScenario& scenario) {
    DemoReport report;
    const auto& geom = scenario.geometry;
    const auto& params = scenario.params;

    std::vector<VehicleClaim> truthful_claims;
    for (const auto& v : scenario.truthful) truthful_claims.push_back(v.truth);
    const auto arrivals = detail::true_arrivals(scenario.truthful, geom, params);

    // Baseline: nobody attacks.
    report.baseline_table = arrival_table_from_claims(truthful_claims, geom, params);
    const SignalPlan baseline_plan = plan_signals(report.baseline_table, geom, params);
    report.baseline = simulate_intersection(baseline_plan, geom, arrivals, params);

    // Unprotected: the spoofed record lands in the arrival table directly.
    std::vector<VehicleClaim> poisoned = truthful_claims;
    poisoned.push_back(scenario.spoofed_claim);
    report.unprotected_table = arrival_table_from_claims(poisoned, geom, params);
    const SignalPlan poisoned_plan = plan_signals(report.unprotected_table, geom, params);
    report.unprotected_run = simulate_intersection(poisoned_plan, geom, arrivals, params);

    // Protected: every claim passes consensus; references observe truth.
    std::vector<VehicleClaim> validated;
    auto validate_claim = [&](const VehicleClaim& claim, const VehicleClaim& truth) {
        BroadcastRecord bcast;
        bcast.claimed = claim;
        bcast.origin_node = "demo-" + truth.vin;
        bcast.broadcast_time_ms = scenario.now_ms;
        ReferenceSet refs;
        ReferenceObservation rsu;
        rsu.observer = "demo-rsu";
        rsu.observer_kind = ObserverKind::RSU;
        rsu.observed_vin = claim.vin;
        rsu.observed_gps = truth.gps;
        rsu.observed_speed_mps = truth.trajectory.speed_mps;
        rsu.observed_acceleration_mps2 = truth.trajectory.acceleration_mps2;
        refs.observations.push_back(rsu);
        ReferenceObservation witness = rsu;
        witness.observer = "demo-witness";
        witness.observer_kind = ObserverKind::WitnessVehicle;
        refs.observations.push_back(witness);
        return validate(bcast, refs, report.blacklist, scenario.policy);
    };
    for (const auto& v : scenario.truthful) {
        if (validate_claim(v.truth, v.truth).decision == Decision::Accepted) {
            validated.push_back(v.truth);
        }
    }
    report.spoof_verdict = validate_claim(scenario.spoofed_claim, scenario.attacker_truth);
    if (report.spoof_verdict.decision == Decision::Accepted) {
        validated.push_back(scenario.spoofed_claim);
    }
    report.protected_table = arrival_table_from_claims(validated, geom, params);
    const SignalPlan protected_plan = plan_signals(report.protected_table, geom, params);
    report.protected_run = simulate_intersection(protected_plan, geom, arrivals, params);
    return report;
}

}  // namespace bvn

#endif  // BVN_ISIG_HPP
