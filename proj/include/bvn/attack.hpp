#ifndef BVN_ATTACK_HPP
#define BVN_ATTACK_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "bvn/netsim.hpp"
#include "bvn/scenario.hpp"

namespace bvn {

struct AttackAttempt {
    std::string attacker;
    std::size_t round = 0;
    std::size_t attempt = 0;
    std::string node;     // node where the response was measured
    std::string outcome;  // verdict name or "ImmutableLedger"
    double response_ms = 0.0;
};

struct ResponseStats {
    std::size_t count = 0;
    double mean_ms = 0.0;
    double min_ms = 0.0;
    double max_ms = 0.0;
};

struct NoSamples : std::runtime_error {
    explicit NoSamples(const std::string& node)
        : std::runtime_error("no response samples for node: " + node) {}
};

inline ResponseStats stats_of(const std::vector<double>& samples) {
    ResponseStats s;
    s.count = samples.size();
    if (samples.empty()) return s;
    s.min_ms = *std::min_element(samples.begin(), samples.end());
    s.max_ms = *std::max_element(samples.begin(), samples.end());
    double sum = 0.0;
    for (double v : samples) sum += v;
    s.mean_ms = sum / static_cast<double>(samples.size());
    return s;
}

struct AttackOutcome {
    std::vector<AttackAttempt> attempts;
    ResponseStats summary;

    void finalize() {
        std::vector<double> times;
        times.reserve(attempts.size());
        for (const auto& a : attempts) times.push_back(a.response_ms);
        summary = stats_of(times);
    }
};

/// Mean/min/max of receipt-to-verdict durations observed at one node.
inline ResponseStats measure_response_time(const SimulationTrace& trace, const std::string& node) {
    std::vector<double> times;
    for (const auto& s : trace.samples) {
        if (s.node == node) times.push_back(s.response_ms());
    }
    if (times.empty()) throw NoSamples(node);
    return stats_of(times);
}

inline VehicleClaim apply_falsification(const Node& attacker, const Falsification& f) {
    VehicleClaim claim = attacker.truthful_claim();
    if (f.gps_offset_east_m) claim.gps = offset_m(claim.gps, *f.gps_offset_east_m, 0.0);
    if (f.speed_delta_mps) claim.trajectory.speed_mps =
        std::max(0.0, claim.trajectory.speed_mps + *f.speed_delta_mps);
    if (f.accel_delta_mps2) claim.trajectory.acceleration_mps2 += *f.accel_delta_mps2;
    return claim;
}

namespace detail {

// Spacing between repeated attempts, wide enough that the pipeline for
// one attempt quiesces before the next fires.
inline constexpr double kAttemptSpacingMs = 1000.0;

inline AttackOutcome collect_samples(const SimulationTrace& trace, std::size_t first_sample,
                                     std::size_t round) {
    AttackOutcome out;
    std::size_t attempt = 0;
    for (std::size_t i = first_sample; i < trace.samples.size(); ++i) {
        const TimingSample& s = trace.samples[i];
        AttackAttempt a;
        a.attacker = s.node;
        a.round = round;
        a.attempt = attempt++;
        a.node = s.node;
        a.outcome = s.outcome;
        a.response_ms = s.response_ms();
        out.attempts.push_back(std::move(a));
    }
    out.finalize();
    return out;
}

}  // namespace detail

/// Inject broadcasts whose claimed fields differ from the attacker's true
/// state; RSUs and witnesses keep observing the truth.
inline AttackOutcome spoof_broadcast(Simulation& sim, const AttackSpec& spec) {
    spec.check();
    for (const auto& id : spec.attacker_ids) {
        if (sim.node(id).kind != NodeKind::Vehicle) {
            throw ConfigError("attacks.attackers", "spoof attacker must be a vehicle: " + id);
        }
    }
    const std::size_t first_sample = sim.trace().samples.size();
    for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
        const double t = spec.start_time_ms + static_cast<double>(rep) * detail::kAttemptSpacingMs;
        for (const auto& id : spec.attacker_ids) {
            const Node& attacker = sim.node(id);
            sim.broadcast(id, apply_falsification(attacker, spec.falsified), t);
        }
    }
    sim.run();
    return detail::collect_samples(sim.trace(), first_sample, 0);
}

/// Modify attempts against each attacker's own replica. Every attempt is
/// rejected; the response time is that node's processing delay.
inline AttackOutcome tamper_ledger(Simulation& sim, const AttackSpec& spec) {
    spec.check();
    const std::size_t first_sample = sim.trace().samples.size();
    for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
        const double t = spec.start_time_ms + static_cast<double>(rep) * detail::kAttemptSpacingMs;
        for (const auto& id : spec.attacker_ids) {
            sim.schedule_tamper(id, spec.target_record_id.value_or(1), t);
        }
    }
    sim.run();
    return detail::collect_samples(sim.trace(), first_sample, 0);
}

/// All attackers fire modify attempts at the same simulated instant,
/// `repetitions` times; per-node responses are recorded separately.
inline AttackOutcome run_multi_attack(Simulation& sim, const AttackSpec& spec, std::size_t round = 0) {
    if (spec.attacker_ids.empty()) return AttackOutcome{};
    const std::size_t first_sample = sim.trace().samples.size();
    for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
        const double t = spec.start_time_ms + static_cast<double>(rep) * detail::kAttemptSpacingMs;
        for (const auto& id : spec.attacker_ids) {
            sim.schedule_tamper(id, spec.target_record_id.value_or(1), t);
        }
    }
    sim.run();
    return detail::collect_samples(sim.trace(), first_sample, round);
}

/// Take the attacker off the network, let it tamper locally, then
/// reconnect and restore its replica from the network state.
inline AttackOutcome offline_attacker(Simulation& sim, const AttackSpec& spec) {
    spec.check();
    const std::size_t first_sample = sim.trace().samples.size();
    for (const auto& id : spec.attacker_ids) {
        sim.set_node_online(id, false);
        sim.node(id).needs_catchup = true;
        for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
            sim.schedule_tamper(id, spec.target_record_id.value_or(1),
                                spec.start_time_ms + static_cast<double>(rep) * detail::kAttemptSpacingMs);
        }
    }
    sim.run();
    for (const auto& id : spec.attacker_ids) sim.set_node_online(id, true);
    return detail::collect_samples(sim.trace(), first_sample, 0);
}

inline AttackOutcome run_attack(Simulation& sim, const AttackSpec& spec) {
    switch (spec.kind) {
        case AttackKind::SpoofBroadcast: return spoof_broadcast(sim, spec);
        case AttackKind::ModifyRecord: return tamper_ledger(sim, spec);
        case AttackKind::MultiAttacker: return run_multi_attack(sim, spec);
        case AttackKind::OfflineAttacker: return offline_attacker(sim, spec);
    }
    return AttackOutcome{};
}

}  // namespace bvn

#endif  // BVN_ATTACK_HPP
