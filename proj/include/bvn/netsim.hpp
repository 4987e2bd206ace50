#ifndef BVN_NETSIM_HPP
#define BVN_NETSIM_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bvn/consensus.hpp"
#include "bvn/geo.hpp"
#include "bvn/ledger.hpp"
#include "bvn/participant.hpp"
#include "bvn/vehicle.hpp"

namespace bvn {

// ---------------------------------------------------------------------------
// Network and processing models

struct NetworkProfile {
    std::string name;
    double bandwidth_bps = 0.0;     // > 0
    double one_way_latency_ms = 0.0;
};

// Preset numbers follow common browser throttling presets; scenarios may
// override them.
inline NetworkProfile wifi_profile()    { return {"wifi", 60e6, 5.0}; }
inline NetworkProfile fast3g_profile()  { return {"fast-3g", 1.6e6, 75.0}; }
inline NetworkProfile slow3g_profile()  { return {"slow-3g", 0.4e6, 200.0}; }

inline NetworkProfile profile_by_name(const std::string& name) {
    if (name == "wifi") return wifi_profile();
    if (name == "fast-3g") return fast3g_profile();
    if (name == "slow-3g") return slow3g_profile();
    throw std::invalid_argument("unknown network profile: " + name);
}

/// One-way delay for a message: latency + serialization time.
inline double transmission_delay_ms(const NetworkProfile& profile, std::size_t message_bytes) {
    const double bits = static_cast<double>(message_bytes) * 8.0;
    return profile.one_way_latency_ms + bits / (profile.bandwidth_bps / 1000.0);
}

enum class ThrottleModel { Linear, Calibrated };

inline ThrottleModel throttle_model_by_name(const std::string& name) {
    if (name == "linear") return ThrottleModel::Linear;
    if (name == "calibrated") return ThrottleModel::Calibrated;
    throw std::invalid_argument("unknown throttle model: " + name);
}

/// Measured response-time curve under CPU throttling, normalized to a
/// 39 ms baseline: {1x: 39, 4x: 74, 6x: 118}. Interpolated piecewise
/// linearly between points, extrapolated with the last segment's slope.
inline double calibrated_throttle_response_ms(double throttle) {
    struct Point { double factor, response; };
    static constexpr Point table[] = {{1.0, 39.0}, {4.0, 74.0}, {6.0, 118.0}};
    if (throttle <= table[0].factor) return table[0].response;
    for (std::size_t i = 1; i < 3; ++i) {
        if (throttle <= table[i].factor) {
            const auto& a = table[i - 1];
            const auto& b = table[i];
            const double t = (throttle - a.factor) / (b.factor - a.factor);
            return a.response + t * (b.response - a.response);
        }
    }
    const double slope = (table[2].response - table[1].response) / (table[2].factor - table[1].factor);
    return table[2].response + (throttle - table[2].factor) * slope;
}

/// Time for one validation (or modify rejection) on a node.
inline double processing_delay_ms(double base_cost_ms, double throttle, ThrottleModel model) {
    if (!(base_cost_ms > 0.0)) throw std::invalid_argument("base cost must be positive");
    if (!(throttle >= 1.0)) throw std::invalid_argument("cpu throttle must be >= 1");
    switch (model) {
        case ThrottleModel::Linear:
            return base_cost_ms * throttle;
        case ThrottleModel::Calibrated:
            return base_cost_ms / 39.0 * calibrated_throttle_response_ms(throttle);
    }
    return base_cost_ms;
}

// ---------------------------------------------------------------------------
// Topology

enum class NodeKind { Vehicle, RSU, Controller };

inline const char* node_kind_name(NodeKind k) {
    switch (k) {
        case NodeKind::Vehicle: return "Vehicle";
        case NodeKind::RSU: return "RSU";
        case NodeKind::Controller: return "Controller";
    }
    return "?";
}

struct Node {
    std::string id;
    NodeKind kind = NodeKind::Vehicle;
    std::string vin;  // vehicles only
    GpsPoint position;
    double speed_mps = 0.0;
    double acceleration_mps2 = 0.0;
    bool online = true;
    double cpu_throttle = 1.0;       // >= 1, 1.0 = baseline
    double sensing_range_m = 150.0;

    // Replicated state.
    Ledger ledger;
    Blacklist blacklist;
    bool needs_catchup = false;

    VehicleClaim truthful_claim() const {
        return VehicleClaim{vin, position, Trajectory{speed_mps, acceleration_mps2}};
    }
};

struct UnknownNode : std::invalid_argument {
    explicit UnknownNode(const std::string& id) : std::invalid_argument("unknown node: " + id) {}
};

struct OriginOffline : std::runtime_error {
    explicit OriginOffline(const std::string& id)
        : std::runtime_error("broadcast origin is offline: " + id) {}
};

// ---------------------------------------------------------------------------
// Events and trace

enum class EventKind { Broadcast, Deliver, ValidateDone, ReplicateEntry, ReplicateBlacklist, AttackInject };

inline const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::Broadcast: return "Broadcast";
        case EventKind::Deliver: return "Deliver";
        case EventKind::ValidateDone: return "ValidateDone";
        case EventKind::ReplicateEntry: return "ReplicateEntry";
        case EventKind::ReplicateBlacklist: return "ReplicateBlacklist";
        case EventKind::AttackInject: return "AttackInject";
    }
    return "?";
}

struct TraceRecord {
    double time_ms = 0.0;
    std::string node;
    EventKind kind = EventKind::Broadcast;
    std::string detail;
};

enum class SampleKind { Validate, TamperReject };

/// Receipt-to-verdict (or attempt-to-rejection) duration at one node.
struct TimingSample {
    std::string node;
    SampleKind kind = SampleKind::Validate;
    double start_ms = 0.0;
    double end_ms = 0.0;
    std::string outcome;         // decision name or "ImmutableLedger"
    std::size_t steps = 0;       // counted validation steps
    double response_ms() const { return end_ms - start_ms; }
};

struct VerdictRecord {
    double time_ms = 0.0;
    std::string origin;
    std::string vin;
    ValidationVerdict verdict;
};

struct SimulationTrace {
    std::vector<TraceRecord> events;
    std::vector<TimingSample> samples;
    std::vector<VerdictRecord> verdicts;
};

inline std::string format_ms(double t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", t);
    return buf;
}

/// Line-delimited trace, stable field order, suitable for byte diffing.
inline std::string trace_to_string(const SimulationTrace& trace) {
    std::ostringstream out;
    for (const auto& r : trace.events) {
        out << format_ms(r.time_ms) << " " << r.node << " " << event_kind_name(r.kind)
            << " " << r.detail << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Simulation

/// Deterministic single-threaded event loop over the vehicle/RSU network.
/// Equal-time events run in scheduling order via the ordinal, so a trace
/// is a pure function of the configuration.
class Simulation {
public:
    Simulation(NetworkProfile profile, ConsensusPolicy policy, double base_validation_cost_ms,
               ThrottleModel throttle_model = ThrottleModel::Calibrated)
        : profile_(std::move(profile)),
          policy_(policy),
          base_cost_ms_(base_validation_cost_ms),
          throttle_model_(throttle_model) {}

    Node& add_node(Node node) {
        if (nodes_.count(node.id) != 0) {
            throw std::invalid_argument("duplicate node id: " + node.id);
        }
        if (node.kind == NodeKind::Controller) {
            if (!controller_id_.empty()) throw std::invalid_argument("topology already has a controller");
            controller_id_ = node.id;
        }
        registry_.register_participant(node.id, node.kind == NodeKind::Vehicle ? Role::Vehicle
                                       : node.kind == NodeKind::RSU ? Role::RSU
                                                                    : Role::Controller);
        std::string id = node.id;
        node_order_.push_back(id);
        return nodes_.emplace(std::move(id), std::move(node)).first->second;
    }

    Node& node(const std::string& id) {
        auto it = nodes_.find(id);
        if (it == nodes_.end()) throw UnknownNode(id);
        return it->second;
    }
    const Node& node(const std::string& id) const {
        auto it = nodes_.find(id);
        if (it == nodes_.end()) throw UnknownNode(id);
        return it->second;
    }
    bool has_node(const std::string& id) const { return nodes_.count(id) != 0; }
    const std::vector<std::string>& node_ids() const { return node_order_; }
    std::size_t node_count() const { return nodes_.size(); }
    const std::string& controller_id() const { return controller_id_; }
    const ConsensusPolicy& policy() const { return policy_; }
    const NetworkProfile& profile() const { return profile_; }
    double base_validation_cost_ms() const { return base_cost_ms_; }
    ThrottleModel throttle_model() const { return throttle_model_; }
    double now_ms() const { return clock_ms_; }
    const SimulationTrace& trace() const { return trace_; }
    ParticipantRegistry& registry() { return registry_; }

    /// Seed every node's replica with the same pre-validated ledger.
    void seed_ledger(const Ledger& initial) {
        for (auto& [id, n] : nodes_) n.ledger = initial;
    }

    double node_processing_delay_ms(const Node& n) const {
        return processing_delay_ms(base_cost_ms_, n.cpu_throttle, throttle_model_);
    }

    /// Broadcast a claim from an online origin. One Deliver per online
    /// peer at clock + transmission delay; offline peers are marked for
    /// catch-up.
    void broadcast(const std::string& origin_id, const VehicleClaim& claim,
                   std::optional<double> at_ms = std::nullopt) {
        const Node& origin = node(origin_id);
        if (!origin.online) throw OriginOffline(origin_id);
        schedule(at_ms.value_or(clock_ms_), EventKind::Broadcast, origin_id, Payload{claim});
    }

    void schedule_tamper(const std::string& node_id, std::uint64_t target_record_id,
                         double at_ms) {
        (void)node(node_id);
        Payload p;
        p.target_record_id = target_record_id;
        schedule(at_ms, EventKind::AttackInject, node_id, std::move(p));
    }

    void set_node_online(const std::string& id, bool online) {
        Node& n = node(id);
        if (n.online == online) return;
        n.online = online;
        if (online && n.needs_catchup) {
            // Restore the replica to the majority network state.
            const Node& ctrl = nodes_.at(controller_id_);
            n.ledger = ctrl.ledger;
            n.blacklist = ctrl.blacklist;
            n.needs_catchup = false;
            trace_.events.push_back({clock_ms_, id, EventKind::ReplicateEntry, "catchup"});
        }
    }

    /// Execute events in (due_time, ordinal) order until the queue drains
    /// or the horizon passes.
    SimulationTrace& run(double until_ms = std::numeric_limits<double>::infinity()) {
        while (!queue_.empty() && queue_.top().due_ms <= until_ms) {
            Event ev = queue_.top();
            queue_.pop();
            clock_ms_ = ev.due_ms;
            dispatch(ev);
        }
        if (queue_.empty() && clock_ms_ < until_ms &&
            until_ms < std::numeric_limits<double>::infinity()) {
            clock_ms_ = until_ms;
        }
        return trace_;
    }

    bool quiescent() const { return queue_.empty(); }

    /// References for a broadcast: every online RSU or other vehicle whose
    /// sensing range covers the origin's true position reports the
    /// origin's true state.
    ReferenceSet gather_references(const Node& origin) const {
        ReferenceSet refs;
        for (const auto& id : node_order_) {
            const Node& n = nodes_.at(id);
            if (n.id == origin.id || !n.online || n.kind == NodeKind::Controller) continue;
            if (great_circle_distance_m(n.position, origin.position) > n.sensing_range_m) continue;
            ReferenceObservation obs;
            obs.observer = n.id;
            obs.observer_kind = n.kind == NodeKind::RSU ? ObserverKind::RSU : ObserverKind::WitnessVehicle;
            obs.observed_vin = origin.vin;
            obs.observed_gps = origin.position;
            obs.observed_speed_mps = origin.speed_mps;
            obs.observed_acceleration_mps2 = origin.acceleration_mps2;
            obs.observation_time_ms = static_cast<std::uint64_t>(clock_ms_);
            refs.observations.push_back(std::move(obs));
        }
        return refs;
    }

private:
    struct Payload {
        VehicleClaim claim;
        ReferenceSet refs;
        BroadcastRecord bcast;
        ValidationVerdict canonical;
        double receipt_ms = 0.0;
        std::uint64_t target_record_id = 0;
    };

    struct Event {
        double due_ms = 0.0;
        std::uint64_t ordinal = 0;
        EventKind kind = EventKind::Broadcast;
        std::string node;
        Payload payload;
        bool operator>(const Event& other) const {
            if (due_ms != other.due_ms) return due_ms > other.due_ms;
            return ordinal > other.ordinal;
        }
    };

    void schedule(double due, EventKind kind, const std::string& node, Payload payload) {
        queue_.push(Event{due, next_ordinal_++, kind, node, std::move(payload)});
    }

    void dispatch(const Event& ev) {
        switch (ev.kind) {
            case EventKind::Broadcast: exec_broadcast(ev); break;
            case EventKind::Deliver: exec_deliver(ev); break;
            case EventKind::ValidateDone: exec_validate_done(ev); break;
            case EventKind::ReplicateEntry: exec_replicate_entry(ev); break;
            case EventKind::ReplicateBlacklist: exec_replicate_blacklist(ev); break;
            case EventKind::AttackInject: exec_attack_inject(ev); break;
        }
    }

    void exec_broadcast(const Event& ev) {
        Node& origin = nodes_.at(ev.node);
        if (!origin.online) {
            trace_.events.push_back({clock_ms_, ev.node, EventKind::Broadcast, "dropped origin-offline"});
            return;
        }
        Payload p;
        p.bcast.claimed = ev.payload.claim;
        p.bcast.origin_node = ev.node;
        p.bcast.broadcast_time_ms = static_cast<std::uint64_t>(clock_ms_);
        p.refs = gather_references(origin);
        trace_.events.push_back({clock_ms_, ev.node, EventKind::Broadcast,
                                 "vin=" + ev.payload.claim.vin +
                                 " refs=" + std::to_string(p.refs.observations.size())});

        // All validators are deterministic over the same references, so the
        // network-wide verdict can be fixed here; each node still spends its
        // own processing time discovering it.
        Blacklist probe = replica_blacklist();
        p.canonical = validate(p.bcast, p.refs, probe, policy_);

        const double delay = transmission_delay_ms(
            profile_, claim_wire_size(ev.payload.claim) + ev.node.size());
        double earliest_done = std::numeric_limits<double>::infinity();
        for (const auto& id : node_order_) {
            Node& n = nodes_.at(id);
            if (id == ev.node) continue;
            if (!n.online) {
                n.needs_catchup = true;
                continue;
            }
            Payload dp = p;
            dp.receipt_ms = clock_ms_ + delay;
            schedule(clock_ms_ + delay, EventKind::Deliver, id, std::move(dp));
            earliest_done = std::min(earliest_done,
                                     clock_ms_ + delay + node_processing_delay_ms(n));
        }
        // The origin's own replica converges when the fastest validator is
        // done and replicates the outcome back.
        if (std::isfinite(earliest_done)) {
            if (p.canonical.decision == Decision::Accepted) {
                schedule(earliest_done, EventKind::ReplicateEntry, ev.node, p);
            } else if (p.canonical.decision == Decision::RejectedSpoof ||
                       (p.canonical.decision == Decision::RejectedUnverifiable &&
                        policy_.strict_unverifiable_blacklist)) {
                schedule(earliest_done, EventKind::ReplicateBlacklist, ev.node, p);
            }
        }
    }

    void exec_deliver(const Event& ev) {
        Node& n = nodes_.at(ev.node);
        trace_.events.push_back({clock_ms_, ev.node, EventKind::Deliver,
                                 "vin=" + ev.payload.bcast.claimed.vin});
        Payload p = ev.payload;
        schedule(clock_ms_ + node_processing_delay_ms(n), EventKind::ValidateDone, ev.node,
                 std::move(p));
    }

    void exec_validate_done(const Event& ev) {
        Node& n = nodes_.at(ev.node);
        if (ev.payload.target_record_id != 0) {
            // Modify-attempt rejection completing.
            trace_.events.push_back({clock_ms_, ev.node, EventKind::ValidateDone,
                                     "ImmutableLedger record=" +
                                         std::to_string(ev.payload.target_record_id)});
            TimingSample s;
            s.node = ev.node;
            s.kind = SampleKind::TamperReject;
            s.start_ms = ev.payload.receipt_ms;
            s.end_ms = clock_ms_;
            s.outcome = "ImmutableLedger";
            s.steps = 1;
            trace_.samples.push_back(std::move(s));
            return;
        }

        const bool was_blacklisted = n.blacklist.contains(ev.payload.bcast.claimed.vin);
        ValidationVerdict verdict = validate(ev.payload.bcast, ev.payload.refs, n.blacklist, policy_);
        // Step accounting: one blacklist probe, plus gathering and comparing
        // each reference when the probe does not short-circuit.
        const std::size_t steps =
            1 + (was_blacklisted ? 0 : 1 + 2 * ev.payload.refs.observations.size());

        trace_.events.push_back({clock_ms_, ev.node, EventKind::ValidateDone,
                                 std::string(decision_name(verdict.decision)) +
                                     " vin=" + ev.payload.bcast.claimed.vin});
        TimingSample s;
        s.node = ev.node;
        s.kind = SampleKind::Validate;
        s.start_ms = ev.payload.receipt_ms;
        s.end_ms = clock_ms_;
        s.outcome = decision_name(verdict.decision);
        s.steps = steps;
        trace_.samples.push_back(std::move(s));
        trace_.verdicts.push_back(
            {clock_ms_, ev.payload.bcast.origin_node, ev.payload.bcast.claimed.vin, verdict});

        if (verdict.decision == Decision::Accepted) {
            n.ledger.append_record(ev.payload.bcast.claimed, registry_.require(ev.node),
                                   ev.payload.bcast.broadcast_time_ms);
            trace_.events.push_back({clock_ms_, ev.node, EventKind::ReplicateEntry,
                                     "vin=" + ev.payload.bcast.claimed.vin});
        } else if (verdict.decision == Decision::RejectedSpoof ||
                   (verdict.decision == Decision::RejectedUnverifiable &&
                    policy_.strict_unverifiable_blacklist)) {
            trace_.events.push_back({clock_ms_, ev.node, EventKind::ReplicateBlacklist,
                                     "vin=" + ev.payload.bcast.claimed.vin});
        }
    }

    void exec_replicate_entry(const Event& ev) {
        Node& n = nodes_.at(ev.node);
        n.ledger.append_record(ev.payload.bcast.claimed, registry_.require(ev.node),
                               ev.payload.bcast.broadcast_time_ms);
        trace_.events.push_back({clock_ms_, ev.node, EventKind::ReplicateEntry,
                                 "vin=" + ev.payload.bcast.claimed.vin});
    }

    void exec_replicate_blacklist(const Event& ev) {
        Node& n = nodes_.at(ev.node);
        n.blacklist.add(ev.payload.bcast.claimed.vin, ev.payload.bcast.broadcast_time_ms);
        trace_.events.push_back({clock_ms_, ev.node, EventKind::ReplicateBlacklist,
                                 "vin=" + ev.payload.bcast.claimed.vin});
    }

    void exec_attack_inject(const Event& ev) {
        Node& n = nodes_.at(ev.node);
        trace_.events.push_back({clock_ms_, ev.node, EventKind::AttackInject,
                                 "modify record=" + std::to_string(ev.payload.target_record_id)});
        n.ledger.attempt_modify(ev.payload.target_record_id, VehicleInfo{},
                                registry_.require(ev.node),
                                static_cast<std::uint64_t>(clock_ms_));
        Payload p;
        p.target_record_id = ev.payload.target_record_id;
        p.receipt_ms = clock_ms_;
        schedule(clock_ms_ + node_processing_delay_ms(n), EventKind::ValidateDone, ev.node,
                 std::move(p));
    }

    // Replicas are identical between broadcasts; any one serves as the
    // canonical state for pure verdict evaluation.
    Blacklist replica_blacklist() const {
        if (!controller_id_.empty()) return nodes_.at(controller_id_).blacklist;
        return nodes_.empty() ? Blacklist{} : nodes_.at(node_order_.front()).blacklist;
    }

    NetworkProfile profile_;
    ConsensusPolicy policy_;
    double base_cost_ms_;
    ThrottleModel throttle_model_;
    std::map<std::string, Node> nodes_;
    std::vector<std::string> node_order_;
    std::string controller_id_;
    ParticipantRegistry registry_;
    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue_;
    std::uint64_t next_ordinal_ = 0;
    double clock_ms_ = 0.0;
    SimulationTrace trace_;
};

}  // namespace bvn

#endif  // BVN_NETSIM_HPP
