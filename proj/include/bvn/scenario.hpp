#ifndef BVN_SCENARIO_HPP
#define BVN_SCENARIO_HPP

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bvn/netsim.hpp"

namespace bvn {

struct ConfigError : std::runtime_error {
    std::string field;
    ConfigError(std::string field_path, const std::string& what)
        : std::runtime_error("config error at '" + field_path + "': " + what),
          field(std::move(field_path)) {}
};

enum class AttackKind { SpoofBroadcast, ModifyRecord, MultiAttacker, OfflineAttacker };

inline AttackKind attack_kind_by_name(const std::string& name) {
    if (name == "spoof-broadcast") return AttackKind::SpoofBroadcast;
    if (name == "modify-record") return AttackKind::ModifyRecord;
    if (name == "multi-attacker") return AttackKind::MultiAttacker;
    if (name == "offline-attacker") return AttackKind::OfflineAttacker;
    throw std::invalid_argument("unknown attack kind: " + name);
}

/// Falsification applied on top of the attacker's true state. A field is
/// spoofed iff its value is present; zero offsets model the degenerate
/// spoof that is indistinguishable from truth.
struct Falsification {
    std::optional<double> gps_offset_east_m;
    std::optional<double> speed_delta_mps;
    std::optional<double> accel_delta_mps2;

    bool any() const {
        return gps_offset_east_m || speed_delta_mps || accel_delta_mps2;
    }
};

struct AttackSpec {
    AttackKind kind = AttackKind::SpoofBroadcast;
    std::vector<std::string> attacker_ids;
    Falsification falsified;
    std::optional<std::uint64_t> target_record_id;
    double start_time_ms = 0.0;
    std::size_t repetitions = 1;

    void check() const {
        if (kind == AttackKind::SpoofBroadcast && !falsified.any()) {
            throw ConfigError("attacks.falsified", "spoof-broadcast needs at least one falsified field");
        }
        if (kind == AttackKind::ModifyRecord && !target_record_id) {
            throw ConfigError("attacks.target_record_id", "modify-record needs a target record id");
        }
        if (attacker_ids.empty() && kind != AttackKind::MultiAttacker) {
            throw ConfigError("attacks.attackers", "attack needs at least one attacker id");
        }
    }
};

struct ScenarioConfig {
    std::uint64_t seed = 0;
    NetworkProfile profile = wifi_profile();
    ThrottleModel throttle_model = ThrottleModel::Calibrated;
    double base_validation_cost_ms = 39.0;
    std::size_t vehicles = 20;
    std::size_t rsus = 4;
    std::size_t initial_ledger_records = 20;
    double sensing_range_m = 150.0;
    GpsPoint center{-83.7430, 42.2780};
    std::map<std::string, double> throttles;  // node id -> factor
    ConsensusPolicy policy;
    std::vector<AttackSpec> attacks;
    std::optional<double> until_ms;
};

namespace detail {

template <typename T>
T get_field(const nlohmann::json& j, const std::string& path, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const std::exception& e) {
        throw ConfigError(path.empty() ? key : path + "." + key, e.what());
    }
}

}  // namespace detail

inline ConsensusPolicy parse_policy(const nlohmann::json& j, const std::string& path = "policy") {
    ConsensusPolicy p;
    p.gps_tolerance_m = detail::get_field(j, path, "gps_tolerance_m", p.gps_tolerance_m);
    p.speed_tolerance_mps = detail::get_field(j, path, "speed_tolerance_mps", p.speed_tolerance_mps);
    p.accel_tolerance_mps2 = detail::get_field(j, path, "accel_tolerance_mps2", p.accel_tolerance_mps2);
    p.min_rsu_refs = detail::get_field<std::size_t>(j, path, "min_rsu_refs", p.min_rsu_refs);
    p.min_witness_refs = detail::get_field<std::size_t>(j, path, "min_witness_refs", p.min_witness_refs);
    p.strict_unverifiable_blacklist =
        detail::get_field(j, path, "strict_unverifiable_blacklist", p.strict_unverifiable_blacklist);
    if (p.gps_tolerance_m < 0 || p.speed_tolerance_mps < 0 || p.accel_tolerance_mps2 < 0) {
        throw ConfigError(path, "tolerances must be non-negative");
    }
    if (p.min_rsu_refs == 0 && p.min_witness_refs == 0) {
        throw ConfigError(path, "min_rsu_refs and min_witness_refs cannot both be zero");
    }
    return p;
}

inline AttackSpec parse_attack(const nlohmann::json& j, const std::string& path) {
    AttackSpec a;
    if (!j.contains("kind")) throw ConfigError(path + ".kind", "missing");
    try {
        a.kind = attack_kind_by_name(j.at("kind").get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path + ".kind", e.what());
    }
    a.attacker_ids = detail::get_field(j, path, "attackers", std::vector<std::string>{});
    if (j.contains("falsified")) {
        const auto& f = j.at("falsified");
        if (f.contains("gps_offset_east_m")) a.falsified.gps_offset_east_m = f.at("gps_offset_east_m").get<double>();
        if (f.contains("speed_delta_mps")) a.falsified.speed_delta_mps = f.at("speed_delta_mps").get<double>();
        if (f.contains("accel_delta_mps2")) a.falsified.accel_delta_mps2 = f.at("accel_delta_mps2").get<double>();
    }
    if (j.contains("target_record_id")) a.target_record_id = j.at("target_record_id").get<std::uint64_t>();
    a.start_time_ms = detail::get_field(j, path, "start_time_ms", 0.0);
    a.repetitions = detail::get_field<std::size_t>(j, path, "repetitions", 1);
    a.check();
    return a;
}

inline ScenarioConfig parse_scenario(const nlohmann::json& j) {
    ScenarioConfig c;
    c.seed = detail::get_field<std::uint64_t>(j, "", "seed", c.seed);
    if (j.contains("profile")) {
        const auto& p = j.at("profile");
        if (p.is_string()) {
            try {
                c.profile = profile_by_name(p.get<std::string>());
            } catch (const std::invalid_argument& e) {
                throw ConfigError("profile", e.what());
            }
        } else {
            c.profile.name = detail::get_field<std::string>(p, "profile", "name", "custom");
            c.profile.bandwidth_bps =
                detail::get_field(p, "profile", "bandwidth_mbps", c.profile.bandwidth_bps / 1e6) * 1e6;
            c.profile.one_way_latency_ms =
                detail::get_field(p, "profile", "one_way_latency_ms", c.profile.one_way_latency_ms);
            if (c.profile.bandwidth_bps <= 0) throw ConfigError("profile.bandwidth_mbps", "must be > 0");
            if (c.profile.one_way_latency_ms < 0) throw ConfigError("profile.one_way_latency_ms", "must be >= 0");
        }
    }
    if (j.contains("throttle_model")) {
        try {
            c.throttle_model = throttle_model_by_name(j.at("throttle_model").get<std::string>());
        } catch (const std::invalid_argument& e) {
            throw ConfigError("throttle_model", e.what());
        }
    }
    c.base_validation_cost_ms = detail::get_field(j, "", "base_validation_cost_ms", c.base_validation_cost_ms);
    if (c.base_validation_cost_ms <= 0) throw ConfigError("base_validation_cost_ms", "must be > 0");
    c.vehicles = detail::get_field<std::size_t>(j, "", "vehicles", c.vehicles);
    c.rsus = detail::get_field<std::size_t>(j, "", "rsus", c.rsus);
    c.initial_ledger_records =
        detail::get_field<std::size_t>(j, "", "initial_ledger_records", c.initial_ledger_records);
    c.sensing_range_m = detail::get_field(j, "", "sensing_range_m", c.sensing_range_m);
    if (j.contains("center")) {
        c.center.longitude_deg = detail::get_field(j.at("center"), "center", "longitude", c.center.longitude_deg);
        c.center.latitude_deg = detail::get_field(j.at("center"), "center", "latitude", c.center.latitude_deg);
    }
    if (j.contains("throttles")) {
        for (const auto& [id, v] : j.at("throttles").items()) {
            const double t = v.get<double>();
            if (t < 1.0) throw ConfigError("throttles." + id, "throttle must be >= 1");
            c.throttles[id] = t;
        }
    }
    if (j.contains("policy")) c.policy = parse_policy(j.at("policy"));
    if (j.contains("attacks")) {
        std::size_t i = 0;
        for (const auto& a : j.at("attacks")) {
            c.attacks.push_back(parse_attack(a, "attacks[" + std::to_string(i) + "]"));
            ++i;
        }
    }
    if (j.contains("until_ms")) c.until_ms = j.at("until_ms").get<double>();
    return c;
}

inline ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError(path, "no such file");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path, e.what());
    }
    return parse_scenario(j);
}

/// Deterministic synthetic VIN for generated vehicles: index rendered in
/// the 33-character VIN alphabet, left-padded to 17.
inline std::string make_vin(std::uint64_t index) {
    static constexpr char kAlphabet[] = "0123456789ABCDEFGHJKLMNPRSTUVWXYZ";
    std::string s(17, '0');
    std::size_t pos = 16;
    do {
        s[pos--] = kAlphabet[index % 33];
        index /= 33;
    } while (index != 0 && pos < 17);
    return s;
}

/// Build the simulation from a scenario: controller at the intersection
/// center, RSUs on the four corners, vehicles placed deterministically
/// along the four approach lanes, and every replica seeded with the
/// configured number of pre-validated records.
inline Simulation build_topology(const ScenarioConfig& cfg) {
    Simulation sim(cfg.profile, cfg.policy, cfg.base_validation_cost_ms, cfg.throttle_model);
    std::mt19937_64 rng(cfg.seed);

    auto throttle_for = [&](const std::string& id) {
        auto it = cfg.throttles.find(id);
        return it == cfg.throttles.end() ? 1.0 : it->second;
    };

    Node ctrl;
    ctrl.id = "ctrl-1";
    ctrl.kind = NodeKind::Controller;
    ctrl.position = cfg.center;
    ctrl.cpu_throttle = throttle_for(ctrl.id);
    ctrl.sensing_range_m = cfg.sensing_range_m;
    sim.add_node(std::move(ctrl));

    // RSU corners, 30 m out along the axes.
    static constexpr double kRsuOffset = 30.0;
    static constexpr double kOffsets[][2] = {{0, kRsuOffset}, {kRsuOffset, 0}, {0, -kRsuOffset}, {-kRsuOffset, 0}};
    for (std::size_t i = 0; i < cfg.rsus; ++i) {
        Node rsu;
        rsu.id = "rsu-" + std::to_string(i + 1);
        rsu.kind = NodeKind::RSU;
        rsu.position = offset_m(cfg.center, kOffsets[i % 4][0] * (1 + i / 4), kOffsets[i % 4][1] * (1 + i / 4));
        rsu.cpu_throttle = throttle_for(rsu.id);
        rsu.sensing_range_m = cfg.sensing_range_m;
        sim.add_node(std::move(rsu));
    }

    std::uniform_real_distribution<double> dist_m(20.0, 120.0);
    std::uniform_real_distribution<double> speed_mps(5.0, 15.0);
    for (std::size_t i = 0; i < cfg.vehicles; ++i) {
        Node v;
        v.id = "veh-" + std::to_string(i + 1);
        v.kind = NodeKind::Vehicle;
        v.vin = make_vin(1000 + i);
        const double d = dist_m(rng);
        const int lane = static_cast<int>(i % 4);  // N, E, S, W approaches
        const double east = (lane == 1 ? d : lane == 3 ? -d : 0.0);
        const double north = (lane == 0 ? d : lane == 2 ? -d : 0.0);
        v.position = offset_m(cfg.center, east, north);
        v.speed_mps = speed_mps(rng);
        v.acceleration_mps2 = 0.0;
        v.cpu_throttle = throttle_for(v.id);
        v.sensing_range_m = cfg.sensing_range_m;
        sim.add_node(std::move(v));
    }

    // Pre-validated initial records, identical on every replica.
    if (cfg.initial_ledger_records > 0) {
        Ledger initial;
        ParticipantRegistry seeder;
        const Participant& pipeline = seeder.register_participant("genesis-pipeline", Role::Controller);
        std::uniform_real_distribution<double> seed_dist(20.0, 400.0);
        for (std::size_t i = 0; i < cfg.initial_ledger_records; ++i) {
            VehicleClaim claim;
            // The first seeded record reuses a fixed known VIN so ledger
            // fixtures are recognizable; the rest are synthetic.
            claim.vin = (i == 0) ? "1FTWX32L2YEA47477" : make_vin(5000 + i);
            const double d = seed_dist(rng);
            const int lane = static_cast<int>(i % 4);
            claim.gps = offset_m(cfg.center, lane == 1 ? d : lane == 3 ? -d : 0.0,
                                 lane == 0 ? d : lane == 2 ? -d : 0.0);
            claim.trajectory.speed_mps = speed_mps(rng);
            claim.trajectory.acceleration_mps2 = 0.0;
            initial.append_record(claim, pipeline, i);
        }
        sim.seed_ledger(initial);
    }
    return sim;
}

}  // namespace bvn

#endif  // BVN_SCENARIO_HPP
