#ifndef BVN_EXPERIMENTS_HPP
#define BVN_EXPERIMENTS_HPP

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bvn/attack.hpp"
#include "bvn/isig.hpp"
#include "bvn/scenario.hpp"
#include "bvn/snapshot.hpp"

namespace bvn {

struct UnknownSuite : std::invalid_argument {
    explicit UnknownSuite(const std::string& name)
        : std::invalid_argument("unknown experiment suite: " + name) {}
};

/// One measured attempt in a sweep.
struct SweepRow {
    std::string sweep_value;
    std::size_t attempt = 0;
    std::string node;
    std::string outcome;
    double response_ms = 0.0;
};

struct SuiteResult {
    std::string name;
    std::vector<SweepRow> rows;
    // Mean response per sweep value, in sweep order.
    std::vector<std::pair<std::string, double>> means;
};

inline std::string format_response_ms(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

inline std::string suite_csv(const SuiteResult& result) {
    std::ostringstream out;
    out << "sweep_value,attempt,node,outcome,response_ms\n";
    for (const auto& r : result.rows) {
        out << r.sweep_value << "," << r.attempt << "," << r.node << "," << r.outcome << ","
            << format_response_ms(r.response_ms) << "\n";
    }
    return out.str();
}

inline std::string suite_summary_json(const SuiteResult& result) {
    nlohmann::ordered_json j;
    j["suite"] = result.name;
    nlohmann::ordered_json means = nlohmann::ordered_json::array();
    for (const auto& [value, mean] : result.means) {
        means.push_back({{"sweep_value", value}, {"mean_response_ms", mean}});
    }
    j["means"] = means;
    j["samples"] = result.rows.size();
    return j.dump(2) + "\n";
}

namespace detail {

inline void append_outcome_rows(SuiteResult& result, const std::string& sweep_value,
                                const AttackOutcome& outcome) {
    for (const auto& a : outcome.attempts) {
        result.rows.push_back({sweep_value, a.attempt, a.node, a.outcome, a.response_ms});
    }
    result.means.emplace_back(sweep_value, outcome.summary.mean_ms);
}

inline Simulation suite_sim(std::uint64_t seed, std::size_t initial_records,
                            const NetworkProfile& profile, ThrottleModel model,
                            const std::map<std::string, double>& throttles = {}) {
    ScenarioConfig cfg;
    cfg.seed = seed;
    cfg.initial_ledger_records = initial_records;
    cfg.vehicles = 8;
    cfg.profile = profile;
    cfg.throttle_model = model;
    cfg.throttles = throttles;
    return build_topology(cfg);
}

inline AttackSpec eight_tamper_attacks(const std::string& attacker) {
    AttackSpec spec;
    spec.kind = AttackKind::ModifyRecord;
    spec.attacker_ids = {attacker};
    spec.target_record_id = 1;
    spec.repetitions = 8;
    return spec;
}

}  // namespace detail

/// Participant sweep: initial ledger records 20..320, 8 modify attacks
/// each, response measured at the default vehicle.
inline SuiteResult run_participants_suite(std::uint64_t seed, ThrottleModel model) {
    SuiteResult result{"participants", {}, {}};
    for (std::size_t records : {20, 40, 80, 160, 320}) {
        Simulation sim = detail::suite_sim(seed, records, wifi_profile(), model);
        AttackOutcome outcome = tamper_ledger(sim, detail::eight_tamper_attacks("veh-1"));
        detail::append_outcome_rows(result, std::to_string(records), outcome);
    }
    return result;
}

/// Network sweep: same 8 attacks across the three connection profiles.
inline SuiteResult run_network_suite(std::uint64_t seed, ThrottleModel model) {
    SuiteResult result{"network", {}, {}};
    for (const auto& profile : {wifi_profile(), fast3g_profile(), slow3g_profile()}) {
        Simulation sim = detail::suite_sim(seed, 20, profile, model);
        AttackOutcome outcome = tamper_ledger(sim, detail::eight_tamper_attacks("veh-1"));
        detail::append_outcome_rows(result, profile.name, outcome);
    }
    return result;
}

/// CPU sweep: throttle the attacking node 1x/4x/6x.
inline SuiteResult run_cpu_suite(std::uint64_t seed, ThrottleModel model) {
    SuiteResult result{"cpu", {}, {}};
    for (double throttle : {1.0, 4.0, 6.0}) {
        Simulation sim = detail::suite_sim(seed, 20, wifi_profile(), model, {{"veh-1", throttle}});
        AttackOutcome outcome = tamper_ledger(sim, detail::eight_tamper_attacks("veh-1"));
        char label[16];
        std::snprintf(label, sizeof(label), "%gx", throttle);
        detail::append_outcome_rows(result, label, outcome);
    }
    return result;
}

/// Multi-attack rounds: 1..4 simultaneous attackers, 3 repetitions per
/// round; the summary tracks the default node's mean.
inline SuiteResult run_multiattack_suite(std::uint64_t seed, ThrottleModel model) {
    SuiteResult result{"multiattack", {}, {}};
    const std::vector<std::string> attackers = {"veh-1", "veh-2", "veh-3", "veh-4"};
    for (std::size_t round = 1; round <= 4; ++round) {
        Simulation sim = detail::suite_sim(seed, 20, wifi_profile(), model);
        AttackSpec spec;
        spec.kind = AttackKind::MultiAttacker;
        spec.attacker_ids.assign(attackers.begin(), attackers.begin() + round);
        spec.target_record_id = 1;
        spec.repetitions = 3;
        AttackOutcome outcome = run_multi_attack(sim, spec, round);
        // Per-sweep mean is the default node's mean, as observed in place.
        std::vector<double> default_times;
        std::size_t attempt = 0;
        for (const auto& a : outcome.attempts) {
            result.rows.push_back({std::to_string(round), attempt++, a.node, a.outcome, a.response_ms});
            if (a.node == "veh-1") default_times.push_back(a.response_ms);
        }
        result.means.emplace_back(std::to_string(round), stats_of(default_times).mean_ms);
    }
    return result;
}

/// Single-scenario tamper run: 8 modify attempts plus a chain check.
inline SuiteResult run_tamper_suite(std::uint64_t seed, ThrottleModel model) {
    SuiteResult result{"tamper", {}, {}};
    Simulation sim = detail::suite_sim(seed, 20, wifi_profile(), model);
    AttackOutcome outcome = tamper_ledger(sim, detail::eight_tamper_attacks("veh-1"));
    detail::append_outcome_rows(result, "default", outcome);
    for (const auto& id : sim.node_ids()) {
        if (sim.node(id).ledger.verify_chain().has_value()) {
            throw std::runtime_error("chain verification failed after tamper attempts at " + id);
        }
    }
    return result;
}

inline DemoScenario canonical_demo_scenario(std::uint64_t seed = 0) {
    DemoScenario s;
    s.geometry = four_way_intersection(GpsPoint{-83.7430, 42.2780});
    s.params = PlannerParams{};
    (void)seed;
    // A dense platoon on north plus light traffic on east. The spoofer is
    // physically in the platoon but claims to be queued on east, inflating
    // east demand so the planner shaves green off the loaded approach. The
    // platoon's tail then misses the shortened green and waits out a full
    // extra cycle.
    auto add = [&](std::uint64_t idx, double east, double north, double speed) {
        DemoVehicle v;
        v.truth.vin = make_vin(9000 + idx);
        v.truth.gps = offset_m(s.geometry.center, east, north);
        v.truth.trajectory = {speed, 0.0};
        s.truthful.push_back(v);
    };
    for (std::uint64_t i = 0; i < 6; ++i) add(i, 0.0, 300.0 + 10.0 * static_cast<double>(i), 10.0);
    for (std::uint64_t i = 0; i < 2; ++i) add(100 + i, 100.0 + 100.0 * static_cast<double>(i), 0.0, 10.0);
    s.attacker_truth.vin = make_vin(9500);
    s.attacker_truth.gps = offset_m(s.geometry.center, 0.0, 60.0);  // actually on north approach
    s.attacker_truth.trajectory = {10.0, 0.0};
    s.spoofed_claim = s.attacker_truth;
    s.spoofed_claim.gps = offset_m(s.geometry.center, 200.0, 0.0);  // claims to sit queued on east
    s.spoofed_claim.trajectory = {0.2, 0.0};                        // below the stop threshold
    return s;
}

inline nlohmann::ordered_json delay_metrics_json(const DelayMetrics& m) {
    nlohmann::ordered_json j;
    j["total_delay_s"] = m.total_delay_s;
    j["vehicles"] = m.per_vehicle.size();
    nlohmann::ordered_json q = nlohmann::ordered_json::object();
    for (const auto& [approach, depth] : m.max_queue) q[approach] = depth;
    j["max_queue"] = q;
    return j;
}

inline std::string demo_report_json(const DemoReport& report) {
    nlohmann::ordered_json j;
    j["baseline"] = delay_metrics_json(report.baseline);
    j["unprotected"] = delay_metrics_json(report.unprotected_run);
    j["protected"] = delay_metrics_json(report.protected_run);
    j["spoof_verdict"] = decision_name(report.spoof_verdict.decision);
    nlohmann::ordered_json bl = nlohmann::ordered_json::array();
    for (const auto& [vin, entry] : report.blacklist.entries()) {
        bl.push_back({{"vin", vin},
                      {"first_offense_time_ms", entry.first_offense_time_ms},
                      {"offense_count", entry.offense_count}});
    }
    j["blacklist"] = bl;
    return j.dump(2) + "\n";
}

inline std::string demo_delays_csv(const DemoReport& report) {
    std::ostringstream out;
    out << "mode,vin,approach,arrival_s,discharge_s,delay_s\n";
    auto emit = [&](const char* mode, const DelayMetrics& m) {
        for (const auto& d : m.per_vehicle) {
            out << mode << "," << d.vin << "," << d.approach << "," << format_response_ms(d.arrival_s)
                << "," << format_response_ms(d.discharge_s) << "," << format_response_ms(d.delay_s)
                << "\n";
        }
    };
    emit("baseline", report.baseline);
    emit("unprotected", report.unprotected_run);
    emit("protected", report.protected_run);
    return out.str();
}

inline SuiteResult run_suite(const std::string& name, std::uint64_t seed, ThrottleModel model) {
    if (name == "participants") return run_participants_suite(seed, model);
    if (name == "network") return run_network_suite(seed, model);
    if (name == "cpu") return run_cpu_suite(seed, model);
    if (name == "multiattack") return run_multiattack_suite(seed, model);
    if (name == "tamper") return run_tamper_suite(seed, model);
    throw UnknownSuite(name);
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << content;
}

inline void write_suite_outputs(const SuiteResult& result, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    write_text_file(out_dir / (result.name + ".csv"), suite_csv(result));
    write_text_file(out_dir / (result.name + "_summary.json"), suite_summary_json(result));
}

// ---------------------------------------------------------------------------
// Whole-scenario run: trace + outcome CSV + summary JSON + ledger snapshot.

struct ScenarioRunResult {
    SimulationTrace trace;
    std::vector<AttackOutcome> outcomes;
    Ledger final_ledger;  // controller replica at quiescence
    std::size_t final_ledger_size = 0;
    std::size_t final_blacklist_size = 0;
};

inline ScenarioRunResult run_scenario(const ScenarioConfig& cfg) {
    Simulation sim = build_topology(cfg);
    ScenarioRunResult result;
    for (const auto& attack : cfg.attacks) {
        result.outcomes.push_back(run_attack(sim, attack));
    }
    sim.run(cfg.until_ms.value_or(std::numeric_limits<double>::infinity()));
    result.trace = sim.trace();
    const Node& ctrl = sim.node(sim.controller_id());
    result.final_ledger = ctrl.ledger;
    result.final_ledger_size = ctrl.ledger.size();
    result.final_blacklist_size = ctrl.blacklist.size();
    return result;
}

inline std::string outcomes_csv(const std::vector<AttackOutcome>& outcomes) {
    std::ostringstream out;
    out << "attack,round,attempt,node,verdict,response_ms\n";
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        for (const auto& a : outcomes[i].attempts) {
            out << i << "," << a.round << "," << a.attempt << "," << a.node << "," << a.outcome
                << "," << format_response_ms(a.response_ms) << "\n";
        }
    }
    return out.str();
}

inline std::string scenario_summary_json(const ScenarioConfig& cfg, const ScenarioRunResult& result) {
    nlohmann::ordered_json j;
    j["seed"] = cfg.seed;
    j["profile"] = cfg.profile.name;
    j["events"] = result.trace.events.size();
    j["samples"] = result.trace.samples.size();
    j["final_ledger_size"] = result.final_ledger_size;
    j["final_blacklist_size"] = result.final_blacklist_size;
    nlohmann::ordered_json attacks = nlohmann::ordered_json::array();
    for (const auto& o : result.outcomes) {
        attacks.push_back({{"attempts", o.attempts.size()},
                           {"mean_response_ms", o.summary.mean_ms},
                           {"min_response_ms", o.summary.min_ms},
                           {"max_response_ms", o.summary.max_ms}});
    }
    j["attacks"] = attacks;
    return j.dump(2) + "\n";
}

inline void write_scenario_outputs(const ScenarioConfig& cfg, const ScenarioRunResult& result,
                                   const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    write_text_file(out_dir / "trace.txt", trace_to_string(result.trace));
    write_text_file(out_dir / "outcomes.csv", outcomes_csv(result.outcomes));
    write_text_file(out_dir / "summary.json", scenario_summary_json(cfg, result));
    write_snapshot(result.final_ledger, (out_dir / "ledger_snapshot.txt").string());
}

}  // namespace bvn

#endif  // BVN_EXPERIMENTS_HPP
