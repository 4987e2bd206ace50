// Acceptance suite: one test case per criterion, each printing a PASS
// line when its checks hold. Run via ctest or directly.

#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "bvn/attack.hpp"
#include "bvn/experiments.hpp"
#include "bvn/isig.hpp"
#include "bvn/snapshot.hpp"

using namespace bvn;

namespace {

void pass(int n, const char* what) {
    std::printf("[acceptance] criterion %d PASS: %s\n", n, what);
    std::fflush(stdout);
}

VehicleClaim fixture_claim(int i) {
    VehicleClaim c;
    c.vin = make_vin(7000 + static_cast<std::uint64_t>(i));
    c.gps = {-83.74 + 0.0001 * i, 42.28};
    c.trajectory = {10.0 + 0.1 * i, 0.0};
    return c;
}

Ledger fixture_ledger(int n) {
    ParticipantRegistry reg;
    const Participant& pipeline = reg.register_participant("pipeline", Role::Controller);
    Ledger ledger;
    for (int i = 0; i < n; ++i) ledger.append_record(fixture_claim(i), pipeline, 50 * i);
    return ledger;
}

}  // namespace

TEST_CASE("criterion 1: immutability under randomized modify attempts") {
    ParticipantRegistry reg;
    std::vector<const Participant*> actors = {
        &reg.register_participant("ctrl-1", Role::Controller),
        &reg.register_participant("rsu-1", Role::RSU),
        &reg.register_participant("veh-1", Role::Vehicle),
    };
    std::mt19937_64 rng(31337);
    std::size_t attempts = 0;
    for (int size : {0, 1, 5, 20, 80}) {
        Ledger ledger = fixture_ledger(size);
        const Digest root_before = ledger.merkle_root();
        const std::size_t len_before = ledger.size();
        for (int i = 0; i < 250; ++i) {
            const Participant& actor = *actors[rng() % actors.size()];
            VehicleInfo forged;
            forged.vin = make_vin(rng() % 100000);
            forged.gps = {-83.0, 42.0};
            ModifyRejection rej =
                ledger.attempt_modify(rng() % 200, forged, actor, static_cast<std::uint64_t>(i));
            REQUIRE(!rej.warning.empty());
            REQUIRE(ledger.size() == len_before);
            REQUIRE(ledger.merkle_root() == root_before);
            REQUIRE(!ledger.verify_chain().has_value());
            ++attempts;
        }
    }
    REQUIRE(attempts >= 1000);
    pass(1, "0 accepted modifications in 1250 randomized attempts, chain intact throughout");
}

TEST_CASE("criterion 2: consensus decision-table equivalence") {
    const std::string vin = make_vin(777);
    std::size_t checked = 0;
    for (bool strict : {false, true}) {
        ConsensusPolicy policy;
        policy.strict_unverifiable_blacklist = strict;
        for (std::size_t n = 0; n <= 4; ++n) {
            for (std::size_t kinds = 0; kinds < (1u << n); ++kinds) {
                for (std::size_t matches = 0; matches < (1u << n); ++matches) {
                    for (bool pre : {false, true}) {
                        BroadcastRecord src;
                        src.claimed = {vin, {-83.74, 42.28}, {10.0, 0.0}};
                        src.origin_node = "veh-x";
                        src.broadcast_time_ms = 42;
                        ReferenceSet refs;
                        std::size_t rsu = 0, wit = 0, ok = 0, bad = 0;
                        for (std::size_t i = 0; i < n; ++i) {
                            ReferenceObservation r;
                            r.observer = "obs-" + std::to_string(i);
                            const bool is_rsu = (kinds >> i) & 1;
                            const bool is_match = (matches >> i) & 1;
                            r.observer_kind = is_rsu ? ObserverKind::RSU : ObserverKind::WitnessVehicle;
                            r.observed_vin = vin;
                            r.observed_gps = src.claimed.gps;
                            r.observed_speed_mps = src.claimed.trajectory.speed_mps;
                            r.observed_acceleration_mps2 = 0.0;
                            if (!is_match) r.observed_gps.latitude_deg += 0.01;
                            refs.observations.push_back(r);
                            (is_rsu ? rsu : wit) += 1;
                            (is_match ? ok : bad) += 1;
                        }
                        Blacklist bl;
                        if (pre) bl.add(vin, 1);
                        Decision expected;
                        if (pre) expected = Decision::RejectedBlacklisted;
                        else if (rsu < 1 || wit < 1) expected = Decision::RejectedUnverifiable;
                        else if (ok > bad) expected = Decision::Accepted;
                        else expected = Decision::RejectedSpoof;
                        REQUIRE(validate(src, refs, bl, policy).decision == expected);
                        ++checked;
                    }
                }
            }
        }
    }
    std::ostringstream msg;
    msg << "validate matches the brute-force oracle on " << checked << " exhaustive cases";
    pass(2, msg.str().c_str());
}

TEST_CASE("criterion 3: participant-count flatness") {
    SuiteResult calibrated = run_participants_suite(1, ThrottleModel::Calibrated);
    REQUIRE(calibrated.means.size() == 5);
    for (const auto& [value, mean] : calibrated.means) {
        REQUIRE(mean == 39.0);
    }
    SuiteResult linear = run_participants_suite(1, ThrottleModel::Linear);
    for (const auto& [value, mean] : linear.means) {
        REQUIRE(mean == linear.means.front().second);
    }
    pass(3, "mean response exactly 39 ms at 20/40/80/160/320 records; flat under both models");
}

TEST_CASE("criterion 4: network-profile flatness") {
    for (auto model : {ThrottleModel::Calibrated, ThrottleModel::Linear}) {
        SuiteResult result = run_network_suite(1, model);
        REQUIRE(result.means.size() == 3);
        for (const auto& [value, mean] : result.means) {
            REQUIRE(mean == result.means.front().second);
        }
    }
    pass(4, "identical rejection-response means across wifi, fast-3g, and slow-3g");
}

TEST_CASE("criterion 5: cpu throttle scaling") {
    SuiteResult calibrated = run_cpu_suite(1, ThrottleModel::Calibrated);
    REQUIRE(calibrated.means.size() == 3);
    REQUIRE(calibrated.means[0].second == 39.0);
    REQUIRE(calibrated.means[1].second == 74.0);
    REQUIRE(calibrated.means[2].second == 118.0);

    SuiteResult linear = run_cpu_suite(1, ThrottleModel::Linear);
    REQUIRE(linear.means[0].second == 39.0);
    REQUIRE(linear.means[1].second == 4.0 * linear.means[0].second);
    REQUIRE(linear.means[2].second == 6.0 * linear.means[0].second);
    REQUIRE(linear.means[0].second < linear.means[1].second);
    REQUIRE(linear.means[1].second < linear.means[2].second);
    pass(5, "calibrated means are {39, 74, 118} ms at 1x/4x/6x; linear model scales proportionally");
}

TEST_CASE("criterion 6: multi-attack independence") {
    SuiteResult result = run_multiattack_suite(1, ThrottleModel::Calibrated);
    REQUIRE(result.means.size() == 4);
    for (const auto& [round, mean] : result.means) {
        REQUIRE(mean == 39.0);
    }
    pass(6, "default node's mean response identical (39 ms) across 1-4 simultaneous attackers");
}

TEST_CASE("criterion 7: end-to-end spoof defense") {
    ScenarioConfig cfg;
    cfg.seed = 5;
    cfg.vehicles = 12;
    cfg.initial_ledger_records = 20;
    Simulation sim = build_topology(cfg);
    const std::string attacker_vin = sim.node("veh-1").vin;

    // At least one RSU and one witness must be in sensing range.
    REQUIRE(!sim.gather_references(sim.node("veh-1")).observations.empty());

    AttackSpec spec;
    spec.kind = AttackKind::SpoofBroadcast;
    spec.attacker_ids = {"veh-1"};
    spec.falsified.gps_offset_east_m = 500.0;  // far beyond the 5 m tolerance
    AttackOutcome first = spoof_broadcast(sim, spec);
    REQUIRE(!first.attempts.empty());
    for (const auto& a : first.attempts) REQUIRE(a.outcome == "RejectedSpoof");
    for (const auto& id : sim.node_ids()) {
        REQUIRE(sim.node(id).blacklist.contains(attacker_vin));
        REQUIRE(sim.node(id).ledger.size() == 20);
    }

    AttackOutcome second = spoof_broadcast(sim, spec);
    REQUIRE(!second.attempts.empty());
    for (const auto& a : second.attempts) REQUIRE(a.outcome == "RejectedBlacklisted");
    for (const auto& id : sim.node_ids()) REQUIRE(sim.node(id).ledger.size() == 20);
    pass(7, "spoof rejected and blacklisted on every replica; repeat broadcast short-circuits");
}

TEST_CASE("criterion 8: signal-control defense ordering") {
    DemoReport report = congestion_attack_demo(canonical_demo_scenario());
    REQUIRE(report.spoof_verdict.decision == Decision::RejectedSpoof);
    REQUIRE(report.protected_table == report.baseline_table);
    REQUIRE(report.protected_run.total_delay_s == report.baseline.total_delay_s);
    REQUIRE(report.unprotected_run.total_delay_s > report.baseline.total_delay_s);
    std::ostringstream msg;
    msg << "protected delay equals baseline (" << report.baseline.total_delay_s
        << " s), unprotected is worse (" << report.unprotected_run.total_delay_s << " s)";
    pass(8, msg.str().c_str());
}

TEST_CASE("criterion 9: deterministic suite reruns") {
    for (const char* name : {"participants", "network", "cpu", "multiattack", "tamper"}) {
        SuiteResult a = run_suite(name, 12345, ThrottleModel::Calibrated);
        SuiteResult b = run_suite(name, 12345, ThrottleModel::Calibrated);
        REQUIRE(suite_csv(a) == suite_csv(b));
        REQUIRE(suite_summary_json(a) == suite_summary_json(b));
    }
#ifdef CVBENCH_PATH
    // Same check through the CLI, comparing output files byte for byte.
    auto read_file = [](const std::string& path) {
        std::ifstream f(path, std::ios::binary);
        std::ostringstream buf;
        buf << f.rdbuf();
        return buf.str();
    };
    const std::string base = "acceptance_cli_out";
    for (const char* dir : {"a", "b"}) {
        const std::string cmd = std::string(CVBENCH_PATH) + " suite cpu --seed 9 --out " + base +
                                "_" + dir + " > /dev/null";
        REQUIRE(std::system(cmd.c_str()) == 0);
    }
    REQUIRE(read_file(base + "_a/cpu.csv") == read_file(base + "_b/cpu.csv"));
    REQUIRE(read_file(base + "_a/cpu_summary.json") == read_file(base + "_b/cpu_summary.json"));
#endif
    pass(9, "every suite rerun with the same seed produced byte-identical outputs");
}

TEST_CASE("criterion 10: tamper evidence on snapshot fixtures") {
    std::mt19937_64 rng(4242);
    std::size_t detected = 0;
    for (int trial = 0; trial < 100; ++trial) {
        Ledger ledger = snapshot_from_string(snapshot_to_string(fixture_ledger(24)));
        const std::size_t index = rng() % 24;
        const int target = static_cast<int>(rng() % 6);
        const int bit = static_cast<int>(rng() % 64);
        ledger.inject_corruption(index, [&](LedgerEntry& e) {
            auto flip_double = [&](double& v) {
                std::uint64_t bits;
                std::memcpy(&bits, &v, 8);
                bits ^= (1ull << (bit % 52));  // stay in the mantissa, keep the value finite
                std::memcpy(&v, &bits, 8);
            };
            switch (target) {
                case 0: flip_double(e.payload.gps.longitude_deg); break;
                case 1: flip_double(e.payload.gps.latitude_deg); break;
                case 2: flip_double(e.payload.trajectory.speed_mps); break;
                case 3: e.payload.timestamp_ms ^= (1ull << (bit % 40)); break;
                case 4: e.prev_hash[bit % 32] ^= static_cast<std::uint8_t>(1u << (bit % 8)); break;
                default: e.entry_hash[bit % 32] ^= static_cast<std::uint8_t>(1u << (bit % 8)); break;
            }
        });
        auto bad = ledger.verify_chain();
        REQUIRE(bad.has_value());
        REQUIRE(*bad <= index);
        ++detected;
    }
    REQUIRE(detected == 100);
    pass(10, "100/100 random single-bit corruptions detected at or before the corrupted index");
}
