#include <doctest.h>

#include "bvn/attack.hpp"
#include "bvn/netsim.hpp"
#include "bvn/scenario.hpp"

using namespace bvn;

namespace {

ScenarioConfig default_config() {
    ScenarioConfig cfg;
    cfg.seed = 42;
    cfg.vehicles = 20;
    cfg.rsus = 4;
    cfg.initial_ledger_records = 20;
    return cfg;
}

std::size_t count_events(const SimulationTrace& trace, EventKind kind) {
    std::size_t n = 0;
    for (const auto& e : trace.events) {
        if (e.kind == kind) ++n;
    }
    return n;
}

}  // namespace

TEST_CASE("transmission delay arithmetic") {
    // 1 KB over 60 Mbps with 5 ms latency: 5 + 8192/60000 ms.
    CHECK(transmission_delay_ms(wifi_profile(), 1024) ==
          doctest::Approx(5.0 + 8192.0 / 60000.0).epsilon(1e-9));
    // 1 KB over slow 3G: 200 + 8192/400 = 220.48 ms.
    CHECK(transmission_delay_ms(slow3g_profile(), 1024) == doctest::Approx(220.48).epsilon(1e-9));

    NetworkProfile ideal{"ideal", 1e15, 0.0};
    CHECK(transmission_delay_ms(ideal, 1024) >= 0.0);
    CHECK(transmission_delay_ms(ideal, 1024) < 1e-3);
}

TEST_CASE("processing delay models") {
    CHECK(processing_delay_ms(39.0, 1.0, ThrottleModel::Linear) == 39.0);
    CHECK(processing_delay_ms(39.0, 4.0, ThrottleModel::Linear) == 156.0);
    CHECK(processing_delay_ms(39.0, 1.0, ThrottleModel::Calibrated) == 39.0);
    CHECK(processing_delay_ms(39.0, 4.0, ThrottleModel::Calibrated) == 74.0);
    CHECK(processing_delay_ms(39.0, 6.0, ThrottleModel::Calibrated) == 118.0);
    CHECK_THROWS_AS(processing_delay_ms(0.0, 1.0, ThrottleModel::Linear), std::invalid_argument);
    CHECK_THROWS_AS(processing_delay_ms(39.0, 0.5, ThrottleModel::Linear), std::invalid_argument);

    // Monotone in the throttle factor under both models.
    for (auto model : {ThrottleModel::Linear, ThrottleModel::Calibrated}) {
        double prev = 0.0;
        for (double t = 1.0; t <= 10.0; t += 0.5) {
            const double d = processing_delay_ms(39.0, t, model);
            CHECK(d >= prev);
            prev = d;
        }
    }
}

TEST_CASE("topology construction") {
    SUBCASE("counts and seeded ledger") {
        Simulation sim = build_topology(default_config());
        CHECK(sim.node_count() == 25);
        for (const auto& id : sim.node_ids()) {
            CHECK(sim.node(id).ledger.size() == 20);
            CHECK(!sim.node(id).ledger.verify_chain().has_value());
        }
        // Fixture VIN appears as record 1.
        CHECK(sim.node("ctrl-1").ledger.read_records().front().payload.vin ==
              "1FTWX32L2YEA47477");
    }
    SUBCASE("zero vehicles, empty ledger") {
        ScenarioConfig cfg = default_config();
        cfg.vehicles = 0;
        cfg.initial_ledger_records = 0;
        Simulation sim = build_topology(cfg);
        CHECK(sim.node_count() == 5);
        CHECK(sim.node("ctrl-1").ledger.size() == 0);
    }
    SUBCASE("duplicate node id rejected") {
        Simulation sim = build_topology(default_config());
        Node dup;
        dup.id = "veh-1";
        CHECK_THROWS_WITH_AS(sim.add_node(dup), doctest::Contains("veh-1"), std::invalid_argument);
    }
    SUBCASE("second controller rejected") {
        Simulation sim = build_topology(default_config());
        Node ctrl2;
        ctrl2.id = "ctrl-2";
        ctrl2.kind = NodeKind::Controller;
        CHECK_THROWS_AS(sim.add_node(ctrl2), std::invalid_argument);
    }
}

TEST_CASE("broadcast pipeline") {
    Simulation sim = build_topology(default_config());

    SUBCASE("one truthful broadcast grows every replica by one") {
        sim.broadcast("veh-1", sim.node("veh-1").truthful_claim());
        sim.run();
        CHECK(count_events(sim.trace(), EventKind::Broadcast) == 1);
        CHECK(count_events(sim.trace(), EventKind::Deliver) == 24);
        for (const auto& id : sim.node_ids()) {
            CHECK(sim.node(id).ledger.size() == 21);
        }
        // Every validator reached the same verdict.
        for (const auto& v : sim.trace().verdicts) {
            CHECK(v.verdict.decision == Decision::Accepted);
        }
        CHECK(count_events(sim.trace(), EventKind::ValidateDone) == 24);
        CHECK(count_events(sim.trace(), EventKind::ReplicateEntry) == 25);
    }
    SUBCASE("offline origin cannot broadcast") {
        sim.set_node_online("veh-1", false);
        CHECK_THROWS_AS(sim.broadcast("veh-1", sim.node("veh-1").truthful_claim()), OriginOffline);
    }
    SUBCASE("same-tick broadcasts deliver in scheduling order") {
        sim.broadcast("veh-1", sim.node("veh-1").truthful_claim(), 10.0);
        sim.broadcast("veh-2", sim.node("veh-2").truthful_claim(), 10.0);
        sim.run();
        // First ValidateDone everywhere concerns veh-1's VIN.
        for (const auto& e : sim.trace().events) {
            if (e.kind == EventKind::ValidateDone) {
                CHECK(e.detail.find(sim.node("veh-1").vin) != std::string::npos);
                break;
            }
        }
        for (const auto& id : sim.node_ids()) {
            CHECK(sim.node(id).ledger.size() == 22);
        }
    }
}

TEST_CASE("empty event queue quiesces immediately") {
    ScenarioConfig cfg = default_config();
    cfg.initial_ledger_records = 0;
    Simulation sim = build_topology(cfg);
    sim.run();
    CHECK(sim.trace().events.empty());
    CHECK(sim.quiescent());
}

TEST_CASE("determinism: identical config and seed give byte-identical traces") {
    auto run_once = [] {
        Simulation sim = build_topology(default_config());
        sim.broadcast("veh-3", sim.node("veh-3").truthful_claim(), 5.0);
        VehicleClaim spoof = sim.node("veh-4").truthful_claim();
        spoof.gps = offset_m(spoof.gps, 500.0, 0.0);
        sim.broadcast("veh-4", spoof, 5.0);
        sim.run();
        return trace_to_string(sim.trace());
    };
    CHECK(run_once() == run_once());
}

TEST_CASE("validation locality: response time depends only on the node's own cost") {
    for (const auto& profile : {wifi_profile(), fast3g_profile(), slow3g_profile()}) {
        for (std::size_t vehicles : {10, 40}) {
            ScenarioConfig cfg = default_config();
            cfg.profile = profile;
            cfg.vehicles = vehicles;
            cfg.throttles = {{"veh-2", 4.0}};
            Simulation sim = build_topology(cfg);
            sim.broadcast("veh-1", sim.node("veh-1").truthful_claim());
            sim.run();
            for (const auto& s : sim.trace().samples) {
                const Node& n = sim.node(s.node);
                CHECK(s.response_ms() ==
                      doctest::Approx(processing_delay_ms(39.0, n.cpu_throttle,
                                                          ThrottleModel::Calibrated))
                          .epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("offline node isolation and catch-up") {
    Simulation sim = build_topology(default_config());
    sim.set_node_online("veh-2", false);

    SUBCASE("unknown node throws, online no-op holds") {
        CHECK_THROWS_AS(sim.set_node_online("ghost", true), UnknownNode);
        sim.set_node_online("veh-3", true);  // already online
        CHECK(sim.node("veh-3").online);
    }
    SUBCASE("local tamper while offline never leaks; reconnect restores") {
        sim.node("veh-2").ledger.inject_corruption(
            0, [](LedgerEntry& e) { e.payload.trajectory.speed_mps = 999.0; });
        sim.broadcast("veh-1", sim.node("veh-1").truthful_claim());
        sim.run();
        // Other replicas unaffected and one entry ahead.
        CHECK(sim.node("ctrl-1").ledger.size() == 21);
        CHECK(!sim.node("ctrl-1").ledger.verify_chain().has_value());
        CHECK(sim.node("veh-2").ledger.verify_chain().has_value());

        sim.set_node_online("veh-2", true);
        CHECK(!sim.node("veh-2").ledger.verify_chain().has_value());
        CHECK(sim.node("veh-2").ledger == sim.node("ctrl-1").ledger);
    }
}

TEST_CASE("replica agreement after quiescence") {
    Simulation sim = build_topology(default_config());
    sim.broadcast("veh-1", sim.node("veh-1").truthful_claim(), 0.0);
    VehicleClaim spoof = sim.node("veh-5").truthful_claim();
    spoof.trajectory.speed_mps += 20.0;
    sim.broadcast("veh-5", spoof, 100.0);
    sim.broadcast("veh-6", sim.node("veh-6").truthful_claim(), 200.0);
    sim.run();
    REQUIRE(sim.quiescent());
    const Node& ctrl = sim.node("ctrl-1");
    for (const auto& id : sim.node_ids()) {
        CHECK(sim.node(id).ledger == ctrl.ledger);
        CHECK(sim.node(id).blacklist == ctrl.blacklist);
    }
    CHECK(ctrl.blacklist.contains(sim.node("veh-5").vin));
    CHECK(ctrl.ledger.size() == 22);
}

TEST_CASE("scenario config parsing errors carry field paths") {
    CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), ConfigError);

    nlohmann::json j;
    j["profile"] = "warp-drive";
    CHECK_THROWS_WITH_AS(parse_scenario(j), doctest::Contains("profile"), ConfigError);

    nlohmann::json j2;
    j2["base_validation_cost_ms"] = -1.0;
    CHECK_THROWS_AS(parse_scenario(j2), ConfigError);

    nlohmann::json j3;
    j3["policy"] = {{"min_rsu_refs", 0}, {"min_witness_refs", 0}};
    CHECK_THROWS_WITH_AS(parse_scenario(j3), doctest::Contains("policy"), ConfigError);
}
