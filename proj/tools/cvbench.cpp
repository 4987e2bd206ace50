// cvbench: scenario runner, experiment suites, and ledger verification for
// the blockchain-backed connected-vehicle defense library.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bvn/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitVerifyFailure = 3;

int cmd_run(const std::string& config_path, const std::string& out_dir) {
    bvn::ScenarioConfig cfg = bvn::load_scenario(config_path);
    bvn::ScenarioRunResult result = bvn::run_scenario(cfg);
    bvn::write_scenario_outputs(cfg, result, out_dir);
    std::cout << "scenario ok: " << result.trace.events.size() << " events, ledger size "
              << result.final_ledger_size << ", blacklist size " << result.final_blacklist_size
              << "\n";
    std::cout << "outputs in " << out_dir << "\n";
    return kExitOk;
}

int cmd_suite(const std::string& name, std::uint64_t seed, const std::string& out_dir,
              const std::string& throttle_model) {
    const bvn::ThrottleModel model = bvn::throttle_model_by_name(throttle_model);
    if (name == "isig-demo") {
        bvn::DemoReport report = bvn::congestion_attack_demo(bvn::canonical_demo_scenario(seed));
        std::filesystem::create_directories(out_dir);
        bvn::write_text_file(std::filesystem::path(out_dir) / "isig_demo.json",
                             bvn::demo_report_json(report));
        bvn::write_text_file(std::filesystem::path(out_dir) / "isig_demo_delays.csv",
                             bvn::demo_delays_csv(report));
        std::printf("baseline delay %.3f s, unprotected %.3f s, protected %.3f s\n",
                    report.baseline.total_delay_s, report.unprotected_run.total_delay_s,
                    report.protected_run.total_delay_s);
        return kExitOk;
    }
    bvn::SuiteResult result = bvn::run_suite(name, seed, model);
    bvn::write_suite_outputs(result, out_dir);
    for (const auto& [value, mean] : result.means) {
        std::printf("%s %s mean %.3f ms\n", name.c_str(), value.c_str(), mean);
    }
    return kExitOk;
}

int cmd_verify(const std::string& snapshot_path) {
    bvn::Ledger ledger = bvn::read_snapshot(snapshot_path);
    auto bad = ledger.verify_chain();
    if (bad.has_value()) {
        std::cout << "corrupt: first bad index " << *bad << " (record_id " << (*bad + 1) << ")\n";
        return kExitVerifyFailure;
    }
    std::cout << (ledger.size() == 0 ? "ok (empty)" : "ok") << "\n";
    return kExitOk;
}

int cmd_isig_demo(const std::string& config_path, const std::string& out_dir) {
    bvn::DemoScenario scenario = bvn::canonical_demo_scenario();
    if (!config_path.empty()) {
        bvn::ScenarioConfig cfg = bvn::load_scenario(config_path);
        scenario.policy = cfg.policy;
        scenario.geometry.center = cfg.center;
        scenario = bvn::canonical_demo_scenario(cfg.seed);
        scenario.policy = cfg.policy;
    }
    bvn::DemoReport report = bvn::congestion_attack_demo(scenario);
    std::filesystem::create_directories(out_dir);
    bvn::write_text_file(std::filesystem::path(out_dir) / "isig_demo.json",
                         bvn::demo_report_json(report));
    bvn::write_text_file(std::filesystem::path(out_dir) / "isig_demo_delays.csv",
                         bvn::demo_delays_csv(report));
    std::printf("baseline delay %.3f s, unprotected %.3f s, protected %.3f s, spoof verdict %s\n",
                report.baseline.total_delay_s, report.unprotected_run.total_delay_s,
                report.protected_run.total_delay_s,
                bvn::decision_name(report.spoof_verdict.decision));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Connected-vehicle blockchain defense benchmark driver"};
    app.require_subcommand(1);

    std::string config_path;
    std::string snapshot_path;
    std::string suite_name;
    std::string out_dir = "out";
    std::string throttle_model = "calibrated";
    std::uint64_t seed = 0;

    auto* run = app.add_subcommand("run", "Run a scenario config and write trace/report files");
    run->add_option("config", config_path, "Scenario config file (JSON)")
        ->required()
        ->envname("BVN_CONFIG");
    run->add_option("--out", out_dir, "Output directory")->envname("BVN_OUT");

    auto* suite = app.add_subcommand("suite", "Run an experiment suite "
                                              "(participants|network|cpu|multiattack|tamper|isig-demo)");
    suite->add_option("name", suite_name, "Suite name")->required();
    suite->add_option("--seed", seed, "Simulation seed")->envname("BVN_SEED");
    suite->add_option("--out", out_dir, "Output directory")->envname("BVN_OUT");
    suite->add_option("--throttle-model", throttle_model, "linear or calibrated")
        ->envname("BVN_THROTTLE_MODEL");

    auto* verify = app.add_subcommand("verify", "Verify a ledger snapshot's hash chain");
    verify->add_option("snapshot", snapshot_path, "Snapshot file")
        ->required()
        ->envname("BVN_SNAPSHOT");

    auto* demo = app.add_subcommand("isig-demo", "Protected vs. unprotected signal-control comparison");
    demo->add_option("config", config_path, "Optional scenario config")->envname("BVN_CONFIG");
    demo->add_option("--out", out_dir, "Output directory")->envname("BVN_OUT");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, out_dir);
        if (suite->parsed()) return cmd_suite(suite_name, seed, out_dir, throttle_model);
        if (verify->parsed()) return cmd_verify(snapshot_path);
        if (demo->parsed()) return cmd_isig_demo(config_path, out_dir);
    } catch (const bvn::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const bvn::SnapshotParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const bvn::UnknownSuite& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
