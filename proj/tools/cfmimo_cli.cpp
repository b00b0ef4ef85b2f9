#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cfmimo/config.hpp"
#include "cfmimo/errors.hpp"
#include "cfmimo/selftest.hpp"
#include "cfmimo/sim.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Options {
    std::string config_path;
    std::optional<std::string> strategy;
    std::optional<std::string> threshold_db;
    std::optional<std::string> speed_kmh;
    std::optional<std::string> speeds;
    std::optional<std::string> setups;
    std::optional<std::string> seed;
    std::optional<std::string> parallelism;
    std::optional<std::string> n_mc;
    std::vector<std::string> settings;
    std::string out;
    std::string events_path;
    std::string ledger_path;
};

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--config", o.config_path, "Configuration file (default: $CFMIMO_CONFIG)");
    cmd->add_option("--set", o.settings, "Override any configuration key, as key=value");
    cmd->add_option("--seed", o.seed, "Campaign seed");
    cmd->add_option("--setups", o.setups, "Number of setups");
    cmd->add_option("--n-mc", o.n_mc, "Monte-Carlo draws per statistics epoch");
    cmd->add_option("--out", o.out, "Output CSV path (default: stdout)");
}

cfmimo::SimConfig resolve(const Options& o, bool sweep) {
    std::string path = o.config_path;
    if (path.empty()) {
        if (const char* env = std::getenv("CFMIMO_CONFIG")) path = env;
    }
    cfmimo::SimConfig config = path.empty() ? cfmimo::SimConfig{} : cfmimo::load_config(path);
    for (const auto& s : o.settings) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw cfmimo::ConfigError(s, "expected key=value");
        cfmimo::apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
    }
    if (o.strategy) cfmimo::apply_setting(config, sweep ? "strategies" : "strategy", *o.strategy);
    if (o.threshold_db) cfmimo::apply_setting(config, sweep ? "thresholds_db" : "threshold_db", *o.threshold_db);
    if (o.speed_kmh) cfmimo::apply_setting(config, sweep ? "speeds_kmh" : "speed_kmh", *o.speed_kmh);
    if (o.speeds) cfmimo::apply_setting(config, "speeds_kmh", *o.speeds);
    if (o.setups) cfmimo::apply_setting(config, "n_setups", *o.setups);
    if (o.seed) cfmimo::apply_setting(config, "seed", *o.seed);
    if (o.parallelism) cfmimo::apply_setting(config, "parallelism", *o.parallelism);
    if (o.n_mc) cfmimo::apply_setting(config, "n_mc", *o.n_mc);
    config.validate();
    return config;
}

template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
    if (path.empty() || path == "-") {
        fn(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    fn(out);
}

int run_command(const Options& o) {
    const cfmimo::SimConfig config = resolve(o, false);
    cfmimo::Scenario scenario{config.handover.strategy, config.handover.threshold_db, config.speed_kmh};
    if (scenario.strategy == cfmimo::Strategy::cellular) scenario.threshold_db = config.handover.cellular_hysteresis_db;
    if (scenario.strategy == cfmimo::Strategy::ubiquitous) scenario.threshold_db = 0.0;

    std::vector<cfmimo::EpisodeResult> episodes;
    for (int s = 0; s < config.n_setups; ++s) {
        episodes.push_back(cfmimo::run_episode(config, scenario, cfmimo::setup_seed(config.seed, s)));
    }
    with_output(o.out, [&](std::ostream& out) { cfmimo::write_episode_csv(out, episodes, config.ts_s); });
    if (!o.events_path.empty()) {
        with_output(o.events_path, [&](std::ostream& out) {
            std::vector<cfmimo::HandoverEvent> all;
            for (const auto& ep : episodes) all.insert(all.end(), ep.events.begin(), ep.events.end());
            cfmimo::write_events_csv(out, all);
        });
    }
    if (!o.ledger_path.empty()) {
        cfmimo::SignalingLedger merged(config.deployment.num_orus, config.deployment.num_odus);
        for (const auto& ep : episodes) merged.merge(ep.ledger);
        with_output(o.ledger_path, [&](std::ostream& out) { merged.write_csv(out); });
    }
    return 0;
}

int sweep_command(const Options& o) {
    const cfmimo::SimConfig config = resolve(o, true);
    const cfmimo::CampaignResult result = cfmimo::run_campaign(config);
    with_output(o.out, [&](std::ostream& out) { cfmimo::write_campaign_csv(out, result); });
    return 0;
}

int validate_command(const Options& o) {
    const cfmimo::SimConfig config = resolve(o, false);
    with_output(o.out, [&](std::ostream& out) { cfmimo::write_config(out, config); });
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cell-free massive MIMO mobility and handover simulator"};
    app.require_subcommand(1);
    Options o;

    auto* run = app.add_subcommand("run", "Run single episodes and write per-step SE");
    add_common(run, o);
    run->add_option("--strategy", o.strategy, "fixed, opportunistic, ubiquitous or cellular");
    run->add_option("--threshold-db", o.threshold_db, "Handover threshold in dB");
    run->add_option("--speed-kmh", o.speed_kmh, "UE speed in km/h");
    run->add_option("--events", o.events_path, "Write handover events CSV");
    run->add_option("--ledger", o.ledger_path, "Write signaling ledger CSV");

    auto* sweep = app.add_subcommand("sweep", "Run a campaign and write aggregate results");
    add_common(sweep, o);
    sweep->add_option("--strategy", o.strategy, "Comma-separated strategies");
    sweep->add_option("--threshold-db", o.threshold_db, "Comma-separated thresholds in dB");
    sweep->add_option("--speed-kmh,--speeds", o.speeds, "Comma-separated speeds in km/h");
    sweep->add_option("--parallelism", o.parallelism, "Worker threads");

    auto* validate = app.add_subcommand("validate", "Print the resolved configuration");
    add_common(validate, o);
    validate->add_option("--strategy", o.strategy, "Strategy");
    validate->add_option("--threshold-db", o.threshold_db, "Handover threshold in dB");
    validate->add_option("--speed-kmh", o.speed_kmh, "UE speed in km/h");

    app.add_subcommand("selftest", "Run internal consistency checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*run) return run_command(o);
        if (*sweep) return sweep_command(o);
        if (*validate) return validate_command(o);
        return cfmimo::run_selftest(std::cout) ? 0 : 1;
    } catch (const cfmimo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const cfmimo::SimulationError& e) {
        std::cerr << "simulation error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
