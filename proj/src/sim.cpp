#include "cfmimo/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <thread>

#include "cfmimo/channel.hpp"
#include "cfmimo/errors.hpp"
#include "cfmimo/geometry.hpp"
#include "cfmimo/lsfd.hpp"
#include "cfmimo/pilot.hpp"
#include "cfmimo/rng.hpp"

namespace cfmimo {

std::uint64_t setup_seed(std::uint64_t campaign_seed, int index) {
    return derive_seed(campaign_seed, static_cast<std::uint64_t>(index));
}

int count_handovers(std::span<const HandoverEvent> events, Strategy strategy) {
    EventKind counted = EventKind::primary_change;
    if (strategy == Strategy::ubiquitous) return 0;
    if (strategy == Strategy::cellular) counted = EventKind::cellular_handover;
    return static_cast<int>(std::count_if(events.begin(), events.end(),
                                          [&](const HandoverEvent& e) { return e.kind == counted; }));
}

double mean(std::span<const double> values) {
    if (values.empty()) return 0.0;
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

double standard_error(std::span<const double> values) {
    const auto n = values.size();
    if (n < 2) return 0.0;
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

EpisodeResult run_episode(const SimConfig& config, const Scenario& scenario, std::uint64_t seed) {
    config.validate();
    HandoverConfig handover = config.handover;
    handover.strategy = scenario.strategy;
    if (scenario.strategy == Strategy::cellular) {
        handover.cellular_hysteresis_db = scenario.threshold_db;
    } else if (scenario.strategy != Strategy::ubiquitous) {
        handover.threshold_db = scenario.threshold_db;
    }
    handover.validate(config.deployment.num_orus);

    const int K = config.deployment.num_ues;
    const int N = config.deployment.antennas_per_oru;
    const int steps = config.num_steps();
    const double sigma2 = config.noise_mw();
    const double speed = kmh_to_mps(scenario.speed_kmh);
    const double prelog = config.apply_prelog
                              ? static_cast<double>(config.frame.tau_u) / (config.tau_p + config.frame.tau_u)
                              : 1.0;

    EpisodeResult result;
    result.scenario = scenario;
    result.setup_seed = seed;
    result.num_ues = K;
    result.num_steps = steps;

    int step = 0;
    try {
        Rng deployment_rng(derive_seed(seed, Stream::deployment));
        const Topology topology = generate_deployment(config.deployment, deployment_rng);
        Rng placement_rng(derive_seed(seed, Stream::ue_placement));
        std::vector<UEState> ues = place_ues(K, topology.grid_side_m, speed, placement_rng);
        Rng shadow_rng(derive_seed(seed, Stream::shadow_init));
        ShadowState shadow = initial_shadow(topology.num_orus(), K, config.channel.sigma_sf_db,
                                            config.channel.alpha(), shadow_rng);
        LargeScaleStats stats = refresh_statistics(topology, ues, shadow, config.channel, N);
        ClusterState state = initial_clusters(handover, stats.gains, topology, N);

        const PilotConfig pilots = make_pilot_config(K, config.tau_p, config.ue_power_mw);
        result.ledger = SignalingLedger(topology.num_orus(), topology.num_odus);
        std::vector<double> speeds(static_cast<std::size_t>(K), speed);
        double se_sum = 0.0;

        for (step = 1; step <= steps; ++step) {
            for (auto& ue : ues) ue = step_ue(ue, config.ts_s, topology.grid_side_m);
            Rng evolve_rng(derive_seed(seed, Stream::shadow_evolve, static_cast<std::uint64_t>(step)));
            shadow = evolve_shadow(shadow, speeds, config.ts_s, evolve_rng);
            stats = refresh_statistics(topology, ues, shadow, config.channel, N);

            const auto events = update_clusters(state, handover, stats.gains, topology, N, step);
            result.ledger.apply(account_control_plane(events, handover.strategy, state, topology, step));
            result.events.insert(result.events.end(), events.begin(), events.end());

            const ServingMap serving = state.serving_map();
            Rng small_rng(derive_seed(seed, Stream::small_scale, static_cast<std::uint64_t>(step)));
            const auto gain_stats = effective_gain_stats(stats, serving, pilots, sigma2, config.n_mc, small_rng);

            std::vector<double> se(static_cast<std::size_t>(K), 0.0);
            std::vector<int> sizes(static_cast<std::size_t>(K), 0);
            for (int k = 0; k < K; ++k) {
                const auto& gs = gain_stats[static_cast<std::size_t>(k)];
                if (gs.undersampled()) ++result.undersampled;
                const LsfdWeights weights = lsfd_weights(gs, pilots.power_mw);
                const SinrResult sinr = uplink_sinr(weights.weights, gs, pilots.power_mw);
                if (sinr.valid) {
                    se[static_cast<std::size_t>(k)] = prelog * sinr.se;
                } else {
                    ++result.invalid_samples;
                }
                sizes[static_cast<std::size_t>(k)] =
                    static_cast<int>(state.serving[static_cast<std::size_t>(k)].size());
                se_sum += se[static_cast<std::size_t>(k)];
            }
            result.ledger.apply(account_data_plane(state, topology, config.frame, step));
            result.se.push_back(std::move(se));
            result.serving_size.push_back(std::move(sizes));
            result.primary.push_back(state.primary);
        }
        result.mean_se = se_sum / (static_cast<double>(K) * steps);
    } catch (const NumericalError& e) {
        throw SimulationError(seed, step, e.what());
    }

    result.handovers = count_handovers(result.events, scenario.strategy);
    result.handover_frequency =
        static_cast<double>(result.handovers) / (static_cast<double>(K) * steps * config.ts_s);
    return result;
}

const CellResult* CampaignResult::find(Strategy strategy, double threshold_db, double speed_kmh) const {
    const bool baseline = strategy == Strategy::ubiquitous || strategy == Strategy::cellular;
    for (const auto& cell : cells) {
        if (cell.scenario.strategy != strategy) continue;
        if (std::abs(cell.scenario.speed_kmh - speed_kmh) > 1e-9) continue;
        if (!baseline && std::abs(cell.scenario.threshold_db - threshold_db) > 1e-9) continue;
        return &cell;
    }
    return nullptr;
}

std::vector<Scenario> campaign_scenarios(const SimConfig& config) {
    std::vector<Scenario> out;
    for (Strategy strategy : config.strategies) {
        for (double speed : config.speeds_kmh) {
            if (strategy == Strategy::ubiquitous) {
                out.push_back({strategy, 0.0, speed});
            } else if (strategy == Strategy::cellular) {
                out.push_back({strategy, config.handover.cellular_hysteresis_db, speed});
            } else {
                for (double threshold : config.thresholds_db) out.push_back({strategy, threshold, speed});
            }
        }
    }
    return out;
}

CampaignResult run_campaign(const SimConfig& config) {
    config.validate();
    const auto scenarios = campaign_scenarios(config);
    const std::size_t setups = static_cast<std::size_t>(config.n_setups);
    const std::size_t jobs = scenarios.size() * setups;

    struct Summary {
        double se = 0.0;
        double ho = 0.0;
        double ric = 0.0;
        double inter_odu = 0.0;
        int invalid = 0;
        int undersampled = 0;
    };
    std::vector<Summary> summaries(jobs);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        while (true) {
            const std::size_t job = next.fetch_add(1);
            if (job >= jobs) return;
            {
                std::lock_guard lock(failure_mutex);
                if (failure) return;
            }
            try {
                const auto& scenario = scenarios[job / setups];
                const int s = static_cast<int>(job % setups);
                const EpisodeResult episode = run_episode(config, scenario, setup_seed(config.seed, s));
                Summary& out = summaries[job];
                out.se = episode.mean_se;
                out.ho = episode.handover_frequency;
                out.ric = static_cast<double>(episode.ledger.total(CounterClass::ric));
                out.inter_odu = static_cast<double>(episode.ledger.total(CounterClass::inter_odu));
                out.invalid = episode.invalid_samples;
                out.undersampled = episode.undersampled;
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };

    const int threads = std::min<int>(config.parallelism, static_cast<int>(std::max<std::size_t>(jobs, 1)));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    CampaignResult result;
    for (std::size_t c = 0; c < scenarios.size(); ++c) {
        CellResult cell;
        cell.scenario = scenarios[c];
        cell.setups = static_cast<int>(setups);
        for (std::size_t s = 0; s < setups; ++s) {
            const Summary& sm = summaries[c * setups + s];
            cell.per_setup_se.push_back(sm.se);
            cell.per_setup_ho.push_back(sm.ho);
            cell.per_setup_ric.push_back(sm.ric);
            cell.per_setup_inter_odu.push_back(sm.inter_odu);
            cell.invalid_samples += sm.invalid;
            cell.undersampled += sm.undersampled;
        }
        cell.mean_se = mean(cell.per_setup_se);
        cell.se_stderr = standard_error(cell.per_setup_se);
        cell.ho_freq = mean(cell.per_setup_ho);
        cell.ho_stderr = standard_error(cell.per_setup_ho);
        cell.ric_msgs = mean(cell.per_setup_ric);
        cell.inter_odu_samples = mean(cell.per_setup_inter_odu);
        result.cells.push_back(std::move(cell));
    }
    return result;
}

void write_campaign_csv(std::ostream& out, const CampaignResult& result) {
    out << "strategy,threshold_db,speed_kmh,mean_se,se_stderr,ho_freq,ho_stderr,ric_msgs,inter_odu_samples\n";
    out << std::setprecision(12);
    for (const auto& cell : result.cells) {
        out << to_string(cell.scenario.strategy) << ',' << cell.scenario.threshold_db << ','
            << cell.scenario.speed_kmh << ',' << cell.mean_se << ',' << cell.se_stderr << ','
            << cell.ho_freq << ',' << cell.ho_stderr << ',' << cell.ric_msgs << ','
            << cell.inter_odu_samples << '\n';
    }
}

void write_episode_csv(std::ostream& out, std::span<const EpisodeResult> episodes, double ts_s) {
    out << "setup,step,time_s,ue,se,serving_size,primary_oru\n";
    out << std::setprecision(12);
    for (std::size_t e = 0; e < episodes.size(); ++e) {
        const auto& ep = episodes[e];
        for (int t = 0; t < ep.num_steps; ++t) {
            for (int k = 0; k < ep.num_ues; ++k) {
                const auto tk = static_cast<std::size_t>(t);
                const auto kk = static_cast<std::size_t>(k);
                out << e << ',' << t + 1 << ',' << (t + 1) * ts_s << ',' << k << ',' << ep.se[tk][kk] << ','
                    << ep.serving_size[tk][kk] << ',' << ep.primary[tk][kk] << '\n';
            }
        }
    }
}

}  // namespace cfmimo
