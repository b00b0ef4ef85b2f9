#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "cfmimo/clustering.hpp"
#include "cfmimo/config.hpp"
#include "cfmimo/signaling.hpp"

namespace cfmimo {

/// One cell of a campaign. `threshold_db` is the handover hysteresis for the
/// fixed and opportunistic strategies and the cellular hysteresis for the
/// cellular baseline; it is 0 for ubiquitous.
struct Scenario {
    Strategy strategy = Strategy::fixed;
    double threshold_db = 2.0;
    double speed_kmh = 3.0;
};

struct EpisodeResult {
    Scenario scenario;
    std::uint64_t setup_seed = 0;
    int num_ues = 0;
    int num_steps = 0;
    /// Indexed [step - 1][ue] for steps 1..T; the initial association at t = 0
    /// carries no SE sample.
    std::vector<std::vector<double>> se;
    std::vector<std::vector<int>> serving_size;
    std::vector<std::vector<int>> primary;
    std::vector<HandoverEvent> events;
    SignalingLedger ledger;
    int handovers = 0;
    double handover_frequency = 0.0;  // per UE per second
    double mean_se = 0.0;
    int invalid_samples = 0;
    int undersampled = 0;
};

/// Seed of setup `index` within a campaign.
std::uint64_t setup_seed(std::uint64_t campaign_seed, int index);

/// Handover count of an event list: primary changes, or cellular handovers for
/// the cellular baseline. Ubiquitous serving has none.
int count_handovers(std::span<const HandoverEvent> events, Strategy strategy);

/// Runs one mobility episode. Setups are common across strategies and speeds:
/// deployment, UE placement, shadowing and small-scale draws depend only on
/// `setup_seed` (and the step index), never on the scenario. Numerical
/// failures are rethrown as SimulationError.
EpisodeResult run_episode(const SimConfig& config, const Scenario& scenario, std::uint64_t setup_seed);

struct CellResult {
    Scenario scenario;
    int setups = 0;
    double mean_se = 0.0;
    double se_stderr = 0.0;
    double ho_freq = 0.0;
    double ho_stderr = 0.0;
    double ric_msgs = 0.0;           // mean per setup
    double inter_odu_samples = 0.0;  // mean per setup
    int invalid_samples = 0;
    int undersampled = 0;
    std::vector<double> per_setup_se;
    std::vector<double> per_setup_ho;
    std::vector<double> per_setup_ric;
    std::vector<double> per_setup_inter_odu;
};

struct CampaignResult {
    std::vector<CellResult> cells;

    /// nullptr when the cell is absent. Baselines match any threshold.
    const CellResult* find(Strategy strategy, double threshold_db, double speed_kmh) const;
};

/// Cartesian product of strategies x thresholds x speeds; the baselines appear
/// once per speed.
std::vector<Scenario> campaign_scenarios(const SimConfig& config);

/// Runs every scenario over `config.n_setups` setups on `config.parallelism`
/// worker threads. Results are reduced in (scenario, setup) order, so they do
/// not depend on the thread count.
CampaignResult run_campaign(const SimConfig& config);

/// Header `strategy,threshold_db,speed_kmh,mean_se,se_stderr,ho_freq,ho_stderr,ric_msgs,inter_odu_samples`.
void write_campaign_csv(std::ostream& out, const CampaignResult& result);

/// Header `setup,step,time_s,ue,se,serving_size,primary_oru`.
void write_episode_csv(std::ostream& out, std::span<const EpisodeResult> episodes, double ts_s);

double mean(std::span<const double> values);
/// Standard error of the mean; 0 for fewer than two values.
double standard_error(std::span<const double> values);

}  // namespace cfmimo
