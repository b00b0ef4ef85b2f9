#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "cfmimo/channel.hpp"
#include "cfmimo/clustering.hpp"
#include "cfmimo/geometry.hpp"
#include "cfmimo/signaling.hpp"

namespace cfmimo {

/// Simulation parameters. Defaults reproduce the reference scenario: 40 UEs,
/// 36 O-RUs with 4 antennas under 9 O-DUs on a 1 km square, -94 dBm noise,
/// 100 pilots, 0.5 s steps over 10 s, 25 setups, 10 degree angular spread and
/// 16 serving O-RUs.
struct SimConfig {
    DeploymentConfig deployment;
    HandoverConfig handover;
    ChannelParams channel;
    FrameConfig frame;

    int tau_p = 100;
    double ue_power_mw = 100.0;
    double noise_dbm = -94.0;
    double ts_s = 0.5;
    double sim_time_s = 10.0;
    double speed_kmh = 3.0;  // single-episode speed
    std::vector<double> speeds_kmh{3.0, 30.0, 60.0, 120.0};
    std::vector<double> thresholds_db{2.0, 3.0};
    std::vector<Strategy> strategies{Strategy::fixed, Strategy::opportunistic};
    int n_setups = 25;
    int n_mc = 100;
    std::uint64_t seed = 1;
    /// Scale SE by tau_u / (tau_p + tau_u).
    bool apply_prelog = false;
    int parallelism = 1;

    int num_steps() const;
    double noise_mw() const { return db_to_linear(noise_dbm); }
    void validate() const;
};

/// Set one field from its textual value. Throws ConfigError naming `key` for
/// unknown keys or values that do not parse.
void apply_setting(SimConfig& config, std::string_view key, std::string_view value);

/// Flat `key = value` lines; `#` starts a comment.
SimConfig parse_config(std::istream& in);
SimConfig load_config(const std::string& path);

/// Writes every field in the same format parse_config accepts.
void write_config(std::ostream& out, const SimConfig& config);

std::vector<double> parse_number_list(std::string_view key, std::string_view text);

}  // namespace cfmimo
