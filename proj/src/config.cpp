#include "cfmimo/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "cfmimo/errors.hpp"

namespace cfmimo {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view text) {
    text = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw ConfigError(std::string(key), "expected a number, got '" + std::string(text) + "'");
    }
    return value;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view text) {
    text = trim(text);
    Int value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw ConfigError(std::string(key), "expected an integer, got '" + std::string(text) + "'");
    }
    return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
    text = trim(text);
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError(std::string(key), "expected true or false, got '" + std::string(text) + "'");
}

template <typename T>
std::string join(const std::vector<T>& values) {
    std::ostringstream os;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) os << ',';
        if constexpr (std::is_same_v<T, Strategy>) {
            os << to_string(values[i]);
        } else {
            os << values[i];
        }
    }
    return os.str();
}

}  // namespace

std::vector<double> parse_number_list(std::string_view key, std::string_view text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto item = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        out.push_back(parse_double(key, item));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

int SimConfig::num_steps() const { return static_cast<int>(std::lround(sim_time_s / ts_s)); }

void SimConfig::validate() const {
    deployment.validate();
    handover.validate(deployment.num_orus);
    frame.validate();
    if (tau_p < 1) throw ConfigError("tau_p", "must be at least 1");
    if (!(ue_power_mw > 0.0)) throw ConfigError("ue_power_mw", "must be positive");
    if (!std::isfinite(noise_dbm)) throw ConfigError("noise_dbm", "must be finite");
    if (!(ts_s > 0.0)) throw ConfigError("ts_s", "must be positive");
    if (!(sim_time_s >= ts_s)) throw ConfigError("sim_time_s", "must be at least one step");
    if (!(speed_kmh >= 0.0)) throw ConfigError("speed_kmh", "must be non-negative");
    for (double v : speeds_kmh) {
        if (!(v >= 0.0)) throw ConfigError("speeds_kmh", "speeds must be non-negative");
    }
    for (double t : thresholds_db) {
        if (!(t >= 0.0)) throw ConfigError("thresholds_db", "thresholds must be non-negative");
    }
    if (speeds_kmh.empty()) throw ConfigError("speeds_kmh", "must not be empty");
    if (thresholds_db.empty()) throw ConfigError("thresholds_db", "must not be empty");
    if (strategies.empty()) throw ConfigError("strategies", "must not be empty");
    if (n_setups < 1) throw ConfigError("n_setups", "must be at least 1");
    if (n_mc < 1) throw ConfigError("n_mc", "must be at least 1");
    if (parallelism < 1) throw ConfigError("parallelism", "must be at least 1");
    if (!(channel.sigma_sf_db >= 0.0)) throw ConfigError("sigma_sf_db", "must be non-negative");
    if (!(channel.decorrelation_distance_m > 0.0)) {
        throw ConfigError("decorrelation_distance_m", "must be positive");
    }
    if (!(channel.antenna_spacing_wl > 0.0)) throw ConfigError("antenna_spacing_wl", "must be positive");
    if (!(channel.angular_spread_rad >= 0.0)) throw ConfigError("angular_spread_deg", "must be non-negative");
    if (!(channel.min_distance_m > 0.0)) throw ConfigError("min_distance_m", "must be positive");
}

void apply_setting(SimConfig& c, std::string_view key_view, std::string_view value) {
    const std::string key(trim(key_view));
    value = trim(value);
    if (key == "grid_side_m") c.deployment.grid_side_m = parse_double(key, value);
    else if (key == "num_orus") c.deployment.num_orus = parse_int<int>(key, value);
    else if (key == "num_odus") c.deployment.num_odus = parse_int<int>(key, value);
    else if (key == "antennas_per_oru") c.deployment.antennas_per_oru = parse_int<int>(key, value);
    else if (key == "num_ues") c.deployment.num_ues = parse_int<int>(key, value);
    else if (key == "strategy") c.handover.strategy = parse_strategy(value);
    else if (key == "threshold_db") c.handover.threshold_db = parse_double(key, value);
    else if (key == "serving_size") c.handover.serving_size = parse_int<int>(key, value);
    else if (key == "measurement_size") c.handover.measurement_size = parse_int<int>(key, value);
    else if (key == "cellular_hysteresis_db") c.handover.cellular_hysteresis_db = parse_double(key, value);
    else if (key == "tau_p") c.tau_p = parse_int<int>(key, value);
    else if (key == "ue_power_mw") c.ue_power_mw = parse_double(key, value);
    else if (key == "noise_dbm") c.noise_dbm = parse_double(key, value);
    else if (key == "tau_u") c.frame.tau_u = parse_int<int>(key, value);
    else if (key == "blocks_per_step") c.frame.blocks_per_step = parse_int<int>(key, value);
    else if (key == "ts_s") c.ts_s = parse_double(key, value);
    else if (key == "sim_time_s") c.sim_time_s = parse_double(key, value);
    else if (key == "speed_kmh") c.speed_kmh = parse_double(key, value);
    else if (key == "speeds_kmh") c.speeds_kmh = parse_number_list(key, value);
    else if (key == "thresholds_db") c.thresholds_db = parse_number_list(key, value);
    else if (key == "strategies") {
        c.strategies.clear();
        std::size_t start = 0;
        while (true) {
            const auto comma = value.find(',', start);
            c.strategies.push_back(parse_strategy(trim(value.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start))));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
    }
    else if (key == "n_setups") c.n_setups = parse_int<int>(key, value);
    else if (key == "n_mc") c.n_mc = parse_int<int>(key, value);
    else if (key == "seed") c.seed = parse_int<std::uint64_t>(key, value);
    else if (key == "sigma_sf_db") c.channel.sigma_sf_db = parse_double(key, value);
    else if (key == "decorrelation_distance_m") c.channel.decorrelation_distance_m = parse_double(key, value);
    else if (key == "antenna_spacing_wl") c.channel.antenna_spacing_wl = parse_double(key, value);
    else if (key == "angular_spread_deg") c.channel.angular_spread_rad = parse_double(key, value) * kPi / 180.0;
    else if (key == "min_distance_m") c.channel.min_distance_m = parse_double(key, value);
    else if (key == "carrier_hz") c.channel.carrier_hz = parse_double(key, value);
    else if (key == "apply_prelog") c.apply_prelog = parse_bool(key, value);
    else if (key == "parallelism") c.parallelism = parse_int<int>(key, value);
    else throw ConfigError(key, "unknown configuration key");
}

SimConfig parse_config(std::istream& in) {
    SimConfig config;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        std::string_view view(line);
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(number), "expected 'key = value'");
        }
        apply_setting(config, view.substr(0, eq), view.substr(eq + 1));
    }
    return config;
}

SimConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    return parse_config(in);
}

void write_config(std::ostream& out, const SimConfig& c) {
    out << std::setprecision(12);
    out << "# deployment\n";
    out << "grid_side_m = " << c.deployment.grid_side_m << "\n";
    out << "num_orus = " << c.deployment.num_orus << "\n";
    out << "num_odus = " << c.deployment.num_odus << "\n";
    out << "antennas_per_oru = " << c.deployment.antennas_per_oru << "\n";
    out << "num_ues = " << c.deployment.num_ues << "\n";
    out << "# clustering and handover\n";
    out << "strategy = " << to_string(c.handover.strategy) << "\n";
    out << "threshold_db = " << c.handover.threshold_db << "\n";
    out << "serving_size = " << c.handover.serving_size << "\n";
    out << "measurement_size = " << c.handover.measurement_size << "\n";
    out << "cellular_hysteresis_db = " << c.handover.cellular_hysteresis_db << "\n";
    out << "# radio\n";
    out << "tau_p = " << c.tau_p << "\n";
    out << "ue_power_mw = " << c.ue_power_mw << "\n";
    out << "noise_dbm = " << c.noise_dbm << "\n";
    out << "sigma_sf_db = " << c.channel.sigma_sf_db << "\n";
    out << "decorrelation_distance_m = " << c.channel.decorrelation_distance_m << "\n";
    out << "antenna_spacing_wl = " << c.channel.antenna_spacing_wl << "\n";
    out << "angular_spread_deg = " << c.channel.angular_spread_rad * 180.0 / kPi << "\n";
    out << "min_distance_m = " << c.channel.min_distance_m << "\n";
    out << "carrier_hz = " << c.channel.carrier_hz << "\n";
    out << "# frame and signaling\n";
    out << "tau_u = " << c.frame.tau_u << "\n";
    out << "blocks_per_step = " << c.frame.blocks_per_step << "\n";
    out << "apply_prelog = " << (c.apply_prelog ? "true" : "false") << "\n";
    out << "# time and campaign\n";
    out << "ts_s = " << c.ts_s << "\n";
    out << "sim_time_s = " << c.sim_time_s << "\n";
    out << "speed_kmh = " << c.speed_kmh << "\n";
    out << "speeds_kmh = " << join(c.speeds_kmh) << "\n";
    out << "thresholds_db = " << join(c.thresholds_db) << "\n";
    out << "strategies = " << join(c.strategies) << "\n";
    out << "n_setups = " << c.n_setups << "\n";
    out << "n_mc = " << c.n_mc << "\n";
    out << "seed = " << c.seed << "\n";
    out << "parallelism = " << c.parallelism << "\n";
}

}  // namespace cfmimo
