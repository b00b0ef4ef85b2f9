#include "cfmimo/geometry.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "cfmimo/errors.hpp"
#include "cfmimo/simd/kernels.hpp"

namespace cfmimo {

namespace {

int integer_sqrt(int value) {
    int root = static_cast<int>(std::lround(std::sqrt(static_cast<double>(value))));
    return root * root == value ? root : -1;
}

// Nearest-image displacement along one axis.
double wrapped_delta(double from, double to, double side) {
    const double d = to - from;
    const double a = std::fabs(d);
    if (side - a < a) return d > 0 ? d - side : d + side;
    return d;
}

}  // namespace

void DeploymentConfig::validate() const {
    if (!(grid_side_m > 0.0)) throw ConfigError("grid_side_m", "must be positive");
    if (num_orus < 1) throw ConfigError("num_orus", "must be at least 1");
    if (num_odus < 1) throw ConfigError("num_odus", "must be at least 1");
    if (antennas_per_oru < 1) throw ConfigError("antennas_per_oru", "must be at least 1");
    if (num_ues < 1) throw ConfigError("num_ues", "must be at least 1");
    if (integer_sqrt(num_odus) < 0) throw ConfigError("num_odus", "must be a perfect square");
    if (num_orus % num_odus != 0) {
        throw ConfigError("num_orus", "must be divisible by num_odus");
    }
}

std::vector<int> Topology::orus_of_odu(int odu) const {
    std::vector<int> out;
    for (int l = 0; l < num_orus(); ++l) {
        if (odu_of_oru[l] == odu) out.push_back(l);
    }
    return out;
}

Topology generate_deployment(const DeploymentConfig& config, Rng& rng) {
    config.validate();
    const int tiles = integer_sqrt(config.num_odus);
    const double sub = config.grid_side_m / tiles;
    const int per_odu = config.orus_per_odu();

    Topology topo;
    topo.grid_side_m = config.grid_side_m;
    topo.num_odus = config.num_odus;
    topo.oru_positions.reserve(config.num_orus);
    for (int c = 0; c < config.num_odus; ++c) {
        const double x0 = (c % tiles) * sub;
        const double y0 = (c / tiles) * sub;
        for (int j = 0; j < per_odu; ++j) {
            const double x = x0 + sub * rng.uniform();
            const double y = y0 + sub * rng.uniform();
            topo.oru_positions.push_back({fold(x, config.grid_side_m), fold(y, config.grid_side_m)});
            topo.odu_of_oru.push_back(c);
            topo.array_orientation.push_back(0.0);
        }
    }
    return topo;
}

std::vector<UEState> place_ues(int num_ues, double grid_side_m, double speed_mps, Rng& rng) {
    std::vector<UEState> ues(num_ues);
    for (auto& ue : ues) {
        ue.position.x = fold(grid_side_m * rng.uniform(), grid_side_m);
        ue.position.y = fold(grid_side_m * rng.uniform(), grid_side_m);
        ue.heading_rad = 2.0 * kPi * rng.uniform();
        ue.speed_mps = speed_mps;
    }
    return ues;
}

double fold(double value, double side) {
    double r = std::fmod(value, side);
    if (r < 0.0) r += side;
    if (r >= side) r -= side;
    return r;
}

double wrap_distance(Point a, Point b, double grid_side) {
    double dx = std::fabs(b.x - a.x);
    double dy = std::fabs(b.y - a.y);
    dx = std::fmin(dx, grid_side - dx);
    dy = std::fmin(dy, grid_side - dy);
    return std::sqrt(dx * dx + dy * dy);
}

void wrap_distances(const Topology& topology, Point ue, std::span<double> out) {
    const std::size_t n = topology.oru_positions.size();
    thread_local std::vector<double> xs, ys;
    xs.resize(n);
    ys.resize(n);
    for (std::size_t l = 0; l < n; ++l) {
        xs[l] = topology.oru_positions[l].x;
        ys[l] = topology.oru_positions[l].y;
    }
    simd::wrap_distances(xs, ys, ue.x, ue.y, topology.grid_side_m, out.first(n));
}

double wrap_angle(Point oru, double orientation, Point ue, double grid_side) {
    const double dx = wrapped_delta(oru.x, ue.x, grid_side);
    const double dy = wrapped_delta(oru.y, ue.y, grid_side);
    if (dx == 0.0 && dy == 0.0) return 0.0;
    const double along = dx * std::cos(orientation) + dy * std::sin(orientation);
    const double broadside = -dx * std::sin(orientation) + dy * std::cos(orientation);
    return std::atan2(along, broadside);
}

UEState step_ue(const UEState& state, double ts_s, double grid_side) {
    UEState next = state;
    const double step = state.speed_mps * ts_s;
    if (step == 0.0) return next;
    next.position.x = fold(state.position.x + step * std::cos(state.heading_rad), grid_side);
    next.position.y = fold(state.position.y + step * std::sin(state.heading_rad), grid_side);
    return next;
}

void write_topology(std::ostream& out, const Topology& topology) {
    out << "# grid_side_m " << std::setprecision(17) << topology.grid_side_m << " num_odus "
        << topology.num_odus << "\n";
    out << "# oru x_m y_m odu\n";
    for (int l = 0; l < topology.num_orus(); ++l) {
        out << l << ' ' << topology.oru_positions[l].x << ' ' << topology.oru_positions[l].y << ' '
            << topology.odu_of_oru[l] << "\n";
    }
}

Topology read_topology(std::istream& in) {
    Topology topo;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        if (line[0] == '#') {
            std::string hash, key;
            row >> hash >> key;
            if (key == "grid_side_m") {
                std::string odus_key;
                row >> topo.grid_side_m >> odus_key >> topo.num_odus;
            }
            continue;
        }
        int index = 0, odu = 0;
        Point p;
        if (!(row >> index >> p.x >> p.y >> odu) || index != topo.num_orus()) {
            throw ConfigError("topology", "malformed row: " + line);
        }
        topo.oru_positions.push_back(p);
        topo.odu_of_oru.push_back(odu);
        topo.array_orientation.push_back(0.0);
    }
    if (topo.grid_side_m <= 0.0) throw ConfigError("topology", "missing grid_side_m header");
    return topo;
}

}  // namespace cfmimo
