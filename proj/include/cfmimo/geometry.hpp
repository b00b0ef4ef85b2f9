#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "cfmimo/rng.hpp"

namespace cfmimo {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct DeploymentConfig {
    double grid_side_m = 1000.0;
    int num_orus = 36;
    int num_odus = 9;
    int antennas_per_oru = 4;
    int num_ues = 40;

    /// Throws ConfigError when the tiling or counts are inconsistent.
    void validate() const;
    int orus_per_odu() const { return num_orus / num_odus; }
};

/// O-RU placement and ownership. O-RUs of O-DU c occupy the contiguous index
/// block [c * L/C, (c + 1) * L/C).
struct Topology {
    double grid_side_m = 0.0;
    int num_odus = 0;
    std::vector<Point> oru_positions;
    std::vector<int> odu_of_oru;
    /// Array axis direction per O-RU in radians; 0 means the ULA lies along x.
    std::vector<double> array_orientation;

    int num_orus() const { return static_cast<int>(oru_positions.size()); }
    std::vector<int> orus_of_odu(int odu) const;
};

struct UEState {
    Point position;
    double speed_mps = 0.0;
    double heading_rad = 0.0;
};

/// Uniform O-RU drop: the grid is tiled into C equal subsquares and each O-DU's
/// L/C O-RUs are placed uniformly inside its own subsquare.
Topology generate_deployment(const DeploymentConfig& config, Rng& rng);

/// UEs uniform over the grid with headings uniform on [0, 2pi).
std::vector<UEState> place_ues(int num_ues, double grid_side_m, double speed_mps, Rng& rng);

/// Fold a coordinate onto [0, side).
double fold(double value, double side);

/// Minimum distance over the 3 x 3 wrap-around images.
double wrap_distance(Point a, Point b, double grid_side);

/// Distances from `ue` to every O-RU, via the vector kernel.
void wrap_distances(const Topology& topology, Point ue, std::span<double> out);

/// Azimuth of the nearest image of `ue` relative to the O-RU array broadside,
/// in (-pi, pi]. Coincident points give 0.
double wrap_angle(Point oru, double orientation, Point ue, double grid_side);

/// Straight-line constant-speed move on the torus.
UEState step_ue(const UEState& state, double ts_s, double grid_side);

/// Plain-text snapshot: one row per O-RU with index, x, y and owning O-DU.
void write_topology(std::ostream& out, const Topology& topology);
Topology read_topology(std::istream& in);

}  // namespace cfmimo
