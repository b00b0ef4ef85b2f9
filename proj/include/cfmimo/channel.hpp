#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "cfmimo/geometry.hpp"
#include "cfmimo/rng.hpp"
#include "cfmimo/types.hpp"

namespace cfmimo {

struct ChannelParams {
    double sigma_sf_db = 4.0;
    /// Shadow-fading decorrelation distance; the AR(1) rate is its reciprocal.
    double decorrelation_distance_m = 20.0;
    /// ULA element spacing in wavelengths.
    double antenna_spacing_wl = 0.5;
    double angular_spread_rad = 10.0 * kPi / 180.0;
    double min_distance_m = 1.0;
    /// Only used by the Jakes reference model.
    double carrier_hz = 3.5e9;

    double alpha() const { return 1.0 / decorrelation_distance_m; }
};

/// Large-scale gains in dB, indexed (O-RU l, UE k) and stored l-major.
struct GainTable {
    int num_orus = 0;
    int num_ues = 0;
    std::vector<double> db;

    GainTable() = default;
    GainTable(int orus, int ues, double fill_db = 0.0)
        : num_orus(orus), num_ues(ues), db(static_cast<std::size_t>(orus) * ues, fill_db) {}

    double at(int l, int k) const { return db[static_cast<std::size_t>(l) * num_ues + k]; }
    double& at(int l, int k) { return db[static_cast<std::size_t>(l) * num_ues + k]; }
    double linear(int l, int k) const { return db_to_linear(at(l, k)); }
};

/// Jakes temporal autocorrelation J0(pi * Ds * Ts) with Doppler spread
/// Ds = 2 fc v / c. Kept as a reference: at the simulator's sampling times it is
/// close to zero, which is why small-scale fading is redrawn every step.
double jakes_autocorrelation(double carrier_hz, double speed_mps, double ts_s);

/// exp(-alpha v Ts): correlation of consecutive shadow-fading samples.
double shadow_correlation(double alpha, double speed_mps, double ts_s);

/// Per (O-RU, UE) shadow fading in dB, AR(1) in the distance travelled.
struct ShadowState {
    int num_orus = 0;
    int num_ues = 0;
    double sigma_db = 0.0;
    double alpha = 0.0;
    std::vector<double> values_db;

    double at(int l, int k) const { return values_db[static_cast<std::size_t>(l) * num_ues + k]; }
};

ShadowState initial_shadow(int num_orus, int num_ues, double sigma_db, double alpha, Rng& rng);

/// F[t] = rho_k F[t-1] + sqrt(1 - rho_k^2) F_new, F_new ~ N(0, sigma^2).
ShadowState evolve_shadow(const ShadowState& prev, std::span<const double> speeds_mps, double ts_s,
                          Rng& rng);

/// -34 - 38 log10(max(d, d_min)) + F, in dB.
double path_loss_db(double distance_m, double shadow_db, double min_distance_m = 1.0);

struct SpatialCovariance {
    CMat R;
    double aoa_rad = 0.0;
    double spread_rad = 0.0;
    double antenna_spacing_wl = 0.5;
};

/// One-ring covariance of an N-element ULA: the angle of arrival is uniform on
/// [aoa - spread, aoa + spread]. Evaluated with 64-node Gauss-Legendre and
/// cross-checked against 128 nodes; throws NumericalError when they disagree
/// by more than 1e-9 (relative to beta).
SpatialCovariance one_ring_covariance(double beta_lin, double aoa_rad, double spread_rad,
                                      int antennas, double antenna_spacing_wl);

/// A with A A^H = R. Cholesky first; falls back to a clipped eigendecomposition
/// for singular R. Throws NumericalError when R has an eigenvalue below
/// -1e-9 trace(R).
CMat covariance_factor(const CMat& R);

/// h = A z with z ~ CN(0, I).
CVec sample_channel(const CMat& factor, Rng& rng);

/// All per-step large-scale statistics, indexed l * K + k.
struct LargeScaleStats {
    int num_orus = 0;
    int num_ues = 0;
    int antennas = 0;
    std::vector<double> distance_m;
    std::vector<double> aoa_rad;
    GainTable gains;
    std::vector<CMat> covariance;

    std::size_t index(int l, int k) const { return static_cast<std::size_t>(l) * num_ues + k; }
    const CMat& R(int l, int k) const { return covariance[index(l, k)]; }
    double beta_lin(int l, int k) const { return gains.linear(l, k); }
};

LargeScaleStats refresh_statistics(const Topology& topology, std::span<const UEState> ues,
                                   const ShadowState& shadow, const ChannelParams& params,
                                   int antennas);

/// Binary covariance dump: 8-byte magic "CFMCOV01", then uint32 L, K, N, then
/// for each (l, k) in l-major order the N x N matrix row-major as
/// (real, imag) float64 pairs, native little-endian.
void write_covariance_dump(std::ostream& out, const LargeScaleStats& stats);

}  // namespace cfmimo
