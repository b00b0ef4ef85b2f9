#include "cfmimo/channel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>

#include <boost/math/quadrature/gauss.hpp>

#include "cfmimo/errors.hpp"
#include "cfmimo/simd/kernels.hpp"

namespace cfmimo {

namespace {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

template <unsigned Points>
QuadratureRule make_rule() {
    using Gauss = boost::math::quadrature::gauss<double, Points>;
    const auto& abscissa = Gauss::abscissa();
    const auto& weights = Gauss::weights();
    QuadratureRule rule;
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
        if (abscissa[i] == 0.0) {
            rule.nodes.push_back(0.0);
            rule.weights.push_back(weights[i]);
            continue;
        }
        rule.nodes.push_back(-abscissa[i]);
        rule.weights.push_back(weights[i]);
        rule.nodes.push_back(abscissa[i]);
        rule.weights.push_back(weights[i]);
    }
    return rule;
}

const QuadratureRule& rule64() {
    static const QuadratureRule rule = make_rule<64>();
    return rule;
}

const QuadratureRule& rule128() {
    static const QuadratureRule rule = make_rule<128>();
    return rule;
}

// Normalized lag moments s_d = (1/2xi) int exp(2 pi j dH d sin(phi)) dphi over
// [aoa - xi, aoa + xi], for d in [0, lags).
void lag_moments(const QuadratureRule& rule, double aoa, double spread, double spacing,
                 std::span<cplx> out) {
    const std::size_t q = rule.nodes.size();
    thread_local std::vector<cplx> z;
    thread_local std::vector<double> w;
    z.resize(q);
    w.resize(q);
    for (std::size_t i = 0; i < q; ++i) {
        const double phi = aoa + spread * rule.nodes[i];
        const double theta = 2.0 * kPi * spacing * std::sin(phi);
        z[i] = cplx(std::cos(theta), std::sin(theta));
        w[i] = 0.5 * rule.weights[i];
    }
    simd::power_moments(z, w, out);
}

}  // namespace

double jakes_autocorrelation(double carrier_hz, double speed_mps, double ts_s) {
    const double doppler_spread = 2.0 * carrier_hz * speed_mps / kSpeedOfLight;
    return std::cyl_bessel_j(0.0, kPi * doppler_spread * ts_s);
}

double shadow_correlation(double alpha, double speed_mps, double ts_s) {
    return std::exp(-alpha * speed_mps * ts_s);
}

ShadowState initial_shadow(int num_orus, int num_ues, double sigma_db, double alpha, Rng& rng) {
    ShadowState state;
    state.num_orus = num_orus;
    state.num_ues = num_ues;
    state.sigma_db = sigma_db;
    state.alpha = alpha;
    state.values_db.resize(static_cast<std::size_t>(num_orus) * num_ues);
    for (double& f : state.values_db) f = rng.normal(sigma_db);
    return state;
}

ShadowState evolve_shadow(const ShadowState& prev, std::span<const double> speeds_mps, double ts_s,
                          Rng& rng) {
    ShadowState next = prev;
    const std::size_t n = next.values_db.size();
    std::vector<double> rho(n);
    std::vector<double> innovation(n);
    for (int l = 0; l < prev.num_orus; ++l) {
        for (int k = 0; k < prev.num_ues; ++k) {
            const std::size_t i = static_cast<std::size_t>(l) * prev.num_ues + k;
            rho[i] = shadow_correlation(prev.alpha, speeds_mps[k], ts_s);
            innovation[i] = rng.normal(prev.sigma_db);
        }
    }
    simd::ar1_update(next.values_db, rho, innovation);
    return next;
}

double path_loss_db(double distance_m, double shadow_db, double min_distance_m) {
    const double d = std::max(distance_m, min_distance_m);
    return -34.0 - 38.0 * std::log10(d) + shadow_db;
}

SpatialCovariance one_ring_covariance(double beta_lin, double aoa_rad, double spread_rad,
                                      int antennas, double antenna_spacing_wl) {
    if (antennas < 1) throw NumericalError("one_ring_covariance: antennas must be >= 1");
    if (spread_rad < 0.0) throw NumericalError("one_ring_covariance: negative angular spread");

    SpatialCovariance cov{CMat(antennas, antennas), aoa_rad, spread_rad, antenna_spacing_wl};
    std::vector<cplx> moments(antennas);
    if (spread_rad == 0.0) {
        const double theta = 2.0 * kPi * antenna_spacing_wl * std::sin(aoa_rad);
        for (int d = 0; d < antennas; ++d) moments[d] = std::polar(1.0, theta * d);
    } else {
        lag_moments(rule64(), aoa_rad, spread_rad, antenna_spacing_wl, moments);
        std::vector<cplx> check(antennas);
        lag_moments(rule128(), aoa_rad, spread_rad, antenna_spacing_wl, check);
        for (int d = 0; d < antennas; ++d) {
            if (std::abs(moments[d] - check[d]) > 1e-9) {
                throw NumericalError("one_ring_covariance: quadrature did not converge at lag " +
                                     std::to_string(d));
            }
        }
    }

    for (int m = 0; m < antennas; ++m) {
        cov.R(m, m) = beta_lin;
        for (int n = m + 1; n < antennas; ++n) {
            const cplx entry = beta_lin * moments[n - m];
            cov.R(m, n) = entry;
            cov.R(n, m) = std::conj(entry);
        }
    }
    return cov;
}

CMat covariance_factor(const CMat& R) {
    const double trace = R.diagonal().real().sum();
    if (trace == 0.0 && R.cwiseAbs().maxCoeff() == 0.0) return CMat::Zero(R.rows(), R.cols());

    Eigen::LLT<CMat> llt(R);
    if (llt.info() == Eigen::Success) {
        CMat lower = llt.matrixL();
        if (lower.allFinite()) return lower;
    }

    Eigen::SelfAdjointEigenSolver<CMat> eig(R);
    if (eig.info() != Eigen::Success) throw NumericalError("covariance_factor: eigensolver failed");
    Eigen::VectorXd values = eig.eigenvalues();
    if (values.minCoeff() < -1e-9 * std::fabs(trace)) {
        throw NumericalError("covariance_factor: matrix is not positive semidefinite");
    }
    values = values.cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * values.asDiagonal();
}

CVec sample_channel(const CMat& factor, Rng& rng) {
    CVec z(factor.cols());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.complex_normal();
    return factor * z;
}

LargeScaleStats refresh_statistics(const Topology& topology, std::span<const UEState> ues,
                                   const ShadowState& shadow, const ChannelParams& params,
                                   int antennas) {
    const int L = topology.num_orus();
    const int K = static_cast<int>(ues.size());
    LargeScaleStats stats;
    stats.num_orus = L;
    stats.num_ues = K;
    stats.antennas = antennas;
    stats.distance_m.resize(static_cast<std::size_t>(L) * K);
    stats.aoa_rad.resize(stats.distance_m.size());
    stats.gains = GainTable(L, K);
    stats.covariance.resize(stats.distance_m.size());

    std::vector<double> row(L);
    for (int k = 0; k < K; ++k) {
        wrap_distances(topology, ues[k].position, row);
        for (int l = 0; l < L; ++l) {
            const std::size_t i = stats.index(l, k);
            stats.distance_m[i] = row[l];
            stats.aoa_rad[i] = wrap_angle(topology.oru_positions[l], topology.array_orientation[l],
                                          ues[k].position, topology.grid_side_m);
            stats.gains.at(l, k) = path_loss_db(row[l], shadow.at(l, k), params.min_distance_m);
            stats.covariance[i] = one_ring_covariance(stats.gains.linear(l, k), stats.aoa_rad[i],
                                                      params.angular_spread_rad, antennas,
                                                      params.antenna_spacing_wl)
                                      .R;
        }
    }
    return stats;
}

void write_covariance_dump(std::ostream& out, const LargeScaleStats& stats) {
    out.write("CFMCOV01", 8);
    const std::uint32_t header[3] = {static_cast<std::uint32_t>(stats.num_orus),
                                     static_cast<std::uint32_t>(stats.num_ues),
                                     static_cast<std::uint32_t>(stats.antennas)};
    out.write(reinterpret_cast<const char*>(header), sizeof(header));
    for (const CMat& R : stats.covariance) {
        for (int m = 0; m < R.rows(); ++m) {
            for (int n = 0; n < R.cols(); ++n) {
                const double pair[2] = {R(m, n).real(), R(m, n).imag()};
                out.write(reinterpret_cast<const char*>(pair), sizeof(pair));
            }
        }
    }
}

}  // namespace cfmimo
