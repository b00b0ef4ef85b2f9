#include "cfmimo/pilot.hpp"

#include <cmath>
#include <map>

#include "cfmimo/errors.hpp"

namespace cfmimo {

void PilotConfig::validate() const {
    if (tau_p < 1) throw ConfigError("tau_p", "must be at least 1");
    if (power_mw.size() != pilot_index.size()) {
        throw ConfigError("ue_power_mw", "one power per UE required");
    }
    for (int t : pilot_index) {
        if (t < 0 || t >= tau_p) throw ConfigError("pilot_index", "out of range [0, tau_p)");
    }
    for (double p : power_mw) {
        if (!(p > 0.0)) throw ConfigError("ue_power_mw", "must be positive");
    }
}

std::vector<int> assign_pilots(int num_ues, int tau_p) {
    std::vector<int> index(num_ues);
    for (int k = 0; k < num_ues; ++k) index[k] = k % tau_p;
    return index;
}

std::vector<std::vector<int>> pilot_sharing_sets(std::span<const int> pilot_index) {
    std::map<int, std::vector<int>> by_pilot;
    for (int k = 0; k < static_cast<int>(pilot_index.size()); ++k) by_pilot[pilot_index[k]].push_back(k);
    std::vector<std::vector<int>> sets(pilot_index.size());
    for (int k = 0; k < static_cast<int>(pilot_index.size()); ++k) sets[k] = by_pilot[pilot_index[k]];
    return sets;
}

PilotConfig make_pilot_config(int num_ues, int tau_p, double power_mw) {
    PilotConfig cfg;
    cfg.tau_p = tau_p;
    cfg.pilot_index = assign_pilots(num_ues, tau_p);
    cfg.power_mw.assign(num_ues, power_mw);
    return cfg;
}

std::vector<CVec> observe_pilots(std::span<const CVec> channels, const PilotConfig& pilots,
                                 double sigma2, Rng& rng) {
    const int K = pilots.num_ues();
    const Eigen::Index n = channels.empty() ? 0 : channels.front().size();
    const double noise_scale = std::sqrt(sigma2);

    // One received vector per pilot in use, in ascending pilot order.
    std::map<int, CVec> received;
    for (int k = 0; k < K; ++k) received.try_emplace(pilots.pilot_index[k], CVec::Zero(n));
    for (auto& [t, y] : received) {
        for (Eigen::Index a = 0; a < n; ++a) y[a] = noise_scale * rng.complex_normal();
    }
    for (int i = 0; i < K; ++i) {
        received[pilots.pilot_index[i]] += std::sqrt(pilots.tau_p * pilots.power_mw[i]) * channels[i];
    }

    std::vector<CVec> out(K);
    for (int k = 0; k < K; ++k) out[k] = received[pilots.pilot_index[k]];
    return out;
}

CMat pilot_gram(std::span<const CMat* const> sharing_covariances, std::span<const double> sharing_powers,
                int tau_p, double sigma2) {
    const Eigen::Index n = sharing_covariances.front()->rows();
    CMat psi = sigma2 * CMat::Identity(n, n);
    for (std::size_t i = 0; i < sharing_covariances.size(); ++i) {
        psi += (tau_p * sharing_powers[i]) * *sharing_covariances[i];
    }
    return psi;
}

MmseFilter mmse_filter(const CMat& R, const CMat& psi, int tau_p, double power) {
    if (!R.allFinite() || !psi.allFinite()) throw NumericalError("mmse_filter: non-finite input");
    Eigen::LLT<CMat> llt(psi);
    if (llt.info() != Eigen::Success) throw NumericalError("mmse_filter: pilot Gram matrix not positive definite");
    const CMat psi_inv_r = llt.solve(R);  // Psi^{-1} R; its adjoint is R Psi^{-1}
    MmseFilter filter;
    filter.W = std::sqrt(tau_p * power) * psi_inv_r.adjoint();
    CMat C = R - (tau_p * power) * (R * psi_inv_r);
    filter.C = 0.5 * (C + C.adjoint());
    return filter;
}

ChannelEstimate mmse_estimate(const CMat& R, std::span<const CMat* const> sharing_covariances,
                              std::span<const double> sharing_powers, const CVec& y, int tau_p,
                              double power, double sigma2) {
    if (!y.allFinite()) throw NumericalError("mmse_estimate: non-finite observation");
    const MmseFilter filter =
        mmse_filter(R, pilot_gram(sharing_covariances, sharing_powers, tau_p, sigma2), tau_p, power);
    return {filter.W * y, filter.C};
}

}  // namespace cfmimo
