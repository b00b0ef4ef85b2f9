#pragma once

#include <span>
#include <vector>

#include "cfmimo/rng.hpp"
#include "cfmimo/types.hpp"

namespace cfmimo {

struct PilotConfig {
    int tau_p = 100;
    std::vector<int> pilot_index;  // t_k
    std::vector<double> power_mw;  // p_k

    int num_ues() const { return static_cast<int>(pilot_index.size()); }
    void validate() const;
};

/// Distinct pilots when K <= tau_p, round-robin reuse otherwise.
std::vector<int> assign_pilots(int num_ues, int tau_p);

/// P_k = {i : t_i = t_k}, each sorted ascending and containing k.
std::vector<std::vector<int>> pilot_sharing_sets(std::span<const int> pilot_index);

PilotConfig make_pilot_config(int num_ues, int tau_p, double power_mw);

/// Decorrelated pilot observations at one O-RU, one per UE:
///   y_k = sum_{i in P_k} sqrt(tau_p p_i) h_i + n_{t_k},  n_t ~ CN(0, sigma2 I).
/// UEs sharing a pilot see the same noise realization. `channels[i]` is h_{l,i}.
std::vector<CVec> observe_pilots(std::span<const CVec> channels, const PilotConfig& pilots,
                                 double sigma2, Rng& rng);

struct ChannelEstimate {
    CVec h_hat;
    CMat C;  // estimation-error covariance
};

/// Linear MMSE map for one (O-RU, UE) pair: h_hat = W y and the matching
/// error covariance. Depends only on second-order statistics.
struct MmseFilter {
    CMat W;
    CMat C;
};

/// Psi = sum_{i in P_k} tau_p p_i R_i + sigma2 I.
CMat pilot_gram(std::span<const CMat* const> sharing_covariances, std::span<const double> sharing_powers,
                int tau_p, double sigma2);

MmseFilter mmse_filter(const CMat& R, const CMat& psi, int tau_p, double power);

/// h_hat = sqrt(tau_p p_k) R Psi^{-1} y,  C = R - tau_p p_k R Psi^{-1} R.
ChannelEstimate mmse_estimate(const CMat& R, std::span<const CMat* const> sharing_covariances,
                              std::span<const double> sharing_powers, const CVec& y, int tau_p,
                              double power, double sigma2);

}  // namespace cfmimo
