#pragma once

#include <span>
#include <vector>

#include "cfmimo/channel.hpp"
#include "cfmimo/pilot.hpp"
#include "cfmimo/rng.hpp"
#include "cfmimo/serving.hpp"
#include "cfmimo/types.hpp"

namespace cfmimo {

/// LP-MMSE combiner of UE k at one O-RU:
///   v = p_k (sum_{i in D_l} p_i (h_hat_i h_hat_i^H + C_i) + sigma2 I)^{-1} h_hat_k.
/// `served` lists D_l and `estimates` is aligned with it; `powers` is indexed by
/// UE. Returns the zero vector when k is not in D_l.
CVec lp_mmse_combiner(std::span<const int> served, std::span<const ChannelEstimate> estimates,
                      std::span<const double> powers, double sigma2, int ue);

/// Batched form: column j of the result is the combiner of the UE whose
/// estimate is column j of `estimates`. `error_sum` is sum_i p_i C_i.
CMat lp_mmse_combiners(const CMat& estimates, const CMat& error_sum, std::span<const double> powers,
                       double sigma2);

/// Monte-Carlo effective-gain statistics of one UE, stored on its serving
/// support M^s_k. The l-th entry of g_ki is v_{l,k}^H h_{l,i}; O-RUs outside the
/// support contribute exact zeros, recovered by the embedded_* accessors.
struct EffectiveGainStats {
    int ue = -1;
    int num_orus = 0;
    std::vector<int> support;
    std::vector<int> interferers;
    CVec mean_gain;                     // E[g_kk]
    std::vector<CMat> second_moments;   // E[g_ki g_ki^H], aligned with `interferers`
    Eigen::VectorXd noise_diag;         // diagonal of F_k = sigma2 E[||v_{l,k}||^2]
    int samples = 0;
    double max_relative_stderr = 0.0;   // over the entries of E[g_kk]

    bool undersampled() const { return max_relative_stderr > 0.05; }
    CVec embedded_mean() const;
    CMat embedded_second_moment(std::size_t interferer_slot) const;
    Eigen::VectorXd embedded_noise() const;
};

/// Joint draws of (h, h_hat) for every UE at once. Construction precomputes
/// covariance factors and MMSE filters for the O-RUs that serve anyone.
class GainStatisticsEstimator {
public:
    GainStatisticsEstimator(const LargeScaleStats& stats, const ServingMap& serving,
                            const PilotConfig& pilots, double sigma2);

    /// Statistics for the requested UEs (all UEs when `ues` is empty), from
    /// `n_mc` draws of `rng`.
    std::vector<EffectiveGainStats> estimate(int n_mc, Rng& rng, std::span<const int> ues = {}) const;

private:
    struct OruCache {
        std::vector<CMat> factors;   // per UE, A with A A^H = R_{l,i}
        std::vector<CMat> filters;   // per served UE, aligned with D_l
        CMat error_sum;              // sum_{i in D_l} p_i C_{l,i}
    };

    const LargeScaleStats& stats_;
    const ServingMap& serving_;
    const PilotConfig& pilots_;
    double sigma2_;
    std::vector<int> active_orus_;
    std::vector<OruCache> cache_;    // indexed by O-RU; empty for inactive ones
};

std::vector<EffectiveGainStats> effective_gain_stats(const LargeScaleStats& stats,
                                                     const ServingMap& serving,
                                                     const PilotConfig& pilots, double sigma2,
                                                     int n_mc, Rng& rng);

EffectiveGainStats effective_gain_stats(const LargeScaleStats& stats, const ServingMap& serving,
                                        const PilotConfig& pilots, double sigma2, int n_mc, Rng& rng,
                                        int ue);

struct LsfdWeights {
    CVec weights;               // a_k over all L O-RUs, zero outside the support
    std::vector<int> support;
};

/// n-opt LSFD: a_k = p_k (sum_{i in S_k} p_i E[g_ki g_ki^H] + F_k)^{-1} E[g_kk],
/// solved on the serving support. Throws NumericalError (naming the support)
/// when that matrix is not positive definite.
LsfdWeights lsfd_weights(const EffectiveGainStats& stats, std::span<const double> powers);

struct SinrResult {
    double sinr = 0.0;
    double se = 0.0;
    bool valid = false;
};

/// Uplink SINR of a combining vector `weights` (length L) and SE = log2(1 + SINR).
/// A non-positive or non-finite denominator yields an invalid sample.
SinrResult uplink_sinr(const CVec& weights, const EffectiveGainStats& stats,
                       std::span<const double> powers);

struct FusionResult {
    cplx estimate{0.0, 0.0};
    std::vector<cplx> per_odu;          // partial sums s_k^c, one per O-DU
    std::vector<int> forwarding_odus;   // O-DUs other than the primary that forward a partial sum
};

/// Two-stage fusion: each O-DU sums conj(a_l) s_l over its own O-RUs in
/// ascending order, then the primary O-DU adds the partial sums in ascending
/// O-DU order.
FusionResult fuse_estimates(const CVec& local_estimates, const CVec& weights,
                            std::span<const int> odu_of_oru, int num_odus, int primary_odu);

/// Reference single-stage sum over O-RUs in ascending order.
cplx flat_fusion(const CVec& local_estimates, const CVec& weights);

}  // namespace cfmimo
