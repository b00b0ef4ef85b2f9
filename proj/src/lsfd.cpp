#include "cfmimo/lsfd.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cfmimo/errors.hpp"
#include "cfmimo/simd/kernels.hpp"

namespace cfmimo {

using RowMajorCMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

CMat lp_mmse_combiners(const CMat& estimates, const CMat& error_sum, std::span<const double> powers,
                       double sigma2) {
    const Eigen::Index n = estimates.rows();
    CMat scaled = estimates;
    for (Eigen::Index j = 0; j < scaled.cols(); ++j) scaled.col(j) *= powers[j];
    CMat gram = error_sum + scaled * estimates.adjoint();
    gram.diagonal().array() += sigma2;
    Eigen::LLT<CMat> llt(gram);
    if (llt.info() != Eigen::Success || n == 0) {
        throw NumericalError("lp_mmse_combiners: combining matrix not positive definite");
    }
    return llt.solve(scaled);
}

CVec lp_mmse_combiner(std::span<const int> served, std::span<const ChannelEstimate> estimates,
                      std::span<const double> powers, double sigma2, int ue) {
    const Eigen::Index n = estimates.empty() ? 0 : estimates.front().h_hat.size();
    const auto it = std::find(served.begin(), served.end(), ue);
    if (it == served.end()) return CVec::Zero(n);

    CMat hhat(n, static_cast<Eigen::Index>(served.size()));
    CMat error_sum = CMat::Zero(n, n);
    std::vector<double> served_powers(served.size());
    for (std::size_t j = 0; j < served.size(); ++j) {
        hhat.col(j) = estimates[j].h_hat;
        served_powers[j] = powers[served[j]];
        error_sum += powers[served[j]] * estimates[j].C;
    }
    const CMat v = lp_mmse_combiners(hhat, error_sum, served_powers, sigma2);
    return v.col(it - served.begin());
}

CVec EffectiveGainStats::embedded_mean() const {
    CVec out = CVec::Zero(num_orus);
    for (std::size_t j = 0; j < support.size(); ++j) out[support[j]] = mean_gain[j];
    return out;
}

CMat EffectiveGainStats::embedded_second_moment(std::size_t interferer_slot) const {
    CMat out = CMat::Zero(num_orus, num_orus);
    const CMat& m = second_moments[interferer_slot];
    for (std::size_t r = 0; r < support.size(); ++r) {
        for (std::size_t c = 0; c < support.size(); ++c) out(support[r], support[c]) = m(r, c);
    }
    return out;
}

Eigen::VectorXd EffectiveGainStats::embedded_noise() const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(num_orus);
    for (std::size_t j = 0; j < support.size(); ++j) out[support[j]] = noise_diag[j];
    return out;
}

GainStatisticsEstimator::GainStatisticsEstimator(const LargeScaleStats& stats, const ServingMap& serving,
                                                 const PilotConfig& pilots, double sigma2)
    : stats_(stats), serving_(serving), pilots_(pilots), sigma2_(sigma2), cache_(stats.num_orus) {
    const int K = stats.num_ues;
    const int N = stats.antennas;
    const auto sharing = pilot_sharing_sets(pilots.pilot_index);

    for (int l = 0; l < stats.num_orus; ++l) {
        const auto& served = serving.served_ues[l];
        if (served.empty()) continue;
        active_orus_.push_back(l);
        OruCache& cache = cache_[l];
        cache.factors.resize(K);
        for (int i = 0; i < K; ++i) cache.factors[i] = covariance_factor(stats.R(l, i));
        cache.error_sum = CMat::Zero(N, N);
        for (int k : served) {
            std::vector<const CMat*> covs;
            std::vector<double> powers;
            for (int i : sharing[k]) {
                covs.push_back(&stats.R(l, i));
                powers.push_back(pilots.power_mw[i]);
            }
            const CMat psi = pilot_gram(covs, powers, pilots.tau_p, sigma2);
            MmseFilter filter = mmse_filter(stats.R(l, k), psi, pilots.tau_p, pilots.power_mw[k]);
            cache.error_sum += pilots.power_mw[k] * filter.C;
            cache.filters.push_back(std::move(filter.W));
        }
    }
}

std::vector<EffectiveGainStats> GainStatisticsEstimator::estimate(int n_mc, Rng& rng,
                                                                  std::span<const int> ues) const {
    if (n_mc < 1) throw NumericalError("effective_gain_stats: n_mc must be at least 1");
    const int K = stats_.num_ues;
    const int N = stats_.antennas;

    std::vector<int> targets(ues.begin(), ues.end());
    if (targets.empty()) {
        targets.resize(K);
        for (int k = 0; k < K; ++k) targets[k] = k;
    }

    struct Accumulator {
        std::vector<int> orus;        // support
        std::vector<int> slots;       // position of the UE inside D_l
        std::vector<int> interferers;
        std::vector<cplx> mean;
        std::vector<double> abs2;
        std::vector<double> vnorm;
        std::vector<std::vector<cplx>> second;  // row-major s x s per interferer
    };
    std::vector<Accumulator> acc(targets.size());
    for (std::size_t t = 0; t < targets.size(); ++t) {
        const int k = targets[t];
        Accumulator& a = acc[t];
        a.orus = serving_.serving_orus[k];
        for (int l : a.orus) {
            const auto& served = serving_.served_ues[l];
            a.slots.push_back(static_cast<int>(std::lower_bound(served.begin(), served.end(), k) - served.begin()));
        }
        a.interferers = serving_.interferers(k);
        const std::size_t s = a.orus.size();
        a.mean.assign(s, 0.0);
        a.abs2.assign(s, 0.0);
        a.vnorm.assign(s, 0.0);
        a.second.assign(a.interferers.size(), std::vector<cplx>(s * s, 0.0));
    }

    std::vector<std::vector<CVec>> h(stats_.num_orus);
    std::vector<CMat> combiners(stats_.num_orus);
    std::vector<cplx> g;
    std::vector<double> served_powers;

    for (int draw = 0; draw < n_mc; ++draw) {
        for (int l : active_orus_) {
            const OruCache& cache = cache_[l];
            auto& hl = h[l];
            hl.resize(K);
            for (int i = 0; i < K; ++i) hl[i] = sample_channel(cache.factors[i], rng);
            const auto y = observe_pilots(hl, pilots_, sigma2_, rng);

            const auto& served = serving_.served_ues[l];
            CMat hhat(N, static_cast<Eigen::Index>(served.size()));
            served_powers.resize(served.size());
            for (std::size_t j = 0; j < served.size(); ++j) {
                hhat.col(j) = cache.filters[j] * y[served[j]];
                served_powers[j] = pilots_.power_mw[served[j]];
            }
            combiners[l] = lp_mmse_combiners(hhat, cache.error_sum, served_powers, sigma2_);
        }

        for (std::size_t t = 0; t < targets.size(); ++t) {
            const int k = targets[t];
            Accumulator& a = acc[t];
            const std::size_t s = a.orus.size();
            g.resize(s);
            for (std::size_t j = 0; j < s; ++j) {
                a.vnorm[j] += combiners[a.orus[j]].col(a.slots[j]).squaredNorm();
            }
            for (std::size_t slot = 0; slot < a.interferers.size(); ++slot) {
                const int i = a.interferers[slot];
                for (std::size_t j = 0; j < s; ++j) {
                    const int l = a.orus[j];
                    const cplx* v = combiners[l].col(a.slots[j]).data();
                    g[j] = simd::dot_conj({v, static_cast<std::size_t>(N)},
                                          {h[l][i].data(), static_cast<std::size_t>(N)});
                }
                simd::herm_rank1_update(a.second[slot], g);
                if (i == k) {
                    for (std::size_t j = 0; j < s; ++j) {
                        a.mean[j] += g[j];
                        a.abs2[j] += std::norm(g[j]);
                    }
                }
            }
        }
    }

    const double inv = 1.0 / n_mc;
    std::vector<EffectiveGainStats> out(targets.size());
    for (std::size_t t = 0; t < targets.size(); ++t) {
        Accumulator& a = acc[t];
        EffectiveGainStats& st = out[t];
        const auto s = static_cast<Eigen::Index>(a.orus.size());
        st.ue = targets[t];
        st.num_orus = stats_.num_orus;
        st.support = a.orus;
        st.interferers = a.interferers;
        st.samples = n_mc;
        st.mean_gain.resize(s);
        st.noise_diag.resize(s);
        double worst = 0.0;
        for (Eigen::Index j = 0; j < s; ++j) {
            const cplx m = a.mean[j] * inv;
            st.mean_gain[j] = m;
            st.noise_diag[j] = sigma2_ * a.vnorm[j] * inv;
            const double var = std::max(0.0, a.abs2[j] * inv - std::norm(m));
            const double mag = std::abs(m);
            const double rel = mag > 0.0 ? std::sqrt(var * inv) / mag : 0.0;
            worst = std::max(worst, rel);
        }
        st.max_relative_stderr = worst;
        st.second_moments.reserve(a.interferers.size());
        for (auto& buf : a.second) {
            // The rank-1 kernel produces exactly Hermitian accumulators.
            st.second_moments.push_back(Eigen::Map<const RowMajorCMat>(buf.data(), s, s) * inv);
        }
    }
    return out;
}

std::vector<EffectiveGainStats> effective_gain_stats(const LargeScaleStats& stats,
                                                     const ServingMap& serving,
                                                     const PilotConfig& pilots, double sigma2,
                                                     int n_mc, Rng& rng) {
    return GainStatisticsEstimator(stats, serving, pilots, sigma2).estimate(n_mc, rng);
}

EffectiveGainStats effective_gain_stats(const LargeScaleStats& stats, const ServingMap& serving,
                                        const PilotConfig& pilots, double sigma2, int n_mc, Rng& rng,
                                        int ue) {
    const int target[1] = {ue};
    return GainStatisticsEstimator(stats, serving, pilots, sigma2).estimate(n_mc, rng, target).front();
}

namespace {

CMat interference_matrix(const EffectiveGainStats& stats, std::span<const double> powers) {
    const auto s = static_cast<Eigen::Index>(stats.support.size());
    CMat b = CMat::Zero(s, s);
    for (std::size_t slot = 0; slot < stats.interferers.size(); ++slot) {
        b += powers[stats.interferers[slot]] * stats.second_moments[slot];
    }
    return b;
}

std::string describe_support(const std::vector<int>& support) {
    std::ostringstream os;
    os << '{';
    for (std::size_t j = 0; j < support.size(); ++j) os << (j ? "," : "") << support[j];
    os << '}';
    return os.str();
}

}  // namespace

LsfdWeights lsfd_weights(const EffectiveGainStats& stats, std::span<const double> powers) {
    LsfdWeights out{CVec::Zero(stats.num_orus), stats.support};
    if (stats.support.empty()) return out;

    CMat b = interference_matrix(stats, powers);
    b.diagonal() += stats.noise_diag.cast<cplx>();
    Eigen::LLT<CMat> llt(b);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("lsfd_weights: singular LSFD matrix on O-RU support " +
                             describe_support(stats.support));
    }
    const CVec a = llt.solve(powers[stats.ue] * stats.mean_gain);
    if (!a.allFinite()) {
        throw NumericalError("lsfd_weights: non-finite weights on O-RU support " +
                             describe_support(stats.support));
    }
    for (std::size_t j = 0; j < stats.support.size(); ++j) out.weights[stats.support[j]] = a[j];
    return out;
}

SinrResult uplink_sinr(const CVec& weights, const EffectiveGainStats& stats,
                       std::span<const double> powers) {
    const auto s = static_cast<Eigen::Index>(stats.support.size());
    CVec a(s);
    for (Eigen::Index j = 0; j < s; ++j) a[j] = weights[stats.support[j]];

    const double pk = powers[stats.ue];
    const double signal = pk * std::norm(a.dot(stats.mean_gain));  // dot() conjugates a
    CMat b = interference_matrix(stats, powers);
    b.diagonal() += stats.noise_diag.cast<cplx>();
    const double denom = (a.dot(b * a)).real() - signal;

    SinrResult out;
    if (!(denom > 0.0) || !std::isfinite(denom) || !std::isfinite(signal)) return out;
    out.sinr = signal / denom;
    out.se = std::log2(1.0 + out.sinr);
    out.valid = true;
    return out;
}

FusionResult fuse_estimates(const CVec& local_estimates, const CVec& weights,
                            std::span<const int> odu_of_oru, int num_odus, int primary_odu) {
    FusionResult out;
    out.per_odu.assign(num_odus, cplx(0.0, 0.0));
    std::vector<bool> contributes(num_odus, false);
    for (Eigen::Index l = 0; l < weights.size(); ++l) {
        if (weights[l] == cplx(0.0, 0.0)) continue;
        const int c = odu_of_oru[l];
        out.per_odu[c] += std::conj(weights[l]) * local_estimates[l];
        contributes[c] = true;
    }
    for (int c = 0; c < num_odus; ++c) {
        if (!contributes[c]) continue;
        out.estimate += out.per_odu[c];
        if (c != primary_odu) out.forwarding_odus.push_back(c);
    }
    return out;
}

cplx flat_fusion(const CVec& local_estimates, const CVec& weights) {
    cplx sum(0.0, 0.0);
    for (Eigen::Index l = 0; l < weights.size(); ++l) {
        if (weights[l] == cplx(0.0, 0.0)) continue;
        sum += std::conj(weights[l]) * local_estimates[l];
    }
    return sum;
}

}  // namespace cfmimo
