#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "cfmimo/clustering.hpp"
#include "cfmimo/geometry.hpp"

namespace cfmimo {

struct FrameConfig {
    int tau_u = 100;           // data symbols per coherence block
    int blocks_per_step = 1;   // coherence blocks per simulation step

    void validate() const;
};

enum class CounterClass {
    fronthaul,    // O-RU -> O-DU data samples
    inter_odu,    // O-DU -> primary O-DU data samples
    ric,          // O-DU -> Near-RT RIC control messages
    lsfd_stats,   // O-DU -> primary O-DU effective-gain statistics messages
};

std::string_view to_string(CounterClass cls);

/// Destination id used for the Near-RT RIC.
constexpr int kRicNode = -1;

struct LedgerEntry {
    int step = 0;
    CounterClass cls = CounterClass::fronthaul;
    int source = 0;
    int destination = 0;
    std::int64_t amount = 0;
};

using LedgerDelta = std::vector<LedgerEntry>;

/// Fronthaul tau_u |D_l| per O-RU and, for each UE, tau_u samples from every
/// non-primary O-DU owning part of its serving cluster; also one statistics
/// message per such (O-DU, UE) pair.
LedgerDelta account_data_plane(const ClusterState& state, const Topology& topology,
                               const FrameConfig& frame, int step);

/// Near-RT RIC messages caused by this step's events: |M^m_k| gain reports per
/// fixed recluster (one per reporting O-DU and O-RU), one notification per
/// opportunistic primary change or cellular handover.
LedgerDelta account_control_plane(std::span<const HandoverEvent> events, Strategy strategy,
                                  const ClusterState& state, const Topology& topology, int step);

/// Append-only ledger with cumulative per-link totals.
class SignalingLedger {
public:
    SignalingLedger() = default;
    SignalingLedger(int num_orus, int num_odus);

    void apply(const LedgerDelta& delta);
    void merge(const SignalingLedger& other);

    std::int64_t total(CounterClass cls) const;
    std::int64_t total(CounterClass cls, int step) const;
    std::span<const std::int64_t> fronthaul_per_oru() const { return fronthaul_; }
    std::int64_t inter_odu(int from, int to) const { return inter_odu_[from * num_odus_ + to]; }
    std::span<const std::int64_t> ric_per_odu() const { return ric_; }
    const std::vector<LedgerEntry>& entries() const { return entries_; }

    /// CSV with header `step,counter_class,source,destination,amount`.
    void write_csv(std::ostream& out) const;

private:
    int num_orus_ = 0;
    int num_odus_ = 0;
    std::vector<std::int64_t> fronthaul_;
    std::vector<std::int64_t> inter_odu_;
    std::vector<std::int64_t> ric_;
    std::vector<std::int64_t> lsfd_stats_;
    std::vector<LedgerEntry> entries_;
};

}  // namespace cfmimo
