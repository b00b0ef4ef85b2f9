#include "cfmimo/signaling.hpp"

#include <map>
#include <ostream>
#include <set>
#include <stdexcept>

#include "cfmimo/errors.hpp"

namespace cfmimo {

void FrameConfig::validate() const {
    if (tau_u < 1) throw ConfigError("tau_u", "must be at least 1");
    if (blocks_per_step < 1) throw ConfigError("blocks_per_step", "must be at least 1");
}

std::string_view to_string(CounterClass cls) {
    switch (cls) {
        case CounterClass::fronthaul: return "fronthaul";
        case CounterClass::inter_odu: return "inter_odu";
        case CounterClass::ric: return "ric";
        case CounterClass::lsfd_stats: return "lsfd_stats";
    }
    return "unknown";
}

LedgerDelta account_data_plane(const ClusterState& state, const Topology& topology,
                               const FrameConfig& frame, int step) {
    LedgerDelta delta;
    const std::int64_t per_block = static_cast<std::int64_t>(frame.tau_u) * frame.blocks_per_step;
    for (int l = 0; l < state.num_orus(); ++l) {
        if (state.served[l].empty()) continue;
        delta.push_back({step, CounterClass::fronthaul, l, topology.odu_of_oru[l],
                         per_block * static_cast<std::int64_t>(state.served[l].size())});
    }
    for (int k = 0; k < state.num_ues(); ++k) {
        const int primary_odu = topology.odu_of_oru[state.primary[k]];
        std::set<int> helpers;
        for (int l : state.serving[k]) {
            if (topology.odu_of_oru[l] != primary_odu) helpers.insert(topology.odu_of_oru[l]);
        }
        for (int c : helpers) {
            delta.push_back({step, CounterClass::inter_odu, c, primary_odu, per_block});
            delta.push_back({step, CounterClass::lsfd_stats, c, primary_odu, 1});
        }
    }
    return delta;
}

LedgerDelta account_control_plane(std::span<const HandoverEvent> events, Strategy strategy,
                                  const ClusterState& state, const Topology& topology, int step) {
    LedgerDelta delta;
    for (const auto& e : events) {
        if (strategy == Strategy::fixed && e.kind == EventKind::fixed_recluster) {
            std::map<int, std::int64_t> reports;
            for (int l : state.measurement[e.ue]) ++reports[topology.odu_of_oru[l]];
            for (const auto& [odu, count] : reports) {
                delta.push_back({step, CounterClass::ric, odu, kRicNode, count});
            }
        } else if (strategy == Strategy::opportunistic && e.kind == EventKind::primary_change) {
            delta.push_back({step, CounterClass::ric, topology.odu_of_oru[e.new_value], kRicNode, 1});
        } else if (strategy == Strategy::cellular && e.kind == EventKind::cellular_handover) {
            delta.push_back({step, CounterClass::ric, e.new_value, kRicNode, 1});
        }
    }
    return delta;
}

SignalingLedger::SignalingLedger(int num_orus, int num_odus)
    : num_orus_(num_orus),
      num_odus_(num_odus),
      fronthaul_(num_orus, 0),
      inter_odu_(static_cast<std::size_t>(num_odus) * num_odus, 0),
      ric_(num_odus, 0),
      lsfd_stats_(static_cast<std::size_t>(num_odus) * num_odus, 0) {}

void SignalingLedger::apply(const LedgerDelta& delta) {
    for (const auto& e : delta) {
        if (e.amount < 0) throw std::invalid_argument("ledger amounts must be non-negative");
        switch (e.cls) {
            case CounterClass::fronthaul: fronthaul_.at(e.source) += e.amount; break;
            case CounterClass::inter_odu: inter_odu_.at(e.source * num_odus_ + e.destination) += e.amount; break;
            case CounterClass::ric: ric_.at(e.source) += e.amount; break;
            case CounterClass::lsfd_stats: lsfd_stats_.at(e.source * num_odus_ + e.destination) += e.amount; break;
        }
        entries_.push_back(e);
    }
}

void SignalingLedger::merge(const SignalingLedger& other) {
    if (num_orus_ == 0 && num_odus_ == 0) *this = SignalingLedger(other.num_orus_, other.num_odus_);
    apply(other.entries_);
}

std::int64_t SignalingLedger::total(CounterClass cls) const {
    std::int64_t sum = 0;
    for (const auto& e : entries_) {
        if (e.cls == cls) sum += e.amount;
    }
    return sum;
}

std::int64_t SignalingLedger::total(CounterClass cls, int step) const {
    std::int64_t sum = 0;
    for (const auto& e : entries_) {
        if (e.cls == cls && e.step == step) sum += e.amount;
    }
    return sum;
}

void SignalingLedger::write_csv(std::ostream& out) const {
    out << "step,counter_class,source,destination,amount\n";
    for (const auto& e : entries_) {
        out << e.step << ',' << to_string(e.cls) << ',' << e.source << ',';
        if (e.destination == kRicNode) {
            out << "ric";
        } else {
            out << e.destination;
        }
        out << ',' << e.amount << '\n';
    }
}

}  // namespace cfmimo
