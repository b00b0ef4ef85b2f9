#include "cfmimo/clustering.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include "cfmimo/errors.hpp"

namespace cfmimo {

namespace {

bool contains(const std::vector<int>& sorted, int value) {
    return std::binary_search(sorted.begin(), sorted.end(), value);
}

void erase_sorted(std::vector<int>& sorted, int value) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), value);
    if (it != sorted.end() && *it == value) sorted.erase(it);
}

void rebuild_served(ClusterState& state, int num_orus) {
    state.served.assign(num_orus, {});
    for (int k = 0; k < state.num_ues(); ++k) {
        for (int l : state.serving[k]) state.served[l].push_back(k);
    }
}

void rebuild_serving(ClusterState& state) {
    for (auto& s : state.serving) s.clear();
    for (int l = 0; l < state.num_orus(); ++l) {
        for (int k : state.served[l]) state.serving[k].push_back(l);
    }
}

void count_primaries(ClusterState& state, int num_orus) {
    state.primary_count.assign(num_orus, 0);
    for (int l : state.primary) ++state.primary_count[l];
}

ClusterState empty_state(int num_orus, int num_ues) {
    ClusterState state;
    state.primary.assign(num_ues, 0);
    state.measurement.assign(num_ues, {});
    state.serving.assign(num_ues, {});
    state.served.assign(num_orus, {});
    state.reference_power.assign(num_ues, 0.0);
    state.primary_count.assign(num_orus, 0);
    state.serving_odu.assign(num_ues, -1);
    return state;
}

std::vector<int> all_orus(int num_orus) {
    std::vector<int> out(num_orus);
    std::iota(out.begin(), out.end(), 0);
    return out;
}

// Strongest O-RU among `candidates` for UE k; ties go to the lowest index.
int strongest(const GainTable& gains, int ue, std::span<const int> candidates) {
    int best = -1;
    for (int l : candidates) {
        if (best < 0 || gains.at(l, ue) > gains.at(best, ue) ||
            (gains.at(l, ue) == gains.at(best, ue) && l < best)) {
            best = l;
        }
    }
    return best;
}

// Q_l^{(w)}: the w strongest UEs that have l in their measurement cluster and
// do not use l as primary.
std::vector<int> opportunistic_candidates(const ClusterState& state, const GainTable& gains, int oru,
                                          int width) {
    std::vector<int> candidates;
    for (int k = 0; k < state.num_ues(); ++k) {
        if (state.primary[k] != oru && contains(state.measurement[k], oru)) candidates.push_back(k);
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](int a, int b) { return gains.at(oru, a) > gains.at(oru, b); });
    if (static_cast<int>(candidates.size()) > std::max(width, 0)) candidates.resize(std::max(width, 0));
    return candidates;
}

// D_l <- Q_l^{(N - K*_l)} together with the UEs that use l as primary.
void reload_oru(ClusterState& state, const GainTable& gains, int oru, int capacity) {
    std::vector<int> next = opportunistic_candidates(state, gains, oru, capacity - state.primary_count[oru]);
    for (int k = 0; k < state.num_ues(); ++k) {
        if (state.primary[k] == oru) next.push_back(k);
    }
    std::sort(next.begin(), next.end());
    state.served[oru] = std::move(next);
}

}  // namespace

std::string_view to_string(Strategy strategy) {
    switch (strategy) {
        case Strategy::fixed: return "fixed";
        case Strategy::opportunistic: return "opportunistic";
        case Strategy::ubiquitous: return "ubiquitous";
        case Strategy::cellular: return "cellular";
    }
    return "unknown";
}

Strategy parse_strategy(std::string_view name) {
    if (name == "fixed") return Strategy::fixed;
    if (name == "opportunistic") return Strategy::opportunistic;
    if (name == "ubiquitous") return Strategy::ubiquitous;
    if (name == "cellular") return Strategy::cellular;
    throw ConfigError("strategy", "unknown strategy '" + std::string(name) +
                                      "' (expected fixed, opportunistic, ubiquitous or cellular)");
}

void HandoverConfig::validate(int num_orus) const {
    if (!(threshold_db >= 0.0)) throw ConfigError("threshold_db", "must be non-negative");
    if (!(cellular_hysteresis_db >= 0.0)) throw ConfigError("cellular_hysteresis_db", "must be non-negative");
    if (serving_size < 1) throw ConfigError("serving_size", "must be at least 1");
    if (measurement_size < serving_size) {
        throw ConfigError("measurement_size", "must be at least serving_size");
    }
    if (measurement_size > num_orus) throw ConfigError("measurement_size", "must not exceed num_orus");
}

ServingMap ClusterState::serving_map() const {
    return ServingMap::from_served_sets(num_ues(), served);
}

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::primary_change: return "primary_change";
        case EventKind::fixed_recluster: return "fixed_recluster";
        case EventKind::opportunistic_reload: return "opportunistic_reload";
        case EventKind::cellular_handover: return "cellular_handover";
    }
    return "unknown";
}

void write_events_csv(std::ostream& out, std::span<const HandoverEvent> events) {
    out << "t,ue,kind,old,new\n";
    for (const auto& e : events) {
        out << e.step << ',' << e.ue << ',' << to_string(e.kind) << ',' << e.old_value << ','
            << e.new_value << '\n';
    }
}

int select_primary(std::span<const double> gains_db) {
    int best = 0;
    for (int l = 1; l < static_cast<int>(gains_db.size()); ++l) {
        if (gains_db[l] > gains_db[best]) best = l;
    }
    return best;
}

int select_primary(const GainTable& gains, int ue) {
    int best = 0;
    for (int l = 1; l < gains.num_orus; ++l) {
        if (gains.at(l, ue) > gains.at(best, ue)) best = l;
    }
    return best;
}

std::vector<int> measurement_cluster(const Topology& topology, int primary, int size) {
    const int L = topology.num_orus();
    std::vector<double> dist(L);
    for (int l = 0; l < L; ++l) {
        dist[l] = wrap_distance(topology.oru_positions[primary], topology.oru_positions[l],
                                topology.grid_side_m);
    }
    std::vector<int> order = all_orus(L);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if ((a == primary) != (b == primary)) return a == primary;
        if (dist[a] != dist[b]) return dist[a] < dist[b];
        return a < b;
    });
    order.resize(std::clamp(size, 1, L));
    std::sort(order.begin(), order.end());
    return order;
}

FixedCluster fixed_cluster(const GainTable& gains, int ue, std::span<const int> measurement,
                           int serving_size) {
    std::vector<int> ranked(measurement.begin(), measurement.end());
    std::sort(ranked.begin(), ranked.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [&](int a, int b) { return gains.at(a, ue) > gains.at(b, ue); });
    ranked.resize(std::min<std::size_t>(ranked.size(), std::max(serving_size, 0)));
    FixedCluster out;
    for (int l : ranked) out.reference_power += gains.linear(l, ue);
    std::sort(ranked.begin(), ranked.end());
    out.serving = std::move(ranked);
    return out;
}

ClusterState fixed_init(const GainTable& gains, const Topology& topology, const HandoverConfig& config) {
    const int L = topology.num_orus();
    ClusterState state = empty_state(L, gains.num_ues);
    for (int k = 0; k < gains.num_ues; ++k) {
        state.primary[k] = select_primary(gains, k);
        state.measurement[k] = measurement_cluster(topology, state.primary[k], config.measurement_size);
        FixedCluster cluster = fixed_cluster(gains, k, state.measurement[k], config.serving_size);
        state.serving[k] = std::move(cluster.serving);
        state.reference_power[k] = cluster.reference_power;
    }
    count_primaries(state, L);
    rebuild_served(state, L);
    return state;
}

std::vector<HandoverEvent> fixed_handover_step(ClusterState& state, const GainTable& gains,
                                               const Topology& topology, const HandoverConfig& config,
                                               int step) {
    std::vector<HandoverEvent> events;
    for (int k = 0; k < state.num_ues(); ++k) {
        double power = 0.0;
        for (int l : state.serving[k]) power += gains.linear(l, k);
        if (!(linear_to_db(power) < linear_to_db(state.reference_power[k]) - config.threshold_db)) continue;

        const int old_primary = state.primary[k];
        const int new_primary = select_primary(gains, k);
        state.primary[k] = new_primary;
        state.measurement[k] = measurement_cluster(topology, new_primary, config.measurement_size);
        FixedCluster cluster = fixed_cluster(gains, k, state.measurement[k], config.serving_size);
        state.serving[k] = std::move(cluster.serving);
        state.reference_power[k] = cluster.reference_power;
        events.push_back({step, k, EventKind::fixed_recluster, old_primary, new_primary});
        if (new_primary != old_primary) {
            events.push_back({step, k, EventKind::primary_change, old_primary, new_primary});
        }
    }
    count_primaries(state, topology.num_orus());
    rebuild_served(state, topology.num_orus());
    return events;
}

ClusterState opportunistic_init(const GainTable& gains, const Topology& topology, int capacity,
                                const HandoverConfig& config) {
    const int L = topology.num_orus();
    const int K = gains.num_ues;
    if (capacity < 1) throw ConfigError("antennas_per_oru", "O-RU capacity must be at least 1");
    if (static_cast<long>(K) > static_cast<long>(capacity) * L) {
        throw ConfigError("num_ues", "exceeds the total primary capacity L * N");
    }
    ClusterState state = empty_state(L, K);

    for (int k = 0; k < K; ++k) {
        std::vector<int> ranked = all_orus(L);
        std::stable_sort(ranked.begin(), ranked.end(),
                         [&](int a, int b) { return gains.at(a, k) > gains.at(b, k); });
        const auto it = std::find_if(ranked.begin(), ranked.end(),
                                     [&](int l) { return state.primary_count[l] < capacity; });
        state.primary[k] = *it;
        ++state.primary_count[*it];
        state.measurement[k] = measurement_cluster(topology, state.primary[k], config.measurement_size);
    }
    for (int l = 0; l < L; ++l) reload_oru(state, gains, l, capacity);
    rebuild_serving(state);
    return state;
}

std::vector<HandoverEvent> opportunistic_track(ClusterState& state, const GainTable& gains,
                                               const Topology& topology, int capacity,
                                               const HandoverConfig& config, int step) {
    std::vector<HandoverEvent> events;
    const int L = topology.num_orus();

    // UE-triggered primary handovers, ascending UE index.
    for (int k = 0; k < state.num_ues(); ++k) {
        const int current = state.primary[k];
        std::vector<int> targets;
        for (int l : state.measurement[k]) {
            if (l != current && state.primary_count[l] < capacity) targets.push_back(l);
        }
        const int best = strongest(gains, k, targets);
        if (best < 0 || !(gains.at(best, k) > gains.at(current, k) + config.threshold_db)) continue;

        --state.primary_count[current];
        ++state.primary_count[best];
        state.primary[k] = best;
        state.measurement[k] = measurement_cluster(topology, best, config.measurement_size);
        for (int l = 0; l < L; ++l) {
            if (!contains(state.measurement[k], l)) erase_sorted(state.served[l], k);
        }
        reload_oru(state, gains, current, capacity);
        reload_oru(state, gains, best, capacity);
        events.push_back({step, k, EventKind::primary_change, current, best});
    }

    // O-DU-side opportunistic reloads, ascending O-RU index.
    for (int l = 0; l < L; ++l) {
        const auto& members = state.served[l];
        double weakest = 0.0;
        for (std::size_t j = 0; j < members.size(); ++j) {
            const double g = gains.at(l, members[j]);
            if (j == 0 || g < weakest) weakest = g;
        }
        bool trigger = false;
        bool has_unserved = false;
        for (int k = 0; k < state.num_ues() && !trigger; ++k) {
            if (contains(members, k) || !contains(state.measurement[k], l)) continue;
            has_unserved = true;
            if (!members.empty() && gains.at(l, k) > weakest + config.threshold_db) trigger = true;
        }
        // Idle resources are filled without waiting for the hysteresis margin.
        if (!trigger && has_unserved && static_cast<int>(members.size()) < capacity) trigger = true;
        if (!trigger) continue;
        reload_oru(state, gains, l, capacity);
        events.push_back({step, -1, EventKind::opportunistic_reload, l, l});
    }

    rebuild_serving(state);
    return events;
}

ClusterState baseline_assign(Strategy strategy, const GainTable& gains, const Topology& topology) {
    const int L = topology.num_orus();
    const int K = gains.num_ues;
    ClusterState state = empty_state(L, K);
    for (int k = 0; k < K; ++k) {
        const int best = select_primary(gains, k);
        state.primary[k] = best;
        if (strategy == Strategy::ubiquitous) {
            state.serving[k] = all_orus(L);
        } else if (strategy == Strategy::cellular) {
            state.serving_odu[k] = topology.odu_of_oru[best];
            state.serving[k] = topology.orus_of_odu(state.serving_odu[k]);
        } else {
            throw ConfigError("strategy", "baseline_assign expects ubiquitous or cellular");
        }
        state.measurement[k] = state.serving[k];
    }
    count_primaries(state, L);
    rebuild_served(state, L);
    return state;
}

std::vector<HandoverEvent> cellular_handover_step(ClusterState& state, const GainTable& gains,
                                                  const Topology& topology, double hysteresis_db,
                                                  int step) {
    std::vector<HandoverEvent> events;
    const int L = topology.num_orus();
    for (int k = 0; k < state.num_ues(); ++k) {
        const int odu = state.serving_odu[k];
        std::vector<int> inside, outside;
        for (int l = 0; l < L; ++l) (topology.odu_of_oru[l] == odu ? inside : outside).push_back(l);
        const int best_inside = strongest(gains, k, inside);
        const int best_outside = strongest(gains, k, outside);
        if (best_outside >= 0 && gains.at(best_outside, k) > gains.at(best_inside, k) + hysteresis_db) {
            const int next = topology.odu_of_oru[best_outside];
            state.serving_odu[k] = next;
            state.serving[k] = topology.orus_of_odu(next);
            state.measurement[k] = state.serving[k];
            state.primary[k] = best_outside;
            events.push_back({step, k, EventKind::cellular_handover, odu, next});
        } else {
            state.primary[k] = best_inside;
        }
    }
    count_primaries(state, L);
    rebuild_served(state, L);
    return events;
}

ClusterState initial_clusters(const HandoverConfig& config, const GainTable& gains,
                              const Topology& topology, int capacity) {
    switch (config.strategy) {
        case Strategy::fixed: return fixed_init(gains, topology, config);
        case Strategy::opportunistic: return opportunistic_init(gains, topology, capacity, config);
        case Strategy::ubiquitous:
        case Strategy::cellular: return baseline_assign(config.strategy, gains, topology);
    }
    throw ConfigError("strategy", "unhandled strategy");
}

std::vector<HandoverEvent> update_clusters(ClusterState& state, const HandoverConfig& config,
                                           const GainTable& gains, const Topology& topology,
                                           int capacity, int step) {
    switch (config.strategy) {
        case Strategy::fixed: return fixed_handover_step(state, gains, topology, config, step);
        case Strategy::opportunistic:
            return opportunistic_track(state, gains, topology, capacity, config, step);
        case Strategy::cellular:
            return cellular_handover_step(state, gains, topology, config.cellular_hysteresis_db, step);
        case Strategy::ubiquitous:
            for (int k = 0; k < state.num_ues(); ++k) state.primary[k] = select_primary(gains, k);
            count_primaries(state, topology.num_orus());
            return {};
    }
    return {};
}

std::string check_invariants(const ClusterState& state, int capacity, Strategy strategy) {
    const int K = state.num_ues();
    const int L = state.num_orus();
    std::vector<int> primaries(L, 0);
    for (int k = 0; k < K; ++k) {
        const int p = state.primary[k];
        if (p < 0 || p >= L) return "UE " + std::to_string(k) + " has invalid primary";
        ++primaries[p];
        if (!contains(state.serving[k], p)) {
            return "primary O-RU " + std::to_string(p) + " missing from serving cluster of UE " +
                   std::to_string(k);
        }
        for (int l : state.serving[k]) {
            if (!contains(state.measurement[k], l)) {
                return "serving O-RU " + std::to_string(l) + " outside measurement cluster of UE " +
                       std::to_string(k);
            }
            if (!contains(state.served[l], k)) {
                return "O-RU " + std::to_string(l) + " in M^s of UE " + std::to_string(k) +
                       " but UE not in D_l";
            }
        }
    }
    for (int l = 0; l < L; ++l) {
        if (primaries[l] != state.primary_count[l]) {
            return "primary count of O-RU " + std::to_string(l) + " is stale";
        }
        for (int k : state.served[l]) {
            if (!contains(state.serving[k], l)) {
                return "UE " + std::to_string(k) + " in D_l of O-RU " + std::to_string(l) +
                       " but O-RU not in M^s";
            }
        }
        if (strategy == Strategy::opportunistic) {
            if (static_cast<int>(state.served[l].size()) > capacity) {
                return "O-RU " + std::to_string(l) + " serves more than N UEs";
            }
            if (primaries[l] > capacity) {
                return "O-RU " + std::to_string(l) + " is primary for more than N UEs";
            }
        }
    }
    return {};
}

}  // namespace cfmimo
