#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cfmimo/channel.hpp"
#include "cfmimo/geometry.hpp"
#include "cfmimo/serving.hpp"

namespace cfmimo {

enum class Strategy { fixed, opportunistic, ubiquitous, cellular };

std::string_view to_string(Strategy strategy);
/// Throws ConfigError("strategy", ...) on unknown names.
Strategy parse_strategy(std::string_view name);

struct HandoverConfig {
    Strategy strategy = Strategy::fixed;
    /// Hysteresis of the fixed (cluster power) or opportunistic (primary and reload) trigger.
    double threshold_db = 2.0;
    int serving_size = 16;
    int measurement_size = 25;
    double cellular_hysteresis_db = 2.0;

    void validate(int num_orus) const;
};

/// Cluster bookkeeping for every UE and O-RU. `serving` (M^s_k) and `served`
/// (D_l) always describe the same relation; all sets are sorted ascending.
struct ClusterState {
    std::vector<int> primary;                   // l*_k
    std::vector<std::vector<int>> measurement;  // M^m_k
    std::vector<std::vector<int>> serving;      // M^s_k
    std::vector<std::vector<int>> served;       // D_l
    std::vector<double> reference_power;        // P_bar_k, linear (fixed strategy)
    std::vector<int> primary_count;             // K*_l
    std::vector<int> serving_odu;               // cellular baseline only

    int num_ues() const { return static_cast<int>(primary.size()); }
    int num_orus() const { return static_cast<int>(served.size()); }
    ServingMap serving_map() const;
};

enum class EventKind { primary_change, fixed_recluster, opportunistic_reload, cellular_handover };

std::string_view to_string(EventKind kind);

/// `old_value`/`new_value` hold O-RU indices, except for cellular handovers
/// (O-DU indices). Reload events are per O-RU: ue = -1 and both values carry
/// the O-RU index.
struct HandoverEvent {
    int step = 0;
    int ue = -1;
    EventKind kind = EventKind::primary_change;
    int old_value = -1;
    int new_value = -1;
};

/// CSV with header `t,ue,kind,old,new`.
void write_events_csv(std::ostream& out, std::span<const HandoverEvent> events);

/// Argmax over linear gains; ties go to the lowest index.
int select_primary(std::span<const double> gains_db);
int select_primary(const GainTable& gains, int ue);

/// The `size` O-RUs nearest (torus distance) to `primary`, primary included;
/// distance ties broken by index. Returned sorted by index.
std::vector<int> measurement_cluster(const Topology& topology, int primary, int size);

struct FixedCluster {
    std::vector<int> serving;
    double reference_power = 0.0;  // sum of linear gains over `serving`
};

/// O_k[t]: the `serving_size` strongest O-RUs of the measurement cluster.
FixedCluster fixed_cluster(const GainTable& gains, int ue, std::span<const int> measurement,
                           int serving_size);

ClusterState fixed_init(const GainTable& gains, const Topology& topology, const HandoverConfig& config);

/// Reclusters UE k when 10 log10(P_k[t]) < 10 log10(P_bar_k) - threshold.
std::vector<HandoverEvent> fixed_handover_step(ClusterState& state, const GainTable& gains,
                                               const Topology& topology, const HandoverConfig& config,
                                               int step);

/// Initial opportunistic formation: primaries by argmax (spilling to the next
/// best O-RU with free primary capacity), then every O-RU tops up to `capacity`
/// UEs with the strongest candidates whose measurement cluster contains it.
ClusterState opportunistic_init(const GainTable& gains, const Topology& topology, int capacity,
                                const HandoverConfig& config);

/// Opportunistic cluster tracking for one time step.
std::vector<HandoverEvent> opportunistic_track(ClusterState& state, const GainTable& gains,
                                               const Topology& topology, int capacity,
                                               const HandoverConfig& config, int step);

/// Ubiquitous (all O-RUs serve every UE) or cellular (all O-RUs of the O-DU
/// owning the strongest O-RU) assignment.
ClusterState baseline_assign(Strategy strategy, const GainTable& gains, const Topology& topology);

std::vector<HandoverEvent> cellular_handover_step(ClusterState& state, const GainTable& gains,
                                                  const Topology& topology, double hysteresis_db,
                                                  int step);

/// Initial clusters for the configured strategy.
ClusterState initial_clusters(const HandoverConfig& config, const GainTable& gains,
                              const Topology& topology, int capacity);

/// One handover/tracking step for the configured strategy.
std::vector<HandoverEvent> update_clusters(ClusterState& state, const HandoverConfig& config,
                                           const GainTable& gains, const Topology& topology,
                                           int capacity, int step);

/// Empty when all invariants hold, otherwise a description of the first violation.
/// The per-O-RU capacity is only enforced for the opportunistic strategy.
std::string check_invariants(const ClusterState& state, int capacity, Strategy strategy);

}  // namespace cfmimo
