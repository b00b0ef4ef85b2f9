#pragma once

#include <vector>

namespace cfmimo {

/// Serving relation between O-RUs and UEs, held both ways: D_l (UEs served by
/// O-RU l) and M^s_k (O-RUs serving UE k). Both lists are sorted ascending.
struct ServingMap {
    int num_orus = 0;
    int num_ues = 0;
    std::vector<std::vector<int>> served_ues;
    std::vector<std::vector<int>> serving_orus;

    static ServingMap from_served_sets(int num_ues, std::vector<std::vector<int>> served);
    static ServingMap from_serving_clusters(int num_orus, std::vector<std::vector<int>> serving);

    bool serves(int oru, int ue) const;

    /// S_k: UEs that share at least one serving O-RU with k (k included).
    std::vector<int> interferers(int ue) const;
};

}  // namespace cfmimo
