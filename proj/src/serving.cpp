#include "cfmimo/serving.hpp"

#include <algorithm>

namespace cfmimo {

ServingMap ServingMap::from_served_sets(int num_ues, std::vector<std::vector<int>> served) {
    ServingMap map;
    map.num_orus = static_cast<int>(served.size());
    map.num_ues = num_ues;
    map.serving_orus.assign(num_ues, {});
    for (auto& ues : served) std::sort(ues.begin(), ues.end());
    for (int l = 0; l < map.num_orus; ++l) {
        for (int k : served[l]) map.serving_orus[k].push_back(l);
    }
    map.served_ues = std::move(served);
    return map;
}

ServingMap ServingMap::from_serving_clusters(int num_orus, std::vector<std::vector<int>> serving) {
    ServingMap map;
    map.num_orus = num_orus;
    map.num_ues = static_cast<int>(serving.size());
    map.served_ues.assign(num_orus, {});
    for (auto& orus : serving) std::sort(orus.begin(), orus.end());
    for (int k = 0; k < map.num_ues; ++k) {
        for (int l : serving[k]) map.served_ues[l].push_back(k);
    }
    map.serving_orus = std::move(serving);
    return map;
}

bool ServingMap::serves(int oru, int ue) const {
    const auto& ues = served_ues[oru];
    return std::binary_search(ues.begin(), ues.end(), ue);
}

std::vector<int> ServingMap::interferers(int ue) const {
    std::vector<int> out;
    for (int l : serving_orus[ue]) out.insert(out.end(), served_ues[l].begin(), served_ues[l].end());
    out.push_back(ue);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace cfmimo
