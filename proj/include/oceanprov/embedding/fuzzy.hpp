#ifndef OCEANPROV_EMBEDDING_FUZZY_HPP
#define OCEANPROV_EMBEDDING_FUZZY_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "knn.hpp"

namespace oceanprov {

// Sparse symmetric membership graph. Directed memberships
// exp(-max(0, d - rho) / sigma) are combined by the fuzzy union
// u + v - u*v, which keeps weights in (0, 1] and is exactly symmetric.
struct FuzzyGraph {
    struct Edge {
        int a;
        int b;  // a < b
        double weight;
    };
    std::size_t n = 0;
    std::vector<Edge> edges;  // sorted by (a, b)
};

inline FuzzyGraph fuzzy_graph(const NeighborGraph& g) {
    std::map<std::pair<int, int>, std::pair<double, double>> directed;
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (std::size_t t = 0; t < g.indices[i].size(); ++t) {
            const int j = g.indices[i][t];
            const double membership =
                std::exp(-std::max(0.0, g.distances[i][t] - g.rho[i]) / g.sigma[i]);
            const int lo = std::min<int>(static_cast<int>(i), j);
            const int hi = std::max<int>(static_cast<int>(i), j);
            auto& slot = directed[{lo, hi}];
            if (static_cast<int>(i) == lo) {
                slot.first = membership;
            } else {
                slot.second = membership;
            }
        }
    }

    FuzzyGraph out;
    out.n = g.size();
    out.edges.reserve(directed.size());
    for (const auto& [key, memberships] : directed) {
        const auto [u, v] = memberships;
        out.edges.push_back({key.first, key.second, u + v - u * v});
    }
    return out;
}

}

#endif
