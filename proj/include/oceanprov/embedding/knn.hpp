#ifndef OCEANPROV_EMBEDDING_KNN_HPP
#define OCEANPROV_EMBEDDING_KNN_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "../errors.hpp"
#include "../grid.hpp"
#include "../matrix.hpp"

namespace oceanprov {

// Exact k-nearest-neighbour graph with the smoothed bandwidths used to turn
// distances into fuzzy memberships. rho is the distance to the nearest
// neighbour; sigma solves
//   sum_j exp(-max(0, d_ij - rho_i) / sigma_i) = log2(k)
// per point, by binary search.
struct NeighborGraph {
    std::vector<std::vector<int>> indices;      // row-sorted by ascending distance
    std::vector<std::vector<double>> distances;
    std::vector<double> rho;
    std::vector<double> sigma;

    std::size_t size() const { return indices.size(); }
    int k() const { return indices.empty() ? 0 : static_cast<int>(indices.front().size()); }
};

inline NeighborGraph knn_graph(const Matrix& x, int k) {
    const std::size_t n = x.rows();
    if (k < 1) throw std::invalid_argument("knn_graph: k must be >= 1");
    if (static_cast<std::size_t>(k) >= n) {
        throw std::invalid_argument("knn_graph: k must be smaller than the number of points");
    }

    NeighborGraph g;
    g.indices.assign(n, {});
    g.distances.assign(n, {});
    g.rho.assign(n, 0.0);
    g.sigma.assign(n, 0.0);

    const double target = std::log2(static_cast<double>(k));
    std::vector<std::pair<double, int>> order(n - 1);

    for (std::size_t i = 0; i < n; ++i) {
        std::size_t w = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            order[w++] = {squared_distance(x.row(i), x.row(j)), static_cast<int>(j)};
        }
        std::partial_sort(order.begin(), order.begin() + k, order.end());

        auto& idx = g.indices[i];
        auto& dist = g.distances[i];
        idx.resize(static_cast<std::size_t>(k));
        dist.resize(static_cast<std::size_t>(k));
        for (int t = 0; t < k; ++t) {
            idx[static_cast<std::size_t>(t)] = order[static_cast<std::size_t>(t)].second;
            dist[static_cast<std::size_t>(t)] =
                std::sqrt(order[static_cast<std::size_t>(t)].first);
        }
        g.rho[i] = dist.front();

        double lo = 0.0;
        double hi = std::numeric_limits<double>::infinity();
        double mid = 1.0;
        for (int iter = 0; iter < 64; ++iter) {
            double sum = 0.0;
            for (const double d : dist) {
                sum += std::exp(-std::max(0.0, d - g.rho[i]) / mid);
            }
            if (std::abs(sum - target) < 1e-7) break;
            if (sum > target) {
                hi = mid;
                mid = 0.5 * (lo + hi);
            } else {
                lo = mid;
                mid = std::isinf(hi) ? mid * 2.0 : 0.5 * (lo + hi);
            }
        }
        // Duplicate-heavy rows can drive the search to zero; keep the
        // bandwidth bounded away from it, as the reference optimiser does.
        double mean_dist = 0.0;
        for (const double d : dist) mean_dist += d;
        mean_dist /= static_cast<double>(k);
        g.sigma[i] = std::max(mid, mean_dist > 0.0 ? 1e-3 * mean_dist : 1e-8);
    }
    return g;
}

inline NeighborGraph knn_graph(const FeatureMatrix& x, int k) {
    if (x.has_missing()) {
        throw DataError("knn_graph: feature matrix has missing values; impute first");
    }
    return knn_graph(x.values, k);
}

}

#endif
