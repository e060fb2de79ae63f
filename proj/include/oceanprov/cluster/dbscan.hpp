#ifndef OCEANPROV_CLUSTER_DBSCAN_HPP
#define OCEANPROV_CLUSTER_DBSCAN_HPP

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "../matrix.hpp"
#include "clusterset.hpp"

namespace oceanprov {

// DBSCAN over Euclidean distances. A point is core when its epsilon-ball
// holds at least min_samples points, itself included. Clusters are the
// connected components of core points; border points join the cluster that
// would claim them first when scanning in point_order, which reproduces the
// classic sequential algorithm exactly. Core memberships do not depend on
// point_order, only border attachments and label numbering do.
inline ClusterSet dbscan(const Matrix& x, double epsilon, int min_samples,
                         const std::vector<std::size_t>& point_order) {
    const std::size_t n = x.rows();
    if (epsilon <= 0.0) throw std::invalid_argument("dbscan: epsilon must be positive");
    if (min_samples < 2) throw std::invalid_argument("dbscan: min_samples must be >= 2");
    if (point_order.size() != n) {
        throw std::invalid_argument("dbscan: point_order must be a permutation of the points");
    }

    const double eps_sq = epsilon * epsilon;
    std::vector<std::vector<std::size_t>> neighbors(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (squared_distance(x.row(i), x.row(j)) <= eps_sq) {
                neighbors[i].push_back(j);
                neighbors[j].push_back(i);
            }
        }
    }

    std::vector<bool> core(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        core[i] = neighbors[i].size() + 1 >= static_cast<std::size_t>(min_samples);
    }

    // Components of core points under epsilon-reachability.
    std::vector<int> component(n, -1);
    int n_components = 0;
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < n; ++i) {
        if (!core[i] || component[i] >= 0) continue;
        const int comp = n_components++;
        component[i] = comp;
        stack.assign(1, i);
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            for (const std::size_t q : neighbors[p]) {
                if (core[q] && component[q] < 0) {
                    component[q] = comp;
                    stack.push_back(q);
                }
            }
        }
    }

    // A component becomes a numbered cluster when the scan first reaches one
    // of its core points, so clusters are ranked by that first position.
    std::vector<std::size_t> position(n);
    for (std::size_t p = 0; p < n; ++p) position[point_order[p]] = p;

    std::vector<std::size_t> first_seen(static_cast<std::size_t>(n_components),
                                        std::numeric_limits<std::size_t>::max());
    for (std::size_t i = 0; i < n; ++i) {
        if (core[i]) {
            auto& seen = first_seen[static_cast<std::size_t>(component[i])];
            seen = std::min(seen, position[i]);
        }
    }
    std::vector<int> rank(static_cast<std::size_t>(n_components));
    {
        std::vector<int> order(n_components);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return first_seen[static_cast<std::size_t>(a)] <
                   first_seen[static_cast<std::size_t>(b)];
        });
        for (int r = 0; r < n_components; ++r) {
            rank[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r;
        }
    }

    std::vector<int> labels(n, kNoise);
    for (std::size_t i = 0; i < n; ++i) {
        if (core[i]) {
            labels[i] = rank[static_cast<std::size_t>(component[i])];
            continue;
        }
        int best = kNoise;
        for (const std::size_t q : neighbors[i]) {
            if (!core[q]) continue;
            const int r = rank[static_cast<std::size_t>(component[q])];
            if (best == kNoise || r < best) best = r;
        }
        labels[i] = best;
    }

    ClusterSet cs = make_cluster_set(
        std::move(labels),
        Provenance{"dbscan",
                   "eps=" + std::to_string(epsilon) +
                       ",min_samples=" + std::to_string(min_samples),
                   0});
    return cs;
}

inline ClusterSet dbscan(const Matrix& x, double epsilon, int min_samples) {
    std::vector<std::size_t> identity(x.rows());
    std::iota(identity.begin(), identity.end(), std::size_t{0});
    return dbscan(x, epsilon, min_samples, identity);
}

}

#endif
