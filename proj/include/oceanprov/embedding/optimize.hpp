#ifndef OCEANPROV_EMBEDDING_OPTIMIZE_HPP
#define OCEANPROV_EMBEDDING_OPTIMIZE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "../matrix.hpp"
#include "curve.hpp"
#include "fuzzy.hpp"

namespace oceanprov {

struct OptimizeSettings {
    double a = 1.9;
    double b = 0.8;
    int n_epochs = 500;
    int negative_sample_rate = 5;
    double learning_rate = 1.0;
    double repulsion_strength = 1.0;
    std::uint64_t seed = 0;
};

namespace detail {

inline double clip_gradient(double g) { return std::clamp(g, -4.0, 4.0); }

}  // namespace detail

// Sampled-edge cross-entropy between the graph memberships and the
// low-dimensional curve; the repulsive counterpart of absent edges is not
// included, matching how the optimiser itself samples.
inline double graph_cross_entropy(const Matrix& coords, const FuzzyGraph& graph,
                                  double a, double b) {
    double total = 0.0;
    for (const auto& e : graph.edges) {
        const double d2 = squared_distance(coords.row(static_cast<std::size_t>(e.a)),
                                           coords.row(static_cast<std::size_t>(e.b)));
        double nu = 1.0 / (1.0 + a * std::pow(d2, b));
        nu = std::clamp(nu, 1e-12, 1.0 - 1e-12);
        const double w = e.weight;
        total += w * std::log(w / nu);
        if (w < 1.0) total += (1.0 - w) * std::log((1.0 - w) / (1.0 - nu));
    }
    return total;
}

// Stochastic gradient descent over the fuzzy graph: each directed edge is
// sampled at a rate proportional to its membership; every sampled edge pulls
// its endpoints together and pushes the head away from uniformly drawn
// points. The learning rate anneals linearly to zero. Single-threaded on
// purpose: the update order is part of the deterministic contract.
inline double optimize_layout(Matrix& coords, const FuzzyGraph& graph,
                              const OptimizeSettings& s) {
    const std::size_t n = graph.n;
    const int dims = static_cast<int>(coords.cols());
    constexpr double min_dist_sq = 1e-12;

    struct DirectedEdge {
        int head;
        int tail;
        double weight;
    };
    std::vector<DirectedEdge> edges;
    edges.reserve(graph.edges.size() * 2);
    double max_weight = 0.0;
    for (const auto& e : graph.edges) {
        edges.push_back({e.a, e.b, e.weight});
        edges.push_back({e.b, e.a, e.weight});
        max_weight = std::max(max_weight, e.weight);
    }

    const std::size_t m = edges.size();
    std::vector<double> epochs_per_sample(m), next_sample(m);
    std::vector<double> epochs_per_negative(m), next_negative(m);
    for (std::size_t e = 0; e < m; ++e) {
        epochs_per_sample[e] = max_weight / edges[e].weight;
        next_sample[e] = epochs_per_sample[e];
        epochs_per_negative[e] = epochs_per_sample[e] / s.negative_sample_rate;
        next_negative[e] = epochs_per_negative[e];
    }

    std::mt19937_64 rng(s.seed);
    double* data = coords.data().data();

    for (int epoch = 1; epoch <= s.n_epochs; ++epoch) {
        const double alpha =
            s.learning_rate * (1.0 - static_cast<double>(epoch - 1) / s.n_epochs);

        for (std::size_t e = 0; e < m; ++e) {
            if (next_sample[e] > epoch) continue;

            double* head = data + static_cast<std::size_t>(edges[e].head) * dims;
            double* tail = data + static_cast<std::size_t>(edges[e].tail) * dims;

            double d2 = 0.0;
            for (int c = 0; c < dims; ++c) {
                const double diff = head[c] - tail[c];
                d2 += diff * diff;
            }
            d2 = std::max(d2, min_dist_sq);
            const double pd2b = std::pow(d2, s.b);
            const double attract = (-2.0 * s.a * s.b * pd2b) / (d2 * (s.a * pd2b + 1.0));
            for (int c = 0; c < dims; ++c) {
                const double g = alpha * detail::clip_gradient(attract * (head[c] - tail[c]));
                head[c] += g;
                tail[c] -= g;
            }
            next_sample[e] += epochs_per_sample[e];

            const int negatives = static_cast<int>(
                (epoch - next_negative[e] + epochs_per_negative[e]) / epochs_per_negative[e]);
            for (int p = 0; p < negatives; ++p) {
                const auto other_idx = static_cast<std::size_t>(rng() % n);
                if (static_cast<int>(other_idx) == edges[e].head) continue;
                const double* other = data + other_idx * dims;
                double r2 = 0.0;
                for (int c = 0; c < dims; ++c) {
                    const double diff = head[c] - other[c];
                    r2 += diff * diff;
                }
                if (r2 > 0.0) {
                    const double repel = 2.0 * s.repulsion_strength * s.b /
                                         ((0.001 + r2) * (s.a * std::pow(r2, s.b) + 1.0));
                    for (int c = 0; c < dims; ++c) {
                        head[c] += alpha * detail::clip_gradient(repel * (head[c] - other[c]));
                    }
                } else {
                    // Coincident negative sample: shove the head a full step.
                    for (int c = 0; c < dims; ++c) head[c] += alpha * 4.0;
                }
            }
            next_negative[e] += negatives * epochs_per_negative[e];
        }
    }
    return graph_cross_entropy(coords, graph, s.a, s.b);
}

}

#endif
