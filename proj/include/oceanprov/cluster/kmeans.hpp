#ifndef OCEANPROV_CLUSTER_KMEANS_HPP
#define OCEANPROV_CLUSTER_KMEANS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "../detail/random.hpp"
#include "../matrix.hpp"
#include "clusterset.hpp"

namespace oceanprov {

struct KMeansResult {
    ClusterSet clusters;
    Matrix centroids;
    double inertia = 0.0;
    int iterations = 0;
    std::vector<double> inertia_history;  // one entry per assignment pass
};

namespace detail {

// Greedy k-means++: candidates are drawn proportionally to the squared
// distance to the nearest chosen centre, and the candidate that lowers the
// total potential the most is kept. Equal potentials keep the earlier draw.
inline Matrix kmeans_plus_plus(const Matrix& x, int k, std::mt19937_64& rng) {
    const std::size_t n = x.rows();
    const std::size_t dim = x.cols();
    const int local_trials = 2 + static_cast<int>(std::log(static_cast<double>(k)));

    Matrix centers(static_cast<std::size_t>(k), dim);
    const std::size_t first = uniform_index(rng, n);
    for (std::size_t c = 0; c < dim; ++c) centers(0, c) = x(first, c);

    std::vector<double> closest(n);
    double potential = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        closest[i] = squared_distance(x.row(i), centers.row(0));
        potential += closest[i];
    }

    std::vector<double> candidate_best(n);
    for (int chosen = 1; chosen < k; ++chosen) {
        std::size_t best_idx = 0;
        double best_potential = std::numeric_limits<double>::infinity();
        bool have_best = false;

        for (int t = 0; t < local_trials; ++t) {
            std::size_t candidate;
            if (potential > 0.0) {
                const double target = uniform_unit(rng) * potential;
                double cumulative = 0.0;
                candidate = n - 1;
                for (std::size_t i = 0; i < n; ++i) {
                    cumulative += closest[i];
                    if (cumulative >= target) {
                        candidate = i;
                        break;
                    }
                }
            } else {
                candidate = uniform_index(rng, n);
            }

            double new_potential = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                candidate_best[i] =
                    std::min(closest[i], squared_distance(x.row(i), x.row(candidate)));
                new_potential += candidate_best[i];
            }
            if (!have_best || new_potential < best_potential) {
                best_potential = new_potential;
                best_idx = candidate;
                have_best = true;
            }
        }

        for (std::size_t c = 0; c < dim; ++c) centers(chosen, c) = x(best_idx, c);
        for (std::size_t i = 0; i < n; ++i) {
            closest[i] = std::min(closest[i],
                                  squared_distance(x.row(i), centers.row(chosen)));
        }
        potential = 0.0;
        for (double d : closest) potential += d;
    }
    return centers;
}

}  // namespace detail

// Lloyd's algorithm with greedy k-means++ seeding. Deterministic for a given
// seed; nearest-centroid ties go to the lowest centroid index.
inline KMeansResult kmeans(const Matrix& x, int k, std::uint64_t seed,
                           int max_iter = 300, double tol = 1e-4) {
    const std::size_t n = x.rows();
    const std::size_t dim = x.cols();
    if (k < 2) throw std::invalid_argument("kmeans: k must be at least 2");
    if (static_cast<std::size_t>(k) > n) {
        throw std::invalid_argument("kmeans: k exceeds the number of points");
    }

    std::mt19937_64 rng(seed);
    Matrix centers = detail::kmeans_plus_plus(x, k, rng);

    KMeansResult result;
    std::vector<int> labels(n, 0);
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);

    const auto assign = [&]() {
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = squared_distance(x.row(i), centers.row(0));
            for (int c = 1; c < k; ++c) {
                const double d = squared_distance(x.row(i), centers.row(c));
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            labels[i] = best;
            inertia += best_d;
        }
        return inertia;
    };

    for (int iter = 0; iter < max_iter; ++iter) {
        result.inertia_history.push_back(assign());
        result.iterations = iter + 1;

        Matrix updated(static_cast<std::size_t>(k), dim, 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(labels[i]);
            ++counts[c];
            for (std::size_t f = 0; f < dim; ++f) updated(c, f) += x(i, f);
        }

        // Empty clusters are re-seeded from the points farthest from their
        // current centroid, one point per empty cluster.
        std::vector<std::size_t> empties;
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
            if (counts[c] == 0) empties.push_back(c);
        }
        if (!empties.empty()) {
            std::vector<std::pair<double, std::size_t>> farthest(n);
            for (std::size_t i = 0; i < n; ++i) {
                farthest[i] = {
                    squared_distance(x.row(i),
                                     centers.row(static_cast<std::size_t>(labels[i]))),
                    i};
            }
            std::sort(farthest.begin(), farthest.end(), [](const auto& a, const auto& b) {
                return a.first > b.first || (a.first == b.first && a.second < b.second);
            });
            for (std::size_t e = 0; e < empties.size(); ++e) {
                const std::size_t point = farthest[e].second;
                for (std::size_t f = 0; f < dim; ++f) {
                    updated(empties[e], f) = x(point, f);
                }
                counts[empties[e]] = 1;
            }
        }

        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
            if (counts[c] == 0) continue;
            for (std::size_t f = 0; f < dim; ++f) {
                updated(c, f) /= static_cast<double>(counts[c]);
            }
        }
        if (!empties.empty()) {
            centers = updated;
            continue;  // re-seeded centroids need a fresh assignment pass
        }

        double shift = 0.0;
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
            shift += squared_distance(centers.row(c), updated.row(c));
        }
        centers = updated;
        if (shift < tol) break;
    }

    result.inertia = assign();
    result.inertia_history.push_back(result.inertia);
    result.centroids = centers;
    result.clusters = make_cluster_set(
        std::move(labels),
        Provenance{"kmeans", "k=" + std::to_string(k) + ",tol=" + std::to_string(tol),
                   seed});
    return result;
}

}

#endif
