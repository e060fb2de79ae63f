// Independent reference implementations used as test oracles. These are
// deliberately naive transcriptions kept separate from the library code
// paths they check.
#ifndef OCEANPROV_TESTS_ORACLES_HPP
#define OCEANPROV_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <span>
#include <vector>

#include <oceanprov/cluster/clusterset.hpp>
#include <oceanprov/matrix.hpp>

namespace oracles {

using oceanprov::kNoise;
using oceanprov::Matrix;

// Classic sequential DBSCAN: scan in order, BFS-expand each new cluster.
inline std::vector<int> naive_dbscan(const Matrix& x, double eps, int min_samples,
                                     const std::vector<std::size_t>& order) {
    const std::size_t n = x.rows();
    std::vector<std::vector<std::size_t>> neighbors(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j &&
                oceanprov::euclidean_distance(x.row(i), x.row(j)) <= eps) {
                neighbors[i].push_back(j);
            }
        }
    }
    const auto is_core = [&](std::size_t p) {
        return neighbors[p].size() + 1 >= static_cast<std::size_t>(min_samples);
    };

    std::vector<int> labels(n, -2);  // -2 = unvisited
    int next_cluster = 0;
    for (const std::size_t seed : order) {
        if (labels[seed] != -2) continue;
        if (!is_core(seed)) {
            labels[seed] = kNoise;  // may be claimed later as a border point
            continue;
        }
        const int cluster = next_cluster++;
        labels[seed] = cluster;
        std::deque<std::size_t> queue(neighbors[seed].begin(), neighbors[seed].end());
        while (!queue.empty()) {
            const std::size_t p = queue.front();
            queue.pop_front();
            if (labels[p] == kNoise) labels[p] = cluster;  // border point
            if (labels[p] != -2) continue;
            labels[p] = cluster;
            if (is_core(p)) {
                queue.insert(queue.end(), neighbors[p].begin(), neighbors[p].end());
            }
        }
    }
    for (auto& l : labels) {
        if (l == -2) l = kNoise;
    }
    return labels;
}

// O(n^3) Ward agglomeration: global minimum merge at every step, updated
// with the Lance-Williams recurrence.
inline std::vector<double> naive_ward_heights(const Matrix& x) {
    const std::size_t n = x.rows();
    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            d[i][j] = 0.5 * oceanprov::squared_distance(x.row(i), x.row(j));
        }
    }
    std::vector<double> size(n, 1.0);
    std::vector<bool> alive(n, true);
    std::vector<double> heights;
    for (std::size_t step = 0; step + 1 < n; ++step) {
        std::size_t bi = 0, bj = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (!alive[i]) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (alive[j] && d[i][j] < best) {
                    best = d[i][j];
                    bi = i;
                    bj = j;
                }
            }
        }
        heights.push_back(best);
        for (std::size_t k = 0; k < n; ++k) {
            if (!alive[k] || k == bi || k == bj) continue;
            d[bi][k] = d[k][bi] =
                ((size[bi] + size[k]) * d[bi][k] + (size[bj] + size[k]) * d[bj][k] -
                 size[k] * best) /
                (size[bi] + size[bj] + size[k]);
        }
        size[bi] += size[bj];
        alive[bj] = false;
    }
    return heights;
}

// Exhaustive best 2-partition by within-cluster sum of squares.
inline double best_two_partition_inertia(const Matrix& x) {
    const std::size_t n = x.rows();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << n); ++mask) {
        std::vector<std::vector<std::size_t>> groups(2);
        for (std::size_t i = 0; i < n; ++i) groups[(mask >> i) & 1].push_back(i);
        if (groups[0].empty() || groups[1].empty()) continue;
        double inertia = 0.0;
        for (const auto& group : groups) {
            std::vector<double> c(x.cols(), 0.0);
            for (const std::size_t i : group) {
                for (std::size_t f = 0; f < x.cols(); ++f) c[f] += x(i, f);
            }
            for (auto& v : c) v /= static_cast<double>(group.size());
            for (const std::size_t i : group) {
                inertia += oceanprov::squared_distance(x.row(i), std::span<const double>(c));
            }
        }
        best = std::min(best, inertia);
    }
    return best;
}

// Pair-counting ARI straight from the a/b/c/d pair table.
inline double pair_counting_ari(const std::vector<int>& u, const std::vector<int>& v) {
    double a = 0, b = 0, c = 0, d = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        for (std::size_t j = i + 1; j < u.size(); ++j) {
            const bool same_u = u[i] == u[j];
            const bool same_v = v[i] == v[j];
            if (same_u && same_v) {
                ++a;
            } else if (same_u) {
                ++b;
            } else if (same_v) {
                ++c;
            } else {
                ++d;
            }
        }
    }
    const double denom = (a + b) * (b + d) + (a + c) * (c + d);
    if (denom == 0.0) return 1.0;
    return 2.0 * (a * d - b * c) / denom;
}

// Entropies straight over label frequencies, no contingency table.
inline double direct_nmi(const std::vector<int>& u, const std::vector<int>& v) {
    const double n = static_cast<double>(u.size());
    const auto entropy = [&](const std::vector<int>& labels) {
        std::map<int, double> counts;
        for (const int l : labels) counts[l] += 1.0;
        double h = 0.0;
        for (const auto& [l, c] : counts) h -= (c / n) * std::log(c / n);
        return h;
    };
    std::map<std::pair<int, int>, double> joint;
    for (std::size_t i = 0; i < u.size(); ++i) joint[{u[i], v[i]}] += 1.0;
    std::map<int, double> cu, cv;
    for (const int l : u) cu[l] += 1.0;
    for (const int l : v) cv[l] += 1.0;
    double info = 0.0;
    for (const auto& [pair, c] : joint) {
        info += (c / n) * std::log(n * c / (cu[pair.first] * cv[pair.second]));
    }
    const double hu = entropy(u), hv = entropy(v);
    if (hu + hv == 0.0) return 1.0;
    return 2.0 * info / (hu + hv);
}

// Direct max-matching overlap from explicit point sets.
inline double direct_overlap(const std::vector<int>& u, const std::vector<int>& v) {
    std::map<int, std::set<std::size_t>> sets_u, sets_v;
    for (std::size_t i = 0; i < u.size(); ++i) {
        sets_u[u[i]].insert(i);
        sets_v[v[i]].insert(i);
    }
    double matched = 0.0;
    for (const auto& [lu, su] : sets_u) {
        std::size_t best = 0;
        for (const auto& [lv, sv] : sets_v) {
            std::vector<std::size_t> common;
            std::set_intersection(su.begin(), su.end(), sv.begin(), sv.end(),
                                  std::back_inserter(common));
            best = std::max(best, common.size());
        }
        matched += static_cast<double>(best);
    }
    return matched / static_cast<double>(u.size());
}

inline std::vector<int> random_labels(std::mt19937_64& rng, std::size_t n, int max_k) {
    std::vector<int> labels(n);
    for (auto& l : labels) l = static_cast<int>(rng() % static_cast<std::uint64_t>(max_k));
    return labels;
}

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t n, std::size_t d,
                            double scale = 1.0) {
    Matrix m(n, d);
    for (auto& v : m.data()) {
        v = scale * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    }
    return m;
}

}  // namespace oracles

#endif
