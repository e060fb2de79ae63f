#ifndef OCEANPROV_EMBEDDING_QUALITY_HPP
#define OCEANPROV_EMBEDDING_QUALITY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "../detail/random.hpp"
#include "../errors.hpp"
#include "../matrix.hpp"

namespace oceanprov {

namespace detail {

// Distances from one point to all others; ties in rank order break by index.
inline void distance_row(const Matrix& x, std::size_t i, std::vector<double>& out) {
    out.resize(x.rows());
    for (std::size_t j = 0; j < x.rows(); ++j) {
        out[j] = squared_distance(x.row(i), x.row(j));
    }
}

inline bool closer(const std::vector<double>& dist, std::size_t a, std::size_t b) {
    return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
}

// K nearest neighbours of i, self excluded.
inline void k_nearest(const std::vector<double>& dist, std::size_t i, int k,
                      std::vector<std::size_t>& out) {
    out.clear();
    for (std::size_t j = 0; j < dist.size(); ++j) {
        if (j != i) out.push_back(j);
    }
    std::nth_element(out.begin(), out.begin() + (k - 1), out.end(),
                     [&](std::size_t a, std::size_t b) { return closer(dist, a, b); });
    out.resize(static_cast<std::size_t>(k));
}

// 1-based rank of j among i's non-self points, ordered by (distance, index).
inline int rank_of(const std::vector<double>& dist, std::size_t i, std::size_t j) {
    int rank = 1;
    for (std::size_t l = 0; l < dist.size(); ++l) {
        if (l == i || l == j) continue;
        if (closer(dist, l, j)) ++rank;
    }
    return rank;
}

// Shared implementation: penalises points that are K-neighbours in `near`
// space but not in `far` space, weighted by how far down far-space's ranking
// they sit.
inline double rank_preservation(const Matrix& far_space, const Matrix& near_space, int k) {
    const std::size_t n = far_space.rows();
    if (far_space.rows() != near_space.rows()) {
        throw DataError("rank_preservation: point counts differ");
    }
    if (k < 1 || 2 * static_cast<std::size_t>(k) >= n) {
        throw std::invalid_argument("neighbourhood metrics: need 1 <= K < n/2");
    }

    std::vector<double> dist_far, dist_near;
    std::vector<std::size_t> neighbours;
    double penalty = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        distance_row(far_space, i, dist_far);
        distance_row(near_space, i, dist_near);
        k_nearest(dist_near, i, k, neighbours);
        for (const std::size_t j : neighbours) {
            const int rank = rank_of(dist_far, i, j);
            if (rank > k) penalty += rank - k;
        }
    }
    const double nd = static_cast<double>(n);
    const double kd = static_cast<double>(k);
    return 1.0 - 2.0 / (nd * kd * (2.0 * nd - 3.0 * kd - 1.0)) * penalty;
}

}  // namespace detail

// How many embedding neighbourhoods are genuine: points close in the
// embedding but far in the original space cost rank penalties.
inline double trustworthiness(const Matrix& x, const Matrix& embedded, int k) {
    return detail::rank_preservation(x, embedded, k);
}

// The mirror image: neighbours in the original space that drift apart in the
// embedding.
inline double continuity(const Matrix& x, const Matrix& embedded, int k) {
    return detail::rank_preservation(embedded, x, k);
}

struct CorankingResult {
    double q_local = 0.0;
    double q_global = 0.0;
    int split = 0;  // neighbourhood size with maximal LCMC
};

// Co-ranking quality over a random subsample: Q_NX(K) agreement curves,
// split at the LCMC maximum into a local and a global average.
inline CorankingResult coranking_q(const Matrix& x, const Matrix& embedded,
                                   std::size_t sample_size = 2000,
                                   std::uint64_t seed = 0) {
    const std::size_t n_all = x.rows();
    if (x.rows() != embedded.rows()) {
        throw DataError("coranking_q: point counts differ");
    }

    std::vector<std::size_t> chosen(n_all);
    std::iota(chosen.begin(), chosen.end(), std::size_t{0});
    if (sample_size > 0 && sample_size < n_all) {
        std::mt19937_64 rng(seed);
        detail::shuffle(chosen, rng);
        chosen.resize(sample_size);
        std::sort(chosen.begin(), chosen.end());
    }
    const std::size_t n = chosen.size();
    if (n < 3) throw std::invalid_argument("coranking_q: need at least 3 points");

    Matrix xs(n, x.cols()), es(n, embedded.cols());
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < x.cols(); ++c) xs(r, c) = x(chosen[r], c);
        for (std::size_t c = 0; c < embedded.cols(); ++c) es(r, c) = embedded(chosen[r], c);
    }

    // Co-ranking matrix: counts of (rank in X, rank in E) pairs, 1-based.
    const std::size_t side = n - 1;
    std::vector<std::uint32_t> q(side * side, 0);
    std::vector<double> dist;
    std::vector<std::size_t> order(n);
    std::vector<int> rank_x(n), rank_e(n);
    for (std::size_t i = 0; i < n; ++i) {
        detail::distance_row(xs, i, dist);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return detail::closer(dist, a, b); });
        int r = 0;
        for (const std::size_t j : order) {
            if (j == i) continue;
            rank_x[j] = ++r;
        }
        detail::distance_row(es, i, dist);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return detail::closer(dist, a, b); });
        r = 0;
        for (const std::size_t j : order) {
            if (j == i) continue;
            rank_e[j] = ++r;
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            ++q[static_cast<std::size_t>(rank_x[j] - 1) * side +
                static_cast<std::size_t>(rank_e[j] - 1)];
        }
    }

    // Q_NX(K) from the running sum of the K x K upper-left block.
    std::vector<double> q_nx(side, 0.0);
    double block = 0.0;
    for (std::size_t kk = 1; kk <= side; ++kk) {
        for (std::size_t t = 0; t < kk; ++t) {
            block += q[(kk - 1) * side + t];
            if (t < kk - 1) block += q[t * side + (kk - 1)];
        }
        q_nx[kk - 1] = block / (static_cast<double>(kk) * static_cast<double>(n));
    }

    int split = 1;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t kk = 1; kk <= side; ++kk) {
        const double lcmc =
            q_nx[kk - 1] - static_cast<double>(kk) / static_cast<double>(n - 1);
        if (lcmc > best) {
            best = lcmc;
            split = static_cast<int>(kk);
        }
    }

    CorankingResult out;
    out.split = split;
    double local = 0.0;
    for (int kk = 1; kk <= split; ++kk) local += q_nx[static_cast<std::size_t>(kk - 1)];
    out.q_local = local / split;
    if (static_cast<std::size_t>(split) < side) {
        double global = 0.0;
        for (std::size_t kk = static_cast<std::size_t>(split) + 1; kk <= side; ++kk) {
            global += q_nx[kk - 1];
        }
        out.q_global = global / static_cast<double>(side - static_cast<std::size_t>(split));
    } else {
        out.q_global = q_nx.back();
    }
    return out;
}

// Uniformly sampled unordered point pairs with their distance in both spaces.
inline std::vector<std::pair<double, double>> shepard_pairs(const Matrix& x,
                                                            const Matrix& embedded,
                                                            std::size_t sample_pairs,
                                                            std::uint64_t seed = 0) {
    if (x.rows() != embedded.rows()) throw DataError("shepard_pairs: point counts differ");
    if (sample_pairs < 1) throw std::invalid_argument("shepard_pairs: need >= 1 pair");
    if (x.rows() < 2) throw std::invalid_argument("shepard_pairs: need >= 2 points");

    std::mt19937_64 rng(seed);
    std::vector<std::pair<double, double>> out;
    out.reserve(sample_pairs);
    while (out.size() < sample_pairs) {
        const std::size_t i = detail::uniform_index(rng, x.rows());
        const std::size_t j = detail::uniform_index(rng, x.rows());
        if (i == j) continue;
        out.emplace_back(euclidean_distance(x.row(i), x.row(j)),
                         euclidean_distance(embedded.row(i), embedded.row(j)));
    }
    return out;
}

}

#endif
