#ifndef OCEANPROV_EMBEDDING_EMBED_HPP
#define OCEANPROV_EMBEDDING_EMBED_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "../detail/linalg.hpp"
#include "../detail/random.hpp"
#include "../errors.hpp"
#include "../grid.hpp"
#include "../matrix.hpp"
#include "curve.hpp"
#include "fuzzy.hpp"
#include "knn.hpp"
#include "optimize.hpp"

namespace oceanprov {

struct EmbeddingParams {
    int n_neighbors = 20;
    double min_dist = 0.0;
    int n_components = 3;
    double a = 0.0;  // <= 0 means: fit from min_dist
    double b = 0.0;
    int n_epochs = 500;
    int negative_sample_rate = 5;
    double learning_rate = 1.0;
    std::uint64_t seed = 0;
};

struct Embedding {
    Matrix coords;  // row order matches the input point order
    EmbeddingParams params;
    double final_cross_entropy = 0.0;
};

namespace detail {

inline Matrix random_init(std::size_t n, int dims, std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    Matrix coords(n, static_cast<std::size_t>(dims));
    for (auto& v : coords.data()) v = uniform_in(rng, -10.0, 10.0);
    return coords;
}

// Deterministic principal-component projection of the centred data, rescaled
// to a max absolute coordinate of 10. Falls back to seeded uniform noise when
// the data has no usable spread.
inline Matrix pca_init(const Matrix& x, int dims, std::uint64_t seed) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (d < static_cast<std::size_t>(dims)) return random_init(n, dims, seed);

    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < d; ++c) mean[c] += x(i, c);
    }
    for (auto& v : mean) v /= static_cast<double>(n);

    Matrix cov(d, d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < d; ++p) {
            const double xp = x(i, p) - mean[p];
            for (std::size_t q = p; q < d; ++q) {
                cov(p, q) += xp * (x(i, q) - mean[q]);
            }
        }
    }
    for (std::size_t p = 0; p < d; ++p) {
        for (std::size_t q = p; q < d; ++q) {
            cov(p, q) /= static_cast<double>(n);
            cov(q, p) = cov(p, q);
        }
    }

    const auto eig = jacobi_eigen_symmetric(cov);
    if (eig.values.front() <= 1e-12) return random_init(n, dims, seed);

    Matrix coords(n, static_cast<std::size_t>(dims), 0.0);
    double max_abs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (int c = 0; c < dims; ++c) {
            double proj = 0.0;
            for (std::size_t p = 0; p < d; ++p) {
                proj += (x(i, p) - mean[p]) * eig.vectors(p, static_cast<std::size_t>(c));
            }
            coords(i, static_cast<std::size_t>(c)) = proj;
            max_abs = std::max(max_abs, std::abs(proj));
        }
    }
    if (max_abs <= 0.0) return random_init(n, dims, seed);
    for (auto& v : coords.data()) v *= 10.0 / max_abs;
    return coords;
}

}  // namespace detail

// Lays out a fuzzy graph by stochastic gradient descent on the membership
// cross-entropy. When no initial coordinates are supplied, a seeded uniform
// cube is used. Bitwise reproducible for identical inputs and seed.
inline Embedding optimize_embedding(const FuzzyGraph& graph, EmbeddingParams params,
                                    const Matrix* init = nullptr) {
    if (graph.n < 2) throw std::invalid_argument("optimize_embedding: need >= 2 points");
    if (params.n_components < 1) {
        throw std::invalid_argument("optimize_embedding: n_components must be >= 1");
    }
    if (params.a <= 0.0 || params.b <= 0.0) {
        const CurveParams fitted = fit_ab(params.min_dist);
        params.a = fitted.a;
        params.b = fitted.b;
    }

    Embedding out;
    if (init != nullptr) {
        if (init->rows() != graph.n ||
            init->cols() != static_cast<std::size_t>(params.n_components)) {
            throw std::invalid_argument("optimize_embedding: bad initial coordinate shape");
        }
        out.coords = *init;
    } else {
        out.coords = detail::random_init(graph.n, params.n_components, params.seed);
    }

    OptimizeSettings settings;
    settings.a = params.a;
    settings.b = params.b;
    settings.n_epochs = params.n_epochs;
    settings.negative_sample_rate = params.negative_sample_rate;
    settings.learning_rate = params.learning_rate;
    settings.seed = params.seed;
    out.final_cross_entropy = optimize_layout(out.coords, graph, settings);
    out.params = params;
    return out;
}

// Full pipeline: exact kNN graph, fuzzy memberships with fuzzy-union
// symmetrisation, curve fit, principal-component initialisation, SGD layout.
inline Embedding embed(const Matrix& x, EmbeddingParams params) {
    if (params.n_neighbors < 2 ||
        static_cast<std::size_t>(params.n_neighbors) >= x.rows()) {
        throw std::invalid_argument("embed: need 2 <= n_neighbors < n");
    }
    const NeighborGraph graph = knn_graph(x, params.n_neighbors);
    const FuzzyGraph fuzzy = fuzzy_graph(graph);
    const Matrix init = detail::pca_init(x, params.n_components, params.seed);
    return optimize_embedding(fuzzy, params, &init);
}

inline Embedding embed(const FeatureMatrix& x, EmbeddingParams params) {
    if (x.has_missing()) {
        throw DataError("embed: feature matrix has missing values; impute first");
    }
    return embed(x.values, params);
}

}

#endif
