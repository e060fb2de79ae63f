#ifndef OCEANPROV_CLUSTER_WARD_HPP
#define OCEANPROV_CLUSTER_WARD_HPP

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "../matrix.hpp"
#include "clusterset.hpp"

namespace oceanprov {

// Agglomerative merge list in the usual linkage convention: original points
// are clusters 0..n-1, the t-th merge creates cluster n+t.
struct Dendrogram {
    struct Merge {
        int cluster_a = 0;
        int cluster_b = 0;
        double height = 0.0;  // increase of within-cluster sum of squares
        int new_size = 0;
    };
    std::vector<Merge> merges;
};

namespace detail {

// Condensed strictly-upper-triangular distance store.
class PairwiseStore {
public:
    explicit PairwiseStore(std::size_t n) : n_(n), data_(n * (n - 1) / 2, 0.0) {}

    double& at(std::size_t i, std::size_t j) {
        if (i > j) std::swap(i, j);
        return data_[i * (2 * n_ - i - 3) / 2 + j - 1];
    }
    double at(std::size_t i, std::size_t j) const {
        if (i > j) std::swap(i, j);
        return data_[i * (2 * n_ - i - 3) / 2 + j - 1];
    }

private:
    std::size_t n_;
    std::vector<double> data_;
};

struct RawMerge {
    std::size_t rep_a;
    std::size_t rep_b;
    double height;
};

// Nearest-neighbour-chain agglomeration. Valid because the Ward update is
// reducible, so reciprocal nearest neighbours stay reciprocal after merges
// elsewhere. Heights come out unordered and are sorted afterwards.
inline std::vector<RawMerge> nn_chain_ward(const Matrix& x) {
    const std::size_t n = x.rows();
    PairwiseStore dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            // The merge cost of two singletons is half the squared distance.
            dist.at(i, j) = 0.5 * squared_distance(x.row(i), x.row(j));
        }
    }

    std::vector<double> size(n, 1.0);
    std::vector<bool> active(n, true);
    std::vector<std::size_t> chain;
    chain.reserve(n);
    std::vector<RawMerge> merges;
    merges.reserve(n - 1);

    std::size_t first_active = 0;
    while (merges.size() + 1 < n) {
        if (chain.empty()) {
            while (!active[first_active]) ++first_active;
            chain.push_back(first_active);
        }

        while (true) {
            const std::size_t a = chain.back();
            const std::size_t prev = chain.size() >= 2 ? chain[chain.size() - 2] : n;

            std::size_t nearest = n;
            double best = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (!active[j] || j == a) continue;
                const double d = dist.at(a, j);
                if (nearest == n || d < best) {
                    best = d;
                    nearest = j;
                }
            }
            // Prefer the previous chain element on ties so reciprocal pairs
            // are always detected and the chain terminates.
            if (prev < n && dist.at(a, prev) == best) nearest = prev;

            if (nearest == prev) {
                merges.push_back({std::min(a, prev), std::max(a, prev), best});
                chain.pop_back();
                chain.pop_back();

                const std::size_t keep = std::min(a, prev);
                const std::size_t drop = std::max(a, prev);
                const double sa = size[keep], sb = size[drop];
                active[drop] = false;
                for (std::size_t j = 0; j < n; ++j) {
                    if (!active[j] || j == keep) continue;
                    const double sj = size[j];
                    dist.at(keep, j) =
                        ((sa + sj) * dist.at(keep, j) + (sb + sj) * dist.at(drop, j) -
                         sj * best) /
                        (sa + sb + sj);
                }
                size[keep] = sa + sb;
                break;
            }
            chain.push_back(nearest);
        }
    }
    return merges;
}

class MergeUnionFind {
public:
    explicit MergeUnionFind(std::size_t n) : parent_(2 * n - 1, -1), next_(static_cast<int>(n)) {}

    int find(int idx) {
        int root = idx;
        while (parent_[root] >= 0) root = parent_[root];
        while (parent_[idx] >= 0) {
            const int up = parent_[idx];
            parent_[idx] = root;
            idx = up;
        }
        return root;
    }

    int merge(int a, int b) {
        const int id = next_++;
        parent_[a] = id;
        parent_[b] = id;
        return id;
    }

private:
    std::vector<int> parent_;
    int next_;
};

}  // namespace detail

inline Dendrogram ward_dendrogram(const Matrix& x) {
    const std::size_t n = x.rows();
    if (n < 2) throw std::invalid_argument("ward: need at least 2 points");

    auto raw = detail::nn_chain_ward(x);
    std::stable_sort(raw.begin(), raw.end(),
                     [](const auto& a, const auto& b) { return a.height < b.height; });

    Dendrogram out;
    out.merges.reserve(raw.size());
    detail::MergeUnionFind uf(n);
    std::vector<int> sizes(2 * n - 1, 1);
    for (const auto& m : raw) {
        const int a = uf.find(static_cast<int>(m.rep_a));
        const int b = uf.find(static_cast<int>(m.rep_b));
        const int id = uf.merge(a, b);
        sizes[id] = sizes[a] + sizes[b];
        out.merges.push_back({std::min(a, b), std::max(a, b), m.height, sizes[id]});
    }
    return out;
}

inline ClusterSet cut_dendrogram(const Dendrogram& dendro, std::size_t n, int k) {
    if (k < 1 || static_cast<std::size_t>(k) > n) {
        throw std::invalid_argument("cut_dendrogram: k out of range");
    }
    detail::MergeUnionFind uf(n);
    const std::size_t steps = n - static_cast<std::size_t>(k);
    for (std::size_t t = 0; t < steps; ++t) {
        uf.merge(dendro.merges[t].cluster_a, dendro.merges[t].cluster_b);
    }
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = uf.find(static_cast<int>(i));
    return canonicalize(make_cluster_set(std::move(labels)));
}

inline std::pair<ClusterSet, Dendrogram> ward(const Matrix& x, int k) {
    const std::size_t n = x.rows();
    if (k < 2) throw std::invalid_argument("ward: k must be at least 2");
    if (static_cast<std::size_t>(k) > n) {
        throw std::invalid_argument("ward: k exceeds the number of points");
    }
    Dendrogram dendro = ward_dendrogram(x);
    ClusterSet cs = cut_dendrogram(dendro, n, k);
    cs.provenance = Provenance{"ward", "k=" + std::to_string(k), 0};
    return {std::move(cs), std::move(dendro)};
}

}

#endif
