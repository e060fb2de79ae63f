#ifndef OCEANPROV_CLUSTER_CLUSTERSET_HPP
#define OCEANPROV_CLUSTER_CLUSTERSET_HPP

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "../errors.hpp"

namespace oceanprov {

// Sentinel for points a density-based method could not assign. Cluster ids
// proper are always >= 0, so -1 can never collide with one.
inline constexpr int kNoise = -1;

struct Provenance {
    std::string algorithm;
    std::string hyperparameters;
    std::uint64_t seed = 0;
};

// A labeling of n points into clusters, with kNoise for unassigned points.
struct ClusterSet {
    std::vector<int> labels;
    int n_clusters = 0;
    Provenance provenance;

    std::size_t size() const { return labels.size(); }

    std::size_t noise_count() const {
        return static_cast<std::size_t>(
            std::count(labels.begin(), labels.end(), kNoise));
    }

    double noise_fraction() const {
        return labels.empty() ? 0.0
                              : static_cast<double>(noise_count()) / labels.size();
    }
};

inline int count_distinct_clusters(const std::vector<int>& labels) {
    std::vector<int> seen;
    for (int l : labels) {
        if (l == kNoise) continue;
        if (std::find(seen.begin(), seen.end(), l) == seen.end()) seen.push_back(l);
    }
    return static_cast<int>(seen.size());
}

inline ClusterSet make_cluster_set(std::vector<int> labels, Provenance prov = {}) {
    ClusterSet cs;
    cs.labels = std::move(labels);
    cs.n_clusters = count_distinct_clusters(cs.labels);
    cs.provenance = std::move(prov);
    return cs;
}

// Relabels clusters by first occurrence so that equal partitions compare
// equal element-wise. Noise stays noise.
inline ClusterSet canonicalize(const ClusterSet& cs) {
    ClusterSet out = cs;
    std::unordered_map<int, int> remap;
    int next = 0;
    for (std::size_t i = 0; i < cs.labels.size(); ++i) {
        const int l = cs.labels[i];
        if (l == kNoise) continue;
        auto it = remap.find(l);
        if (it == remap.end()) it = remap.emplace(l, next++).first;
        out.labels[i] = it->second;
    }
    out.n_clusters = next;
    return out;
}

inline bool same_partition(const ClusterSet& a, const ClusterSet& b) {
    if (a.labels.size() != b.labels.size()) return false;
    return canonicalize(a).labels == canonicalize(b).labels;
}

// Sizes of clusters 0..max_label; noise excluded.
inline std::vector<std::size_t> cluster_sizes(const std::vector<int>& labels) {
    int max_label = -1;
    for (int l : labels) max_label = std::max(max_label, l);
    std::vector<std::size_t> sizes(static_cast<std::size_t>(max_label + 1), 0);
    for (int l : labels) {
        if (l != kNoise) ++sizes[static_cast<std::size_t>(l)];
    }
    return sizes;
}

}

#endif
