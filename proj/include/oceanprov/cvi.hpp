#ifndef OCEANPROV_CVI_HPP
#define OCEANPROV_CVI_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "cluster/clusterset.hpp"
#include "errors.hpp"
#include "matrix.hpp"

namespace oceanprov {

namespace detail {

// Noise points take no part in any validity index; every index operates on
// this filtered view.
struct FilteredPartition {
    Matrix x;
    std::vector<int> labels;                       // compact ids 0..k-1
    std::vector<std::vector<std::size_t>> members; // rows of x per cluster
    int k = 0;
    std::size_t n = 0;
};

inline FilteredPartition filter_noise(const Matrix& x, const ClusterSet& partition) {
    if (x.rows() != partition.labels.size()) {
        throw DataError("validity index: matrix and partition sizes differ");
    }
    FilteredPartition out;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < partition.labels.size(); ++i) {
        if (partition.labels[i] != kNoise) keep.push_back(i);
    }
    out.n = keep.size();
    out.x = Matrix(out.n, x.cols());
    std::vector<int> remap;
    out.labels.resize(out.n);
    for (std::size_t r = 0; r < keep.size(); ++r) {
        for (std::size_t c = 0; c < x.cols(); ++c) out.x(r, c) = x(keep[r], c);
        const int original = partition.labels[keep[r]];
        auto it = std::find(remap.begin(), remap.end(), original);
        if (it == remap.end()) {
            remap.push_back(original);
            it = remap.end() - 1;
        }
        out.labels[r] = static_cast<int>(it - remap.begin());
    }
    out.k = static_cast<int>(remap.size());
    out.members.resize(static_cast<std::size_t>(out.k));
    for (std::size_t r = 0; r < out.n; ++r) {
        out.members[static_cast<std::size_t>(out.labels[r])].push_back(r);
    }
    return out;
}

}  // namespace detail

// Centroid-based summary shared by the variance-ratio style indices.
struct PartitionGeometry {
    Matrix centroids;                 // k x d
    std::vector<double> overall_center;
    std::vector<std::size_t> sizes;
    double tr_within = 0.0;           // tr(W)
    double tr_between = 0.0;          // tr(B)
    std::vector<double> mean_to_centroid;  // s_q
    Matrix centroid_distances;        // k x k
};

inline PartitionGeometry partition_geometry(const Matrix& x, const ClusterSet& partition) {
    const auto f = detail::filter_noise(x, partition);
    if (f.k == 0) throw DegeneracyError("partition_geometry: no non-noise clusters");

    const std::size_t d = f.x.cols();
    PartitionGeometry geo;
    geo.centroids = Matrix(static_cast<std::size_t>(f.k), d, 0.0);
    geo.overall_center.assign(d, 0.0);
    geo.sizes.resize(static_cast<std::size_t>(f.k));
    geo.mean_to_centroid.assign(static_cast<std::size_t>(f.k), 0.0);

    for (std::size_t q = 0; q < geo.sizes.size(); ++q) {
        geo.sizes[q] = f.members[q].size();
        for (const std::size_t i : f.members[q]) {
            for (std::size_t c = 0; c < d; ++c) geo.centroids(q, c) += f.x(i, c);
        }
        for (std::size_t c = 0; c < d; ++c) {
            geo.centroids(q, c) /= static_cast<double>(geo.sizes[q]);
        }
    }
    for (std::size_t i = 0; i < f.n; ++i) {
        for (std::size_t c = 0; c < d; ++c) geo.overall_center[c] += f.x(i, c);
    }
    for (std::size_t c = 0; c < d; ++c) {
        geo.overall_center[c] /= static_cast<double>(f.n);
    }

    for (std::size_t q = 0; q < geo.sizes.size(); ++q) {
        double within = 0.0;
        for (const std::size_t i : f.members[q]) {
            const double sq = squared_distance(f.x.row(i), geo.centroids.row(q));
            within += sq;
            geo.mean_to_centroid[q] += std::sqrt(sq);
        }
        geo.tr_within += within;
        geo.mean_to_centroid[q] /= static_cast<double>(geo.sizes[q]);
        geo.tr_between += static_cast<double>(geo.sizes[q]) *
                          squared_distance(geo.centroids.row(q),
                                           std::span<const double>(geo.overall_center));
    }

    geo.centroid_distances = Matrix(static_cast<std::size_t>(f.k),
                                    static_cast<std::size_t>(f.k), 0.0);
    for (std::size_t q = 0; q < geo.sizes.size(); ++q) {
        for (std::size_t r = q + 1; r < geo.sizes.size(); ++r) {
            const double dist = euclidean_distance(geo.centroids.row(q), geo.centroids.row(r));
            geo.centroid_distances(q, r) = dist;
            geo.centroid_distances(r, q) = dist;
        }
    }
    return geo;
}

// Density summary backing CDR, CVNNH and k-DBCV. Singleton clusters carry
// NaN core distances and sparseness; the indices decide what that means.
struct DensityGeometry {
    std::vector<double> local_density;       // nearest same-cluster neighbour distance
    std::vector<double> cluster_avg_density;
    std::vector<double> cluster_uniformity;  // the CDR two-case formula
    std::vector<double> core_distance;       // all-points-core-distance
    std::vector<double> cluster_sparseness;  // max edge of the MRD spanning tree
    Matrix cluster_separation;               // min pairwise MRD between clusters
    std::vector<double> foreign_fraction;    // share of foreign points among K neighbours
};

namespace detail {

inline double mutual_reachability(double core_a, double core_b, double dist) {
    return std::max({core_a, core_b, dist});
}

}  // namespace detail

inline DensityGeometry density_geometry(const Matrix& x, const ClusterSet& partition,
                                        int neighbourhood = 10) {
    const auto f = detail::filter_noise(x, partition);
    if (f.k == 0) throw DegeneracyError("density_geometry: no non-noise clusters");
    const double feature_count = static_cast<double>(f.x.cols());
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();

    Matrix dist(f.n, f.n, 0.0);
    double min_positive = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < f.n; ++i) {
        for (std::size_t j = i + 1; j < f.n; ++j) {
            const double dij = euclidean_distance(f.x.row(i), f.x.row(j));
            dist(i, j) = dij;
            dist(j, i) = dij;
            if (dij > 0.0) min_positive = std::min(min_positive, dij);
        }
    }
    // Coincident points would make the inverse-density sum blow up; they are
    // pushed to a tiny positive distance instead.
    const double zero_substitute = std::isfinite(min_positive) ? min_positive * 1e-6 : nan;

    DensityGeometry geo;
    geo.local_density.assign(f.n, nan);
    geo.cluster_avg_density.assign(static_cast<std::size_t>(f.k), nan);
    geo.cluster_uniformity.assign(static_cast<std::size_t>(f.k), 0.0);
    geo.core_distance.assign(f.n, nan);
    geo.cluster_sparseness.assign(static_cast<std::size_t>(f.k), nan);
    geo.cluster_separation = Matrix(static_cast<std::size_t>(f.k),
                                    static_cast<std::size_t>(f.k), nan);
    geo.foreign_fraction.assign(f.n, nan);

    for (std::size_t q = 0; q < f.members.size(); ++q) {
        const auto& members = f.members[q];
        const std::size_t m = members.size();
        if (m < 2) continue;  // uniformity stays 0, densities undefined

        double avg = 0.0;
        for (const std::size_t i : members) {
            double nearest = std::numeric_limits<double>::infinity();
            double inv_sum = 0.0;
            for (const std::size_t j : members) {
                if (i == j) continue;
                double dij = dist(i, j);
                nearest = std::min(nearest, dij);
                if (dij == 0.0) {
                    if (std::isnan(zero_substitute)) {
                        throw DegeneracyError("density_geometry: all points coincident");
                    }
                    dij = zero_substitute;
                }
                inv_sum += std::pow(1.0 / dij, feature_count);
            }
            geo.local_density[i] = nearest;
            avg += nearest;
            geo.core_distance[i] =
                std::pow(inv_sum / static_cast<double>(m - 1), -1.0 / feature_count);
        }
        avg /= static_cast<double>(m);
        geo.cluster_avg_density[q] = avg;
        if (avg > 0.0) {
            double deviation = 0.0;
            for (const std::size_t i : members) {
                deviation += std::abs(geo.local_density[i] - avg);
            }
            geo.cluster_uniformity[q] = deviation / avg;
        }

        // Prim over the mutual-reachability graph of the cluster.
        std::vector<double> best(m, std::numeric_limits<double>::infinity());
        std::vector<bool> in_tree(m, false);
        best[0] = 0.0;
        double max_edge = 0.0;
        for (std::size_t step = 0; step < m; ++step) {
            std::size_t pick = m;
            for (std::size_t t = 0; t < m; ++t) {
                if (!in_tree[t] && (pick == m || best[t] < best[pick])) pick = t;
            }
            in_tree[pick] = true;
            max_edge = std::max(max_edge, best[pick]);
            for (std::size_t t = 0; t < m; ++t) {
                if (in_tree[t]) continue;
                const double mrd = detail::mutual_reachability(
                    geo.core_distance[members[pick]], geo.core_distance[members[t]],
                    dist(members[pick], members[t]));
                best[t] = std::min(best[t], mrd);
            }
        }
        geo.cluster_sparseness[q] = max_edge;
    }

    for (std::size_t q = 0; q < f.members.size(); ++q) {
        for (std::size_t r = q + 1; r < f.members.size(); ++r) {
            double sep = std::numeric_limits<double>::infinity();
            for (const std::size_t i : f.members[q]) {
                for (const std::size_t j : f.members[r]) {
                    const double ci = geo.core_distance[i];
                    const double cj = geo.core_distance[j];
                    if (std::isnan(ci) || std::isnan(cj)) continue;
                    sep = std::min(sep, detail::mutual_reachability(ci, cj, dist(i, j)));
                }
            }
            if (std::isfinite(sep)) {
                geo.cluster_separation(q, r) = sep;
                geo.cluster_separation(r, q) = sep;
            }
        }
    }

    if (neighbourhood >= 1 && static_cast<std::size_t>(neighbourhood) < f.n) {
        std::vector<std::size_t> order;
        order.reserve(f.n - 1);
        for (std::size_t i = 0; i < f.n; ++i) {
            order.clear();
            for (std::size_t j = 0; j < f.n; ++j) {
                if (j != i) order.push_back(j);
            }
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return dist(i, a) < dist(i, b);
            });
            int foreign = 0;
            for (int t = 0; t < neighbourhood; ++t) {
                if (f.labels[order[static_cast<std::size_t>(t)]] != f.labels[i]) ++foreign;
            }
            geo.foreign_fraction[i] =
                static_cast<double>(foreign) / static_cast<double>(neighbourhood);
        }
    }
    return geo;
}

// ---------------------------------------------------------------------------
// The six indices. All of them ignore noise points entirely.

inline double calinski_harabasz(const Matrix& x, const ClusterSet& partition) {
    const auto f = detail::filter_noise(x, partition);
    if (f.k < 2) throw std::invalid_argument("calinski_harabasz: need at least 2 clusters");
    if (f.n <= static_cast<std::size_t>(f.k)) {
        throw std::invalid_argument("calinski_harabasz: need more points than clusters");
    }
    const PartitionGeometry geo = partition_geometry(x, partition);
    if (geo.tr_within <= 0.0) {
        throw DegeneracyError("calinski_harabasz: zero within-cluster dispersion");
    }
    return (geo.tr_between / geo.tr_within) *
           (static_cast<double>(f.n - static_cast<std::size_t>(f.k)) /
            static_cast<double>(f.k - 1));
}

inline double davies_bouldin(const Matrix& x, const ClusterSet& partition) {
    const auto f = detail::filter_noise(x, partition);
    if (f.k < 2) throw std::invalid_argument("davies_bouldin: need at least 2 clusters");
    const PartitionGeometry geo = partition_geometry(x, partition);
    double total = 0.0;
    for (std::size_t q = 0; q < geo.sizes.size(); ++q) {
        double worst = 0.0;
        for (std::size_t r = 0; r < geo.sizes.size(); ++r) {
            if (q == r) continue;
            const double d = geo.centroid_distances(q, r);
            if (d <= 0.0) {
                throw DegeneracyError("davies_bouldin: coincident cluster centroids");
            }
            worst = std::max(worst, (geo.mean_to_centroid[q] + geo.mean_to_centroid[r]) / d);
        }
        total += worst;
    }
    return total / static_cast<double>(f.k);
}

inline double silhouette(const Matrix& x, const ClusterSet& partition) {
    const auto f = detail::filter_noise(x, partition);
    if (f.k < 2 || f.n <= static_cast<std::size_t>(f.k)) {
        throw std::invalid_argument("silhouette: need 2 <= k <= n-1");
    }
    double total = 0.0;
    std::vector<double> sum_to_cluster(static_cast<std::size_t>(f.k));
    for (std::size_t i = 0; i < f.n; ++i) {
        std::fill(sum_to_cluster.begin(), sum_to_cluster.end(), 0.0);
        for (std::size_t j = 0; j < f.n; ++j) {
            if (i == j) continue;
            sum_to_cluster[static_cast<std::size_t>(f.labels[j])] +=
                euclidean_distance(f.x.row(i), f.x.row(j));
        }
        const auto own = static_cast<std::size_t>(f.labels[i]);
        const std::size_t own_size = f.members[own].size();
        if (own_size < 2) continue;  // singletons contribute 0

        const double a = sum_to_cluster[own] / static_cast<double>(own_size - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t q = 0; q < sum_to_cluster.size(); ++q) {
            if (q == own) continue;
            b = std::min(b, sum_to_cluster[q] / static_cast<double>(f.members[q].size()));
        }
        const double denom = std::max(a, b);
        total += denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return total / static_cast<double>(f.n);
}

inline double cdr(const Matrix& x, const ClusterSet& partition) {
    const auto f = detail::filter_noise(x, partition);
    if (f.k < 1) throw DegeneracyError("cdr: no non-noise clusters");
    const DensityGeometry geo = density_geometry(x, partition, 0);
    double total = 0.0;
    for (std::size_t q = 0; q < f.members.size(); ++q) {
        total += static_cast<double>(f.members[q].size()) * geo.cluster_uniformity[q];
    }
    return total / static_cast<double>(f.n);
}

inline double cvnnh(const Matrix& x, const ClusterSet& partition, int K = 10) {
    if (K < 1) throw std::invalid_argument("cvnnh: K must be >= 1");
    const auto f = detail::filter_noise(x, partition);
    if (f.k < 1) throw DegeneracyError("cvnnh: no non-noise clusters");
    if (f.n <= static_cast<std::size_t>(K)) {
        throw DegeneracyError("cvnnh: K must be smaller than the number of points");
    }
    const DensityGeometry geo = density_geometry(x, partition, K);

    double separation = 0.0;
    for (std::size_t q = 0; q < f.members.size(); ++q) {
        double mean_foreign = 0.0;
        for (const std::size_t i : f.members[q]) mean_foreign += geo.foreign_fraction[i];
        separation = std::max(separation,
                              mean_foreign / static_cast<double>(f.members[q].size()));
    }

    double pair_sum = 0.0;
    double pair_count = 0.0;
    for (std::size_t q = 0; q < f.members.size(); ++q) {
        const auto& members = f.members[q];
        if (members.size() < 2) continue;
        for (const std::size_t i : members) {
            for (const std::size_t j : members) {
                if (i == j) continue;
                pair_sum += euclidean_distance(f.x.row(i), f.x.row(j));
            }
        }
        pair_count += static_cast<double>(members.size()) *
                      static_cast<double>(members.size() - 1);
    }
    const double compactness = pair_count > 0.0 ? pair_sum / pair_count : 0.0;
    return separation + compactness;
}

// Returns -1 when the partition is all noise, matching the convention used
// for uncomputable density structure in the reference results.
inline double kdbcv(const Matrix& x, const ClusterSet& partition) {
    const auto f = detail::filter_noise(x, partition);
    if (f.n == 0) return -1.0;
    if (f.k < 2) throw DegeneracyError("kdbcv: need at least 2 non-noise clusters");
    for (const auto& members : f.members) {
        if (members.size() < 2) {
            throw DegeneracyError("kdbcv: cluster with fewer than 2 points");
        }
    }

    const DensityGeometry geo = density_geometry(x, partition, 0);
    double total = 0.0;
    for (std::size_t q = 0; q < f.members.size(); ++q) {
        double min_sep = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < f.members.size(); ++r) {
            if (q == r) continue;
            min_sep = std::min(min_sep, geo.cluster_separation(q, r));
        }
        const double spars = geo.cluster_sparseness[q];
        const double denom = std::max(min_sep, spars);
        const double validity = denom > 0.0 ? (min_sep - spars) / denom : 0.0;
        total += static_cast<double>(f.members[q].size()) * validity;
    }
    return total / static_cast<double>(f.n);
}

}

#endif
