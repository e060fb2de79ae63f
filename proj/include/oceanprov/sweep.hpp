#ifndef OCEANPROV_SWEEP_HPP
#define OCEANPROV_SWEEP_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cluster/dbscan.hpp"
#include "cluster/kmeans.hpp"
#include "cluster/ward.hpp"
#include "cvi.hpp"
#include "detail/parallel.hpp"
#include "detail/random.hpp"
#include "detail/text.hpp"
#include "embedding/embed.hpp"
#include "errors.hpp"
#include "nemi.hpp"
#include "similarity.hpp"

namespace oceanprov {

inline constexpr std::array<const char*, 6> kCviNames = {
    "calinski_harabasz", "davies_bouldin", "silhouette",
    "cdr",               "cvnnh",          "kdbcv"};

namespace detail {

// Degenerate configurations yield NaN cells rather than aborting a sweep.
inline std::array<double, 6> all_cvi_scores(const Matrix& x, const ClusterSet& cs,
                                            int cvnnh_k) {
    std::array<double, 6> out;
    out.fill(std::numeric_limits<double>::quiet_NaN());
    const auto guarded = [&](int slot, auto&& fn) {
        try {
            out[static_cast<std::size_t>(slot)] = fn();
        } catch (const DegeneracyError&) {
        } catch (const std::invalid_argument&) {
        }
    };
    guarded(0, [&] { return calinski_harabasz(x, cs); });
    guarded(1, [&] { return davies_bouldin(x, cs); });
    guarded(2, [&] { return silhouette(x, cs); });
    guarded(3, [&] { return cdr(x, cs); });
    guarded(4, [&] { return cvnnh(x, cs, cvnnh_k); });
    guarded(5, [&] { return kdbcv(x, cs); });
    return out;
}

struct MeanStd {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double stddev = std::numeric_limits<double>::quiet_NaN();
};

inline MeanStd mean_std(std::span<const double> values) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const double v : values) {
        if (!std::isnan(v)) {
            sum += v;
            ++count;
        }
    }
    if (count == 0) return {};
    MeanStd out;
    out.mean = sum / static_cast<double>(count);
    double sq = 0.0;
    for (const double v : values) {
        if (!std::isnan(v)) sq += (v - out.mean) * (v - out.mean);
    }
    out.stddev = std::sqrt(sq / static_cast<double>(count));
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// CVI curves over k

enum class CurveAlgorithm { kKMeans, kWard };

struct ScoreCurve {
    std::vector<int> ks;
    std::array<std::vector<double>, 6> mean;    // NaN = degenerate at that k
    std::array<std::vector<double>, 6> stddev;
    std::vector<double> n_clusters;
    std::vector<double> noise_fraction;
    int repeats = 1;
};

inline ScoreCurve score_curve(const Matrix& x, CurveAlgorithm algorithm,
                              std::vector<int> ks, int repeats,
                              std::uint64_t base_seed, int cvnnh_k = 10) {
    if (repeats < 1) throw std::invalid_argument("score_curve: repeats must be >= 1");
    for (const int k : ks) {
        if (k < 2 || static_cast<std::size_t>(k) >= x.rows()) {
            throw std::invalid_argument("score_curve: k range must lie in [2, n-1]");
        }
    }

    ScoreCurve curve;
    curve.ks = std::move(ks);
    curve.repeats = repeats;
    for (auto& m : curve.mean) m.assign(curve.ks.size(), 0.0);
    for (auto& s : curve.stddev) s.assign(curve.ks.size(), 0.0);
    curve.n_clusters.assign(curve.ks.size(), 0.0);
    curve.noise_fraction.assign(curve.ks.size(), 0.0);

    detail::parallel_for(curve.ks.size(), [&](std::size_t ki) {
        const int k = curve.ks[ki];
        std::array<std::vector<double>, 6> samples;
        for (auto& s : samples) s.assign(static_cast<std::size_t>(repeats), 0.0);
        double clusters = 0.0, noise = 0.0;
        for (int r = 0; r < repeats; ++r) {
            ClusterSet cs;
            if (algorithm == CurveAlgorithm::kKMeans) {
                cs = kmeans(x, k, base_seed + static_cast<std::uint64_t>(r)).clusters;
            } else {
                cs = ward(x, k).first;
            }
            const auto scores = detail::all_cvi_scores(x, cs, cvnnh_k);
            for (std::size_t s = 0; s < 6; ++s) {
                samples[s][static_cast<std::size_t>(r)] = scores[s];
            }
            clusters += cs.n_clusters;
            noise += cs.noise_fraction();
        }
        for (std::size_t s = 0; s < 6; ++s) {
            const auto agg = detail::mean_std(samples[s]);
            curve.mean[s][ki] = agg.mean;
            curve.stddev[s][ki] = agg.stddev;
        }
        curve.n_clusters[ki] = clusters / repeats;
        curve.noise_fraction[ki] = noise / repeats;
    });
    return curve;
}

inline void write_score_curve_csv(const ScoreCurve& curve, std::ostream& out) {
    out << "k,metric,mean,std,n_clusters,noise_fraction\n";
    for (std::size_t ki = 0; ki < curve.ks.size(); ++ki) {
        for (std::size_t s = 0; s < 6; ++s) {
            out << curve.ks[ki] << ',' << kCviNames[s] << ',';
            if (!std::isnan(curve.mean[s][ki])) {
                out << detail::format_double(curve.mean[s][ki]) << ','
                    << detail::format_double(curve.stddev[s][ki]);
            } else {
                out << ',';
            }
            out << ',' << detail::format_double(curve.n_clusters[ki]) << ','
                << detail::format_double(curve.noise_fraction[ki]) << '\n';
        }
    }
}

// ---------------------------------------------------------------------------
// DBSCAN hyperparameter grid

struct EpsilonRange {
    double min = 0.01;
    double max = 0.2;
    int steps = 20;
};

struct MinSamplesRange {
    int min = 2;
    int max = 11;
};

struct Heatmap {
    std::vector<double> epsilons;
    std::vector<int> min_samples;
    std::array<Matrix, 6> scores;  // epsilons x min_samples, NaN = degenerate
    Matrix n_clusters;
    Matrix noise_fraction;
};

inline std::vector<std::size_t> sweep_point_order(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    detail::shuffle(order, rng);
    return order;
}

inline Heatmap dbscan_grid(const Matrix& x, const EpsilonRange& eps_range,
                           const MinSamplesRange& ms_range,
                           std::uint64_t point_order_seed, int cvnnh_k = 10) {
    if (eps_range.steps < 2) throw std::invalid_argument("dbscan_grid: need >= 2 steps");
    if (!(eps_range.min > 0.0) || !(eps_range.max > eps_range.min)) {
        throw std::invalid_argument("dbscan_grid: bad epsilon range");
    }
    if (ms_range.min < 2 || ms_range.max < ms_range.min) {
        throw std::invalid_argument("dbscan_grid: bad min_samples range");
    }

    Heatmap map;
    map.epsilons.resize(static_cast<std::size_t>(eps_range.steps));
    for (int i = 0; i < eps_range.steps; ++i) {
        map.epsilons[static_cast<std::size_t>(i)] =
            eps_range.min +
            (eps_range.max - eps_range.min) * i / static_cast<double>(eps_range.steps - 1);
    }
    for (int m = ms_range.min; m <= ms_range.max; ++m) map.min_samples.push_back(m);

    const std::size_t rows = map.epsilons.size();
    const std::size_t cols = map.min_samples.size();
    for (auto& s : map.scores) {
        s = Matrix(rows, cols, std::numeric_limits<double>::quiet_NaN());
    }
    map.n_clusters = Matrix(rows, cols, 0.0);
    map.noise_fraction = Matrix(rows, cols, 0.0);

    const auto order = sweep_point_order(x.rows(), point_order_seed);
    detail::parallel_for(rows * cols, [&](std::size_t cell) {
        const std::size_t i = cell / cols;
        const std::size_t j = cell % cols;
        const ClusterSet cs = dbscan(x, map.epsilons[i], map.min_samples[j], order);
        const auto scores = detail::all_cvi_scores(x, cs, cvnnh_k);
        for (std::size_t s = 0; s < 6; ++s) map.scores[s](i, j) = scores[s];
        map.n_clusters(i, j) = cs.n_clusters;
        map.noise_fraction(i, j) = cs.noise_fraction();
    });
    return map;
}

inline void write_heatmap_csv(const Heatmap& map, std::ostream& out) {
    out << "epsilon,min_samples,metric,value\n";
    const auto emit = [&](std::size_t i, std::size_t j, const char* metric, double v) {
        out << detail::format_double(map.epsilons[i]) << ',' << map.min_samples[j] << ','
            << metric << ',' << (std::isnan(v) ? std::string() : detail::format_double(v))
            << '\n';
    };
    for (std::size_t i = 0; i < map.epsilons.size(); ++i) {
        for (std::size_t j = 0; j < map.min_samples.size(); ++j) {
            for (std::size_t s = 0; s < 6; ++s) emit(i, j, kCviNames[s], map.scores[s](i, j));
            emit(i, j, "n_clusters", map.n_clusters(i, j));
            emit(i, j, "noise_fraction", map.noise_fraction(i, j));
        }
    }
}

// ---------------------------------------------------------------------------
// Elbow detection

namespace detail {

inline std::vector<double> normalize_unit(std::span<const double> values) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(hi > lo)) throw DegeneracyError("elbow: curve is constant");
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - lo) / (hi - lo);
    return out;
}

}  // namespace detail

// Index of the strongest discrete curvature of the [0,1]-normalised curve.
// Normalising first makes the answer invariant under affine rescaling.
inline std::size_t elbow_index(std::span<const double> curve) {
    if (curve.size() < 3) throw std::invalid_argument("elbow_1d: need >= 3 points");
    const auto values = detail::normalize_unit(curve);
    std::size_t best = 0;
    double best_curvature = 0.0;
    for (std::size_t i = 1; i + 1 < values.size(); ++i) {
        const double curvature = values[i - 1] - 2.0 * values[i] + values[i + 1];
        if (curvature > best_curvature) {
            best_curvature = curvature;
            best = i;
        }
    }
    if (best_curvature <= 1e-12) throw DegeneracyError("elbow_1d: no curvature in curve");
    return best;
}

inline int elbow_1d(std::span<const int> ks, std::span<const double> curve) {
    if (ks.size() != curve.size()) throw std::invalid_argument("elbow_1d: length mismatch");
    return ks[elbow_index(curve)];
}

struct Elbow2d {
    std::size_t epsilon_index = 0;
    std::size_t min_samples_index = 0;
    double epsilon = 0.0;
    int min_samples = 0;
};

// Cell of steepest forward-difference gradient after normalising the value
// and both hyperparameter axes to [0, 1]. Ties prefer the smaller epsilon,
// then the smaller min_samples.
inline Elbow2d elbow_2d(const Heatmap& map) {
    const std::size_t rows = map.epsilons.size();
    const std::size_t cols = map.min_samples.size();
    if (rows < 2 || cols < 2) throw std::invalid_argument("elbow_2d: need a 2x2 grid");

    const auto values = detail::normalize_unit(
        std::span<const double>(map.n_clusters.data().data(), rows * cols));
    std::vector<double> ex(rows), ey(cols);
    for (std::size_t i = 0; i < rows; ++i) {
        ex[i] = (map.epsilons[i] - map.epsilons.front()) /
                (map.epsilons.back() - map.epsilons.front());
    }
    for (std::size_t j = 0; j < cols; ++j) {
        ey[j] = static_cast<double>(map.min_samples[j] - map.min_samples.front()) /
                static_cast<double>(map.min_samples.back() - map.min_samples.front());
    }

    Elbow2d best;
    double best_mag = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            double gx = 0.0, gy = 0.0;
            if (i + 1 < rows) {
                gx = (values[(i + 1) * cols + j] - values[i * cols + j]) / (ex[i + 1] - ex[i]);
            }
            if (j + 1 < cols) {
                gy = (values[i * cols + j + 1] - values[i * cols + j]) / (ey[j + 1] - ey[j]);
            }
            const double mag = std::sqrt(gx * gx + gy * gy);
            if (mag > best_mag + 1e-15) {
                best_mag = mag;
                best.epsilon_index = i;
                best.min_samples_index = j;
            }
        }
    }
    if (best_mag <= 1e-12) throw DegeneracyError("elbow_2d: heatmap has no gradient");
    best.epsilon = map.epsilons[best.epsilon_index];
    best.min_samples = map.min_samples[best.min_samples_index];
    return best;
}

// ---------------------------------------------------------------------------
// Repeated-pipeline ensembles

struct EnsemblePipeline {
    EmbeddingParams embed_params;
    double dbscan_eps = 0.1;
    int dbscan_min_samples = 4;
    bool use_embedding = true;   // false: cluster the input coordinates directly
    bool scale_coords = true;    // min-max scale coordinates before DBSCAN
    bool shuffle_order = false;  // per-run seeded shuffle of the DBSCAN scan order
};

struct VariabilityReport {
    double ari_mean = 0.0, ari_std = 0.0;
    double nmi_mean = 0.0, nmi_std = 0.0;
    double overlap_mean = 0.0, overlap_std = 0.0;
    std::size_t pairs = 0;
};

// Mean and spread of ARI, NMI and symmetric overlap over every member pair.
inline VariabilityReport pairwise_variability(const std::vector<ClusterSet>& members) {
    std::vector<double> aris, nmis, overlaps;
    for (std::size_t i = 0; i < members.size(); ++i) {
        for (std::size_t j = i + 1; j < members.size(); ++j) {
            aris.push_back(ari(members[i], members[j]));
            nmis.push_back(nmi(members[i], members[j]));
            overlaps.push_back(overlap_sym(members[i], members[j]));
        }
    }
    VariabilityReport report;
    report.pairs = aris.size();
    const auto a = detail::mean_std(aris);
    const auto n = detail::mean_std(nmis);
    const auto o = detail::mean_std(overlaps);
    report.ari_mean = a.mean;
    report.ari_std = a.stddev;
    report.nmi_mean = n.mean;
    report.nmi_std = n.stddev;
    report.overlap_mean = o.mean;
    report.overlap_std = o.stddev;
    return report;
}

namespace detail {

inline void scale_columns_unit(Matrix& m) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t r = 0; r < m.rows(); ++r) {
            lo = std::min(lo, m(r, c));
            hi = std::max(hi, m(r, c));
        }
        const double range = hi - lo;
        for (std::size_t r = 0; r < m.rows(); ++r) {
            m(r, c) = range > 0.0 ? (m(r, c) - lo) / range : 0.0;
        }
    }
}

}  // namespace detail

// Runs the embed-then-cluster pipeline n_runs times. Run i embeds with seed
// base_seed + i; when shuffle_order is on, the DBSCAN scan order uses seed
// base_seed + 100000 + i. The report covers every pair of runs.
inline std::pair<Ensemble, VariabilityReport> ensemble_run(
    const Matrix& x, const EnsemblePipeline& pipeline, int n_runs,
    std::uint64_t base_seed, std::vector<double> weights = {}) {
    if (n_runs < 2) throw std::invalid_argument("ensemble_run: need >= 2 runs");

    std::vector<ClusterSet> members(static_cast<std::size_t>(n_runs));
    detail::parallel_for(members.size(), [&](std::size_t run) {
        Matrix coords;
        if (pipeline.use_embedding) {
            EmbeddingParams params = pipeline.embed_params;
            params.seed = base_seed + run;
            coords = embed(x, params).coords;
        } else {
            coords = x;
        }
        if (pipeline.scale_coords) detail::scale_columns_unit(coords);
        if (pipeline.shuffle_order) {
            members[run] = dbscan(coords, pipeline.dbscan_eps, pipeline.dbscan_min_samples,
                                  sweep_point_order(coords.rows(), base_seed + 100000 + run));
        } else {
            members[run] =
                dbscan(coords, pipeline.dbscan_eps, pipeline.dbscan_min_samples);
        }
    });

    VariabilityReport report = pairwise_variability(members);
    return {make_ensemble(std::move(members), std::move(weights)), report};
}

}

#endif
