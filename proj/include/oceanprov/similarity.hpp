#ifndef OCEANPROV_SIMILARITY_HPP
#define OCEANPROV_SIMILARITY_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <vector>

#include "cluster/clusterset.hpp"
#include "errors.hpp"

namespace oceanprov {

struct CompareOptions {
    // Noise is compared as an ordinary label by default; set this to drop
    // points that are noise in either partition instead.
    bool drop_noise = false;
};

// Pairwise cluster-membership counts n_ij with marginals. Labels are mapped
// to compact indices in ascending label order.
struct ContingencyTable {
    std::vector<long long> counts;  // row-major, rows = clusters of A
    std::vector<long long> row_marginals;
    std::vector<long long> col_marginals;
    std::size_t rows = 0;
    std::size_t cols = 0;
    long long n = 0;

    long long at(std::size_t i, std::size_t j) const { return counts[i * cols + j]; }
};

inline ContingencyTable contingency_table(const std::vector<int>& a,
                                          const std::vector<int>& b,
                                          const CompareOptions& options = {}) {
    if (a.size() != b.size()) {
        throw DataError("contingency_table: partitions have different lengths");
    }
    std::map<int, std::size_t> map_a, map_b;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (options.drop_noise && (a[i] == kNoise || b[i] == kNoise)) continue;
        map_a.emplace(a[i], 0);
        map_b.emplace(b[i], 0);
    }
    std::size_t next = 0;
    for (auto& [label, idx] : map_a) idx = next++;
    next = 0;
    for (auto& [label, idx] : map_b) idx = next++;

    ContingencyTable table;
    table.rows = map_a.size();
    table.cols = map_b.size();
    table.counts.assign(table.rows * table.cols, 0);
    table.row_marginals.assign(table.rows, 0);
    table.col_marginals.assign(table.cols, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (options.drop_noise && (a[i] == kNoise || b[i] == kNoise)) continue;
        const std::size_t ra = map_a.at(a[i]);
        const std::size_t cb = map_b.at(b[i]);
        ++table.counts[ra * table.cols + cb];
        ++table.row_marginals[ra];
        ++table.col_marginals[cb];
        ++table.n;
    }
    return table;
}

namespace detail {

inline double comb2(double m) { return m * (m - 1.0) / 2.0; }

}  // namespace detail

// Pair-counting adjusted Rand index; 1 for identical partitions, ~0 for
// independent ones, down to -0.5 for systematic disagreement.
inline double ari(const ClusterSet& a, const ClusterSet& b,
                  const CompareOptions& options = {}) {
    const ContingencyTable t = contingency_table(a.labels, b.labels, options);
    if (t.n < 2) throw DataError("ari: need at least 2 points");

    double sum_cells = 0.0;
    for (const long long c : t.counts) sum_cells += detail::comb2(static_cast<double>(c));
    double sum_rows = 0.0;
    for (const long long c : t.row_marginals) sum_rows += detail::comb2(static_cast<double>(c));
    double sum_cols = 0.0;
    for (const long long c : t.col_marginals) sum_cols += detail::comb2(static_cast<double>(c));
    const double total_pairs = detail::comb2(static_cast<double>(t.n));

    const double expected = sum_rows * sum_cols / total_pairs;
    const double maximum = 0.5 * (sum_rows + sum_cols);
    if (maximum == expected) return 1.0;  // both partitions trivial
    return (sum_cells - expected) / (maximum - expected);
}

// NMI with the 2I/(H(A)+H(B)) normalisation and natural logarithms. Two
// trivial single-cluster partitions share everything, hence 1.
inline double nmi(const ClusterSet& a, const ClusterSet& b,
                  const CompareOptions& options = {}) {
    const ContingencyTable t = contingency_table(a.labels, b.labels, options);
    if (t.n < 1) throw DataError("nmi: empty comparison");
    const double n = static_cast<double>(t.n);

    double h_a = 0.0, h_b = 0.0, mutual = 0.0;
    for (const long long c : t.row_marginals) {
        if (c > 0) h_a -= (c / n) * std::log(c / n);
    }
    for (const long long c : t.col_marginals) {
        if (c > 0) h_b -= (c / n) * std::log(c / n);
    }
    for (std::size_t i = 0; i < t.rows; ++i) {
        for (std::size_t j = 0; j < t.cols; ++j) {
            const long long c = t.at(i, j);
            if (c == 0) continue;
            mutual += (c / n) *
                      std::log(n * static_cast<double>(c) /
                               (static_cast<double>(t.row_marginals[i]) *
                                static_cast<double>(t.col_marginals[j])));
        }
    }
    if (h_a + h_b == 0.0) return 1.0;
    return std::clamp(2.0 * mutual / (h_a + h_b), 0.0, 1.0);
}

// Mean best-match shared fraction of A's clusters with B's (asymmetric).
inline double overlap_asym(const ClusterSet& a, const ClusterSet& b,
                           const CompareOptions& options = {}) {
    const ContingencyTable t = contingency_table(a.labels, b.labels, options);
    if (t.n < 1) throw DataError("overlap: empty comparison");
    long long matched = 0;
    for (std::size_t i = 0; i < t.rows; ++i) {
        long long best = 0;
        for (std::size_t j = 0; j < t.cols; ++j) best = std::max(best, t.at(i, j));
        matched += best;
    }
    return static_cast<double>(matched) / static_cast<double>(t.n);
}

inline double overlap_sym(const ClusterSet& a, const ClusterSet& b,
                          const CompareOptions& options = {}) {
    return 0.5 * (overlap_asym(a, b, options) + overlap_asym(b, a, options));
}

// ---------------------------------------------------------------------------
// Mann-Whitney U

struct MannWhitneyResult {
    double u = 0.0;          // U statistic of the first sample
    double p_two_sided = 1.0;
    bool exact = false;
};

namespace detail {

// Midranks of the pooled sample plus the tie-group sizes.
inline std::pair<std::vector<double>, std::vector<std::size_t>> midranks(
    std::vector<double> pooled) {
    std::vector<std::size_t> order(pooled.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return pooled[x] < pooled[y]; });
    std::vector<double> ranks(pooled.size());
    std::vector<std::size_t> tie_sizes;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && pooled[order[j + 1]] == pooled[order[i]]) ++j;
        const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        tie_sizes.push_back(j - i + 1);
        i = j + 1;
    }
    return {std::move(ranks), std::move(tie_sizes)};
}

inline void enumerate_u_distribution(const std::vector<double>& ranks, std::size_t n_a,
                                     std::size_t start, double rank_sum, double u_obs,
                                     double mean, long long& extreme, long long& total) {
    if (n_a == 0) {
        ++total;
        const double u = rank_sum;  // caller pre-subtracts the offset
        if (std::abs(u - mean) >= std::abs(u_obs - mean) - 1e-12) ++extreme;
        return;
    }
    if (start + n_a > ranks.size()) return;
    enumerate_u_distribution(ranks, n_a - 1, start + 1, rank_sum + ranks[start], u_obs,
                             mean, extreme, total);
    enumerate_u_distribution(ranks, n_a, start + 1, rank_sum, u_obs, mean, extreme, total);
}

}  // namespace detail

// Rank-sum U with midrank tie handling. The p-value is an exact two-sided
// permutation probability for small samples and a tie-corrected normal
// approximation with continuity correction otherwise.
inline MannWhitneyResult mann_whitney_u(const std::vector<double>& sample_a,
                                        const std::vector<double>& sample_b) {
    if (sample_a.empty() || sample_b.empty()) {
        throw DataError("mann_whitney_u: samples must be non-empty");
    }
    const std::size_t n_a = sample_a.size();
    const std::size_t n_b = sample_b.size();
    std::vector<double> pooled(sample_a);
    pooled.insert(pooled.end(), sample_b.begin(), sample_b.end());
    const auto [ranks, tie_sizes] = detail::midranks(std::move(pooled));

    double rank_sum_a = 0.0;
    for (std::size_t i = 0; i < n_a; ++i) rank_sum_a += ranks[i];
    const double offset = static_cast<double>(n_a) * (static_cast<double>(n_a) + 1.0) / 2.0;
    const double u = rank_sum_a - offset;
    const double mean = static_cast<double>(n_a) * static_cast<double>(n_b) / 2.0;

    MannWhitneyResult result;
    result.u = u;

    const std::size_t n = n_a + n_b;
    if (std::min(n_a, n_b) <= 8 && n <= 25) {
        long long extreme = 0, total = 0;
        detail::enumerate_u_distribution(ranks, n_a, 0, -offset, u, mean, extreme, total);
        result.p_two_sided = static_cast<double>(extreme) / static_cast<double>(total);
        result.exact = true;
        return result;
    }

    double tie_term = 0.0;
    for (const std::size_t t : tie_sizes) {
        const double td = static_cast<double>(t);
        tie_term += td * td * td - td;
    }
    const double nd = static_cast<double>(n);
    const double variance = (mean / 6.0) * ((nd + 1.0) - tie_term / (nd * (nd - 1.0)));
    if (variance <= 0.0) {
        result.p_two_sided = 1.0;  // every pooled value tied
        return result;
    }
    const double correction = u > mean ? -0.5 : (u < mean ? 0.5 : 0.0);
    const double z = (u - mean + correction) / std::sqrt(variance);
    result.p_two_sided = std::min(1.0, std::erfc(std::abs(z) / std::numbers::sqrt2));
    return result;
}

}

#endif
