#ifndef OCEANPROV_NEMI_HPP
#define OCEANPROV_NEMI_HPP

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <vector>

#include "cluster/clusterset.hpp"
#include "detail/parallel.hpp"
#include "errors.hpp"

namespace oceanprov {

// An ensemble of labelings of the same points. Weights are per-point cell
// volumes, or all ones for the plain cell-count variant.
struct Ensemble {
    std::vector<ClusterSet> members;
    std::vector<double> weights;
    int base_id = 0;

    std::size_t size() const { return members.size(); }
    std::size_t points() const { return members.empty() ? 0 : members.front().size(); }
};

inline Ensemble make_ensemble(std::vector<ClusterSet> members,
                              std::vector<double> weights = {}, int base_id = 0) {
    Ensemble e;
    e.members = std::move(members);
    if (e.members.empty()) throw DataError("ensemble: no members");
    for (const auto& m : e.members) {
        if (m.size() != e.members.front().size()) {
            throw DataError("ensemble: members label different numbers of points");
        }
    }
    if (weights.empty()) {
        e.weights.assign(e.members.front().size(), 1.0);
    } else {
        if (weights.size() != e.members.front().size()) {
            throw DataError("ensemble: weight count does not match points");
        }
        for (const double w : weights) {
            if (!(w > 0.0)) throw DataError("ensemble: weights must be positive");
        }
        e.weights = std::move(weights);
    }
    e.base_id = base_id;
    return e;
}

struct NemiResult {
    ClusterSet final_labels;
    std::vector<double> uncertainty;           // percent in [0, 100]
    std::vector<std::vector<int>> matched;     // per member, relabeled into base space
};

// Relabels so that label 0 is the largest cluster. Equal sizes keep their
// previous relative order; noise is untouched.
inline ClusterSet sort_labels_by_size(const ClusterSet& partition) {
    std::map<int, std::size_t> sizes;
    for (const int l : partition.labels) {
        if (l != kNoise) ++sizes[l];
    }
    std::vector<std::pair<int, std::size_t>> order(sizes.begin(), sizes.end());
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        return a.second > b.second || (a.second == b.second && a.first < b.first);
    });
    std::map<int, int> remap;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        remap[order[rank].first] = static_cast<int>(rank);
    }
    ClusterSet out = partition;
    for (auto& l : out.labels) {
        if (l != kNoise) l = remap.at(l);
    }
    out.n_clusters = static_cast<int>(order.size());
    return out;
}

// Weighted Jaccard overlap of two point sets over a shared index universe.
inline double nemi_overlap(const std::vector<std::size_t>& set_a,
                           const std::vector<std::size_t>& set_b,
                           const std::vector<double>& weights) {
    std::vector<std::uint8_t> in_a(weights.size(), 0);
    for (const std::size_t i : set_a) in_a[i] = 1;
    double intersection = 0.0, kept = 0.0;
    for (const std::size_t i : set_b) {
        if (in_a[i]) {
            intersection += weights[i];
        } else {
            kept += weights[i];
        }
    }
    double union_weight = kept;
    for (const std::size_t i : set_a) union_weight += weights[i];
    if (union_weight == 0.0) throw DataError("nemi_overlap: both sets are empty");
    return intersection / union_weight;
}

namespace detail {

inline std::vector<std::vector<std::size_t>> label_members(const std::vector<int>& labels,
                                                           int n_clusters) {
    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(n_clusters));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != kNoise) members[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    return members;
}

}  // namespace detail

// Greedy one-to-one matching of member labels onto base labels by descending
// weighted overlap. Member labels that win no base label keep their identity
// under a fresh id above the base's range; noise is not matched at all.
inline std::vector<int> match_to_base(const ClusterSet& base, const ClusterSet& member,
                                      const std::vector<double>& weights) {
    if (base.size() != member.size()) {
        throw DataError("match_to_base: partitions label different numbers of points");
    }
    const auto base_members = detail::label_members(base.labels, base.n_clusters);
    const auto member_members = detail::label_members(member.labels, member.n_clusters);

    struct Candidate {
        double overlap;
        int base_label;
        int member_label;
    };
    std::vector<Candidate> candidates;
    for (int bl = 0; bl < base.n_clusters; ++bl) {
        for (int ml = 0; ml < member.n_clusters; ++ml) {
            const double ov = nemi_overlap(base_members[static_cast<std::size_t>(bl)],
                                           member_members[static_cast<std::size_t>(ml)],
                                           weights);
            if (ov > 0.0) candidates.push_back({ov, bl, ml});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.overlap != b.overlap) return a.overlap > b.overlap;
        if (a.base_label != b.base_label) return a.base_label < b.base_label;
        return a.member_label < b.member_label;
    });

    std::vector<int> assignment(static_cast<std::size_t>(member.n_clusters), -1);
    std::vector<bool> base_taken(static_cast<std::size_t>(base.n_clusters), false);
    std::vector<bool> member_taken(static_cast<std::size_t>(member.n_clusters), false);
    for (const auto& c : candidates) {
        if (base_taken[static_cast<std::size_t>(c.base_label)] ||
            member_taken[static_cast<std::size_t>(c.member_label)]) {
            continue;
        }
        assignment[static_cast<std::size_t>(c.member_label)] = c.base_label;
        base_taken[static_cast<std::size_t>(c.base_label)] = true;
        member_taken[static_cast<std::size_t>(c.member_label)] = true;
    }
    int fresh = base.n_clusters;
    for (auto& a : assignment) {
        if (a < 0) a = fresh++;
    }

    std::vector<int> relabeled(member.size(), kNoise);
    for (std::size_t i = 0; i < member.labels.size(); ++i) {
        if (member.labels[i] != kNoise) {
            relabeled[i] = assignment[static_cast<std::size_t>(member.labels[i])];
        }
    }
    return relabeled;
}

// Fuses an ensemble: size-sort every member, match each onto the base, then
// take the per-point mode. Uncertainty is the percentage of members whose
// matched label disagrees with the final one. Points the base marks as noise
// stay noise. Fresh ids and noise votes count as disagreement and never win;
// the final label space is therefore the base's.
inline NemiResult aggregate(const Ensemble& ensemble) {
    if (ensemble.size() < 2) throw DataError("aggregate: need at least 2 members");
    if (ensemble.base_id < 0 ||
        static_cast<std::size_t>(ensemble.base_id) >= ensemble.size()) {
        throw DataError("aggregate: base_id out of range");
    }
    const std::size_t n = ensemble.points();
    const std::size_t m = ensemble.size();

    const ClusterSet base = sort_labels_by_size(
        ensemble.members[static_cast<std::size_t>(ensemble.base_id)]);

    NemiResult result;
    result.matched.assign(m, {});
    detail::parallel_for(m, [&](std::size_t mi) {
        if (static_cast<int>(mi) == ensemble.base_id) {
            result.matched[mi] = base.labels;
        } else {
            result.matched[mi] =
                match_to_base(base, sort_labels_by_size(ensemble.members[mi]),
                              ensemble.weights);
        }
    });

    std::vector<int> final_labels(n, kNoise);
    result.uncertainty.assign(n, 0.0);
    std::vector<std::size_t> votes(static_cast<std::size_t>(base.n_clusters));
    for (std::size_t i = 0; i < n; ++i) {
        int final_label = kNoise;
        if (base.labels[i] != kNoise) {
            std::fill(votes.begin(), votes.end(), 0);
            for (std::size_t mi = 0; mi < m; ++mi) {
                const int l = result.matched[mi][i];
                if (l != kNoise && l < base.n_clusters) {
                    ++votes[static_cast<std::size_t>(l)];
                }
            }
            std::size_t best_count = 0;
            for (std::size_t l = 0; l < votes.size(); ++l) {
                if (votes[l] > best_count) {
                    best_count = votes[l];
                    final_label = static_cast<int>(l);
                }
            }
            // Ties go to the base's own assignment when it is among the modes.
            const int base_label = base.labels[i];
            if (votes[static_cast<std::size_t>(base_label)] == best_count) {
                final_label = base_label;
            }
        }
        std::size_t agree = 0;
        for (std::size_t mi = 0; mi < m; ++mi) {
            if (result.matched[mi][i] == final_label) ++agree;
        }
        result.uncertainty[i] =
            100.0 * (1.0 - static_cast<double>(agree) / static_cast<double>(m));
        final_labels[i] = final_label;
    }

    result.final_labels = make_cluster_set(std::move(final_labels));
    result.final_labels.provenance =
        Provenance{"nemi", "members=" + std::to_string(m), 0};
    return result;
}

inline double mean_uncertainty(const NemiResult& r) {
    if (r.uncertainty.empty()) return 0.0;
    return std::accumulate(r.uncertainty.begin(), r.uncertainty.end(), 0.0) /
           static_cast<double>(r.uncertainty.size());
}

// Tries each member (or the first max_candidates of them) as base and keeps
// the one whose fusion has the lowest mean uncertainty; ties pick the lower
// index.
inline int select_base(const Ensemble& ensemble, std::size_t max_candidates = 0) {
    if (ensemble.size() < 2) throw DataError("select_base: need at least 2 members");
    std::size_t candidates = ensemble.size();
    if (max_candidates > 0) candidates = std::min(candidates, max_candidates);

    std::vector<double> means(candidates, 0.0);
    detail::parallel_for(candidates, [&](std::size_t c) {
        Ensemble trial = ensemble;
        trial.base_id = static_cast<int>(c);
        means[c] = mean_uncertainty(aggregate(trial));
    });

    int best = 0;
    for (std::size_t c = 1; c < candidates; ++c) {
        if (means[c] < means[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
    }
    return best;
}

}

#endif
