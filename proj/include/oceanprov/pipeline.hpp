#ifndef OCEANPROV_PIPELINE_HPP
#define OCEANPROV_PIPELINE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "cluster/dbscan.hpp"
#include "cluster/kmeans.hpp"
#include "cluster/ward.hpp"
#include "detail/text.hpp"
#include "embedding/embed.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "nemi.hpp"
#include "similarity.hpp"
#include "sweep.hpp"

namespace oceanprov {

// Every knob of the staged pipeline, with the defaults documented in the
// README. Seeds are all derived from base_seed: the single-shot embedding
// uses base_seed, ensemble run i uses base_seed + i, and shuffled DBSCAN
// scan orders use base_seed + 100000 (+ i).
struct PipelineConfig {
    std::string input;
    std::string output_dir = "out";
    std::string stages = "impute,embed,cluster,nemi";
    int noise_label = 8;
    std::string weight_mode = "volume";  // volume | count
    std::uint64_t base_seed = 1234;

    int impute_k = 5;

    int embed_n_neighbors = 20;
    double embed_min_dist = 0.0;
    int embed_n_components = 3;
    int embed_n_epochs = 500;
    int embed_negative_sample_rate = 5;
    double embed_learning_rate = 1.0;

    std::string cluster_algorithm = "dbscan";  // dbscan | kmeans | ward
    double cluster_eps = 0.10661017;
    int cluster_min_samples = 4;
    int cluster_k = 8;
    bool cluster_scale_embedding = true;
    bool cluster_shuffle_order = false;

    int nemi_runs = 100;
    std::string nemi_base = "auto";  // auto | member index
    int nemi_max_base_candidates = 0;  // 0 = try every member
};

namespace detail {

struct ConfigField {
    const char* key;
    std::string (*get)(const PipelineConfig&);
    void (*set)(PipelineConfig&, const std::string&);
};

inline std::string bool_to_string(bool b) { return b ? "true" : "false"; }

inline bool parse_bool(const std::string& key, const std::string& value) {
    const std::string v = to_lower(value);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw DataError("config: key " + key + " expects a boolean, got '" + value + "'");
}

inline double parse_number(const std::string& key, const std::string& value) {
    const auto v = parse_double(value);
    if (!v) throw DataError("config: key " + key + " expects a number, got '" + value + "'");
    return *v;
}

inline int parse_int(const std::string& key, const std::string& value) {
    const double v = parse_number(key, value);
    if (std::abs(v - std::nearbyint(v)) > 1e-9) {
        throw DataError("config: key " + key + " expects an integer, got '" + value + "'");
    }
    return static_cast<int>(std::nearbyint(v));
}

inline const std::vector<ConfigField>& config_fields() {
    static const std::vector<ConfigField> fields = {
        {"input", [](const PipelineConfig& c) { return c.input; },
         [](PipelineConfig& c, const std::string& v) { c.input = v; }},
        {"output_dir", [](const PipelineConfig& c) { return c.output_dir; },
         [](PipelineConfig& c, const std::string& v) { c.output_dir = v; }},
        {"stages", [](const PipelineConfig& c) { return c.stages; },
         [](PipelineConfig& c, const std::string& v) { c.stages = v; }},
        {"noise_label", [](const PipelineConfig& c) { return std::to_string(c.noise_label); },
         [](PipelineConfig& c, const std::string& v) { c.noise_label = parse_int("noise_label", v); }},
        {"weight_mode", [](const PipelineConfig& c) { return c.weight_mode; },
         [](PipelineConfig& c, const std::string& v) { c.weight_mode = v; }},
        {"base_seed", [](const PipelineConfig& c) { return std::to_string(c.base_seed); },
         [](PipelineConfig& c, const std::string& v) {
             c.base_seed = static_cast<std::uint64_t>(parse_number("base_seed", v));
         }},
        {"impute.k", [](const PipelineConfig& c) { return std::to_string(c.impute_k); },
         [](PipelineConfig& c, const std::string& v) { c.impute_k = parse_int("impute.k", v); }},
        {"embed.n_neighbors",
         [](const PipelineConfig& c) { return std::to_string(c.embed_n_neighbors); },
         [](PipelineConfig& c, const std::string& v) {
             c.embed_n_neighbors = parse_int("embed.n_neighbors", v);
         }},
        {"embed.min_dist",
         [](const PipelineConfig& c) { return format_double(c.embed_min_dist); },
         [](PipelineConfig& c, const std::string& v) {
             c.embed_min_dist = parse_number("embed.min_dist", v);
         }},
        {"embed.n_components",
         [](const PipelineConfig& c) { return std::to_string(c.embed_n_components); },
         [](PipelineConfig& c, const std::string& v) {
             c.embed_n_components = parse_int("embed.n_components", v);
         }},
        {"embed.n_epochs",
         [](const PipelineConfig& c) { return std::to_string(c.embed_n_epochs); },
         [](PipelineConfig& c, const std::string& v) {
             c.embed_n_epochs = parse_int("embed.n_epochs", v);
         }},
        {"embed.negative_sample_rate",
         [](const PipelineConfig& c) { return std::to_string(c.embed_negative_sample_rate); },
         [](PipelineConfig& c, const std::string& v) {
             c.embed_negative_sample_rate = parse_int("embed.negative_sample_rate", v);
         }},
        {"embed.learning_rate",
         [](const PipelineConfig& c) { return format_double(c.embed_learning_rate); },
         [](PipelineConfig& c, const std::string& v) {
             c.embed_learning_rate = parse_number("embed.learning_rate", v);
         }},
        {"cluster.algorithm", [](const PipelineConfig& c) { return c.cluster_algorithm; },
         [](PipelineConfig& c, const std::string& v) { c.cluster_algorithm = v; }},
        {"cluster.eps", [](const PipelineConfig& c) { return format_double(c.cluster_eps); },
         [](PipelineConfig& c, const std::string& v) {
             c.cluster_eps = parse_number("cluster.eps", v);
         }},
        {"cluster.min_samples",
         [](const PipelineConfig& c) { return std::to_string(c.cluster_min_samples); },
         [](PipelineConfig& c, const std::string& v) {
             c.cluster_min_samples = parse_int("cluster.min_samples", v);
         }},
        {"cluster.k", [](const PipelineConfig& c) { return std::to_string(c.cluster_k); },
         [](PipelineConfig& c, const std::string& v) { c.cluster_k = parse_int("cluster.k", v); }},
        {"cluster.scale_embedding",
         [](const PipelineConfig& c) { return bool_to_string(c.cluster_scale_embedding); },
         [](PipelineConfig& c, const std::string& v) {
             c.cluster_scale_embedding = parse_bool("cluster.scale_embedding", v);
         }},
        {"cluster.shuffle_order",
         [](const PipelineConfig& c) { return bool_to_string(c.cluster_shuffle_order); },
         [](PipelineConfig& c, const std::string& v) {
             c.cluster_shuffle_order = parse_bool("cluster.shuffle_order", v);
         }},
        {"nemi.runs", [](const PipelineConfig& c) { return std::to_string(c.nemi_runs); },
         [](PipelineConfig& c, const std::string& v) { c.nemi_runs = parse_int("nemi.runs", v); }},
        {"nemi.base", [](const PipelineConfig& c) { return c.nemi_base; },
         [](PipelineConfig& c, const std::string& v) { c.nemi_base = v; }},
        {"nemi.max_base_candidates",
         [](const PipelineConfig& c) { return std::to_string(c.nemi_max_base_candidates); },
         [](PipelineConfig& c, const std::string& v) {
             c.nemi_max_base_candidates = parse_int("nemi.max_base_candidates", v);
         }},
    };
    return fields;
}

}  // namespace detail

// Flat key=value configuration. Lines starting with '#' are comments;
// unknown keys are rejected.
inline void apply_config(PipelineConfig& config, std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto trimmed = detail::trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string_view::npos) {
            throw DataError("config line " + std::to_string(line_no) +
                            ": expected key=value");
        }
        const std::string key(detail::trim(trimmed.substr(0, eq)));
        const std::string value(detail::trim(trimmed.substr(eq + 1)));
        bool known = false;
        for (const auto& field : detail::config_fields()) {
            if (key == field.key) {
                field.set(config, value);
                known = true;
                break;
            }
        }
        if (!known) throw DataError("config: unknown key '" + key + "'");
    }
}

inline PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("config: cannot open " + path);
    PipelineConfig config;
    apply_config(config, in);
    return config;
}

inline void write_manifest(const PipelineConfig& config, std::ostream& out) {
    out << "# oceanprov pipeline manifest; re-run with: oceanprov pipeline --config <this file>\n";
    for (const auto& field : detail::config_fields()) {
        out << field.key << " = " << field.get(config) << '\n';
    }
}

// ---------------------------------------------------------------------------

struct PipelineResult {
    std::vector<std::string> artifacts;
    int n_clusters = 0;
    double noise_fraction = 0.0;
    double mean_uncertainty = std::numeric_limits<double>::quiet_NaN();
    int base_id = -1;
    VariabilityReport variability;
};

namespace detail {

inline std::string color_for_label(int label) {
    if (label == kNoise) return "#808080";
    // Golden-angle hue walk; avoids neighbouring labels sharing a colour.
    const double hue = std::fmod(0.61803398875 * label, 1.0) * 6.0;
    const double s = 0.65, v = 0.92;
    const int sector = static_cast<int>(hue) % 6;
    const double f = hue - std::floor(hue);
    const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
    double r = 0, g = 0, b = 0;
    switch (sector) {
        case 0: r = v; g = t; b = p; break;
        case 1: r = q; g = v; b = p; break;
        case 2: r = p; g = v; b = t; break;
        case 3: r = p; g = q; b = v; break;
        case 4: r = t; g = p; b = v; break;
        default: r = v; g = p; b = q; break;
    }
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", static_cast<int>(r * 255.0 + 0.5),
                  static_cast<int>(g * 255.0 + 0.5), static_cast<int>(b * 255.0 + 0.5));
    return buf;
}

inline void assign_colors(GridDataset& ds) {
    for (auto& cell : ds.cells) {
        if (cell.label) cell.color = color_for_label(*cell.label);
    }
}

// write-to-temp-then-rename: a crash leaves only the .partial file behind.
template <typename Fn>
std::string write_artifact(const std::filesystem::path& dir, const std::string& name,
                           Fn&& writer) {
    const auto partial = dir / (name + ".partial");
    {
        std::ofstream out(partial, std::ios::binary);
        if (!out) throw DataError("cannot write " + partial.string());
        writer(out);
        out.flush();
        if (!out) throw DataError("failed while writing " + partial.string());
    }
    const auto final_path = dir / name;
    std::filesystem::rename(partial, final_path);
    return final_path.string();
}

inline ClusterSet run_single_clustering(const PipelineConfig& config, const Matrix& coords,
                                        std::uint64_t seed, std::uint64_t order_seed) {
    if (config.cluster_algorithm == "dbscan") {
        if (config.cluster_shuffle_order) {
            return dbscan(coords, config.cluster_eps, config.cluster_min_samples,
                          sweep_point_order(coords.rows(), order_seed));
        }
        return dbscan(coords, config.cluster_eps, config.cluster_min_samples);
    }
    if (config.cluster_algorithm == "kmeans") {
        return kmeans(coords, config.cluster_k, seed).clusters;
    }
    if (config.cluster_algorithm == "ward") {
        return ward(coords, config.cluster_k).first;
    }
    throw DataError("unknown cluster.algorithm '" + config.cluster_algorithm + "'");
}

}  // namespace detail

inline PipelineResult run_pipeline(const PipelineConfig& config) {
    const auto has_stage = [&](const std::string& name) {
        std::stringstream ss(config.stages);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (std::string(detail::trim(item)) == name) return true;
        }
        return false;
    };
    {
        std::stringstream ss(config.stages);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const std::string stage(detail::trim(item));
            if (stage != "impute" && stage != "embed" && stage != "cluster" &&
                stage != "nemi" && !stage.empty()) {
                throw DataError("unknown stage '" + stage + "'");
            }
        }
    }
    if (config.weight_mode != "volume" && config.weight_mode != "count") {
        throw DataError("weight_mode must be 'volume' or 'count'");
    }

    const std::filesystem::path dir(config.output_dir);
    std::filesystem::create_directories(dir);

    PipelineResult result;
    result.artifacts.push_back(detail::write_artifact(
        dir, "manifest.txt", [&](std::ostream& out) { write_manifest(config, out); }));

    // Ingest.
    std::ifstream in(config.input, std::ios::binary);
    if (!in) throw DataError("cannot open input " + config.input);
    ParseOptions parse_options;
    parse_options.noise_label_in_file = config.noise_label;
    parse_options.require_all_columns = false;
    GridDataset ds = parse_cluster_csv(in, parse_options);
    if (ds.cells.empty()) throw DataError("input has no cells");
    fill_missing_volumes(ds);

    if (has_stage("impute")) {
        ds = knn_impute(ds, config.impute_k);
    }

    // Scaled features.
    FeatureMatrix features = feature_matrix(ds);
    if (features.has_missing() && (has_stage("embed") || has_stage("nemi"))) {
        throw DataError("features still have missing values; enable the impute stage");
    }
    const auto [scaled, scaling] = min_max_scale(features);
    {
        GridDataset scaled_ds = ds;
        for (std::size_t i = 0; i < scaled_ds.size(); ++i) {
            for (std::size_t p = 0; p < kParameterCount; ++p) {
                if (!scaled.is_missing(i, p)) {
                    scaled_ds.cells[i].params[p] = scaled.values(i, p);
                }
            }
        }
        result.artifacts.push_back(detail::write_artifact(
            dir, "features_scaled.csv", [&](std::ostream& out) {
                write_cluster_csv(scaled_ds, out,
                                  WriteOptions{config.noise_label});
            }));
    }

    EmbeddingParams embed_params;
    embed_params.n_neighbors = config.embed_n_neighbors;
    embed_params.min_dist = config.embed_min_dist;
    embed_params.n_components = config.embed_n_components;
    embed_params.n_epochs = config.embed_n_epochs;
    embed_params.negative_sample_rate = config.embed_negative_sample_rate;
    embed_params.learning_rate = config.embed_learning_rate;

    // Single-shot embedding for the cluster stage and the embedding artifact.
    bool have_embedding = false;
    Matrix coords;
    if (has_stage("embed")) {
        EmbeddingParams params = embed_params;
        params.seed = config.base_seed;
        coords = embed(scaled.values, params).coords;
        set_embedding(ds, coords);
        have_embedding = true;
        result.artifacts.push_back(detail::write_artifact(
            dir, "embedding.csv", [&](std::ostream& out) {
                write_cluster_csv(ds, out, WriteOptions{config.noise_label});
            }));
    } else if (std::all_of(ds.cells.begin(), ds.cells.end(), [](const GridCell& c) {
                   return c.embedding[0] && c.embedding[1] && c.embedding[2];
               })) {
        coords = embedding_matrix(ds);
        have_embedding = true;
    }

    if (has_stage("cluster")) {
        Matrix space = have_embedding ? coords : scaled.values;
        if (have_embedding && config.cluster_scale_embedding) {
            detail::scale_columns_unit(space);
        }
        const ClusterSet labels = detail::run_single_clustering(
            config, space, config.base_seed, config.base_seed + 100000);
        GridDataset labeled = ds;
        set_labels(labeled, labels);
        detail::assign_colors(labeled);
        result.artifacts.push_back(detail::write_artifact(
            dir, "labels.csv", [&](std::ostream& out) {
                write_cluster_csv(labeled, out, WriteOptions{config.noise_label});
            }));
        result.n_clusters = labels.n_clusters;
        result.noise_fraction = labels.noise_fraction();
    }

    if (has_stage("nemi")) {
        if (config.nemi_runs < 2) throw DataError("nemi.runs must be >= 2");
        std::vector<ClusterSet> members(static_cast<std::size_t>(config.nemi_runs));
        detail::parallel_for(members.size(), [&](std::size_t run) {
            EmbeddingParams params = embed_params;
            params.seed = config.base_seed + run;
            Matrix member_coords = embed(scaled.values, params).coords;
            if (config.cluster_scale_embedding) {
                detail::scale_columns_unit(member_coords);
            }
            members[run] = detail::run_single_clustering(
                config, member_coords, config.base_seed + run,
                config.base_seed + 100000 + run);
        });

        result.artifacts.push_back(detail::write_artifact(
            dir, "member_labels.csv", [&](std::ostream& out) {
                out << "run,cell,label\n";
                for (std::size_t run = 0; run < members.size(); ++run) {
                    for (std::size_t i = 0; i < members[run].labels.size(); ++i) {
                        int label = members[run].labels[i];
                        if (label == kNoise) label = config.noise_label;
                        out << run << ',' << i << ',' << label << '\n';
                    }
                }
            }));

        result.variability = pairwise_variability(members);

        std::vector<double> weights;
        if (config.weight_mode == "volume") {
            weights.reserve(ds.size());
            for (const auto& cell : ds.cells) weights.push_back(cell.volume.value_or(1.0));
        }
        Ensemble ensemble = make_ensemble(std::move(members), std::move(weights));
        if (config.nemi_base == "auto") {
            ensemble.base_id = select_base(
                ensemble, static_cast<std::size_t>(
                              std::max(0, config.nemi_max_base_candidates)));
        } else {
            ensemble.base_id = detail::parse_int("nemi.base", config.nemi_base);
        }
        result.base_id = ensemble.base_id;

        const NemiResult fused = aggregate(ensemble);
        GridDataset final_ds = ds;
        set_labels(final_ds, fused.final_labels);
        set_uncertainty(final_ds, fused.uncertainty);
        detail::assign_colors(final_ds);
        result.artifacts.push_back(detail::write_artifact(
            dir, "final.csv", [&](std::ostream& out) {
                write_cluster_csv(final_ds, out, WriteOptions{config.noise_label});
            }));

        result.n_clusters = fused.final_labels.n_clusters;
        result.noise_fraction = fused.final_labels.noise_fraction();
        result.mean_uncertainty = mean_uncertainty(fused);

        const LabelStats stats = label_statistics(final_ds);
        result.artifacts.push_back(detail::write_artifact(
            dir, "report.csv", [&](std::ostream& out) {
                out << "runs,base_id,n_clusters,noise_fraction,mean_uncertainty,"
                       "median_uncertainty,ari_mean,ari_std,nmi_mean,nmi_std,"
                       "overlap_mean,overlap_std\n";
                out << config.nemi_runs << ',' << result.base_id << ','
                    << result.n_clusters << ','
                    << detail::format_double(result.noise_fraction) << ','
                    << detail::format_double(stats.mean_uncertainty) << ','
                    << detail::format_double(stats.median_uncertainty) << ','
                    << detail::format_double(result.variability.ari_mean) << ','
                    << detail::format_double(result.variability.ari_std) << ','
                    << detail::format_double(result.variability.nmi_mean) << ','
                    << detail::format_double(result.variability.nmi_std) << ','
                    << detail::format_double(result.variability.overlap_mean) << ','
                    << detail::format_double(result.variability.overlap_std) << '\n';
            }));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Regionalisation comparison: label columns joined on (LEV_M, LATITUDE,
// LONGITUDE); cells missing from either side are dropped and counted.

struct ComparisonReport {
    double overlap = 0.0;
    double nmi = 0.0;
    double ari = 0.0;
    std::size_t compared_cells = 0;
    std::size_t dropped_cells = 0;
};

inline ComparisonReport compare_regionalisations(const GridDataset& a, const GridDataset& b,
                                                 const CompareOptions& options = {}) {
    std::map<std::tuple<double, double, double>, int> labels_b;
    for (const auto& cell : b.cells) {
        if (cell.label) {
            labels_b.emplace(std::make_tuple(cell.lev_m, cell.latitude, cell.longitude),
                             *cell.label);
        }
    }
    std::vector<int> joined_a, joined_b;
    std::size_t dropped = 0;
    for (const auto& cell : a.cells) {
        if (!cell.label) {
            ++dropped;
            continue;
        }
        const auto it =
            labels_b.find(std::make_tuple(cell.lev_m, cell.latitude, cell.longitude));
        if (it == labels_b.end()) {
            ++dropped;
            continue;
        }
        joined_a.push_back(*cell.label);
        joined_b.push_back(it->second);
    }
    dropped += labels_b.size() - joined_b.size();
    if (joined_a.empty()) throw DataError("compare: no cells in common");

    const ClusterSet ca = make_cluster_set(std::move(joined_a));
    const ClusterSet cb = make_cluster_set(std::move(joined_b));
    ComparisonReport report;
    report.overlap = overlap_sym(ca, cb, options);
    report.nmi = nmi(ca, cb, options);
    report.ari = ari(ca, cb, options);
    report.compared_cells = ca.size();
    report.dropped_cells = dropped;
    return report;
}

}

#endif
