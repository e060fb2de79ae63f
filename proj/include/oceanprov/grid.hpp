#ifndef OCEANPROV_GRID_HPP
#define OCEANPROV_GRID_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cluster/clusterset.hpp"
#include "detail/text.hpp"
#include "errors.hpp"
#include "matrix.hpp"

namespace oceanprov {

inline constexpr std::size_t kParameterCount = 6;

inline const std::array<std::string, kParameterCount> kParameterNames = {
    "P_TEMPERATURE", "P_SALINITY", "P_OXYGEN",
    "P_NITRATE",     "P_SILICATE", "P_PHOSPHATE"};

// The 12 depth intervals of the grid, as (top, bottom) pairs in metres.
// A cell is addressed by the top of its interval (LEV_M).
inline const std::array<std::pair<double, double>, 12> kDepthIntervals = {{
    {0, 50},     {50, 100},    {100, 200},   {200, 300},
    {300, 400},  {400, 500},   {500, 1000},  {1000, 1500},
    {1500, 2000}, {2000, 3000}, {3000, 4000}, {4000, 5000},
}};

inline constexpr double kEarthRadiusMeters = 6'371'000.0;

struct GeoBounds {
    double lat_min = 0.0;
    double lat_max = 70.0;
    double lon_min = -77.0;
    double lon_max = 30.0;
};

struct GridCell {
    double lev_m = 0.0;      // upper depth boundary of the cell's interval
    double latitude = 0.0;   // cell-centre degrees
    double longitude = 0.0;  // cell-centre degrees
    std::array<std::optional<double>, kParameterCount> params;
    std::array<std::optional<double>, 3> embedding;  // e0, e1, e2
    std::optional<double> volume;                    // m^3
    std::optional<int> label;                        // kNoise for noise cells
    std::optional<double> uncertainty;               // percent in [0, 100]
    std::optional<std::string> color;                // hex string
    bool water = true;
    double imputed = 0.0;                            // percent of params imputed
};

struct GridDataset {
    std::vector<GridCell> cells;  // order is the canonical point order
    std::array<std::string, kParameterCount> parameter_names = kParameterNames;
    GeoBounds bounds;
    std::vector<double> depth_levels;  // valid LEV_M values

    std::size_t size() const { return cells.size(); }
};

struct FeatureMatrix {
    Matrix values;                       // NaN where missing
    std::vector<std::uint8_t> missing;   // row-major mask, 1 = missing
    std::vector<std::string> column_names;

    std::size_t rows() const { return values.rows(); }
    std::size_t cols() const { return values.cols(); }
    bool is_missing(std::size_t r, std::size_t c) const {
        return missing[r * values.cols() + c] != 0;
    }
    void set_missing(std::size_t r, std::size_t c, bool m) {
        missing[r * values.cols() + c] = m ? 1 : 0;
    }
    bool has_missing() const {
        for (auto m : missing) {
            if (m) return true;
        }
        return false;
    }
};

struct ScalingParams {
    std::vector<double> min;
    std::vector<double> max;
};

// ---------------------------------------------------------------------------
// Cell geometry

// Volume of a spherical-shell grid cell centred at `latitude`. Depth is
// treated as negligible against the Earth radius, so the cell volume is
// R^2 * dlon * (sin(lat_top) - sin(lat_bottom)) * thickness.
inline double cell_volume(double latitude, double lat_width, double lon_width,
                          double depth_top, double depth_bottom) {
    if (lat_width <= 0.0 || lon_width <= 0.0) {
        throw std::invalid_argument("cell_volume: widths must be positive");
    }
    if (depth_top < 0.0 || depth_bottom <= depth_top) {
        throw std::invalid_argument("cell_volume: need depth_bottom > depth_top >= 0");
    }
    const double deg = std::numbers::pi / 180.0;
    const double phi_low = (latitude - lat_width / 2.0) * deg;
    const double phi_high = (latitude + lat_width / 2.0) * deg;
    if (phi_low < -std::numbers::pi / 2.0 - 1e-12 ||
        phi_high > std::numbers::pi / 2.0 + 1e-12) {
        throw std::domain_error("cell_volume: cell crosses a pole");
    }
    return kEarthRadiusMeters * kEarthRadiusMeters * (lon_width * deg) *
           (std::sin(phi_high) - std::sin(phi_low)) * (depth_bottom - depth_top);
}

inline std::optional<double> depth_interval_bottom(double lev_m) {
    for (const auto& [top, bottom] : kDepthIntervals) {
        if (std::abs(top - lev_m) < 1e-9) return bottom;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// 18-column CSV format

inline const std::array<std::string, 18> kCsvColumns = {
    "LEV_M",     "LATITUDE",   "LONGITUDE", "P_TEMPERATURE", "P_SALINITY",
    "P_OXYGEN",  "P_NITRATE",  "P_SILICATE", "P_PHOSPHATE",  "e0",
    "e1",        "e2",         "volume",    "label",         "uncertainty",
    "color",     "water",      "imputed"};

struct ParseOptions {
    // Label value that encodes noise in the file (the released grid uses 8).
    // Left unset, only a literal -1 maps to the internal sentinel.
    std::optional<int> noise_label_in_file;
    // When false, only the nine geometry + parameter columns are required;
    // the remaining columns may be absent entirely.
    bool require_all_columns = true;
    GeoBounds bounds;
    std::vector<double> depth_levels;  // empty -> the 12 canonical boundaries
    bool validate_geometry = true;
};

struct WriteOptions {
    std::optional<int> noise_label_in_file;
};

namespace detail {

inline std::vector<double> default_depth_levels() {
    std::vector<double> levels;
    levels.reserve(kDepthIntervals.size());
    for (const auto& [top, bottom] : kDepthIntervals) levels.push_back(top);
    return levels;
}

inline double require_number(std::string_view field, const std::string& column,
                             std::size_t line_no) {
    const auto v = parse_double(field);
    if (!v) {
        throw DataError("line " + std::to_string(line_no) + ": column " + column +
                        ": cannot parse '" + std::string(field) + "' as a number");
    }
    return *v;
}

inline std::optional<double> optional_number(std::string_view field,
                                             const std::string& column,
                                             std::size_t line_no) {
    if (trim(field).empty()) return std::nullopt;
    return require_number(field, column, line_no);
}

inline std::optional<int> optional_integer(std::string_view field,
                                           const std::string& column,
                                           std::size_t line_no) {
    const auto v = optional_number(field, column, line_no);
    if (!v) return std::nullopt;
    const double rounded = std::nearbyint(*v);
    if (std::abs(*v - rounded) > 1e-9) {
        throw DataError("line " + std::to_string(line_no) + ": column " + column +
                        ": expected an integer, got '" + std::string(field) + "'");
    }
    return static_cast<int>(rounded);
}

inline bool parse_water(std::string_view field, std::size_t line_no) {
    const std::string lower = to_lower(trim(field));
    if (lower.empty() || lower == "true" || lower == "1") return true;
    if (lower == "false" || lower == "0") return false;
    throw DataError("line " + std::to_string(line_no) +
                    ": column water: expected a boolean, got '" +
                    std::string(field) + "'");
}

struct CellKey {
    double lev, lat, lon;
    bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
    std::size_t operator()(const CellKey& k) const {
        const std::hash<double> h;
        std::size_t s = h(k.lev);
        s ^= h(k.lat) + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
        s ^= h(k.lon) + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
        return s;
    }
};

}  // namespace detail

inline GridDataset parse_cluster_csv(std::istream& in, const ParseOptions& options = {}) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("empty input: missing header row");
    }

    const auto header = detail::split_csv_line(line);
    std::unordered_map<std::string, std::size_t> position;  // canonical name -> field
    for (std::size_t f = 0; f < header.size(); ++f) {
        const std::string lower = detail::to_lower(header[f]);
        bool known = false;
        for (const auto& canonical : kCsvColumns) {
            if (lower == detail::to_lower(canonical)) {
                if (position.count(canonical)) {
                    throw DataError("duplicate column " + canonical);
                }
                position.emplace(canonical, f);
                known = true;
                break;
            }
        }
        if (!known) {
            throw DataError("unknown column " + std::string(header[f]));
        }
    }

    const std::size_t required = options.require_all_columns ? kCsvColumns.size() : 9;
    for (std::size_t c = 0; c < required; ++c) {
        if (!position.count(kCsvColumns[c])) {
            throw DataError("missing column " + kCsvColumns[c]);
        }
    }

    GridDataset ds;
    ds.bounds = options.bounds;
    ds.depth_levels = options.depth_levels.empty() ? detail::default_depth_levels()
                                                   : options.depth_levels;

    const auto field = [&](const std::vector<std::string_view>& fields,
                           const std::string& column) -> std::string_view {
        const auto it = position.find(column);
        if (it == position.end()) return {};
        return fields[it->second];
    };

    std::unordered_set<detail::CellKey, detail::CellKeyHash> seen;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != header.size()) {
            throw DataError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
        }

        GridCell cell;
        cell.lev_m = detail::require_number(field(fields, "LEV_M"), "LEV_M", line_no);
        cell.latitude =
            detail::require_number(field(fields, "LATITUDE"), "LATITUDE", line_no);
        cell.longitude =
            detail::require_number(field(fields, "LONGITUDE"), "LONGITUDE", line_no);
        for (std::size_t p = 0; p < kParameterCount; ++p) {
            cell.params[p] = detail::optional_number(field(fields, kParameterNames[p]),
                                                     kParameterNames[p], line_no);
        }
        if (position.count("e0")) {
            cell.embedding[0] = detail::optional_number(field(fields, "e0"), "e0", line_no);
            cell.embedding[1] = detail::optional_number(field(fields, "e1"), "e1", line_no);
            cell.embedding[2] = detail::optional_number(field(fields, "e2"), "e2", line_no);
        }
        if (position.count("volume")) {
            cell.volume = detail::optional_number(field(fields, "volume"), "volume", line_no);
        }
        if (position.count("label")) {
            cell.label = detail::optional_integer(field(fields, "label"), "label", line_no);
            if (cell.label) {
                const int noise = options.noise_label_in_file.value_or(kNoise);
                if (*cell.label == noise) cell.label = kNoise;
            }
        }
        if (position.count("uncertainty")) {
            cell.uncertainty = detail::optional_number(field(fields, "uncertainty"),
                                                       "uncertainty", line_no);
            if (cell.uncertainty && (*cell.uncertainty < 0.0 || *cell.uncertainty > 100.0)) {
                throw DataError("line " + std::to_string(line_no) +
                                ": uncertainty outside [0, 100]");
            }
        }
        if (position.count("color")) {
            const auto c = detail::trim(field(fields, "color"));
            if (!c.empty()) cell.color = std::string(c);
        }
        if (position.count("water")) {
            cell.water = detail::parse_water(field(fields, "water"), line_no);
        }
        if (position.count("imputed")) {
            cell.imputed =
                detail::optional_number(field(fields, "imputed"), "imputed", line_no)
                    .value_or(0.0);
            if (cell.imputed < 0.0 || cell.imputed > 100.0) {
                throw DataError("line " + std::to_string(line_no) +
                                ": imputed outside [0, 100]");
            }
        }

        if (options.validate_geometry) {
            if (!std::any_of(ds.depth_levels.begin(), ds.depth_levels.end(),
                             [&](double l) { return std::abs(l - cell.lev_m) < 1e-9; })) {
                throw DataError("line " + std::to_string(line_no) +
                                ": LEV_M " + detail::format_double(cell.lev_m) +
                                " is not a known depth boundary");
            }
            if (cell.latitude < ds.bounds.lat_min - 1e-9 ||
                cell.latitude > ds.bounds.lat_max + 1e-9) {
                throw DataError("line " + std::to_string(line_no) + ": LATITUDE " +
                                detail::format_double(cell.latitude) + " outside bounds");
            }
            if (cell.longitude < ds.bounds.lon_min - 1e-9 ||
                cell.longitude > ds.bounds.lon_max + 1e-9) {
                throw DataError("line " + std::to_string(line_no) + ": LONGITUDE " +
                                detail::format_double(cell.longitude) + " outside bounds");
            }
        }
        if (cell.water && cell.volume && *cell.volume <= 0.0) {
            throw DataError("line " + std::to_string(line_no) +
                            ": water cell with non-positive volume");
        }

        const detail::CellKey key{cell.lev_m, cell.latitude, cell.longitude};
        if (!seen.insert(key).second) {
            throw DataError("line " + std::to_string(line_no) +
                            ": duplicate (LEV_M, LATITUDE, LONGITUDE) triple");
        }
        ds.cells.push_back(std::move(cell));
    }
    return ds;
}

inline void write_cluster_csv(const GridDataset& ds, std::ostream& out,
                              const WriteOptions& options = {}) {
    for (std::size_t c = 0; c < kCsvColumns.size(); ++c) {
        out << kCsvColumns[c] << (c + 1 < kCsvColumns.size() ? "," : "\n");
    }
    const auto opt = [](const std::optional<double>& v) {
        return v ? detail::format_double(*v) : std::string();
    };
    for (const auto& cell : ds.cells) {
        out << detail::format_double(cell.lev_m) << ','
            << detail::format_double(cell.latitude) << ','
            << detail::format_double(cell.longitude) << ',';
        for (std::size_t p = 0; p < kParameterCount; ++p) out << opt(cell.params[p]) << ',';
        for (std::size_t e = 0; e < 3; ++e) out << opt(cell.embedding[e]) << ',';
        out << opt(cell.volume) << ',';
        if (cell.label) {
            int value = *cell.label;
            if (value == kNoise && options.noise_label_in_file) {
                value = *options.noise_label_in_file;
            }
            out << value;
        }
        out << ',' << opt(cell.uncertainty) << ',' << cell.color.value_or("") << ','
            << (cell.water ? "True" : "False") << ','
            << detail::format_double(cell.imputed) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Feature extraction and scaling

inline FeatureMatrix feature_matrix(const GridDataset& ds) {
    FeatureMatrix fm;
    fm.values = Matrix(ds.size(), kParameterCount,
                       std::numeric_limits<double>::quiet_NaN());
    fm.missing.assign(ds.size() * kParameterCount, 1);
    fm.column_names.assign(ds.parameter_names.begin(), ds.parameter_names.end());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t p = 0; p < kParameterCount; ++p) {
            if (ds.cells[i].params[p]) {
                fm.values(i, p) = *ds.cells[i].params[p];
                fm.set_missing(i, p, false);
            }
        }
    }
    return fm;
}

inline Matrix embedding_matrix(const GridDataset& ds) {
    Matrix coords(ds.size(), 3);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t e = 0; e < 3; ++e) {
            if (!ds.cells[i].embedding[e]) {
                throw DataError("cell " + std::to_string(i) +
                                " has no embedding coordinates");
            }
            coords(i, e) = *ds.cells[i].embedding[e];
        }
    }
    return coords;
}

inline ScalingParams fit_min_max(const FeatureMatrix& fm) {
    ScalingParams params;
    params.min.assign(fm.cols(), 0.0);
    params.max.assign(fm.cols(), 0.0);
    for (std::size_t c = 0; c < fm.cols(); ++c) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < fm.rows(); ++r) {
            if (fm.is_missing(r, c)) continue;
            lo = std::min(lo, fm.values(r, c));
            hi = std::max(hi, fm.values(r, c));
        }
        if (!(lo <= hi)) {
            throw DataError("column " + fm.column_names[c] + " has no values to scale");
        }
        params.min[c] = lo;
        params.max[c] = hi;
    }
    return params;
}

// Columns with max == min map to the constant 0 so that downstream distances
// stay finite.
inline FeatureMatrix apply_min_max(const FeatureMatrix& fm, const ScalingParams& params) {
    FeatureMatrix out = fm;
    for (std::size_t c = 0; c < fm.cols(); ++c) {
        const double range = params.max[c] - params.min[c];
        for (std::size_t r = 0; r < fm.rows(); ++r) {
            if (fm.is_missing(r, c)) continue;
            out.values(r, c) = range > 0.0 ? (fm.values(r, c) - params.min[c]) / range : 0.0;
        }
    }
    return out;
}

inline FeatureMatrix invert_min_max(const FeatureMatrix& fm, const ScalingParams& params) {
    FeatureMatrix out = fm;
    for (std::size_t c = 0; c < fm.cols(); ++c) {
        const double range = params.max[c] - params.min[c];
        for (std::size_t r = 0; r < fm.rows(); ++r) {
            if (fm.is_missing(r, c)) continue;
            out.values(r, c) = range > 0.0 ? fm.values(r, c) * range + params.min[c]
                                           : params.min[c];
        }
    }
    return out;
}

inline std::pair<FeatureMatrix, ScalingParams> min_max_scale(const FeatureMatrix& fm) {
    ScalingParams params = fit_min_max(fm);
    return {apply_min_max(fm, params), params};
}

// ---------------------------------------------------------------------------
// KNN imputation

namespace detail {

// The imputer works in a 9-feature space: the six parameters scaled to [0, 1]
// plus latitude, longitude and depth scaled to [0, 1].
inline FeatureMatrix imputation_features(const GridDataset& ds) {
    FeatureMatrix fm = feature_matrix(ds);
    FeatureMatrix scaled = min_max_scale(fm).first;

    FeatureMatrix out;
    out.values = Matrix(ds.size(), kParameterCount + 3,
                        std::numeric_limits<double>::quiet_NaN());
    out.missing.assign(ds.size() * (kParameterCount + 3), 1);
    out.column_names.assign(scaled.column_names.begin(), scaled.column_names.end());
    out.column_names.insert(out.column_names.end(), {"LATITUDE", "LONGITUDE", "LEV_M"});

    double lat_lo = std::numeric_limits<double>::infinity(), lat_hi = -lat_lo;
    double lon_lo = lat_lo, lon_hi = -lat_lo;
    double lev_lo = lat_lo, lev_hi = -lat_lo;
    for (const auto& cell : ds.cells) {
        lat_lo = std::min(lat_lo, cell.latitude);
        lat_hi = std::max(lat_hi, cell.latitude);
        lon_lo = std::min(lon_lo, cell.longitude);
        lon_hi = std::max(lon_hi, cell.longitude);
        lev_lo = std::min(lev_lo, cell.lev_m);
        lev_hi = std::max(lev_hi, cell.lev_m);
    }
    const auto unit = [](double v, double lo, double hi) {
        return hi > lo ? (v - lo) / (hi - lo) : 0.0;
    };
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t p = 0; p < kParameterCount; ++p) {
            if (!scaled.is_missing(i, p)) {
                out.values(i, p) = scaled.values(i, p);
                out.set_missing(i, p, false);
            }
        }
        out.values(i, kParameterCount + 0) = unit(ds.cells[i].latitude, lat_lo, lat_hi);
        out.values(i, kParameterCount + 1) = unit(ds.cells[i].longitude, lon_lo, lon_hi);
        out.values(i, kParameterCount + 2) = unit(ds.cells[i].lev_m, lev_lo, lev_hi);
        out.set_missing(i, kParameterCount + 0, false);
        out.set_missing(i, kParameterCount + 1, false);
        out.set_missing(i, kParameterCount + 2, false);
    }
    return out;
}

// Euclidean distance over features present in both rows, rescaled by
// sqrt(d_total / d_used) so distances stay comparable across missingness
// patterns. Geometry features are always present, so d_used >= 3.
inline double partial_distance(const FeatureMatrix& fm, std::size_t a, std::size_t b) {
    const std::size_t d_total = fm.cols();
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t c = 0; c < d_total; ++c) {
        if (fm.is_missing(a, c) || fm.is_missing(b, c)) continue;
        const double diff = fm.values(a, c) - fm.values(b, c);
        sum += diff * diff;
        ++used;
    }
    return std::sqrt(sum * static_cast<double>(d_total) / static_cast<double>(used));
}

}  // namespace detail

inline GridDataset knn_impute(const GridDataset& ds, int k = 5) {
    if (k < 1) throw std::invalid_argument("knn_impute: k must be >= 1");
    GridDataset out = ds;
    if (ds.cells.empty()) return out;

    const FeatureMatrix space = detail::imputation_features(ds);
    const std::size_t n = ds.size();

    std::array<std::vector<std::size_t>, kParameterCount> donors;
    for (std::size_t p = 0; p < kParameterCount; ++p) {
        for (std::size_t i = 0; i < n; ++i) {
            if (ds.cells[i].params[p]) donors[p].push_back(i);
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        int imputed_count = 0;
        for (std::size_t p = 0; p < kParameterCount; ++p) {
            if (ds.cells[i].params[p]) continue;
            if (donors[p].size() < static_cast<std::size_t>(k)) {
                throw DataError("knn_impute: column " + ds.parameter_names[p] +
                                " has fewer than k donor cells");
            }

            std::vector<std::pair<double, std::size_t>> nearest;
            nearest.reserve(donors[p].size());
            for (const std::size_t d : donors[p]) {
                nearest.emplace_back(detail::partial_distance(space, i, d), d);
            }
            std::partial_sort(nearest.begin(), nearest.begin() + k, nearest.end());

            // A donor at distance zero dominates inverse-distance weighting:
            // copy the (mean of the) coincident donors exactly.
            double value;
            if (nearest.front().first == 0.0) {
                double sum = 0.0;
                int count = 0;
                for (int j = 0; j < k && nearest[j].first == 0.0; ++j) {
                    sum += *ds.cells[nearest[j].second].params[p];
                    ++count;
                }
                value = sum / count;
            } else {
                double weight_sum = 0.0, value_sum = 0.0;
                for (int j = 0; j < k; ++j) {
                    const double w = 1.0 / nearest[j].first;
                    weight_sum += w;
                    value_sum += w * *ds.cells[nearest[j].second].params[p];
                }
                value = value_sum / weight_sum;
            }
            out.cells[i].params[p] = value;
            ++imputed_count;
        }
        if (imputed_count > 0) {
            const double pct = 100.0 * imputed_count / static_cast<double>(kParameterCount);
            out.cells[i].imputed = std::round(pct * 100.0) / 100.0;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Statistics

struct ParameterStats {
    std::string name;
    double mean = std::numeric_limits<double>::quiet_NaN();
    double min = std::numeric_limits<double>::quiet_NaN();
    double max = std::numeric_limits<double>::quiet_NaN();
    double missing_fraction = 0.0;
};

inline std::vector<ParameterStats> dataset_stats(const GridDataset& ds) {
    std::vector<ParameterStats> stats(kParameterCount);
    for (std::size_t p = 0; p < kParameterCount; ++p) {
        stats[p].name = ds.parameter_names[p];
        double sum = 0.0;
        std::size_t count = 0;
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& cell : ds.cells) {
            if (!cell.params[p]) continue;
            sum += *cell.params[p];
            lo = std::min(lo, *cell.params[p]);
            hi = std::max(hi, *cell.params[p]);
            ++count;
        }
        if (count > 0) {
            stats[p].mean = sum / static_cast<double>(count);
            stats[p].min = lo;
            stats[p].max = hi;
        }
        stats[p].missing_fraction =
            ds.cells.empty() ? 0.0
                             : 1.0 - static_cast<double>(count) / ds.cells.size();
    }
    return stats;
}

struct LabelStats {
    int n_clusters = 0;
    std::size_t labeled_cells = 0;
    std::size_t noise_cells = 0;
    double noise_fraction = 0.0;
    double mean_uncertainty = std::numeric_limits<double>::quiet_NaN();
    double median_uncertainty = std::numeric_limits<double>::quiet_NaN();
};

inline LabelStats label_statistics(const GridDataset& ds) {
    LabelStats out;
    std::unordered_set<int> distinct;
    std::vector<double> uncertainties;
    for (const auto& cell : ds.cells) {
        if (cell.label) {
            ++out.labeled_cells;
            if (*cell.label == kNoise) {
                ++out.noise_cells;
            } else {
                distinct.insert(*cell.label);
            }
        }
        if (cell.uncertainty) uncertainties.push_back(*cell.uncertainty);
    }
    out.n_clusters = static_cast<int>(distinct.size());
    if (out.labeled_cells > 0) {
        out.noise_fraction =
            static_cast<double>(out.noise_cells) / static_cast<double>(out.labeled_cells);
    }
    if (!uncertainties.empty()) {
        double sum = 0.0;
        for (double u : uncertainties) sum += u;
        out.mean_uncertainty = sum / static_cast<double>(uncertainties.size());
        std::sort(uncertainties.begin(), uncertainties.end());
        const std::size_t m = uncertainties.size();
        out.median_uncertainty = m % 2 ? uncertainties[m / 2]
                                       : 0.5 * (uncertainties[m / 2 - 1] + uncertainties[m / 2]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dataset mutation helpers used by the pipeline

inline void fill_missing_volumes(GridDataset& ds, double lat_width = 1.0,
                                 double lon_width = 1.0) {
    for (auto& cell : ds.cells) {
        if (cell.volume) continue;
        const auto bottom = depth_interval_bottom(cell.lev_m);
        if (!bottom) {
            throw DataError("cannot derive volume: LEV_M " +
                            detail::format_double(cell.lev_m) +
                            " is not a canonical depth boundary");
        }
        cell.volume = cell_volume(cell.latitude, lat_width, lon_width, cell.lev_m, *bottom);
    }
}

inline void set_embedding(GridDataset& ds, const Matrix& coords) {
    if (coords.rows() != ds.size() || coords.cols() != 3) {
        throw DataError("set_embedding: coordinate shape does not match dataset");
    }
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t e = 0; e < 3; ++e) ds.cells[i].embedding[e] = coords(i, e);
    }
}

inline void set_labels(GridDataset& ds, const ClusterSet& cs) {
    if (cs.labels.size() != ds.size()) {
        throw DataError("set_labels: label count does not match dataset");
    }
    for (std::size_t i = 0; i < ds.size(); ++i) ds.cells[i].label = cs.labels[i];
}

inline void set_uncertainty(GridDataset& ds, const std::vector<double>& uncertainty) {
    if (uncertainty.size() != ds.size()) {
        throw DataError("set_uncertainty: value count does not match dataset");
    }
    for (std::size_t i = 0; i < ds.size(); ++i) ds.cells[i].uncertainty = uncertainty[i];
}

}

#endif
