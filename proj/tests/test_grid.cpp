#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include <oceanprov/grid.hpp>
#include <oceanprov/synth.hpp>

using namespace oceanprov;

namespace {

std::string header_line() {
    std::string out;
    for (std::size_t c = 0; c < kCsvColumns.size(); ++c) {
        out += kCsvColumns[c];
        if (c + 1 < kCsvColumns.size()) out += ',';
    }
    return out + "\n";
}

GridDataset parse_string(const std::string& text, ParseOptions options = {}) {
    std::istringstream in(text);
    return parse_cluster_csv(in, options);
}

}  // namespace

TEST_CASE("empty file with header only parses to zero cells") {
    const GridDataset ds = parse_string(header_line());
    CHECK(ds.cells.empty());
}

TEST_CASE("noise label in file maps to the internal sentinel") {
    const std::string text = header_line() +
        "0,10.5,-20.5,12.0,35.1,200,10,12,0.8,,,,,8,,,True,0\n"
        "50,10.5,-20.5,11.0,35.0,210,11,13,0.9,,,,,3,,,True,0\n";
    ParseOptions options;
    options.noise_label_in_file = 8;
    const GridDataset ds = parse_string(text, options);
    REQUIRE(ds.cells.size() == 2);
    CHECK(ds.cells[0].label == kNoise);
    CHECK(ds.cells[1].label == 3);
}

TEST_CASE("parse errors name the offending column or row") {
    SECTION("missing column") {
        std::istringstream in("LEV_M,LATITUDE\n");
        CHECK_THROWS_WITH(parse_cluster_csv(in),
                          Catch::Matchers::ContainsSubstring("LONGITUDE"));
    }
    SECTION("unknown column") {
        std::istringstream in(header_line().substr(0, header_line().size() - 1) +
                              ",BOGUS\n");
        CHECK_THROWS_WITH(parse_cluster_csv(in),
                          Catch::Matchers::ContainsSubstring("BOGUS"));
    }
    SECTION("non-numeric required field is row-addressed") {
        const std::string text = header_line() +
            "0,10.5,-20.5,1,2,3,4,5,6,,,,,,,,True,0\n"
            "abc,10.5,-21.5,1,2,3,4,5,6,,,,,,,,True,0\n";
        std::istringstream in(text);
        CHECK_THROWS_WITH(parse_cluster_csv(in),
                          Catch::Matchers::ContainsSubstring("line 3"));
    }
    SECTION("unknown depth boundary rejected") {
        const std::string text =
            header_line() + "42,10.5,-20.5,1,2,3,4,5,6,,,,,,,,True,0\n";
        std::istringstream in(text);
        CHECK_THROWS_AS(parse_cluster_csv(in), DataError);
    }
    SECTION("duplicate cell key rejected") {
        const std::string text = header_line() +
            "0,10.5,-20.5,1,2,3,4,5,6,,,,,,,,True,0\n"
            "0,10.5,-20.5,1,2,3,4,5,6,,,,,,,,True,0\n";
        std::istringstream in(text);
        CHECK_THROWS_AS(parse_cluster_csv(in), DataError);
    }
}

TEST_CASE("write then parse reproduces the dataset field for field") {
    GridDataset ds;
    for (int i = 0; i < 3; ++i) {
        GridCell cell;
        cell.lev_m = kDepthIntervals[static_cast<std::size_t>(i)].first;
        cell.latitude = 10.5 + i;
        cell.longitude = -20.5;
        for (std::size_t p = 0; p < kParameterCount; ++p) {
            cell.params[p] = 0.123456789 + static_cast<double>(p) + i / 3.0;
        }
        cell.embedding = {1.5 + i, -2.25, 0.875};
        cell.volume = 6.18e11 + i;
        cell.label = i == 0 ? kNoise : i;
        cell.uncertainty = 12.5 * i;
        cell.color = "#a1b2c3";
        cell.water = (i != 1);
        cell.imputed = i == 2 ? 16.67 : 0.0;
        ds.cells.push_back(cell);
    }

    std::ostringstream out;
    const WriteOptions write_options{8};
    write_cluster_csv(ds, out, write_options);
    ParseOptions parse_options;
    parse_options.noise_label_in_file = 8;
    const GridDataset back = parse_string(out.str(), parse_options);

    REQUIRE(back.cells.size() == ds.cells.size());
    for (std::size_t i = 0; i < ds.cells.size(); ++i) {
        const auto& a = ds.cells[i];
        const auto& b = back.cells[i];
        CHECK(b.lev_m == a.lev_m);
        CHECK(b.latitude == a.latitude);
        CHECK(b.longitude == a.longitude);
        for (std::size_t p = 0; p < kParameterCount; ++p) {
            REQUIRE(b.params[p].has_value());
            CHECK_THAT(*b.params[p], Catch::Matchers::WithinAbs(*a.params[p], 1e-9));
        }
        CHECK(b.label == a.label);
        CHECK(b.uncertainty == a.uncertainty);
        CHECK(b.color == a.color);
        CHECK(b.water == a.water);
        CHECK(b.imputed == a.imputed);
    }
}

TEST_CASE("dataset without labels writes an empty label column") {
    GridDataset ds;
    GridCell cell;
    cell.lev_m = 0;
    cell.latitude = 0.5;
    cell.longitude = 0.5;
    ds.cells.push_back(cell);
    std::ostringstream out;
    write_cluster_csv(ds, out);
    const std::string text = out.str();
    const auto body = text.substr(text.find('\n') + 1);
    // 13 fields precede label; the label slot must be empty.
    std::istringstream row(body);
    std::string field;
    for (int i = 0; i < 14; ++i) std::getline(row, field, ',');
    CHECK(field.empty());

    const GridDataset back = parse_string(text);
    REQUIRE(back.cells.size() == 1);
    CHECK_FALSE(back.cells[0].label.has_value());
}

TEST_CASE("round-trip on a generated dataset preserves row count and columns") {
    const GridDataset ds = make_blob_dataset(200, 3, 0.05, 99);
    std::ostringstream out;
    write_cluster_csv(ds, out);
    const GridDataset back = parse_string(out.str());
    REQUIRE(back.cells.size() == ds.cells.size());
    std::ostringstream again;
    write_cluster_csv(back, again);
    CHECK(again.str() == out.str());
}

TEST_CASE("cell_volume matches the spherical shell formula") {
    const double r = kEarthRadiusMeters;
    const double deg = std::numbers::pi / 180.0;
    SECTION("one degree cell at the equator, 0-50 m") {
        const double expected = r * r * deg * (std::sin(1.0 * deg) - 0.0) * 50.0;
        const double got = cell_volume(0.5, 1.0, 1.0, 0.0, 50.0);
        CHECK_THAT(got, Catch::Matchers::WithinRel(expected, 1e-12));
        CHECK_THAT(got, Catch::Matchers::WithinRel(6.18e11, 5e-3));
    }
    SECTION("volume shrinks with latitude like the sine difference") {
        const double equator = cell_volume(0.5, 1.0, 1.0, 0.0, 50.0);
        const double high = cell_volume(59.5, 1.0, 1.0, 0.0, 50.0);
        const double expected_ratio =
            (std::sin(60.0 * deg) - std::sin(59.0 * deg)) / std::sin(1.0 * deg);
        CHECK_THAT(high / equator, Catch::Matchers::WithinAbs(expected_ratio, 1e-12));
        CHECK_THAT(high / equator, Catch::Matchers::WithinAbs(0.5075, 1e-3));
    }
    SECTION("preconditions") {
        CHECK_THROWS_AS(cell_volume(0.5, 1.0, 1.0, 50.0, 50.0), std::invalid_argument);
        CHECK_THROWS_AS(cell_volume(89.9, 1.0, 1.0, 0.0, 50.0), std::domain_error);
        CHECK_THROWS_AS(cell_volume(0.5, -1.0, 1.0, 0.0, 50.0), std::invalid_argument);
    }
    SECTION("monotone in depth thickness and latitude band") {
        std::mt19937_64 rng(7);
        for (int t = 0; t < 50; ++t) {
            const double lat = -80.0 + 160.0 * (rng() % 1000) / 1000.0;
            const double thick = 1.0 + (rng() % 100);
            const double v1 = cell_volume(lat, 1.0, 1.0, 0.0, thick);
            const double v2 = cell_volume(lat, 1.0, 1.0, 0.0, thick * 2.0);
            CHECK(v2 > v1);
        }
    }
}

TEST_CASE("min_max_scale maps columns onto the unit interval") {
    FeatureMatrix fm;
    fm.values = Matrix::from_rows({{0.0, 3.0, -1.74},
                                   {5.0, 3.0, 29.83},
                                   {10.0, 3.0, 10.0}});
    fm.missing.assign(9, 0);
    fm.column_names = {"a", "b", "c"};

    const auto [scaled, params] = min_max_scale(fm);
    CHECK(scaled.values(0, 0) == 0.0);
    CHECK(scaled.values(1, 0) == 0.5);
    CHECK(scaled.values(2, 0) == 1.0);
    // Constant columns collapse to zero.
    CHECK(scaled.values(0, 1) == 0.0);
    CHECK(scaled.values(2, 1) == 0.0);
    // The published temperature extremes span exactly [0, 1].
    CHECK(scaled.values(0, 2) == 0.0);
    CHECK(scaled.values(1, 2) == 1.0);

    SECTION("inversion is exact to 1e-12") {
        const FeatureMatrix back = invert_min_max(scaled, params);
        for (std::size_t r = 0; r < 3; ++r) {
            for (std::size_t c = 0; c < 3; ++c) {
                if (c == 1) continue;  // constant column inverts to the constant
                CHECK_THAT(back.values(r, c),
                           Catch::Matchers::WithinAbs(fm.values(r, c), 1e-12));
            }
        }
        CHECK(back.values(0, 1) == 3.0);
    }
    SECTION("scaling an already scaled column with its own params is identity") {
        ScalingParams unit;
        unit.min = {0.0, 0.0, 0.0};
        unit.max = {1.0, 1.0, 1.0};
        const FeatureMatrix twice = apply_min_max(scaled, unit);
        for (std::size_t i = 0; i < twice.values.data().size(); ++i) {
            CHECK(twice.values.data()[i] == scaled.values.data()[i]);
        }
    }
}

TEST_CASE("min_max_scale rejects an all-missing column by name") {
    FeatureMatrix fm;
    fm.values = Matrix(2, 2, 0.0);
    fm.missing = {0, 1, 0, 1};
    fm.column_names = {"ok", "empty_one"};
    CHECK_THROWS_WITH(min_max_scale(fm),
                      Catch::Matchers::ContainsSubstring("empty_one"));
}

TEST_CASE("min_max_scale keeps missing entries missing") {
    FeatureMatrix fm;
    fm.values = Matrix::from_rows({{1.0, 2.0}, {3.0, 4.0}});
    fm.missing = {0, 1, 0, 0};
    fm.column_names = {"a", "b"};
    const auto [scaled, params] = min_max_scale(fm);
    CHECK(scaled.is_missing(0, 1));
    CHECK_FALSE(scaled.is_missing(0, 0));
}

namespace {

GridDataset imputation_fixture() {
    // Six cells in a line of longitude; nitrate (param 3) missing for one.
    GridDataset ds;
    for (int i = 0; i < 6; ++i) {
        GridCell cell;
        cell.lev_m = 0;
        cell.latitude = 10.5;
        cell.longitude = 0.5 + i;
        for (std::size_t p = 0; p < kParameterCount; ++p) {
            cell.params[p] = 1.0;
        }
        cell.params[3] = 7.0;
        ds.cells.push_back(cell);
    }
    ds.cells[0].params[3].reset();
    return ds;
}

}  // namespace

TEST_CASE("knn_impute with unanimous donors copies their value") {
    GridDataset ds = imputation_fixture();
    const GridDataset out = knn_impute(ds, 5);
    REQUIRE(out.cells[0].params[3].has_value());
    CHECK_THAT(*out.cells[0].params[3], Catch::Matchers::WithinAbs(7.0, 1e-12));
    CHECK_THAT(out.cells[0].imputed, Catch::Matchers::WithinAbs(16.67, 1e-9));
    SECTION("non-missing values are untouched and nothing stays missing") {
        for (std::size_t i = 1; i < out.cells.size(); ++i) {
            for (std::size_t p = 0; p < kParameterCount; ++p) {
                CHECK(*out.cells[i].params[p] == *ds.cells[i].params[p]);
            }
        }
        const auto stats = dataset_stats(out);
        for (const auto& s : stats) CHECK(s.missing_fraction == 0.0);
    }
}

TEST_CASE("knn_impute copies a zero-distance donor exactly") {
    // A donor that coincides with the target in every imputer feature gets
    // infinite inverse-distance weight: its value is copied, the other
    // donors ignored.
    GridDataset ds = imputation_fixture();
    GridCell twin = ds.cells[0];
    twin.params[3] = 42.0;
    ds.cells.push_back(twin);
    const GridDataset out = knn_impute(ds, 3);
    REQUIRE(out.cells[0].params[3].has_value());
    CHECK(*out.cells[0].params[3] == 42.0);
}

TEST_CASE("knn_impute weights equidistant donors equally") {
    // Target at longitude 1.5 flanked by donors at 0.5 and 2.5 with values
    // 10 and 20; all other features identical.
    GridDataset ds;
    for (int i = 0; i < 3; ++i) {
        GridCell cell;
        cell.lev_m = 0;
        cell.latitude = 10.5;
        cell.longitude = 0.5 + i;
        for (std::size_t p = 0; p < kParameterCount; ++p) cell.params[p] = 1.0;
        ds.cells.push_back(cell);
    }
    ds.cells[1].params[3].reset();
    ds.cells[0].params[3] = 10.0;
    ds.cells[2].params[3] = 20.0;
    const GridDataset out = knn_impute(ds, 2);
    REQUIRE(out.cells[1].params[3].has_value());
    CHECK_THAT(*out.cells[1].params[3], Catch::Matchers::WithinAbs(15.0, 1e-12));
}

TEST_CASE("knn_impute requires k donors") {
    GridDataset ds = imputation_fixture();
    CHECK_THROWS_AS(knn_impute(ds, 6), DataError);  // only 5 donors available
}

TEST_CASE("dataset_stats summarises per-parameter values") {
    GridDataset ds;
    for (int i = 0; i < 3; ++i) {
        GridCell cell;
        cell.lev_m = 0;
        cell.latitude = 10.5;
        cell.longitude = 0.5 + i;
        cell.params[0] = 1.0 + i;  // {1, 2, 3}
        ds.cells.push_back(cell);
    }
    const auto stats = dataset_stats(ds);
    CHECK(stats[0].mean == 2.0);
    CHECK(stats[0].min == 1.0);
    CHECK(stats[0].max == 3.0);
    CHECK(stats[0].missing_fraction == 0.0);
    // Parameter 1 is entirely missing.
    CHECK(std::isnan(stats[1].mean));
    CHECK(stats[1].missing_fraction == 1.0);
}

TEST_CASE("label_statistics counts clusters and noise") {
    GridDataset ds = make_blob_dataset(50, 3, 0.01, 5);
    ds.cells[0].label = kNoise;
    ds.cells[1].label = kNoise;
    for (auto& cell : ds.cells) cell.uncertainty = 10.0;
    ds.cells[3].uncertainty = 50.0;
    const LabelStats stats = label_statistics(ds);
    CHECK(stats.n_clusters == 3);
    CHECK(stats.noise_cells == 2);
    CHECK_THAT(stats.noise_fraction, Catch::Matchers::WithinAbs(2.0 / 50.0, 1e-12));
    CHECK(stats.median_uncertainty == 10.0);
    CHECK(stats.mean_uncertainty > 10.0);
}
