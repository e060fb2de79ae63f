#ifndef OCEANPROV_SYNTH_HPP
#define OCEANPROV_SYNTH_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "detail/random.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "matrix.hpp"

namespace oceanprov {

struct BlobData {
    Matrix x;
    std::vector<int> truth;
    Matrix centers;
};

// Isotropic Gaussian blobs around centres placed on scaled coordinate axes,
// which keeps every pair of centres at least distance 1 apart. With the
// default sigma of 0.05 that is a 20-sigma separation.
inline BlobData make_blobs(std::size_t n_points, std::size_t dims, int n_blobs,
                           double sigma, std::uint64_t seed) {
    if (n_blobs < 1) throw std::invalid_argument("make_blobs: need at least 1 blob");
    if (dims < 1) throw std::invalid_argument("make_blobs: need at least 1 dimension");

    BlobData out;
    out.centers = Matrix(static_cast<std::size_t>(n_blobs), dims, 0.0);
    for (int b = 0; b < n_blobs; ++b) {
        const std::size_t axis = static_cast<std::size_t>(b) % dims;
        const double scale = 1.0 + static_cast<double>(b) / static_cast<double>(dims);
        out.centers(static_cast<std::size_t>(b), axis) = scale;
    }

    std::mt19937_64 rng(seed);
    out.x = Matrix(n_points, dims);
    out.truth.resize(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        const int b = static_cast<int>(i % static_cast<std::size_t>(n_blobs));
        out.truth[i] = b;
        for (std::size_t c = 0; c < dims; ++c) {
            out.x(i, c) = out.centers(static_cast<std::size_t>(b), c) +
                          sigma * detail::gaussian(rng);
        }
    }
    return out;
}

// Blob values dressed up as a grid dataset: cells walk the canonical grid in
// depth-major order, blob coordinates fill the six parameters, the ground
// truth goes into the label column.
inline GridDataset make_blob_dataset(std::size_t n_points, int n_blobs, double sigma,
                                     std::uint64_t seed) {
    const BlobData blobs = make_blobs(n_points, kParameterCount, n_blobs, sigma, seed);

    GridDataset ds;
    ds.depth_levels.reserve(kDepthIntervals.size());
    for (const auto& [top, bottom] : kDepthIntervals) ds.depth_levels.push_back(top);

    const int lat_cells = static_cast<int>(ds.bounds.lat_max - ds.bounds.lat_min);
    const int lon_cells = static_cast<int>(ds.bounds.lon_max - ds.bounds.lon_min);
    if (n_points > kDepthIntervals.size() * static_cast<std::size_t>(lat_cells) *
                       static_cast<std::size_t>(lon_cells)) {
        throw DataError("make_blob_dataset: more points than grid cells");
    }

    ds.cells.reserve(n_points);
    std::size_t placed = 0;
    for (const auto& [top, bottom] : kDepthIntervals) {
        for (int la = 0; la < lat_cells && placed < n_points; ++la) {
            for (int lo = 0; lo < lon_cells && placed < n_points; ++lo) {
                GridCell cell;
                cell.lev_m = top;
                cell.latitude = ds.bounds.lat_min + la + 0.5;
                cell.longitude = ds.bounds.lon_min + lo + 0.5;
                for (std::size_t p = 0; p < kParameterCount; ++p) {
                    cell.params[p] = blobs.x(placed, p);
                }
                cell.label = blobs.truth[placed];
                cell.water = true;
                ds.cells.push_back(std::move(cell));
                ++placed;
            }
            if (placed >= n_points) break;
        }
        if (placed >= n_points) break;
    }
    fill_missing_volumes(ds);
    return ds;
}

}

#endif
