#ifndef OCEANPROV_REGISTRATION_HPP
#define OCEANPROV_REGISTRATION_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "detail/linalg.hpp"
#include "detail/parallel.hpp"
#include "errors.hpp"
#include "matrix.hpp"

namespace oceanprov {

struct RigidTransform {
    Matrix rotation;                  // d x d orthonormal
    std::vector<double> translation;  // applied after rotation
    bool mirrored = false;            // det(rotation) == -1

    std::vector<double> apply(std::span<const double> p) const {
        const std::size_t d = translation.size();
        std::vector<double> out(d, 0.0);
        for (std::size_t r = 0; r < d; ++r) {
            for (std::size_t c = 0; c < d; ++c) out[r] += rotation(r, c) * p[c];
            out[r] += translation[r];
        }
        return out;
    }
};

struct IcpResult {
    RigidTransform transform;
    double rmse = std::numeric_limits<double>::infinity();
    std::vector<double> rmse_history;  // one value per iteration, non-increasing
};

namespace detail {

inline std::vector<double> centroid(const Matrix& pts) {
    std::vector<double> c(pts.cols(), 0.0);
    for (std::size_t i = 0; i < pts.rows(); ++i) {
        for (std::size_t f = 0; f < pts.cols(); ++f) c[f] += pts(i, f);
    }
    for (auto& v : c) v /= static_cast<double>(pts.rows());
    return c;
}

inline void require_full_enough_rank(const Matrix& pts, const char* who) {
    const std::size_t d = pts.cols();
    const auto c = centroid(pts);
    Matrix cov(d, d, 0.0);
    for (std::size_t i = 0; i < pts.rows(); ++i) {
        for (std::size_t p = 0; p < d; ++p) {
            for (std::size_t q = 0; q < d; ++q) {
                cov(p, q) += (pts(i, p) - c[p]) * (pts(i, q) - c[q]);
            }
        }
    }
    const auto eig = jacobi_eigen_symmetric(cov);
    int rank = 0;
    for (const double v : eig.values) {
        if (v > 1e-12 * std::max(eig.values.front(), 1e-300)) ++rank;
    }
    if (rank < 2) {
        throw DegeneracyError(std::string(who) + ": point cloud has rank < 2");
    }
}

// Least-squares proper rotation + translation mapping src points onto their
// paired dst points (Kabsch). The reflection is excluded; mirror candidates
// are handled by the caller's pre-transforms.
inline RigidTransform procrustes(const Matrix& src, const Matrix& dst) {
    const std::size_t d = src.cols();
    const auto c_src = centroid(src);
    const auto c_dst = centroid(dst);

    Matrix cross(d, d, 0.0);
    for (std::size_t i = 0; i < src.rows(); ++i) {
        for (std::size_t p = 0; p < d; ++p) {
            for (std::size_t q = 0; q < d; ++q) {
                cross(p, q) += (dst(i, p) - c_dst[p]) * (src(i, q) - c_src[q]);
            }
        }
    }

    const Svd svd = svd_small(cross);
    Matrix rotation = matmul(svd.u, transpose(svd.v));
    if (determinant(rotation) < 0.0) {
        Matrix u = svd.u;
        for (std::size_t r = 0; r < d; ++r) u(r, d - 1) = -u(r, d - 1);
        rotation = matmul(u, transpose(svd.v));
    }

    RigidTransform t;
    t.rotation = rotation;
    t.translation.assign(d, 0.0);
    for (std::size_t r = 0; r < d; ++r) {
        double rc = 0.0;
        for (std::size_t c = 0; c < d; ++c) rc += rotation(r, c) * c_src[c];
        t.translation[r] = c_dst[r] - rc;
    }
    t.mirrored = false;
    return t;
}

inline std::size_t nearest_in(const Matrix& cloud, std::span<const double> p) {
    std::size_t best = 0;
    double best_d = squared_distance(cloud.row(0), p);
    for (std::size_t j = 1; j < cloud.rows(); ++j) {
        const double d = squared_distance(cloud.row(j), p);
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

}  // namespace detail

// Iterative closest point: alternate nearest-neighbour correspondences into
// q and a least-squares rigid refit, until the matched RMSE stops improving.
// Correspondences are many-to-one.
inline IcpResult icp(const Matrix& p, const Matrix& q, int max_iter = 60,
                     double tol = 1e-10) {
    if (p.rows() < 3 || q.rows() < 3) throw DataError("icp: need at least 3 points");
    if (p.cols() != q.cols()) throw DataError("icp: dimension mismatch");
    detail::require_full_enough_rank(p, "icp");
    detail::require_full_enough_rank(q, "icp");

    const std::size_t n = p.rows();
    const std::size_t d = p.cols();

    Matrix moved = p;
    Matrix matched(n, d);
    IcpResult result;
    result.transform.rotation = Matrix(d, d, 0.0);
    for (std::size_t i = 0; i < d; ++i) result.transform.rotation(i, i) = 1.0;
    result.transform.translation.assign(d, 0.0);

    double previous = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iter; ++iter) {
        double sum_sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = detail::nearest_in(q, moved.row(i));
            for (std::size_t f = 0; f < d; ++f) matched(i, f) = q(j, f);
            sum_sq += squared_distance(moved.row(i), matched.row(i));
        }
        const double rmse = std::sqrt(sum_sq / static_cast<double>(n));
        result.rmse_history.push_back(rmse);
        result.rmse = rmse;
        if (previous - rmse < tol) break;
        previous = rmse;

        const RigidTransform step = detail::procrustes(moved, matched);
        for (std::size_t i = 0; i < n; ++i) {
            const auto np = step.apply(moved.row(i));
            for (std::size_t f = 0; f < d; ++f) moved(i, f) = np[f];
        }
        // Accumulate: total <- step o total.
        result.transform.rotation = detail::matmul(step.rotation, result.transform.rotation);
        for (std::size_t r = 0; r < d; ++r) {
            double rc = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                rc += step.rotation(r, c) * result.transform.translation[c];
            }
            result.transform.translation[r] = rc + step.translation[r];
        }
    }
    return result;
}

namespace detail {

// The sign-flip diagonals cover every axis mirroring; the quarter-turn
// rotations cover axis swaps that a pure ICP start can miss. Candidates are
// plain d x d orthonormal matrices.
inline std::vector<Matrix> alignment_candidates(std::size_t d) {
    std::vector<Matrix> out;
    const std::size_t combos = std::size_t{1} << d;
    for (std::size_t mask = 0; mask < combos; ++mask) {
        Matrix m(d, d, 0.0);
        for (std::size_t i = 0; i < d; ++i) m(i, i) = (mask >> i) & 1 ? -1.0 : 1.0;
        out.push_back(std::move(m));
    }
    if (d == 2) {
        Matrix rot(2, 2, 0.0);
        rot(0, 1) = -1.0;
        rot(1, 0) = 1.0;
        out.push_back(rot);            // 90 degrees
        out.push_back(transpose(rot)); // 270 degrees
    } else if (d >= 3) {
        for (std::size_t axis = 0; axis < 3; ++axis) {
            Matrix rot(d, d, 0.0);
            for (std::size_t i = 3; i < d; ++i) rot(i, i) = 1.0;
            const std::size_t u = (axis + 1) % 3, v = (axis + 2) % 3;
            rot(axis, axis) = 1.0;
            rot(u, v) = -1.0;
            rot(v, u) = 1.0;
            out.push_back(std::move(rot));
        }
        Matrix cycle(d, d, 0.0);  // x -> y -> z -> x
        for (std::size_t i = 3; i < d; ++i) cycle(i, i) = 1.0;
        cycle(1, 0) = 1.0;
        cycle(2, 1) = 1.0;
        cycle(0, 2) = 1.0;
        out.push_back(std::move(cycle));
    }
    return out;
}

}  // namespace detail

// Minimal RMSE over ICP runs started from centred copies of p under each of
// the mirror and quarter-turn pre-transforms. This mechanises the manual
// "flip it until it lines up" step needed before comparing two independently
// optimised embeddings.
inline IcpResult best_alignment(const Matrix& p, const Matrix& q, int max_iter = 60,
                                double tol = 1e-10) {
    if (p.cols() != q.cols()) throw DataError("best_alignment: dimension mismatch");
    const std::size_t d = p.cols();
    const auto c_p = detail::centroid(p);
    const auto c_q = detail::centroid(q);

    const auto candidates = detail::alignment_candidates(d);
    std::vector<IcpResult> results(candidates.size());
    detail::parallel_for(candidates.size(), [&](std::size_t idx) {
        const Matrix& pre = candidates[idx];
        Matrix start(p.rows(), d);
        for (std::size_t i = 0; i < p.rows(); ++i) {
            for (std::size_t r = 0; r < d; ++r) {
                double v = 0.0;
                for (std::size_t c = 0; c < d; ++c) v += pre(r, c) * (p(i, c) - c_p[c]);
                start(i, r) = v + c_q[r];
            }
        }
        IcpResult res = icp(start, q, max_iter, tol);
        // Fold the pre-transform and pre-centering into the reported
        // transform so it maps the original p onto q.
        std::vector<double> shifted(d, 0.0);
        for (std::size_t r = 0; r < d; ++r) {
            double v = c_q[r];
            for (std::size_t c = 0; c < d; ++c) v -= pre(r, c) * c_p[c];
            shifted[r] = v;
        }
        for (std::size_t r = 0; r < d; ++r) {
            double v = res.transform.translation[r];
            for (std::size_t c = 0; c < d; ++c) {
                v += res.transform.rotation(r, c) * shifted[c];
            }
            res.transform.translation[r] = v;
        }
        res.transform.rotation = detail::matmul(res.transform.rotation, pre);
        res.transform.mirrored = detail::determinant(res.transform.rotation) < 0.0;
        results[idx] = std::move(res);
    });

    std::size_t best = 0;
    for (std::size_t i = 1; i < results.size(); ++i) {
        if (results[i].rmse < results[best].rmse) best = i;
    }
    return results[best];
}

inline double best_alignment_rmse(const Matrix& p, const Matrix& q) {
    return best_alignment(p, q).rmse;
}

}

#endif
