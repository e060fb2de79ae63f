#ifndef OCEANPROV_EMBEDDING_CURVE_HPP
#define OCEANPROV_EMBEDDING_CURVE_HPP

#include <array>
#include <cmath>
#include <vector>

namespace oceanprov {

struct CurveParams {
    double a = 0.0;
    double b = 0.0;
};

inline double membership_curve(double distance, double a, double b) {
    return 1.0 / (1.0 + a * std::pow(distance * distance, b));
}

// Least-squares fit of 1 / (1 + a d^(2b)) against the ideal low-dimensional
// membership: 1 up to min_dist, exp(-(d - min_dist)) beyond it, sampled at
// 300 points over (0, 3]. Levenberg-Marquardt on the two parameters.
inline CurveParams fit_ab(double min_dist) {
    constexpr int samples = 300;
    std::array<double, samples> d{}, y{};
    for (int t = 0; t < samples; ++t) {
        d[static_cast<std::size_t>(t)] = 3.0 * (t + 1) / static_cast<double>(samples);
        const double dist = d[static_cast<std::size_t>(t)];
        y[static_cast<std::size_t>(t)] =
            dist <= min_dist ? 1.0 : std::exp(-(dist - min_dist));
    }

    double a = 1.9, b = 0.8;
    double lambda = 1e-3;
    const auto sum_sq_residual = [&](double pa, double pb) {
        double s = 0.0;
        for (int t = 0; t < samples; ++t) {
            const double r = membership_curve(d[static_cast<std::size_t>(t)], pa, pb) -
                             y[static_cast<std::size_t>(t)];
            s += r * r;
        }
        return s;
    };

    double current = sum_sq_residual(a, b);
    for (int iter = 0; iter < 200; ++iter) {
        double jtj00 = 0.0, jtj01 = 0.0, jtj11 = 0.0, jtr0 = 0.0, jtr1 = 0.0;
        for (int t = 0; t < samples; ++t) {
            const double dist = d[static_cast<std::size_t>(t)];
            const double p = std::pow(dist, 2.0 * b);
            const double denom = 1.0 + a * p;
            const double psi = 1.0 / denom;
            const double r = psi - y[static_cast<std::size_t>(t)];
            const double da = -p / (denom * denom);
            const double db = -2.0 * a * p * std::log(dist) / (denom * denom);
            jtj00 += da * da;
            jtj01 += da * db;
            jtj11 += db * db;
            jtr0 += da * r;
            jtr1 += db * r;
        }

        const double m00 = jtj00 * (1.0 + lambda);
        const double m11 = jtj11 * (1.0 + lambda);
        const double det = m00 * m11 - jtj01 * jtj01;
        if (std::abs(det) < 1e-300) break;
        const double step_a = (-jtr0 * m11 + jtr1 * jtj01) / det;
        const double step_b = (-jtr1 * m00 + jtr0 * jtj01) / det;

        const double na = a + step_a;
        const double nb = b + step_b;
        if (na > 0.0 && nb > 0.0) {
            const double trial = sum_sq_residual(na, nb);
            if (trial < current) {
                a = na;
                b = nb;
                current = trial;
                lambda = std::max(lambda * 0.5, 1e-12);
                if (std::abs(step_a) < 1e-12 && std::abs(step_b) < 1e-12) break;
                continue;
            }
        }
        lambda *= 4.0;
        if (lambda > 1e12) break;
    }
    return {a, b};
}

}

#endif
