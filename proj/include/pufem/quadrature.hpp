#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace pufem {

/// Gauss-Legendre points and weights on [-1, 1]; exact for polynomials of
/// degree <= 2n - 1.
struct QuadratureRule {
    std::vector<double> points;
    std::vector<double> weights;

    std::size_t size() const noexcept { return points.size(); }
};

inline QuadratureRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    QuadratureRule rule;
    rule.points.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Final derivative at the converged root.
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        const auto lo = static_cast<std::size_t>(i), hi = static_cast<std::size_t>(n - 1 - i);
        rule.points[lo] = -x;
        rule.points[hi] = x;
        rule.weights[lo] = w;
        rule.weights[hi] = w;
    }
    if (n % 2 == 1) rule.points[static_cast<std::size_t>(n / 2)] = 0.0;
    return rule;
}

/// Points per direction for an element of size h,
/// max(p + 6, ceil(5 kh / 2pi) + max(p, 6) + 2). The first term covers PU x
/// polynomial products; the second covers wave x wave products, whose
/// resolution does not improve with p. kh = 0 means no wave enrichment.
inline int quadrature_points(int p, double kh) noexcept {
    if (!(kh > 0.0)) return p + 6;
    const int wave = static_cast<int>(std::ceil(5.0 * kh / (2.0 * std::numbers::pi))) + std::max(p, 6) + 2;
    return std::max(p + 6, wave);
}

}  // namespace pufem
