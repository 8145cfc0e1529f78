#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "pufem/shape_basis.hpp"

namespace pufem {

using Complex = std::complex<double>;

/// Number of complete polynomial terms of order p: p+1 in 1D, (p+1)(p+2)/2 in 2D.
constexpr int polynomial_count(int p, int dim) noexcept {
    return dim == 1 ? p + 1 : (p + 1) * (p + 2) / 2;
}

/// Describes the enrichment attached to every node of a PUFEM mesh.
///
/// Edge nodes use `polynomial_order`; interior nodes use `internal_order` when
/// set (adaptive plans with reduced interior polynomials). In 1D the wave set
/// is either empty (q = 0) or the pair exp(+-jkx) (q = 2).
struct EnrichmentPlan {
    int polynomial_order = 3;
    std::optional<int> internal_order;
    int wave_count = 0;
    double deflection_angle = std::numbers::pi / 50.0;
    /// Polynomial terms per node of the boundary multiplier expansion. Defaults
    /// to p + 8 with waves and p for a pure polynomial plan.
    std::optional<int> multiplier_terms;
    /// When > 0, monomials use (x - x_i) / monomial_scale instead of raw offsets.
    double monomial_scale = 0.0;

    int order_for(bool edge_node) const noexcept {
        return edge_node ? polynomial_order : internal_order.value_or(polynomial_order);
    }
    int multiplier_count() const noexcept {
        return multiplier_terms.value_or(wave_count == 0 ? polynomial_order : polynomial_order + 8);
    }
    int functions_per_node(bool edge_node, int dim) const noexcept {
        return wave_count + polynomial_count(order_for(edge_node), dim);
    }

    void validate(int dim) const {
        if (polynomial_order < 0 || internal_order.value_or(0) < 0)
            throw std::invalid_argument("EnrichmentPlan: polynomial order must be >= 0");
        if (wave_count < 0) throw std::invalid_argument("EnrichmentPlan: wave count must be >= 0");
        if (dim == 1 && wave_count != 0 && wave_count != 2)
            throw std::invalid_argument("EnrichmentPlan: 1D wave set is exactly {exp(jkx), exp(-jkx)} (q = 0 or 2)");
        if (multiplier_count() < 1) throw std::invalid_argument("EnrichmentPlan: multiplier terms must be >= 1");
        if (monomial_scale < 0.0) throw std::invalid_argument("EnrichmentPlan: monomial scale must be >= 0");
    }
};

struct Monomial {
    int ex = 0;
    int ey = 0;
};

/// Exponents of the complete polynomial set in graded-lexicographic order:
/// 1, x, y, x^2, xy, y^2, ...
inline std::vector<Monomial> monomial_exponents(int p, int dim) {
    std::vector<Monomial> out;
    out.reserve(static_cast<std::size_t>(polynomial_count(p, dim)));
    for (int d = 0; d <= p; ++d) {
        if (dim == 1) {
            out.push_back({d, 0});
            continue;
        }
        for (int ey = 0; ey <= d; ++ey) out.push_back({d - ey, ey});
    }
    return out;
}

namespace detail {

// powers[n] = t^n, for n = 0..p
inline void fill_powers(double t, int p, std::span<double> powers) noexcept {
    powers[0] = 1.0;
    for (int n = 1; n <= p; ++n) powers[static_cast<std::size_t>(n)] = powers[static_cast<std::size_t>(n - 1)] * t;
}

inline double pw(std::span<const double> powers, int n) noexcept {
    return n < 0 ? 0.0 : powers[static_cast<std::size_t>(n)];
}

template <class T>
BasisEval<T> monomial_eval(const Monomial& m, std::span<const double> px, std::span<const double> py, double inv_scale,
                           int order) noexcept {
    const int a = m.ex, b = m.ey;
    BasisEval<T> e;
    e.value = pw(px, a) * pw(py, b);
    if (order >= 1) {
        e.dx = inv_scale * a * pw(px, a - 1) * pw(py, b);
        e.dy = inv_scale * b * pw(px, a) * pw(py, b - 1);
    }
    if (order >= 2) {
        const double s2 = inv_scale * inv_scale;
        e.dxx = s2 * a * (a - 1) * pw(px, a - 2) * pw(py, b);
        e.dxy = s2 * a * b * pw(px, a - 1) * pw(py, b - 1);
        e.dyy = s2 * b * (b - 1) * pw(px, a) * pw(py, b - 2);
    }
    return e;
}

}  // namespace detail

/// Complete polynomial set of order p evaluated at node-local offsets
/// (xt, yt) = (x - x_i, y - y_i), with analytic derivatives up to `order`.
inline std::vector<BasisEval<double>> polynomial_basis(int p, double xt, double yt, int dim, int order = 2,
                                                       double scale = 0.0) {
    if (p < 0) throw std::invalid_argument("polynomial_basis: p must be >= 0");
    const double inv = scale > 0.0 ? 1.0 / scale : 1.0;
    std::vector<double> px(static_cast<std::size_t>(p) + 1), py(static_cast<std::size_t>(p) + 1);
    detail::fill_powers(xt * inv, p, px);
    detail::fill_powers(dim == 1 ? 0.0 : yt * inv, p, py);
    std::vector<BasisEval<double>> out;
    for (const auto& m : monomial_exponents(p, dim)) out.push_back(detail::monomial_eval<double>(m, px, py, inv, order));
    return out;
}

/// Propagation angles alpha_n = 2 pi n / q + deflection, n = 1..q.
inline std::vector<double> wave_angles(int q, double deflection) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(std::max(q, 0)));
    for (int n = 1; n <= q; ++n) out.push_back(2.0 * std::numbers::pi * n / q + deflection);
    return out;
}

namespace detail {

inline BasisEval<Complex> wave_eval(double kx, double ky, double xt, double yt, int order) noexcept {
    const Complex e = std::exp(Complex(0.0, kx * xt + ky * yt));
    BasisEval<Complex> out;
    out.value = e;
    if (order >= 1) {
        out.dx = Complex(0.0, kx) * e;
        out.dy = Complex(0.0, ky) * e;
    }
    if (order >= 2) {
        out.dxx = -kx * kx * e;
        out.dxy = -kx * ky * e;
        out.dyy = -ky * ky * e;
    }
    return out;
}

}  // namespace detail

/// q plane flexural waves exp[j(kx_n xt + ky_n yt)] with (kx_n, ky_n) = k (cos alpha_n, sin alpha_n).
inline std::vector<BasisEval<Complex>> plane_wave_basis(int q, double k, double deflection, double xt, double yt,
                                                        int order = 2) {
    if (q < 1 || !(k > 0.0)) throw std::invalid_argument("plane_wave_basis: need q >= 1 and k > 0");
    std::vector<BasisEval<Complex>> out;
    out.reserve(static_cast<std::size_t>(q));
    for (double a : wave_angles(q, deflection))
        out.push_back(detail::wave_eval(k * std::cos(a), k * std::sin(a), xt, yt, order));
    return out;
}

/// One enrichment function anchored at a node: a monomial or a plane wave.
struct EnrichmentFunction {
    enum class Kind { wave, monomial };
    Kind kind = Kind::monomial;
    Monomial exponents{};
    double kx = 0.0;
    double ky = 0.0;

    friend bool operator==(const EnrichmentFunction&, const EnrichmentFunction&) = default;
};

/// Ordered enrichment set of a node: waves first, then polynomials.
class NodeBasis {
public:
    NodeBasis(double x, double y, int max_power, double scale, std::vector<EnrichmentFunction> functions)
        : x_(x), y_(y), max_power_(max_power), scale_(scale), functions_(std::move(functions)) {}

    std::size_t size() const noexcept { return functions_.size(); }
    const std::vector<EnrichmentFunction>& functions() const noexcept { return functions_; }
    double x() const noexcept { return x_; }
    double y() const noexcept { return y_; }

    /// Evaluates every function at the physical point (x, y); out.size() == size().
    void evaluate(double x, double y, int order, std::span<BasisEval<Complex>> out) const {
        const double xt = x - x_, yt = y - y_;
        const double inv = scale_ > 0.0 ? 1.0 / scale_ : 1.0;
        constexpr std::size_t kMaxPower = 64;
        std::array<double, kMaxPower> pxs{}, pys{};
        const auto np = static_cast<std::size_t>(max_power_) + 1;
        if (np > kMaxPower) throw std::invalid_argument("NodeBasis: polynomial order too large");
        std::span<double> px(pxs.data(), np), py(pys.data(), np);
        detail::fill_powers(xt * inv, max_power_, px);
        detail::fill_powers(yt * inv, max_power_, py);
        for (std::size_t n = 0; n < functions_.size(); ++n) {
            const auto& f = functions_[n];
            out[n] = f.kind == EnrichmentFunction::Kind::wave
                         ? detail::wave_eval(f.kx, f.ky, xt, yt, order)
                         : detail::monomial_eval<Complex>(f.exponents, px, py, inv, order);
        }
    }

private:
    double x_;
    double y_;
    int max_power_;
    double scale_;
    std::vector<EnrichmentFunction> functions_;
};

/// Enrichment attached to a node at (x, y). `edge_node` selects p_e vs p_i.
inline NodeBasis node_basis(const EnrichmentPlan& plan, double x, double y, bool edge_node, double k, int dim) {
    plan.validate(dim);
    std::vector<EnrichmentFunction> fs;
    if (plan.wave_count > 0) {
        if (!(k > 0.0)) throw std::invalid_argument("node_basis: wave enrichment needs k > 0");
        if (dim == 1) {
            fs.push_back({EnrichmentFunction::Kind::wave, {}, k, 0.0});
            fs.push_back({EnrichmentFunction::Kind::wave, {}, -k, 0.0});
        } else {
            for (double a : wave_angles(plan.wave_count, plan.deflection_angle))
                fs.push_back({EnrichmentFunction::Kind::wave, {}, k * std::cos(a), k * std::sin(a)});
        }
    }
    const int p = plan.order_for(edge_node);
    for (const auto& m : monomial_exponents(p, dim)) fs.push_back({EnrichmentFunction::Kind::monomial, m, 0.0, 0.0});
    return NodeBasis(x, y, p, plan.monomial_scale, std::move(fs));
}

/// Multiplier functions on a two-node edge element of the given length at
/// local coordinate xi: H^w_a(xi) * s_a^l, s_a the tangential offset from edge
/// node a, l = 0..terms-1. Ordered node-major (node 0 first).
inline std::vector<double> multiplier_basis(int terms, double length, double xi) {
    if (terms < 1) throw std::invalid_argument("multiplier_basis: terms must be >= 1");
    std::vector<double> out;
    out.reserve(2 * static_cast<std::size_t>(terms));
    for (int a = 0; a < 2; ++a) {
        const double pu = hermite_w(a, xi).value;
        const double s = 0.5 * (xi - node_coordinate(a)) * length;
        double sp = 1.0;
        for (int l = 0; l < terms; ++l, sp *= s) out.push_back(pu * sp);
    }
    return out;
}

}  // namespace pufem
