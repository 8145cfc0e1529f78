#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace pufem {

/// Value and derivatives of a basis function up to second order. Unless stated
/// otherwise the derivatives are taken in physical coordinates.
template <class T>
struct BasisEval {
    T value{};
    T dx{};
    T dy{};
    T dxx{};
    T dxy{};
    T dyy{};
};

/// Cubic Hermite function and its first two derivatives in the local
/// coordinate xi in [-1, 1].
struct Hermite1D {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

/// Local coordinate of 1D node 0 / 1.
constexpr double node_coordinate(int node) noexcept { return node == 0 ? -1.0 : 1.0; }

/// Corner coordinates in the reference square, counter-clockwise from (-1,-1).
inline constexpr std::array<std::array<double, 2>, 4> kCorners{{{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}}};

/// Displacement Hermite function H^w_i = (2 + 3 xi_i xi - xi_i xi^3) / 4.
inline Hermite1D hermite_w(int node, double xi) noexcept {
    const double s = node_coordinate(node);
    return {(2.0 + 3.0 * s * xi - s * xi * xi * xi) / 4.0, 0.75 * s * (1.0 - xi * xi), -1.5 * s * xi};
}

/// Rotation Hermite function H^theta_i = (-xi_i - xi + xi_i xi^2 + xi^3) / 4.
inline Hermite1D hermite_theta(int node, double xi) noexcept {
    const double s = node_coordinate(node);
    return {(-s - xi + s * xi * xi + xi * xi * xi) / 4.0, (-1.0 + 2.0 * s * xi + 3.0 * xi * xi) / 4.0,
            (2.0 * s + 6.0 * xi) / 4.0};
}

struct LocalPoint {
    double xi = 0.0;
    double eta = 0.0;
};

/// Axis-aligned rectangular element [x0, x0+hx] x [y0, y0+hy]. A 1D element
/// uses only the x extent.
struct ElementGeometry {
    double x0 = 0.0;
    double y0 = 0.0;
    double hx = 1.0;
    double hy = 1.0;

    void validate() const {
        if (!(hx > 0.0) || !(hy > 0.0) || !std::isfinite(hx) || !std::isfinite(hy))
            throw std::invalid_argument("ElementGeometry: degenerate element (non-positive size)");
    }
    double area() const noexcept { return hx * hy; }
    bool contains(double x, double y, double tol = 1e-12) const noexcept {
        const double ex = tol * hx, ey = tol * hy;
        return x >= x0 - ex && x <= x0 + hx + ex && y >= y0 - ey && y <= y0 + hy + ey;
    }
};

/// Affine map of the reference square onto a rectangle. The Jacobian is the
/// constant diagonal (hx/2, hy/2); d/dx = (2/hx) d/dxi.
struct MappedPoint {
    double x = 0.0;
    double y = 0.0;
    double jacobian_x = 0.0;
    double jacobian_y = 0.0;
    double dxi_dx = 0.0;
    double deta_dy = 0.0;
};

inline MappedPoint map_element(const ElementGeometry& g, LocalPoint p) {
    g.validate();
    return {g.x0 + 0.5 * (p.xi + 1.0) * g.hx,
            g.y0 + 0.5 * (p.eta + 1.0) * g.hy,
            0.5 * g.hx,
            0.5 * g.hy,
            2.0 / g.hx,
            2.0 / g.hy};
}

inline LocalPoint to_local(const ElementGeometry& g, double x, double y) noexcept {
    return {2.0 * (x - g.x0) / g.hx - 1.0, 2.0 * (y - g.y0) / g.hy - 1.0};
}

namespace detail {

// Tensor product a(xi) * b(eta) * scale with derivatives converted by cx = dxi/dx, cy = deta/dy.
inline BasisEval<double> tensor(const Hermite1D& a, const Hermite1D& b, double scale, double cx, double cy) noexcept {
    return {scale * a.value * b.value,
            scale * cx * a.d1 * b.value,
            scale * cy * a.value * b.d1,
            scale * cx * cx * a.d2 * b.value,
            scale * cx * cy * a.d1 * b.d1,
            scale * cy * cy * a.value * b.d2};
}

}  // namespace detail

/// 2D partition-of-unity function H^w_i(xi) H^w_i(eta) with local-coordinate derivatives.
inline BasisEval<double> pu2d_local(int corner, LocalPoint p) noexcept {
    const auto& c = kCorners[static_cast<std::size_t>(corner)];
    return detail::tensor(hermite_w(c[0] > 0, p.xi), hermite_w(c[1] > 0, p.eta), 1.0, 1.0, 1.0);
}

/// Same as pu2d_local with physical derivatives.
inline BasisEval<double> pu2d(int corner, LocalPoint p, const ElementGeometry& g) noexcept {
    const auto& c = kCorners[static_cast<std::size_t>(corner)];
    return detail::tensor(hermite_w(c[0] > 0, p.xi), hermite_w(c[1] > 0, p.eta), 1.0, 2.0 / g.hx, 2.0 / g.hy);
}

/// 1D partition-of-unity function H^w_i with physical derivatives.
inline BasisEval<double> pu1d(int node, double xi, double hx) noexcept {
    const Hermite1D h = hermite_w(node, xi);
    const double c = 2.0 / hx;
    return {h.value, c * h.d1, 0.0, c * c * h.d2, 0.0, 0.0};
}

/// Conforming rectangular (Bogner-Fox-Schmit) element functions attached to a
/// corner, ordered as the nodal DOFs [W, theta_y, theta_x, W_xy] with
/// theta_y = -dW/dx and theta_x = dW/dy. Physical derivatives.
inline std::array<BasisEval<double>, 4> cr_shape_row(int corner, LocalPoint p, double hx, double hy) noexcept {
    const auto& c = kCorners[static_cast<std::size_t>(corner)];
    const int nx = c[0] > 0, ny = c[1] > 0;
    const Hermite1D wx = hermite_w(nx, p.xi), tx = hermite_theta(nx, p.xi);
    const Hermite1D wy = hermite_w(ny, p.eta), ty = hermite_theta(ny, p.eta);
    const double cx = 2.0 / hx, cy = 2.0 / hy;
    return {detail::tensor(wx, wy, 1.0, cx, cy), detail::tensor(tx, wy, -0.5 * hx, cx, cy),
            detail::tensor(wx, ty, 0.5 * hy, cx, cy), detail::tensor(tx, ty, 0.25 * hx * hy, cx, cy)};
}

/// Classical cubic Hermite beam element functions of a node, ordered [W, theta_y].
inline std::array<BasisEval<double>, 2> hermite_beam_row(int node, double xi, double hx) noexcept {
    const Hermite1D w = hermite_w(node, xi), t = hermite_theta(node, xi);
    const double c = 2.0 / hx;
    const double s = -0.5 * hx;
    return {BasisEval<double>{w.value, c * w.d1, 0.0, c * c * w.d2, 0.0, 0.0},
            BasisEval<double>{s * t.value, s * c * t.d1, 0.0, s * c * c * t.d2, 0.0, 0.0}};
}

}  // namespace pufem
