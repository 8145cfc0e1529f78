#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "pufem/core_model.hpp"

namespace pufem {

/// Truncation controls of the sine-series references. The series keeps every
/// mode index up to ceil(cap_factor * k L / pi) + margin (at least min_modes).
struct ModalOptions {
    double cap_factor = 3.0;
    int margin = 20;
    int min_modes = 0;
    /// Relative distance |omega - omega_n| / omega_n below which a retained,
    /// excited mode counts as resonant.
    double resonance_tolerance = 1e-6;
};

/// Resolved truncation of a modal series.
struct ModalSeries {
    int cap = 0;
    double cap_factor = 0.0;
};

inline int modal_cap(const ModalOptions& opt, double k, double length) {
    const int cap = static_cast<int>(std::ceil(opt.cap_factor * k * length / std::numbers::pi)) + opt.margin;
    return std::max({cap, opt.min_modes, 1});
}

/// Simply supported strip (Euler-Bernoulli form, per unit width) under a point
/// or uniform load, by modal superposition over phi_n = sin(n pi x / L).
class StripModalReference {
public:
    StripModalReference(const PlateMaterial& material, double length, LoadSpec load, Frequency f,
                        ModalOptions opt = {})
        : length_(length) {
        if (!(length > 0.0)) throw std::invalid_argument("StripModalReference: L must be positive");
        const double w2 = f.omega() * f.omega();
        const double rho_h = material.surface_density();
        const double stiff = bending_rigidity(material) / rho_h;
        series_ = {modal_cap(opt, flexural_wavenumber(material, f), length), opt.cap_factor};
        coef_.resize(static_cast<std::size_t>(series_.cap));
        for (int n = 1; n <= series_.cap; ++n) {
            const double kn = n * std::numbers::pi / length;
            const double wn2 = stiff * kn * kn * kn * kn;
            double proj = 0.0;  // integral of load * phi_n
            if (load.kind == LoadSpec::Kind::point) {
                if (load.x < 0.0 || load.x > length) throw std::invalid_argument("StripModalReference: load outside strip");
                proj = load.magnitude * std::sin(kn * load.x);
            } else if (n % 2 == 1) {
                proj = load.magnitude * 2.0 / kn;
            }
            if (std::abs(proj) > 1e-14 * std::abs(load.magnitude) &&
                std::abs(f.omega() - std::sqrt(wn2)) < opt.resonance_tolerance * std::sqrt(wn2))
                throw std::domain_error("StripModalReference: excitation at a natural frequency");
            coef_[static_cast<std::size_t>(n - 1)] = 2.0 * proj / (rho_h * length * (wn2 - w2));
        }
    }

    const ModalSeries& series() const noexcept { return series_; }

    double operator()(double x) const noexcept {
        double w = 0.0;
        for (std::size_t n = 0; n < coef_.size(); ++n)
            w += coef_[n] * std::sin((static_cast<double>(n) + 1.0) * std::numbers::pi * x / length_);
        return w;
    }

    /// Values at xs (rows) repeated over ys (columns); the strip does not vary in y.
    Eigen::MatrixXcd evaluate_grid(std::span<const double> xs, std::span<const double> ys) const {
        Eigen::MatrixXcd out(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(ys.size()));
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double v = (*this)(xs[i]);
            for (std::size_t j = 0; j < ys.size(); ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
        return out;
    }

private:
    double length_;
    ModalSeries series_;
    std::vector<double> coef_;
};

/// n-th natural circular frequency of a simply supported strip.
inline double strip_natural_frequency(const PlateMaterial& m, double length, int n) {
    const double kn = n * std::numbers::pi / length;
    return kn * kn * std::sqrt(bending_rigidity(m) / m.surface_density());
}

/// (m, n) natural circular frequency of a simply supported rectangular plate.
inline double plate_natural_frequency(const PlateMaterial& mat, double lx, double ly, int m, int n) {
    const double a = m * std::numbers::pi / lx, b = n * std::numbers::pi / ly;
    return (a * a + b * b) * std::sqrt(bending_rigidity(mat) / mat.surface_density());
}

/// Simply supported rectangular plate [0, Lx] x [0, Ly] by double sine series.
/// Uniform loads keep odd (m, n) only.
class PlateModalReference {
public:
    PlateModalReference(const PlateMaterial& material, double lx, double ly, LoadSpec load, Frequency f,
                        ModalOptions opt = {})
        : lx_(lx), ly_(ly) {
        if (!(lx > 0.0) || !(ly > 0.0)) throw std::invalid_argument("PlateModalReference: sizes must be positive");
        if (load.kind == LoadSpec::Kind::point && (load.x < 0.0 || load.x > lx || load.y < 0.0 || load.y > ly))
            throw std::invalid_argument("PlateModalReference: load outside plate");
        const double k = flexural_wavenumber(material, f);
        series_ = {modal_cap(opt, k, std::max(lx, ly)), opt.cap_factor};
        const int cap = series_.cap;
        const double w = f.omega();
        const double rho_h = material.surface_density();
        coef_ = Eigen::MatrixXd::Zero(cap, cap);
        for (int m = 1; m <= cap; ++m)
            for (int n = 1; n <= cap; ++n) {
                double proj = 0.0;
                const double a = m * std::numbers::pi / lx, b = n * std::numbers::pi / ly;
                if (load.kind == LoadSpec::Kind::point) {
                    proj = load.magnitude * std::sin(a * load.x) * std::sin(b * load.y);
                } else if (m % 2 == 1 && n % 2 == 1) {
                    proj = load.magnitude * 4.0 / (a * b);
                }
                if (proj == 0.0) continue;
                const double wmn = plate_natural_frequency(material, lx, ly, m, n);
                if (std::abs(proj) > 1e-14 * std::abs(load.magnitude) &&
                    std::abs(w - wmn) < opt.resonance_tolerance * wmn)
                    throw std::domain_error("PlateModalReference: excitation at a natural frequency");
                coef_(m - 1, n - 1) = 4.0 * proj / (rho_h * lx * ly * (wmn * wmn - w * w));
            }
    }

    const ModalSeries& series() const noexcept { return series_; }

    double operator()(double x, double y) const {
        const double xs[1] = {x}, ys[1] = {y};
        return evaluate_grid(xs, ys)(0, 0).real();
    }

    /// out(i, j) = W(xs[i], ys[j])
    Eigen::MatrixXcd evaluate_grid(std::span<const double> xs, std::span<const double> ys) const {
        const Eigen::Index cap = coef_.rows();
        Eigen::MatrixXd sx(static_cast<Eigen::Index>(xs.size()), cap), sy(static_cast<Eigen::Index>(ys.size()), cap);
        for (std::size_t i = 0; i < xs.size(); ++i)
            for (Eigen::Index m = 0; m < cap; ++m)
                sx(static_cast<Eigen::Index>(i), m) = std::sin((m + 1) * std::numbers::pi * xs[i] / lx_);
        for (std::size_t j = 0; j < ys.size(); ++j)
            for (Eigen::Index n = 0; n < cap; ++n)
                sy(static_cast<Eigen::Index>(j), n) = std::sin((n + 1) * std::numbers::pi * ys[j] / ly_);
        const Eigen::MatrixXd w = sx * coef_ * sy.transpose();
        return w.cast<std::complex<double>>();
    }

private:
    double lx_;
    double ly_;
    ModalSeries series_;
    Eigen::MatrixXd coef_;
};

inline std::complex<double> modal_response_strip(const PlateMaterial& m, double length, const LoadSpec& load,
                                                 Frequency f, double x, ModalOptions opt = {}) {
    return StripModalReference(m, length, load, f, opt)(x);
}

inline std::complex<double> modal_response_plate(const PlateMaterial& m, double lx, double ly, const LoadSpec& load,
                                                 Frequency f, double x, double y, ModalOptions opt = {}) {
    return PlateModalReference(m, lx, ly, load, f, opt)(x, y);
}

/// Infinite plate under a point force F: W = F [H0^(2)(kr) - H0^(2)(-jkr)] / (8 j D k^2),
/// with H0^(2)(-jz) = (2j/pi) K0(z). Finite limit F / (8 j D k^2) at r = 0.
inline std::complex<double> infinite_plate_point_response(const PlateMaterial& m, double force, Frequency f, double r) {
    if (r < 0.0) throw std::invalid_argument("infinite_plate_point_response: r must be >= 0");
    const double d = bending_rigidity(m);
    const double k = flexural_wavenumber(m, f);
    const std::complex<double> denom(0.0, 8.0 * d * k * k);
    if (r == 0.0) return force / denom;
    const double z = k * r;
    const std::complex<double> h02(std::cyl_bessel_j(0.0, z), -std::cyl_neumann(0.0, z));
    const std::complex<double> h02_imag(0.0, 2.0 / std::numbers::pi * std::cyl_bessel_k(0.0, z));
    return force * (h02 - h02_imag) / denom;
}

/// Closed-form response of the simply supported strip under a point load at a:
/// free-space Green function -(sin k|x-a| + exp(-k|x-a|)) / (4 D k^3) plus the
/// homogeneous correction satisfying W = W'' = 0 at both ends. Used as an
/// independent check of the modal series.
inline double strip_exact_response(const PlateMaterial& m, double length, double force, double a, Frequency f,
                                   double x) {
    const double d = bending_rigidity(m);
    const double k = flexural_wavenumber(m, f);
    const double c = -force / (4.0 * d * k * k * k);
    // g(x) and g''(x) of the free-space part
    const auto g = [&](double t) { const double r = std::abs(t - a); return c * (std::sin(k * r) + std::exp(-k * r)); };
    const auto g2 = [&](double t) {
        const double r = std::abs(t - a);
        return c * k * k * (-std::sin(k * r) + std::exp(-k * r));
    };
    // homogeneous basis: sin kx, cos kx, exp(-kx), exp(k(x-L)) and second derivatives / k^2
    const auto basis = [&](double t, Eigen::Vector4d& v, Eigen::Vector4d& v2) {
        v << std::sin(k * t), std::cos(k * t), std::exp(-k * t), std::exp(k * (t - length));
        v2 << -std::sin(k * t), -std::cos(k * t), std::exp(-k * t), std::exp(k * (t - length));
    };
    Eigen::Matrix4d a_mat;
    Eigen::Vector4d rhs, v, v2;
    basis(0.0, v, v2);
    a_mat.row(0) = v.transpose();
    a_mat.row(1) = v2.transpose();
    rhs[0] = -g(0.0);
    rhs[1] = -g2(0.0) / (k * k);
    basis(length, v, v2);
    a_mat.row(2) = v.transpose();
    a_mat.row(3) = v2.transpose();
    rhs[2] = -g(length);
    rhs[3] = -g2(length) / (k * k);
    const Eigen::Vector4d coeff = a_mat.fullPivLu().solve(rhs);
    basis(x, v, v2);
    return g(x) + coeff.dot(v);
}

}  // namespace pufem
