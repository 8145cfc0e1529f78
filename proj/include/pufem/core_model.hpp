#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pufem {

/// Isotropic thin plate: Young's modulus E [Pa], Poisson ratio, density [kg/m^3]
/// and thickness H [m]. Validated once at construction.
class PlateMaterial {
public:
    PlateMaterial(double youngs_modulus, double poisson_ratio, double density, double thickness)
        : youngs_modulus_(youngs_modulus),
          poisson_ratio_(poisson_ratio),
          density_(density),
          thickness_(thickness) {
        if (!(youngs_modulus > 0.0) || !(density > 0.0) || !(thickness > 0.0))
            throw std::invalid_argument("PlateMaterial: E, rho and H must be strictly positive");
        if (!(poisson_ratio > 0.0 && poisson_ratio < 0.5))
            throw std::invalid_argument("PlateMaterial: Poisson ratio must lie in (0, 0.5)");
    }

    /// Steel plate used throughout the benchmarks: E = 210 GPa, nu = 0.3,
    /// rho = 7800 kg/m^3, H = 2 mm.
    static PlateMaterial steel() { return {210e9, 0.3, 7800.0, 0.002}; }

    double youngs_modulus() const noexcept { return youngs_modulus_; }
    double poisson_ratio() const noexcept { return poisson_ratio_; }
    double density() const noexcept { return density_; }
    double thickness() const noexcept { return thickness_; }

    /// rho * H, mass per unit area.
    double surface_density() const noexcept { return density_ * thickness_; }

private:
    double youngs_modulus_;
    double poisson_ratio_;
    double density_;
    double thickness_;
};

/// Circular frequency (rad/s), strictly positive.
class Frequency {
public:
    static Frequency from_rad(double omega) { return Frequency(omega); }
    static Frequency from_hz(double hz) { return Frequency(2.0 * std::numbers::pi * hz); }

    double omega() const noexcept { return omega_; }
    double hz() const noexcept { return omega_ / (2.0 * std::numbers::pi); }

private:
    explicit Frequency(double omega) : omega_(omega) {
        if (!(omega > 0.0) || !std::isfinite(omega))
            throw std::invalid_argument("Frequency: omega must be finite and > 0");
    }
    double omega_;
};

/// Bending rigidity D = E H^3 / (12 (1 - nu^2)).
inline double bending_rigidity(const PlateMaterial& m) noexcept {
    const double h = m.thickness();
    const double nu = m.poisson_ratio();
    return m.youngs_modulus() * h * h * h / (12.0 * (1.0 - nu * nu));
}

/// Flexural wavenumber k = (rho H omega^2 / D)^(1/4).
inline double flexural_wavenumber(const PlateMaterial& m, Frequency f) noexcept {
    const double w = f.omega();
    return std::sqrt(std::sqrt(m.surface_density() * w * w / bending_rigidity(m)));
}

inline double bending_wavelength(const PlateMaterial& m, Frequency f) noexcept {
    return 2.0 * std::numbers::pi / flexural_wavenumber(m, f);
}

/// Inverse of flexural_wavenumber: omega = k^2 sqrt(D / (rho H)).
inline Frequency frequency_for_wavenumber(const PlateMaterial& m, double k) {
    return Frequency::from_rad(k * k * std::sqrt(bending_rigidity(m) / m.surface_density()));
}

/// Transverse load: a point force F at (x, y) or a uniform pressure f_z.
struct LoadSpec {
    enum class Kind { point, uniform };

    Kind kind = Kind::uniform;
    double magnitude = 1.0;
    double x = 0.0;
    double y = 0.0;

    static LoadSpec point(double force, double x, double y = 0.0) {
        return {Kind::point, force, x, y};
    }
    static LoadSpec uniform(double pressure = 1.0) { return {Kind::uniform, pressure, 0.0, 0.0}; }
};

inline std::string to_string(LoadSpec::Kind kind) {
    return kind == LoadSpec::Kind::point ? "point" : "uniform";
}

}  // namespace pufem
