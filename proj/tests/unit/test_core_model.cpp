#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pufem/core_model.hpp"

using namespace pufem;

TEST(PlateMaterial, SteelBendingRigidity) {
    // E H^3 / (12 (1 - nu^2)) = 210e9 * 8e-9 / 10.92
    EXPECT_NEAR(bending_rigidity(PlateMaterial::steel()), 1680.0 / 10.92, 1e-9);
    EXPECT_NEAR(bending_rigidity(PlateMaterial::steel()), 153.846, 1e-3);
}

TEST(PlateMaterial, RejectsNonPhysicalParameters) {
    EXPECT_THROW(PlateMaterial(0.0, 0.3, 7800, 0.002), std::invalid_argument);
    EXPECT_THROW(PlateMaterial(210e9, 0.5, 7800, 0.002), std::invalid_argument);
    EXPECT_THROW(PlateMaterial(210e9, 0.0, 7800, 0.002), std::invalid_argument);
    EXPECT_THROW(PlateMaterial(210e9, 0.3, -1.0, 0.002), std::invalid_argument);
    EXPECT_THROW(PlateMaterial(210e9, 0.3, 7800, 0.0), std::invalid_argument);
}

TEST(Frequency, RejectsNonPositive) {
    EXPECT_THROW(Frequency::from_hz(0.0), std::invalid_argument);
    EXPECT_THROW(Frequency::from_rad(-1.0), std::invalid_argument);
    EXPECT_THROW(Frequency::from_hz(std::nan("")), std::invalid_argument);
    EXPECT_NEAR(Frequency::from_hz(1000.0).hz(), 1000.0, 1e-9);
}

TEST(FlexuralWavenumber, SteelReferenceValues) {
    const auto steel = PlateMaterial::steel();
    EXPECT_NEAR(flexural_wavenumber(steel, Frequency::from_hz(1000.0)), 44.73, 0.01);
    EXPECT_NEAR(flexural_wavenumber(steel, Frequency::from_hz(3500.0)), 83.68, 0.01);
    EXPECT_NEAR(bending_wavelength(steel, Frequency::from_hz(1000.0)),
                2.0 * std::numbers::pi / flexural_wavenumber(steel, Frequency::from_hz(1000.0)), 1e-14);
}

TEST(FlexuralWavenumber, DispersionRelationHoldsForRandomMaterials) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> e(1e9, 4e11), nu(0.05, 0.45), rho(500, 20000), h(1e-4, 0.05),
        hz(1.0, 2e4);
    for (int i = 0; i < 200; ++i) {
        const PlateMaterial m(e(rng), nu(rng), rho(rng), h(rng));
        const Frequency f = Frequency::from_hz(hz(rng));
        const double k = flexural_wavenumber(m, f);
        const double lhs = std::pow(k, 4) * bending_rigidity(m);
        const double rhs = m.surface_density() * f.omega() * f.omega();
        EXPECT_NEAR(lhs / rhs, 1.0, 1e-12);
        EXPECT_NEAR(frequency_for_wavenumber(m, k).omega() / f.omega(), 1.0, 1e-12);
    }
}

TEST(LoadSpec, Factories) {
    const auto p = LoadSpec::point(2.0, 0.1, 0.2);
    EXPECT_EQ(p.kind, LoadSpec::Kind::point);
    EXPECT_DOUBLE_EQ(p.magnitude, 2.0);
    EXPECT_DOUBLE_EQ(p.y, 0.2);
    EXPECT_EQ(to_string(LoadSpec::uniform().kind), "uniform");
}
