#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pufem/enrichment.hpp"
#include "pufem/quadrature.hpp"

using namespace pufem;

TEST(Polynomials, CountsAndOrdering) {
    EXPECT_EQ(polynomial_count(3, 1), 4);
    EXPECT_EQ(polynomial_count(3, 2), 10);
    EXPECT_EQ(polynomial_count(7, 2), 36);
    const auto m = monomial_exponents(2, 2);
    ASSERT_EQ(m.size(), 6u);
    const int expected[6][2] = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
    for (std::size_t i = 0; i < 6; ++i) {
        EXPECT_EQ(m[i].ex, expected[i][0]);
        EXPECT_EQ(m[i].ey, expected[i][1]);
    }
}

TEST(Polynomials, BasisDerivatives) {
    const auto b = polynomial_basis(3, 0.5, -0.25, 2, 2);
    ASSERT_EQ(b.size(), 10u);
    // x^2 y at index 7
    EXPECT_NEAR(b[7].value, 0.25 * -0.25, 1e-15);
    EXPECT_NEAR(b[7].dx, 2 * 0.5 * -0.25, 1e-15);
    EXPECT_NEAR(b[7].dxy, 2 * 0.5, 1e-15);
    EXPECT_NEAR(b[7].dxx, 2 * -0.25, 1e-15);
}

TEST(Waves, AnglesAreEquispacedWithDeflection) {
    const auto a = wave_angles(4, 0.0);
    ASSERT_EQ(a.size(), 4u);
    for (int n = 0; n < 4; ++n) EXPECT_NEAR(a[static_cast<std::size_t>(n)], (n + 1) * std::numbers::pi / 2, 1e-15);
    const auto d = wave_angles(4, 0.1);
    EXPECT_NEAR(d[0] - a[0], 0.1, 1e-15);
}

TEST(Waves, SatisfyDispersionRelation) {
    const double k = 37.0;
    for (const auto& w : plane_wave_basis(12, k, std::numbers::pi / 50, 0.03, -0.02, 2)) {
        EXPECT_NEAR(std::abs(w.value), 1.0, 1e-14);
        // Laplacian = -k^2 w, hence biharmonic = k^4 w.
        EXPECT_LE(std::abs(w.dxx + w.dyy + k * k * w.value), 1e-10 * k * k);
    }
}

TEST(NodeBasis, CountsPerPlan) {
    EnrichmentPlan plan;
    plan.polynomial_order = 3;
    plan.wave_count = 30;
    EXPECT_EQ(node_basis(plan, 0.0, 0.0, true, 10.0, 2).size(), 40u);
    EnrichmentPlan strip;
    strip.polynomial_order = 3;
    strip.wave_count = 2;
    EXPECT_EQ(node_basis(strip, 0.0, 0.0, true, 10.0, 1).size(), 6u);
    EnrichmentPlan adaptive = plan;
    adaptive.internal_order = 1;
    EXPECT_EQ(node_basis(adaptive, 0.0, 0.0, false, 10.0, 2).size(), 33u);
    EXPECT_EQ(adaptive.functions_per_node(true, 2), 40);
}

TEST(NodeBasis, WavesFirstThenMonomialsAnchoredAtNode) {
    EnrichmentPlan plan;
    plan.polynomial_order = 1;
    plan.wave_count = 2;
    plan.deflection_angle = 0.0;
    const auto nb = node_basis(plan, 0.4, 0.1, true, 5.0, 2);
    ASSERT_EQ(nb.size(), 5u);
    EXPECT_EQ(nb.functions()[0].kind, EnrichmentFunction::Kind::wave);
    EXPECT_EQ(nb.functions()[2].kind, EnrichmentFunction::Kind::monomial);
    std::vector<BasisEval<Complex>> out(nb.size());
    nb.evaluate(0.4, 0.1, 1, out);
    EXPECT_NEAR(std::abs(out[0].value - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(out[2].value - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(out[3].value), 0.0, 1e-15);
    nb.evaluate(0.6, 0.1, 1, out);
    EXPECT_NEAR(out[3].value.real(), 0.2, 1e-15);
    EXPECT_NEAR(out[3].dx.real(), 1.0, 1e-15);
}

TEST(NodeBasis, ScaledMonomials) {
    EnrichmentPlan plan;
    plan.polynomial_order = 2;
    plan.monomial_scale = 0.5;
    const auto nb = node_basis(plan, 0.0, 0.0, true, 0.0, 2);
    std::vector<BasisEval<Complex>> out(nb.size());
    nb.evaluate(0.25, 0.0, 2, out);
    EXPECT_NEAR(out[1].value.real(), 0.5, 1e-15);
    EXPECT_NEAR(out[1].dx.real(), 2.0, 1e-15);
    EXPECT_NEAR(out[3].dxx.real(), 8.0, 1e-14);
}

TEST(EnrichmentPlan, Validation) {
    EnrichmentPlan p;
    p.wave_count = 3;
    EXPECT_THROW(p.validate(1), std::invalid_argument);
    EXPECT_NO_THROW(p.validate(2));
    p.wave_count = -1;
    EXPECT_THROW(p.validate(2), std::invalid_argument);
    EnrichmentPlan w;
    w.wave_count = 4;
    EXPECT_THROW(node_basis(w, 0, 0, true, 0.0, 2), std::invalid_argument);
    EXPECT_EQ(w.multiplier_count(), 11);
    w.wave_count = 0;
    EXPECT_EQ(w.multiplier_count(), 3);
}

TEST(MultiplierBasis, NodalBehaviour) {
    const auto at0 = multiplier_basis(3, 0.2, -1.0);
    ASSERT_EQ(at0.size(), 6u);
    EXPECT_DOUBLE_EQ(at0[0], 1.0);
    EXPECT_DOUBLE_EQ(at0[1], 0.0);
    EXPECT_DOUBLE_EQ(at0[3], 0.0);
    const auto mid = multiplier_basis(2, 0.2, 0.0);
    EXPECT_NEAR(mid[0], 0.5, 1e-15);
    EXPECT_NEAR(mid[1], 0.5 * 0.1, 1e-15);
    EXPECT_NEAR(mid[3], 0.5 * -0.1, 1e-15);
    EXPECT_THROW(multiplier_basis(0, 1.0, 0.0), std::invalid_argument);
}

TEST(Quadrature, GaussLegendreExactness) {
    for (int n = 1; n <= 40; ++n) {
        const auto r = gauss_legendre(n);
        double wsum = 0.0;
        for (double w : r.weights) wsum += w;
        EXPECT_NEAR(wsum, 2.0, 1e-13) << n;
        for (int d = 0; d <= 2 * n - 1; ++d) {
            double s = 0.0;
            for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * std::pow(r.points[i], d);
            const double exact = d % 2 ? 0.0 : 2.0 / (d + 1);
            EXPECT_NEAR(s, exact, 1e-13) << "n=" << n << " degree " << d;
        }
    }
    EXPECT_THROW(gauss_legendre(0), std::invalid_argument);
}

TEST(Quadrature, PointCountRule) {
    EXPECT_EQ(quadrature_points(3, 0.0), 9);
    // ceil(5 * 5 / 2pi) = 4 -> 4 + 6 + 2
    EXPECT_EQ(quadrature_points(3, 5.0), 12);
    // ceil(5 * 20 / 2pi) = 16 -> 16 + 6 + 2
    EXPECT_EQ(quadrature_points(5, 20.0), 24);
    EXPECT_EQ(quadrature_points(9, 20.0), 27);
    EXPECT_EQ(quadrature_points(12, 1.0), 18);
}
