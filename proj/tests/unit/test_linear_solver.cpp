#include <gtest/gtest.h>

#include <Eigen/SVD>

#include <random>

#include "pufem/analysis.hpp"
#include "pufem/linear_solver.hpp"

using namespace pufem;

namespace {

AssembledSystem plain_system(const ComplexMatrix& k, const ComplexVector& f) {
    AssembledSystem sys;
    sys.k_ww = k;
    sys.k_wl.resize(k.rows(), 0);
    sys.f = f;
    return sys;
}

}  // namespace

TEST(Solver, IdentitySystem) {
    const ComplexVector f = ComplexVector::LinSpaced(5, 1.0, 5.0);
    const auto rep = solve(plain_system(ComplexMatrix::Identity(5, 5), f));
    ASSERT_FALSE(rep.singular);
    EXPECT_LT((rep.coefficients - f).norm(), 1e-15);
    EXPECT_NEAR(rep.condition_estimate, 1.0, 1e-12);
    EXPECT_FALSE(rep.ill_conditioned);
    EXPECT_LT(rep.residual, 1e-15);
}

TEST(Solver, ConditionEstimateOfDiagonal) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = 1e-12;
    EXPECT_NEAR(condition_estimate(d) / 1e12, 1.0, 1e-9);
    EXPECT_NEAR(condition_estimate(ComplexMatrix(d.cast<Complex>())) / 1e12, 1.0, 1e-9);
    EXPECT_TRUE(std::isinf(condition_estimate(Eigen::MatrixXd(Eigen::MatrixXd::Zero(3, 3)))));
}

TEST(Solver, ConditionEstimateWithinTenfoldForHermitianPositiveDefinite) {
    std::mt19937 rng(9);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 5; ++trial) {
        ComplexMatrix b(40, 40);
        for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = Complex(g(rng), g(rng));
        ComplexMatrix a = b.adjoint() * b + 1e-3 * ComplexMatrix::Identity(40, 40);
        Eigen::JacobiSVD<ComplexMatrix> svd(a);
        const double exact2 = svd.singularValues()(0) / svd.singularValues()(39);
        const double est = condition_estimate(a);
        // 1-norm and 2-norm condition numbers agree within a factor n; the
        // estimator itself is within a small factor of the 1-norm value.
        EXPECT_GT(est, exact2 / 10.0);
        EXPECT_LT(est, exact2 * 40.0 * 10.0);
    }
}

TEST(Solver, SingularSystemIsFlagged) {
    const auto rep = solve(plain_system(ComplexMatrix::Zero(3, 3), ComplexVector::Ones(3)));
    EXPECT_TRUE(rep.singular);
    EXPECT_EQ(rep.coefficients.size(), 0);
}

TEST(Solver, EquilibrationModesAgreeOnWellConditionedSystems) {
    const auto steel = PlateMaterial::steel();
    const Frequency f = Frequency::from_hz(700.0);
    const auto mesh = std::make_shared<const Mesh>(uniform_rect_mesh(0.5, 0.5, 3, 3));
    const DisplacementSpace space(mesh, Method::classical, {}, flexural_wavenumber(steel, f));
    const auto sys = assemble(space, steel, f, {LoadSpec::uniform()});
    SolverOptions none;
    none.equilibration = Equilibration::none;
    const auto a = solve(sys, none);
    ASSERT_LT(a.condition_estimate, 1e10);
    for (Equilibration e : {Equilibration::diagonal, Equilibration::symmetric_max}) {
        SolverOptions opt;
        opt.equilibration = e;
        const auto b = solve(sys, opt);
        EXPECT_LT((a.coefficients - b.coefficients).norm() / a.coefficients.norm(), 1e-10) << to_string(e);
        EXPECT_LT(b.residual, 1e-10);
    }
}

TEST(Solver, SymmetricMaxScalingNormalisesRows) {
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    ComplexMatrix a(30, 30);
    for (Eigen::Index j = 0; j < 30; ++j)
        for (Eigen::Index i = 0; i <= j; ++i) a(i, j) = a(j, i) = Complex(std::pow(10.0, u(rng)), u(rng));
    const Eigen::VectorXd s = symmetric_max_scales(a, 50);
    const Eigen::MatrixXd scaled = (s.asDiagonal() * a.cwiseAbs() * s.asDiagonal());
    for (Eigen::Index i = 0; i < 30; ++i) EXPECT_NEAR(scaled.row(i).maxCoeff(), 1.0, 1e-3);
    EXPECT_EQ(equilibration_from_string("diagonal"), Equilibration::diagonal);
    EXPECT_THROW(equilibration_from_string("ruiz"), std::invalid_argument);
}

TEST(Solver, StaticBeamMidspanDeflection) {
    // Near-static point load at mid-span of a simply supported beam: W = F L^3 / (48 D).
    // Cubic Hermite elements reproduce it exactly; the PUFEM p = 3 point value converges at third order.
    const auto steel = PlateMaterial::steel();
    const double l = 0.5, force = 2.0;
    const double expected = force * l * l * l / (48.0 * bending_rigidity(steel));
    const Frequency f = Frequency::from_rad(1e-6);
    auto midspan_error = [&](Method method, int m) {
        Problem pr{steel, std::make_shared<const Mesh>(interval_mesh(l, m)), method, {}, {LoadSpec::point(force, 0.25)}};
        pr.plan.polynomial_order = 3;
        const auto s = solve_problem(pr, f);
        EXPECT_LT(s.report.residual, 1e-10);
        return std::abs(s.field(0.25).real() / expected - 1.0);
    };
    EXPECT_LT(midspan_error(Method::classical, 4), 1e-8);
    const double coarse = midspan_error(Method::pufem, 4);
    const double fine = midspan_error(Method::pufem, 16);
    EXPECT_LT(coarse, 1e-2);
    EXPECT_LT(fine, coarse / 40.0);
}

TEST(Solver, SparseAndDensePathsAgree) {
    const auto steel = PlateMaterial::steel();
    const Frequency f = Frequency::from_hz(900.0);
    Problem pr{steel, std::make_shared<const Mesh>(lshape_mesh(0.5, 8)), Method::classical, {}, {LoadSpec::uniform()}};
    SolveSettings dense;
    dense.sparse_threshold = 1u << 30;
    SolveSettings sparse;
    sparse.sparse_threshold = 0;
    const auto a = solve_problem(pr, f, dense);
    const auto b = solve_problem(pr, f, sparse);
    EXPECT_LT((a.field.coefficients() - b.field.coefficients()).norm() / a.field.coefficients().norm(), 1e-10);
    EXPECT_LT(b.report.residual, 1e-10);
}
