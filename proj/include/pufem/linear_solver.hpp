#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/UmfPackSupport>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "pufem/assembly.hpp"

namespace pufem {

inline constexpr double kIllConditionedThreshold = 1e16;

/// Symmetric scaling S A S applied before factorization.
///
/// `diagonal` uses s_i = 1/sqrt|A_ii| on the displacement block. It degrades
/// for wave enrichment, where stiffness and inertia nearly cancel on the
/// diagonal. `symmetric_max` iterates s_i <- s_i / sqrt(max_j |s_i A_ij s_j|)
/// until every scaled row has unit max magnitude.
enum class Equilibration { none, diagonal, symmetric_max };

inline std::string to_string(Equilibration e) {
    switch (e) {
        case Equilibration::none: return "none";
        case Equilibration::diagonal: return "diagonal";
        case Equilibration::symmetric_max: return "symmetric_max";
    }
    return "?";
}

inline Equilibration equilibration_from_string(const std::string& s) {
    if (s == "none") return Equilibration::none;
    if (s == "diagonal") return Equilibration::diagonal;
    if (s == "symmetric_max") return Equilibration::symmetric_max;
    throw std::invalid_argument("unknown equilibration '" + s + "'");
}

struct SolverOptions {
    Equilibration equilibration = Equilibration::symmetric_max;
    /// Sweep limit for symmetric_max scaling (stops earlier once row maxima
    /// are within 1e-3 of one).
    int equilibration_sweeps = 20;
    /// Estimate the 1-norm condition number of the raw K_ww (an extra LU).
    bool estimate_condition = true;
};

struct SolveReport {
    ComplexVector coefficients;
    ComplexVector multipliers;
    /// 1-norm condition estimate of the raw K_ww (NaN when not requested).
    double condition_estimate = std::numeric_limits<double>::quiet_NaN();
    /// 1-norm condition estimate of the (equilibrated) full saddle matrix.
    double saddle_condition_estimate = std::numeric_limits<double>::quiet_NaN();
    /// ||A x - b|| / ||b|| on the unscaled system.
    double residual = std::numeric_limits<double>::quiet_NaN();
    bool ill_conditioned = false;
    bool singular = false;
};

/// 1-norm condition estimate ||A||_1 ||A^-1||_1 with ||A^-1||_1 estimated from
/// the LU factors; +inf for a singular matrix.
inline double condition_estimate(const ComplexMatrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("condition_estimate: matrix must be square");
    if (a.rows() == 0) return 1.0;
    const Eigen::PartialPivLU<ComplexMatrix> lu(a);
    const double r = lu.rcond();
    if (!(r > 0.0) || !std::isfinite(r)) return std::numeric_limits<double>::infinity();
    return 1.0 / r;
}

inline double condition_estimate(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("condition_estimate: matrix must be square");
    if (a.rows() == 0) return 1.0;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    const double r = lu.rcond();
    if (!(r > 0.0) || !std::isfinite(r)) return std::numeric_limits<double>::infinity();
    return 1.0 / r;
}

/// Scale factors s with S A S having unit-magnitude diagonal on the
/// displacement block and unit max-magnitude multiplier columns.
inline Eigen::VectorXd diagonal_scales(const AssembledSystem& sys) {
    const Eigen::Index n = sys.k_ww.rows(), m = sys.k_wl.cols();
    Eigen::VectorXd s = Eigen::VectorXd::Ones(n + m);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = std::abs(sys.k_ww(i, i));
        if (d > 0.0 && std::isfinite(d)) s[i] = 1.0 / std::sqrt(d);
    }
    for (Eigen::Index j = 0; j < m; ++j) {
        double mx = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) mx = std::max(mx, s[i] * std::abs(sys.k_wl(i, j)));
        if (mx > 0.0 && std::isfinite(mx)) s[n + j] = 1.0 / mx;
    }
    return s;
}

/// Iterated symmetric row-max scaling of a square matrix.
inline Eigen::VectorXd symmetric_max_scales(const ComplexMatrix& a, int sweeps) {
    const Eigen::Index n = a.rows();
    Eigen::VectorXd s = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd rows(n);
    for (int it = 0; it < sweeps; ++it) {
        rows.setZero();
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i) rows[i] = std::max(rows[i], std::abs(a(i, j)) * s[j]);
        double worst = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double r = rows[i] * s[i];
            if (!(r > 0.0) || !std::isfinite(r)) continue;
            s[i] /= std::sqrt(r);
            worst = std::max(worst, std::abs(r - 1.0));
        }
        if (worst < 1e-3) break;
    }
    return s;
}

inline Eigen::VectorXd equilibration_scales(const ComplexMatrix& saddle, const AssembledSystem& sys,
                                            const SolverOptions& opt) {
    switch (opt.equilibration) {
        case Equilibration::diagonal: return diagonal_scales(sys);
        case Equilibration::symmetric_max: return symmetric_max_scales(saddle, opt.equilibration_sweeps);
        case Equilibration::none: break;
    }
    return Eigen::VectorXd::Ones(saddle.rows());
}

inline Eigen::VectorXd equilibration_scales(const AssembledSystem& sys, const SolverOptions& opt = {}) {
    return equilibration_scales(sys.saddle_matrix(), sys, opt);
}

/// Direct solution of the saddle-point system by partial-pivoting LU. The
/// solution is returned even when ill-conditioned (flagged); an exactly
/// singular factorization yields `singular` and no coefficients.
inline SolveReport solve(const AssembledSystem& sys, const SolverOptions& opt = {}) {
    SolveReport rep;
    const Eigen::Index n = sys.k_ww.rows();
    if (opt.estimate_condition) {
        rep.condition_estimate = condition_estimate(sys.k_ww);
        rep.ill_conditioned = rep.condition_estimate > kIllConditionedThreshold;
    }
    // Scaled and factored in place: dense systems here run to several GB.
    ComplexMatrix a = sys.saddle_matrix();
    const Eigen::VectorXd s = equilibration_scales(a, sys, opt);
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) *= s[i] * s[j];
    const Eigen::PartialPivLU<Eigen::Ref<ComplexMatrix>> lu(a);
    const double rc = lu.rcond();
    rep.saddle_condition_estimate = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
    const ComplexVector b = sys.saddle_rhs();
    ComplexVector x = lu.solve((s.cast<Complex>().array() * b.array()).matrix());
    x = (s.cast<Complex>().array() * x.array()).matrix();
    if (!(rc > 0.0) || !x.allFinite()) {
        rep.singular = true;
        return rep;
    }
    const auto xw = x.head(n);
    const auto xl = x.tail(x.size() - n);
    ComplexVector r(x.size());
    r.head(n) = sys.k_ww * xw + sys.k_wl * xl - sys.f;
    r.tail(x.size() - n) = sys.k_wl.transpose() * xw;
    const double bn = b.norm();
    rep.residual = r.norm() / (bn > 0.0 ? bn : 1.0);
    rep.coefficients = xw;
    rep.multipliers = xl;
    return rep;
}

/// Sparse direct solve (UMFPACK) of the classical elements; returns the full
/// coefficient vector with constrained DOFs set to zero.
inline SolveReport solve_sparse(const SparseSystem& sys) {
    SolveReport rep;
    // 64-bit indices: the 32-bit UMFPACK variant fails once the factors pass
    // roughly 2^31 entries (a few hundred thousand plate DOFs).
    using WideMatrix = Eigen::SparseMatrix<Complex, Eigen::ColMajor, SuiteSparse_long>;
    const WideMatrix k = sys.k;
    Eigen::UmfPackLU<WideMatrix> lu;
    lu.compute(k);
    if (lu.info() != Eigen::Success) {
        rep.singular = true;
        return rep;
    }
    const ComplexVector x = lu.solve(sys.f);
    if (lu.info() != Eigen::Success || !x.allFinite()) {
        rep.singular = true;
        return rep;
    }
    const double bn = sys.f.norm();
    rep.residual = (sys.k * x - sys.f).norm() / (bn > 0.0 ? bn : 1.0);
    rep.coefficients = ComplexVector::Zero(static_cast<Eigen::Index>(sys.full_dofs));
    for (std::size_t d = 0; d < sys.full_dofs; ++d)
        if (sys.reduced_index[d] >= 0) rep.coefficients[static_cast<Eigen::Index>(d)] = x[sys.reduced_index[d]];
    return rep;
}

}  // namespace pufem
