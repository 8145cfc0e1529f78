#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pufem/core_model.hpp"
#include "pufem/quadrature.hpp"
#include "pufem/space.hpp"

namespace pufem {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using SparseComplexMatrix = Eigen::SparseMatrix<Complex>;

struct AssemblyOptions {
    /// Overrides the per-element Gauss point count when set.
    std::optional<int> quadrature_points;
    /// Recomputes each distinct element block with twice the points and
    /// records a diagnostic when entries move by more than 1e-9 (relative to
    /// the block's largest entry).
    bool check_quadrature = false;
};

/// Gauss points per direction used on element e.
inline int element_quadrature_points(const DisplacementSpace& space, int e, const AssemblyOptions& opt = {}) {
    if (opt.quadrature_points) return *opt.quadrature_points;
    const auto& g = space.element(e).geometry;
    const double h = space.dimension() == 1 ? g.hx : std::max(g.hx, g.hy);
    const bool waves = space.method() == Method::pufem && space.plan().wave_count > 0;
    return quadrature_points(space.element_polynomial_order(e), waves ? space.wavenumber() * h : 0.0);
}

/// Bending stiffness and mass blocks of one element (unconjugated bilinear
/// forms, so both are complex symmetric).
struct ElementMatrices {
    ComplexMatrix stiffness;
    ComplexMatrix mass;

    /// stiffness - omega^2 rho H mass
    ComplexMatrix dynamic(const PlateMaterial& m, Frequency f) const {
        const double w = f.omega();
        return stiffness - (w * w * m.surface_density()) * mass;
    }
};

namespace detail {

struct BasisTable {
    ComplexMatrix value, dxx, dyy, dxy;
    Eigen::VectorXd weights;
};

inline BasisTable tabulate(const DisplacementSpace& space, int e, const QuadratureRule& rule, int order) {
    const auto& g = space.element(e).geometry;
    const std::size_t nb = space.element_dof_count(e);
    const std::size_t nq1 = rule.size();
    const bool two_d = space.dimension() == 2;
    const std::size_t nq = two_d ? nq1 * nq1 : nq1;
    BasisTable t;
    t.value.resize(static_cast<Eigen::Index>(nq), static_cast<Eigen::Index>(nb));
    if (order >= 2) {
        t.dxx.resize(t.value.rows(), t.value.cols());
        if (two_d) {
            t.dyy.resize(t.value.rows(), t.value.cols());
            t.dxy.resize(t.value.rows(), t.value.cols());
        }
    }
    t.weights.resize(static_cast<Eigen::Index>(nq));
    std::vector<BasisEval<Complex>> buf(nb);
    const double jac = two_d ? 0.25 * g.hx * g.hy : 0.5 * g.hx;
    for (std::size_t j = 0; j < (two_d ? nq1 : 1); ++j)
        for (std::size_t i = 0; i < nq1; ++i) {
            const auto q = static_cast<Eigen::Index>(j * nq1 + i);
            const LocalPoint lp{rule.points[i], two_d ? rule.points[j] : 0.0};
            space.evaluate(e, lp, order, buf);
            t.weights[q] = rule.weights[i] * (two_d ? rule.weights[j] : 1.0) * jac;
            for (std::size_t b = 0; b < nb; ++b) {
                const auto c = static_cast<Eigen::Index>(b);
                t.value(q, c) = buf[b].value;
                if (order >= 2) {
                    t.dxx(q, c) = buf[b].dxx;
                    if (two_d) {
                        t.dyy(q, c) = buf[b].dyy;
                        t.dxy(q, c) = buf[b].dxy;
                    }
                }
            }
        }
    return t;
}

inline ComplexMatrix symmetrized(const ComplexMatrix& m) { return 0.5 * (m + m.transpose()); }

inline double max_abs(const ComplexMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace detail

/// Element blocks with a given number of Gauss points per direction.
/// Stiffness entry (m, n) = integral of (L phi_m)^T Dmat (L phi_n) with
/// L = [d2/dx2, d2/dy2, 2 d2/dxdy]; mass entry = integral of phi_m phi_n.
inline ElementMatrices element_matrices(const DisplacementSpace& space, const PlateMaterial& material, int e,
                                        int points) {
    const QuadratureRule rule = gauss_legendre(points);
    const detail::BasisTable t = detail::tabulate(space, e, rule, 2);
    const double d = bending_rigidity(material);
    const double nu = material.poisson_ratio();
    const auto w = t.weights.cast<Complex>().asDiagonal();
    ElementMatrices out;
    out.mass = detail::symmetrized(t.value.transpose() * (w * t.value));
    if (space.dimension() == 1) {
        out.stiffness = detail::symmetrized(d * (t.dxx.transpose() * (w * t.dxx)));
        return out;
    }
    const ComplexMatrix wxx = w * t.dxx, wyy = w * t.dyy, wxy = w * t.dxy;
    ComplexMatrix k = t.dxx.transpose() * (wxx + nu * wyy);
    k.noalias() += t.dyy.transpose() * (nu * wxx + wyy);
    k.noalias() += (2.0 * (1.0 - nu)) * (t.dxy.transpose() * wxy);
    out.stiffness = detail::symmetrized(d * k);
    return out;
}

/// Element dynamic stiffness K_e - omega^2 rho H M_e at the operating rule.
inline ComplexMatrix element_dynamic_stiffness(const DisplacementSpace& space, const PlateMaterial& material, Frequency f,
                                               int e, const AssemblyOptions& opt = {}) {
    return element_matrices(space, material, e, element_quadrature_points(space, e, opt)).dynamic(material, f);
}

/// Local coordinates of the Gauss points along an element side.
inline LocalPoint side_point(int side, double t) noexcept {
    switch (side) {
        case 0: return {t, -1.0};
        case 1: return {1.0, t};
        case 2: return {t, 1.0};
        default: return {-1.0, t};
    }
}

/// Coupling block of a boundary edge: entry (m, l) = integral over the edge of
/// phi_m psi_l, phi the displacement functions of the adjacent element and psi
/// the 2 * terms multiplier functions (edge node 0 first).
inline ComplexMatrix edge_coupling(const DisplacementSpace& space, const EdgeElement& edge, int terms, int points) {
    if (space.dimension() != 2) throw std::invalid_argument("edge_coupling: 2D only");
    const QuadratureRule rule = gauss_legendre(points);
    const std::size_t nb = space.element_dof_count(edge.element);
    ComplexMatrix block = ComplexMatrix::Zero(static_cast<Eigen::Index>(nb), 2 * terms);
    std::vector<BasisEval<Complex>> buf(nb);
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const double t = rule.points[q];
        space.evaluate(edge.element, side_point(edge.side, t), 0, buf);
        const std::vector<double> psi = multiplier_basis(terms, edge.length, t);
        const double w = rule.weights[q] * 0.5 * edge.length;
        for (std::size_t b = 0; b < nb; ++b)
            for (std::size_t l = 0; l < psi.size(); ++l)
                block(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(l)) += w * buf[b].value * psi[l];
    }
    return block;
}

/// Global load vector. Point loads evaluate the basis of one containing element
/// (the functions are single-valued there); uniform loads are integrated.
inline ComplexVector load_vector(const DisplacementSpace& space, const std::vector<LoadSpec>& loads,
                                 const AssemblyOptions& opt = {}) {
    ComplexVector f = ComplexVector::Zero(static_cast<Eigen::Index>(space.dof_count()));
    const Mesh& mesh = space.mesh();
    std::map<ElementSignature, ComplexVector> cache;
    for (const auto& load : loads) {
        if (load.kind == LoadSpec::Kind::point) {
            const int e = mesh.locate(load.x, load.y);
            if (e < 0) throw std::invalid_argument("load_vector: point load outside the plate");
            const auto& g = space.element(e).geometry;
            LocalPoint lp = to_local(g, load.x, mesh.dimension() == 1 ? g.y0 : load.y);
            lp.xi = std::clamp(lp.xi, -1.0, 1.0);
            lp.eta = mesh.dimension() == 1 ? 0.0 : std::clamp(lp.eta, -1.0, 1.0);
            std::vector<BasisEval<Complex>> buf(space.element_dof_count(e));
            space.evaluate(e, lp, 0, buf);
            const auto dofs = space.element_dofs(e);
            for (std::size_t i = 0; i < dofs.size(); ++i) f[static_cast<Eigen::Index>(dofs[i])] += load.magnitude * buf[i].value;
            continue;
        }
        for (int e = 0; e < static_cast<int>(mesh.element_count()); ++e) {
            const ElementSignature key = space.signature(e);
            auto it = cache.find(key);
            if (it == cache.end()) {
                const QuadratureRule rule = gauss_legendre(element_quadrature_points(space, e, opt));
                const detail::BasisTable t = detail::tabulate(space, e, rule, 0);
                it = cache.emplace(key, t.value.transpose() * t.weights.cast<Complex>()).first;
            }
            const auto dofs = space.element_dofs(e);
            for (std::size_t i = 0; i < dofs.size(); ++i)
                f[static_cast<Eigen::Index>(dofs[i])] += load.magnitude * it->second[static_cast<Eigen::Index>(i)];
        }
    }
    return f;
}

/// Multiplier DOFs anchored at a boundary node for one edge direction (2D) or
/// at a constrained end point (1D, axis unused). Classical elements use one
/// multiplier per constrained nodal DOF (`dof` set).
struct MultiplierAnchor {
    int node = -1;
    Axis axis = Axis::x;
    std::size_t first = 0;
    std::size_t count = 0;
    std::optional<std::size_t> dof;
};

/// Symmetric saddle-point system
///   [ K_ww    K_wl ] [A]   [F]
///   [ K_wl^T  0    ] [C] = [0]
struct AssembledSystem {
    ComplexMatrix k_ww;
    ComplexMatrix k_wl;
    ComplexVector f;
    std::vector<DofRange> node_dofs;
    std::vector<MultiplierAnchor> anchors;
    std::vector<std::string> diagnostics;
    bool unconstrained = false;

    std::size_t displacement_dofs() const noexcept { return static_cast<std::size_t>(k_ww.rows()); }
    std::size_t multiplier_dofs() const noexcept { return static_cast<std::size_t>(k_wl.cols()); }

    ComplexMatrix saddle_matrix() const {
        const Eigen::Index n = k_ww.rows(), m = k_wl.cols();
        ComplexMatrix a = ComplexMatrix::Zero(n + m, n + m);
        a.topLeftCorner(n, n) = k_ww;
        a.topRightCorner(n, m) = k_wl;
        a.bottomLeftCorner(m, n) = k_wl.transpose();
        return a;
    }
    ComplexVector saddle_rhs() const {
        ComplexVector b = ComplexVector::Zero(k_ww.rows() + k_wl.cols());
        b.head(k_ww.rows()) = f;
        return b;
    }
};

/// Calls sink(e, dofs, block) for every element with its dynamic stiffness.
/// Blocks of translated copies of an element are computed once; elements are
/// visited in index order so accumulation is deterministic.
template <class Sink>
void for_each_element_block(const DisplacementSpace& space, const PlateMaterial& material, Frequency f,
                            const AssemblyOptions& opt, std::vector<std::string>& diagnostics, Sink&& sink) {
    std::map<ElementSignature, ComplexMatrix> cache;
    for (int e = 0; e < static_cast<int>(space.mesh().element_count()); ++e) {
        const ElementSignature key = space.signature(e);
        auto it = cache.find(key);
        if (it == cache.end()) {
            const int points = element_quadrature_points(space, e, opt);
            ComplexMatrix block = element_matrices(space, material, e, points).dynamic(material, f);
            if (opt.check_quadrature) {
                const ComplexMatrix fine = element_matrices(space, material, e, 2 * points).dynamic(material, f);
                const double change = detail::max_abs(fine - block) / std::max(detail::max_abs(fine), 1e-300);
                if (change > 1e-9) {
                    std::ostringstream os;
                    os << "quadrature under-resolved on element " << e << ": doubling points changes block by "
                       << change;
                    diagnostics.push_back(os.str());
                }
            }
            it = cache.emplace(key, std::move(block)).first;
        }
        sink(e, space.element_dofs(e), it->second);
    }
}

/// Dense global assembly of the saddle-point system.
inline AssembledSystem assemble(const DisplacementSpace& space, const PlateMaterial& material, Frequency f,
                                const std::vector<LoadSpec>& loads, const AssemblyOptions& opt = {}) {
    const Mesh& mesh = space.mesh();
    const auto n = static_cast<Eigen::Index>(space.dof_count());
    AssembledSystem sys;
    sys.node_dofs = space.node_dofs();
    sys.k_ww = ComplexMatrix::Zero(n, n);
    for_each_element_block(space, material, f, opt, sys.diagnostics,
                           [&](int, const std::vector<std::size_t>& dofs, const ComplexMatrix& block) {
                               for (std::size_t j = 0; j < dofs.size(); ++j)
                                   for (std::size_t i = 0; i < dofs.size(); ++i)
                                       sys.k_ww(static_cast<Eigen::Index>(dofs[i]), static_cast<Eigen::Index>(dofs[j])) +=
                                           block(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                           });
    sys.f = load_vector(space, loads, opt);

    std::vector<ComplexVector> columns;
    const auto add_anchor = [&](MultiplierAnchor a) {
        a.first = columns.size();
        sys.anchors.push_back(a);
    };

    if (space.method() == Method::classical) {
        for (std::size_t dof : space.classical_constrained_dofs()) {
            int node = 0;
            while (sys.node_dofs[static_cast<std::size_t>(node)].first + sys.node_dofs[static_cast<std::size_t>(node)].count <= dof)
                ++node;
            add_anchor({node, Axis::x, 0, 1, dof});
            ComplexVector col = ComplexVector::Zero(n);
            col[static_cast<Eigen::Index>(dof)] = 1.0;
            columns.push_back(std::move(col));
        }
    } else if (mesh.dimension() == 1) {
        for (int node : mesh.constrained_points()) {
            add_anchor({node, Axis::x, 0, 1, std::nullopt});
            const int e = node == 0 ? 0 : static_cast<int>(mesh.element_count()) - 1;
            std::vector<BasisEval<Complex>> buf(space.element_dof_count(e));
            space.evaluate(e, {node == 0 ? -1.0 : 1.0, 0.0}, 0, buf);
            ComplexVector col = ComplexVector::Zero(n);
            const auto dofs = space.element_dofs(e);
            for (std::size_t i = 0; i < dofs.size(); ++i) col[static_cast<Eigen::Index>(dofs[i])] = buf[i].value;
            columns.push_back(std::move(col));
        }
    } else {
        const int terms = space.plan().multiplier_count();
        const auto edges = mesh.constrained_edges();
        // Anchors per (node, axis), numbered in node-major order.
        std::map<std::pair<int, int>, std::size_t> anchor_of;
        for (const auto& edge : edges)
            for (int node : edge.nodes) anchor_of.emplace(std::pair{node, static_cast<int>(edge.axis)}, 0);
        for (auto& [key, idx] : anchor_of) {
            idx = sys.anchors.size();
            sys.anchors.push_back({key.first, static_cast<Axis>(key.second), idx * static_cast<std::size_t>(terms),
                                   static_cast<std::size_t>(terms), std::nullopt});
        }
        const auto m = static_cast<Eigen::Index>(sys.anchors.size() * static_cast<std::size_t>(terms));
        sys.k_wl = ComplexMatrix::Zero(n, m);
        for (const auto& edge : edges) {
            const int points = element_quadrature_points(space, edge.element, opt);
            const ComplexMatrix block = edge_coupling(space, edge, terms, points);
            const auto dofs = space.element_dofs(edge.element);
            for (int a = 0; a < 2; ++a) {
                const std::size_t anchor =
                    anchor_of.at({edge.nodes[static_cast<std::size_t>(a)], static_cast<int>(edge.axis)});
                const std::size_t col0 = sys.anchors[anchor].first;
                for (int l = 0; l < terms; ++l)
                    for (std::size_t i = 0; i < dofs.size(); ++i)
                        sys.k_wl(static_cast<Eigen::Index>(dofs[i]), static_cast<Eigen::Index>(col0 + static_cast<std::size_t>(l))) +=
                            block(static_cast<Eigen::Index>(i), a * terms + l);
            }
        }
    }
    if (!columns.empty()) {
        sys.k_wl.resize(n, static_cast<Eigen::Index>(columns.size()));
        for (std::size_t c = 0; c < columns.size(); ++c) sys.k_wl.col(static_cast<Eigen::Index>(c)) = columns[c];
    } else if (sys.k_wl.size() == 0) {
        sys.k_wl.resize(n, 0);
    }
    if (sys.k_wl.cols() == 0) {
        sys.unconstrained = true;
        sys.diagnostics.push_back("no constrained boundary: rigid-body modes are not suppressed (singular at omega = 0)");
    }
    return sys;
}

/// Sparse assembly for the classical elements with constrained DOFs
/// eliminated (equivalent to the nodal multipliers of the dense path).
struct SparseSystem {
    SparseComplexMatrix k;
    ComplexVector f;
    std::vector<long> reduced_index;  // full dof -> reduced index, -1 if constrained
    std::size_t full_dofs = 0;
};

inline SparseSystem assemble_sparse(const DisplacementSpace& space, const PlateMaterial& material, Frequency f,
                                    const std::vector<LoadSpec>& loads, const AssemblyOptions& opt = {}) {
    if (space.method() != Method::classical)
        throw std::invalid_argument("assemble_sparse: only the classical elements use the sparse path");
    SparseSystem sys;
    sys.full_dofs = space.dof_count();
    sys.reduced_index.assign(sys.full_dofs, 0);
    for (std::size_t d : space.classical_constrained_dofs()) sys.reduced_index[d] = -1;
    long next = 0;
    for (auto& r : sys.reduced_index)
        if (r >= 0) r = next++;
    std::vector<Eigen::Triplet<Complex>> triplets;
    std::vector<std::string> diagnostics;
    for_each_element_block(space, material, f, opt, diagnostics,
                           [&](int, const std::vector<std::size_t>& dofs, const ComplexMatrix& block) {
                               for (std::size_t j = 0; j < dofs.size(); ++j) {
                                   const long cj = sys.reduced_index[dofs[j]];
                                   if (cj < 0) continue;
                                   for (std::size_t i = 0; i < dofs.size(); ++i) {
                                       const long ri = sys.reduced_index[dofs[i]];
                                       if (ri < 0) continue;
                                       triplets.emplace_back(ri, cj, block(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
                                   }
                               }
                           });
    sys.k.resize(next, next);
    sys.k.setFromTriplets(triplets.begin(), triplets.end());
    sys.k.makeCompressed();
    const ComplexVector full = load_vector(space, loads, opt);
    sys.f.resize(next);
    for (std::size_t d = 0; d < sys.full_dofs; ++d)
        if (sys.reduced_index[d] >= 0) sys.f[sys.reduced_index[d]] = full[static_cast<Eigen::Index>(d)];
    return sys;
}

}  // namespace pufem
