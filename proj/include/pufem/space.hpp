#pragma once

#include <algorithm>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pufem/enrichment.hpp"
#include "pufem/mesh.hpp"
#include "pufem/shape_basis.hpp"

namespace pufem {

/// pufem: Hermite PU times node enrichment. classical: cubic Hermite beam
/// element in 1D, conforming rectangle (CR) in 2D.
enum class Method { pufem, classical };

inline std::string to_string(Method m) { return m == Method::pufem ? "pufem" : "classical"; }

inline Method method_from_string(const std::string& s) {
    if (s == "pufem") return Method::pufem;
    if (s == "classical" || s == "classical_cr" || s == "cr" || s == "hermite") return Method::classical;
    throw std::invalid_argument("unknown method '" + s + "'");
}

struct DofRange {
    std::size_t first = 0;
    std::size_t count = 0;
};

/// Identifies elements whose blocks coincide up to translation: all basis
/// functions are anchored at their node, so only the size and per-corner
/// polynomial orders matter.
struct ElementSignature {
    double hx = 0.0;
    double hy = 0.0;
    std::array<int, 4> corner_orders{};

    friend auto operator<=>(const ElementSignature&, const ElementSignature&) = default;
};

/// Global displacement space over a mesh: DOF numbering (node-major, enrichment
/// order within a node) and element basis evaluation.
class DisplacementSpace {
public:
    DisplacementSpace(std::shared_ptr<const Mesh> mesh, Method method, EnrichmentPlan plan, double wavenumber)
        : mesh_(std::move(mesh)), method_(method), plan_(std::move(plan)), k_(wavenumber) {
        if (!mesh_) throw std::invalid_argument("DisplacementSpace: null mesh");
        const int dim = mesh_->dimension();
        if (method_ == Method::pufem) plan_.validate(dim);
        std::size_t offset = 0;
        for (std::size_t n = 0; n < mesh_->node_count(); ++n) {
            const auto& node = mesh_->nodes()[n];
            std::size_t count = 0;
            if (method_ == Method::pufem) {
                bases_.push_back(node_basis(plan_, node.x, node.y, node.on_boundary, k_, dim));
                count = bases_.back().size();
            } else {
                count = dim == 1 ? 2 : 4;
            }
            ranges_.push_back({offset, count});
            offset += count;
        }
        dof_count_ = offset;
    }

    const Mesh& mesh() const noexcept { return *mesh_; }
    std::shared_ptr<const Mesh> mesh_ptr() const noexcept { return mesh_; }
    Method method() const noexcept { return method_; }
    const EnrichmentPlan& plan() const noexcept { return plan_; }
    double wavenumber() const noexcept { return k_; }
    int dimension() const noexcept { return mesh_->dimension(); }
    int corners() const noexcept { return mesh_->dimension() == 1 ? 2 : 4; }

    std::size_t dof_count() const noexcept { return dof_count_; }
    const std::vector<DofRange>& node_dofs() const noexcept { return ranges_; }
    const NodeBasis& node_basis_of(int n) const { return bases_.at(static_cast<std::size_t>(n)); }

    /// Highest polynomial order present (3 for the classical cubic elements).
    int max_polynomial_order() const noexcept {
        if (method_ == Method::classical) return 3;
        return std::max(plan_.polynomial_order, plan_.internal_order.value_or(plan_.polynomial_order));
    }

    int element_polynomial_order(int e) const {
        if (method_ == Method::classical) return 3;
        int p = 0;
        const auto& el = element(e);
        for (int c = 0; c < corners(); ++c)
            p = std::max(p, plan_.order_for(mesh_->is_edge_node(el.nodes[static_cast<std::size_t>(c)])));
        return p;
    }

    const Element& element(int e) const { return mesh_->elements().at(static_cast<std::size_t>(e)); }

    std::vector<std::size_t> element_dofs(int e) const {
        std::vector<std::size_t> out;
        const auto& el = element(e);
        for (int c = 0; c < corners(); ++c) {
            const auto& r = ranges_[static_cast<std::size_t>(el.nodes[static_cast<std::size_t>(c)])];
            for (std::size_t i = 0; i < r.count; ++i) out.push_back(r.first + i);
        }
        return out;
    }

    std::size_t element_dof_count(int e) const {
        std::size_t n = 0;
        const auto& el = element(e);
        for (int c = 0; c < corners(); ++c) n += ranges_[static_cast<std::size_t>(el.nodes[static_cast<std::size_t>(c)])].count;
        return n;
    }

    ElementSignature signature(int e) const {
        const auto& el = element(e);
        ElementSignature s{el.geometry.hx, el.geometry.hy, {}};
        if (method_ == Method::pufem)
            for (int c = 0; c < corners(); ++c)
                s.corner_orders[static_cast<std::size_t>(c)] =
                    plan_.order_for(mesh_->is_edge_node(el.nodes[static_cast<std::size_t>(c)]));
        return s;
    }

    /// All basis functions of element e at a local point, physical derivatives
    /// up to `order`; out.size() == element_dof_count(e), corner-major.
    void evaluate(int e, LocalPoint p, int order, std::span<BasisEval<Complex>> out) const {
        const auto& el = element(e);
        const auto& g = el.geometry;
        const int dim = dimension();
        std::size_t pos = 0;
        if (method_ == Method::classical) {
            for (int c = 0; c < corners(); ++c) {
                if (dim == 1) {
                    for (const auto& f : hermite_beam_row(c, p.xi, g.hx)) out[pos++] = promote(f);
                } else {
                    for (const auto& f : cr_shape_row(c, p, g.hx, g.hy)) out[pos++] = promote(f);
                }
            }
            return;
        }
        const MappedPoint xp = map_element(g, p);
        const double y = dim == 1 ? 0.0 : xp.y;
        for (int c = 0; c < corners(); ++c) {
            const int node = el.nodes[static_cast<std::size_t>(c)];
            const BasisEval<double> pu = dim == 1 ? pu1d(c, p.xi, g.hx) : pu2d(c, p, g);
            const NodeBasis& nb = bases_[static_cast<std::size_t>(node)];
            auto seg = out.subspan(pos, nb.size());
            nb.evaluate(xp.x, y, order, seg);
            for (auto& f : seg) f = multiply(pu, f, order);
            pos += nb.size();
        }
    }

    /// DOFs of the classical elements fixed by simply supported edges: W at
    /// every constrained node plus the slope along each constrained edge.
    std::vector<std::size_t> classical_constrained_dofs() const {
        std::vector<std::size_t> out;
        if (method_ != Method::classical) return out;
        if (dimension() == 1) {
            for (int n : mesh_->constrained_points()) out.push_back(ranges_[static_cast<std::size_t>(n)].first);
        } else {
            for (const auto& edge : mesh_->constrained_edges())
                for (int n : edge.nodes) {
                    const std::size_t base = ranges_[static_cast<std::size_t>(n)].first;
                    out.push_back(base);
                    out.push_back(base + (edge.axis == Axis::x ? 1 : 2));
                }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

private:
    static BasisEval<Complex> promote(const BasisEval<double>& f) noexcept {
        return {f.value, f.dx, f.dy, f.dxx, f.dxy, f.dyy};
    }

    static BasisEval<Complex> multiply(const BasisEval<double>& a, const BasisEval<Complex>& b, int order) noexcept {
        BasisEval<Complex> r;
        r.value = a.value * b.value;
        if (order >= 1) {
            r.dx = a.dx * b.value + a.value * b.dx;
            r.dy = a.dy * b.value + a.value * b.dy;
        }
        if (order >= 2) {
            r.dxx = a.dxx * b.value + 2.0 * a.dx * b.dx + a.value * b.dxx;
            r.dxy = a.dxy * b.value + a.dx * b.dy + a.dy * b.dx + a.value * b.dxy;
            r.dyy = a.dyy * b.value + 2.0 * a.dy * b.dy + a.value * b.dyy;
        }
        return r;
    }

    std::shared_ptr<const Mesh> mesh_;
    Method method_;
    EnrichmentPlan plan_;
    double k_;
    std::vector<NodeBasis> bases_;
    std::vector<DofRange> ranges_;
    std::size_t dof_count_ = 0;
};

}  // namespace pufem
