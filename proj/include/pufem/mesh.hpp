#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "pufem/shape_basis.hpp"

namespace pufem {

enum class EdgeCondition { simply_supported, free };
enum class Axis { x, y };

inline std::string to_string(EdgeCondition c) { return c == EdgeCondition::simply_supported ? "ss" : "free"; }

inline EdgeCondition edge_condition_from_string(const std::string& s) {
    if (s == "ss" || s == "simply_supported") return EdgeCondition::simply_supported;
    if (s == "free") return EdgeCondition::free;
    throw std::invalid_argument("unknown edge condition '" + s + "'");
}

/// Axis-aligned boundary segment (or a single point in 1D) with its condition.
struct BoundarySegment {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;
    EdgeCondition condition = EdgeCondition::simply_supported;

    bool contains(double x, double y) const noexcept {
        const double tol = 1e-10 * (1.0 + std::abs(x0) + std::abs(x1) + std::abs(y0) + std::abs(y1));
        return x >= std::min(x0, x1) - tol && x <= std::max(x0, x1) + tol && y >= std::min(y0, y1) - tol &&
               y <= std::max(y0, y1) + tol;
    }
};

/// Boundary conditions attached to geometry, independent of any mesh. The
/// first segment containing a boundary point decides; otherwise the default.
struct BoundarySpec {
    EdgeCondition default_condition = EdgeCondition::simply_supported;
    std::vector<BoundarySegment> segments;

    static BoundarySpec all_simply_supported() { return {}; }

    /// L-shaped plate: the two longest edges (x = 0 and y = 0) simply
    /// supported, everything else free.
    static BoundarySpec lshape(double length) {
        return {EdgeCondition::free,
                {{0.0, 0.0, length, 0.0, EdgeCondition::simply_supported},
                 {0.0, 0.0, 0.0, length, EdgeCondition::simply_supported}}};
    }

    EdgeCondition condition_at(double x, double y) const noexcept {
        for (const auto& s : segments)
            if (s.contains(x, y)) return s.condition;
        return default_condition;
    }
};

struct Node {
    double x = 0.0;
    double y = 0.0;
    bool on_boundary = false;
};

/// Rectangular element; corners numbered counter-clockwise from (x0, y0).
/// 1D elements use nodes[0..1] and the x extent only.
struct Element {
    std::array<int, 4> nodes{-1, -1, -1, -1};
    ElementGeometry geometry;
};

/// Boundary edge of a 2D element. Side: 0 bottom, 1 right, 2 top, 3 left.
/// nodes[0] has the smaller coordinate along `axis`.
struct EdgeElement {
    std::array<int, 2> nodes{-1, -1};
    int element = -1;
    int side = 0;
    Axis axis = Axis::x;
    double length = 0.0;
    EdgeCondition condition = EdgeCondition::simply_supported;
};

class Mesh;
Mesh mesh_from_rectangles(int dimension, const std::vector<ElementGeometry>& rects, BoundarySpec boundary);

/// Conforming mesh of axis-aligned rectangles lying on a tensor grid of lines
/// (each element occupies exactly one grid cell, so there are no hanging
/// nodes). Immutable after construction.
class Mesh {
public:
    int dimension() const noexcept { return dimension_; }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const std::vector<Element>& elements() const noexcept { return elements_; }
    const std::vector<EdgeElement>& boundary_edges() const noexcept { return boundary_edges_; }
    const BoundarySpec& boundary() const noexcept { return boundary_; }
    const std::vector<double>& x_lines() const noexcept { return x_lines_; }
    const std::vector<double>& y_lines() const noexcept { return y_lines_; }

    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t element_count() const noexcept { return elements_.size(); }

    /// Edge elements carrying essential (W = 0) constraints.
    std::vector<EdgeElement> constrained_edges() const {
        std::vector<EdgeElement> out;
        for (const auto& e : boundary_edges_)
            if (e.condition == EdgeCondition::simply_supported) out.push_back(e);
        return out;
    }

    /// 1D only: nodes at simply supported ends.
    std::vector<int> constrained_points() const {
        std::vector<int> out;
        if (dimension_ != 1) return out;
        for (int n : {0, static_cast<int>(nodes_.size()) - 1})
            if (boundary_.condition_at(nodes_[static_cast<std::size_t>(n)].x, 0.0) == EdgeCondition::simply_supported)
                out.push_back(n);
        return out;
    }

    bool is_edge_node(int n) const { return nodes_.at(static_cast<std::size_t>(n)).on_boundary; }

    double area() const noexcept {
        double a = 0.0;
        for (const auto& e : elements_) a += dimension_ == 1 ? e.geometry.hx : e.geometry.area();
        return a;
    }

    /// Element size if every element is the same square (1D: same length).
    std::optional<double> uniform_size() const {
        if (elements_.empty()) return std::nullopt;
        const auto& g0 = elements_.front().geometry;
        for (const auto& e : elements_) {
            const auto& g = e.geometry;
            if (std::abs(g.hx - g0.hx) > 1e-12 * g0.hx) return std::nullopt;
            if (dimension_ == 2 && std::abs(g.hy - g.hx) > 1e-12 * g0.hx) return std::nullopt;
        }
        return g0.hx;
    }

    /// Index of an element containing (x, y), or -1.
    int locate(double x, double y) const {
        const auto cell = [](const std::vector<double>& lines, double v) {
            auto it = std::upper_bound(lines.begin(), lines.end(), v);
            long i = static_cast<long>(it - lines.begin()) - 1;
            return std::clamp<long>(i, 0, static_cast<long>(lines.size()) - 2);
        };
        const long nx = static_cast<long>(x_lines_.size()) - 1;
        const long ix = cell(x_lines_, x);
        const long iy = dimension_ == 1 ? 0 : cell(y_lines_, y);
        for (long dy : {0L, -1L, 1L}) {
            for (long dx : {0L, -1L, 1L}) {
                const long cx = ix + dx, cy = iy + dy;
                if (cx < 0 || cx >= nx || cy < 0 || cy >= static_cast<long>(std::max<std::size_t>(y_lines_.size(), 2)) - 1)
                    continue;
                const int e = cells_[static_cast<std::size_t>(cy * nx + cx)];
                if (e < 0) continue;
                const auto& g = elements_[static_cast<std::size_t>(e)].geometry;
                const double yy = dimension_ == 1 ? g.y0 : y;
                if (g.contains(x, yy, 1e-10)) return e;
            }
        }
        return -1;
    }

    /// Rectangles of all elements (input to rebuilding / refinement).
    std::vector<ElementGeometry> rectangles() const {
        std::vector<ElementGeometry> out;
        out.reserve(elements_.size());
        for (const auto& e : elements_) out.push_back(e.geometry);
        return out;
    }

private:
    friend Mesh mesh_from_rectangles(int, const std::vector<ElementGeometry>&, BoundarySpec);

    int dimension_ = 2;
    std::vector<Node> nodes_;
    std::vector<Element> elements_;
    std::vector<EdgeElement> boundary_edges_;
    BoundarySpec boundary_;
    std::vector<double> x_lines_;
    std::vector<double> y_lines_;
    std::vector<int> cells_;
};

namespace detail {

inline std::vector<double> unique_lines(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const double extent = v.empty() ? 1.0 : std::max(1.0, std::abs(v.back()) + std::abs(v.front()));
    std::vector<double> out;
    for (double x : v)
        if (out.empty() || x - out.back() > 1e-12 * extent) out.push_back(x);
    return out;
}

inline std::size_t line_index(const std::vector<double>& lines, double v) {
    auto it = std::lower_bound(lines.begin(), lines.end(), v);
    const double extent = std::max(1.0, std::abs(lines.back()) + std::abs(lines.front()));
    if (it != lines.end() && std::abs(*it - v) <= 1e-12 * extent) return static_cast<std::size_t>(it - lines.begin());
    if (it != lines.begin() && std::abs(*(it - 1) - v) <= 1e-12 * extent)
        return static_cast<std::size_t>(it - lines.begin() - 1);
    throw std::logic_error("mesh: coordinate not on grid line");
}

}  // namespace detail

/// Builds a conforming mesh from rectangles that each occupy one cell of the
/// tensor grid spanned by their edges. Nodes are numbered row-major (y, then x).
inline Mesh mesh_from_rectangles(int dimension, const std::vector<ElementGeometry>& rects, BoundarySpec boundary) {
    if (dimension != 1 && dimension != 2) throw std::invalid_argument("mesh: dimension must be 1 or 2");
    if (rects.empty()) throw std::invalid_argument("mesh: no elements");
    std::vector<double> xs, ys;
    for (const auto& r : rects) {
        r.validate();
        xs.push_back(r.x0);
        xs.push_back(r.x0 + r.hx);
        ys.push_back(r.y0);
        if (dimension == 2) ys.push_back(r.y0 + r.hy);
    }
    Mesh m;
    m.dimension_ = dimension;
    m.boundary_ = std::move(boundary);
    m.x_lines_ = detail::unique_lines(xs);
    m.y_lines_ = dimension == 1 ? std::vector<double>{0.0} : detail::unique_lines(ys);
    const std::size_t nx = m.x_lines_.size() - 1;
    const std::size_t ny = dimension == 1 ? 1 : m.y_lines_.size() - 1;
    m.cells_.assign(nx * ny, -1);

    struct CellRef {
        std::size_t ix, iy;
    };
    std::vector<CellRef> refs;
    for (std::size_t e = 0; e < rects.size(); ++e) {
        const auto& r = rects[e];
        const std::size_t ix0 = detail::line_index(m.x_lines_, r.x0), ix1 = detail::line_index(m.x_lines_, r.x0 + r.hx);
        std::size_t iy0 = 0, iy1 = 1;
        if (dimension == 2) iy0 = detail::line_index(m.y_lines_, r.y0), iy1 = detail::line_index(m.y_lines_, r.y0 + r.hy);
        if (ix1 != ix0 + 1 || iy1 != iy0 + 1)
            throw std::invalid_argument("mesh: element spans several grid cells (hanging nodes)");
        int& slot = m.cells_[iy0 * nx + ix0];
        if (slot >= 0) throw std::invalid_argument("mesh: overlapping elements");
        slot = static_cast<int>(e);
        refs.push_back({ix0, iy0});
    }

    // Node numbering: (iy, ix) lexicographic over used grid points.
    const std::size_t gx = nx + 1;
    const std::size_t gy = dimension == 1 ? 1 : ny + 1;
    std::vector<int> node_id(gx * gy, -1);
    for (const auto& c : refs) {
        if (dimension == 1) {
            node_id[c.ix] = node_id[c.ix + 1] = 0;
        } else {
            for (std::size_t dy = 0; dy < 2; ++dy)
                for (std::size_t dx = 0; dx < 2; ++dx) node_id[(c.iy + dy) * gx + c.ix + dx] = 0;
        }
    }
    for (std::size_t iy = 0; iy < gy; ++iy)
        for (std::size_t ix = 0; ix < gx; ++ix) {
            int& id = node_id[iy * gx + ix];
            if (id < 0) continue;
            id = static_cast<int>(m.nodes_.size());
            m.nodes_.push_back({m.x_lines_[ix], dimension == 1 ? 0.0 : m.y_lines_[iy], false});
        }

    for (std::size_t e = 0; e < rects.size(); ++e) {
        const auto [ix, iy] = refs[e];
        Element el;
        el.geometry.x0 = m.x_lines_[ix];
        el.geometry.hx = m.x_lines_[ix + 1] - m.x_lines_[ix];
        if (dimension == 1) {
            el.geometry.y0 = 0.0;
            el.geometry.hy = 1.0;
            el.nodes = {node_id[ix], node_id[ix + 1], -1, -1};
        } else {
            el.geometry.y0 = m.y_lines_[iy];
            el.geometry.hy = m.y_lines_[iy + 1] - m.y_lines_[iy];
            el.nodes = {node_id[iy * gx + ix], node_id[iy * gx + ix + 1], node_id[(iy + 1) * gx + ix + 1],
                        node_id[(iy + 1) * gx + ix]};
        }
        m.elements_.push_back(el);
    }

    if (dimension == 1) {
        m.nodes_.front().on_boundary = true;
        m.nodes_.back().on_boundary = true;
        if (m.elements_.size() != nx) throw std::invalid_argument("mesh: 1D mesh must be a connected interval");
        return m;
    }

    const auto has_cell = [&](long ix, long iy) {
        return ix >= 0 && iy >= 0 && ix < static_cast<long>(nx) && iy < static_cast<long>(ny) &&
               m.cells_[static_cast<std::size_t>(iy) * nx + static_cast<std::size_t>(ix)] >= 0;
    };
    for (std::size_t e = 0; e < m.elements_.size(); ++e) {
        const auto ix = static_cast<long>(refs[e].ix), iy = static_cast<long>(refs[e].iy);
        const auto& el = m.elements_[e];
        // side -> (neighbour offset, corner pair ordered along the axis, axis)
        const std::array<std::tuple<long, long, int, int, Axis>, 4> sides{{{0, -1, 0, 1, Axis::x},
                                                                           {1, 0, 1, 2, Axis::y},
                                                                           {0, 1, 3, 2, Axis::x},
                                                                           {-1, 0, 0, 3, Axis::y}}};
        for (int s = 0; s < 4; ++s) {
            const auto& [dx, dy, c0, c1, axis] = sides[static_cast<std::size_t>(s)];
            if (has_cell(ix + dx, iy + dy)) continue;
            EdgeElement edge;
            edge.nodes = {el.nodes[static_cast<std::size_t>(c0)], el.nodes[static_cast<std::size_t>(c1)]};
            edge.element = static_cast<int>(e);
            edge.side = s;
            edge.axis = axis;
            edge.length = axis == Axis::x ? el.geometry.hx : el.geometry.hy;
            const auto& a = m.nodes_[static_cast<std::size_t>(edge.nodes[0])];
            const auto& b = m.nodes_[static_cast<std::size_t>(edge.nodes[1])];
            edge.condition = m.boundary_.condition_at(0.5 * (a.x + b.x), 0.5 * (a.y + b.y));
            m.nodes_[static_cast<std::size_t>(edge.nodes[0])].on_boundary = true;
            m.nodes_[static_cast<std::size_t>(edge.nodes[1])].on_boundary = true;
            m.boundary_edges_.push_back(edge);
        }
    }
    return m;
}

/// 1D interval [0, L] split into M equal elements.
inline Mesh interval_mesh(double length, int elements, BoundarySpec boundary = {}) {
    if (!(length > 0.0) || elements < 1) throw std::invalid_argument("interval_mesh: need L > 0 and M >= 1");
    std::vector<ElementGeometry> rects;
    const double h = length / elements;
    for (int i = 0; i < elements; ++i) rects.push_back({i * h, 0.0, h, 1.0});
    return mesh_from_rectangles(1, rects, std::move(boundary));
}

/// Tensor-product mesh on strictly increasing grid lines.
inline Mesh gridline_mesh(const std::vector<double>& x_lines, const std::vector<double>& y_lines,
                          BoundarySpec boundary = {}) {
    const auto check = [](const std::vector<double>& v) {
        if (v.size() < 2) throw std::invalid_argument("gridline_mesh: need at least two lines per direction");
        for (std::size_t i = 1; i < v.size(); ++i)
            if (!(v[i] > v[i - 1])) throw std::invalid_argument("gridline_mesh: lines must be strictly increasing");
    };
    check(x_lines);
    check(y_lines);
    std::vector<ElementGeometry> rects;
    for (std::size_t j = 0; j + 1 < y_lines.size(); ++j)
        for (std::size_t i = 0; i + 1 < x_lines.size(); ++i)
            rects.push_back({x_lines[i], y_lines[j], x_lines[i + 1] - x_lines[i], y_lines[j + 1] - y_lines[j]});
    return mesh_from_rectangles(2, rects, std::move(boundary));
}

inline Mesh uniform_rect_mesh(double lx, double ly, int mx, int my, BoundarySpec boundary = {}) {
    if (!(lx > 0.0) || !(ly > 0.0)) throw std::invalid_argument("uniform_rect_mesh: dimensions must be positive");
    if (mx < 1 || my < 1) throw std::invalid_argument("uniform_rect_mesh: need at least one element per direction");
    std::vector<double> xs, ys;
    for (int i = 0; i <= mx; ++i) xs.push_back(lx * i / mx);
    for (int j = 0; j <= my; ++j) ys.push_back(ly * j / my);
    return gridline_mesh(xs, ys, std::move(boundary));
}

/// Square [0, L]^2 with the quarter x > L/2, y > L/2 removed, M elements per side.
inline Mesh lshape_mesh(double length, int per_side) {
    if (!(length > 0.0)) throw std::invalid_argument("lshape_mesh: L must be positive");
    if (per_side < 2 || per_side % 2 != 0) throw std::invalid_argument("lshape_mesh: elements per side must be even");
    const double h = length / per_side;
    std::vector<ElementGeometry> rects;
    for (int j = 0; j < per_side; ++j)
        for (int i = 0; i < per_side; ++i) {
            if (2 * i >= per_side && 2 * j >= per_side) continue;
            rects.push_back({i * h, j * h, h, h});
        }
    return mesh_from_rectangles(2, rects, BoundarySpec::lshape(length));
}

/// Splits every element 2x2 (2 in 1D).
inline Mesh refine(const Mesh& mesh) {
    std::vector<ElementGeometry> rects;
    for (const auto& e : mesh.elements()) {
        const auto& g = e.geometry;
        const double hx = 0.5 * g.hx;
        if (mesh.dimension() == 1) {
            rects.push_back({g.x0, g.y0, hx, g.hy});
            rects.push_back({g.x0 + hx, g.y0, hx, g.hy});
            continue;
        }
        const double hy = 0.5 * g.hy;
        for (int j = 0; j < 2; ++j)
            for (int i = 0; i < 2; ++i) rects.push_back({g.x0 + i * hx, g.y0 + j * hy, hx, hy});
    }
    return mesh_from_rectangles(mesh.dimension(), rects, mesh.boundary());
}

/// Line-oriented text dump: header, boundary spec, element rectangles, and
/// (informational) node and edge tables. read_mesh rebuilds from the
/// rectangles and boundary spec.
inline void write_mesh(std::ostream& os, const Mesh& mesh) {
    os.precision(17);
    os << "pufem-mesh 1\n";
    os << "dimension " << mesh.dimension() << "\n";
    const auto& b = mesh.boundary();
    os << "boundary " << to_string(b.default_condition) << " " << b.segments.size() << "\n";
    for (const auto& s : b.segments)
        os << s.x0 << " " << s.y0 << " " << s.x1 << " " << s.y1 << " " << to_string(s.condition) << "\n";
    os << "nodes " << mesh.node_count() << "\n";
    for (const auto& n : mesh.nodes()) os << n.x << " " << n.y << " " << (n.on_boundary ? 1 : 0) << "\n";
    os << "elements " << mesh.element_count() << "\n";
    for (const auto& e : mesh.elements()) {
        for (int n : e.nodes) os << n << " ";
        os << e.geometry.x0 << " " << e.geometry.y0 << " " << e.geometry.hx << " " << e.geometry.hy << "\n";
    }
    os << "edges " << mesh.boundary_edges().size() << "\n";
    for (const auto& e : mesh.boundary_edges())
        os << e.nodes[0] << " " << e.nodes[1] << " " << e.element << " " << e.side << " "
           << (e.axis == Axis::x ? "x" : "y") << " " << to_string(e.condition) << "\n";
}

inline Mesh read_mesh(std::istream& is) {
    std::string tag;
    int version = 0, dim = 0;
    if (!(is >> tag >> version) || tag != "pufem-mesh" || version != 1)
        throw std::invalid_argument("read_mesh: bad header");
    if (!(is >> tag >> dim) || tag != "dimension") throw std::invalid_argument("read_mesh: missing dimension");
    BoundarySpec spec;
    std::string cond;
    std::size_t count = 0;
    if (!(is >> tag >> cond >> count) || tag != "boundary") throw std::invalid_argument("read_mesh: missing boundary");
    spec.default_condition = edge_condition_from_string(cond);
    for (std::size_t i = 0; i < count; ++i) {
        BoundarySegment s;
        if (!(is >> s.x0 >> s.y0 >> s.x1 >> s.y1 >> cond)) throw std::invalid_argument("read_mesh: bad segment");
        s.condition = edge_condition_from_string(cond);
        spec.segments.push_back(s);
    }
    if (!(is >> tag >> count) || tag != "nodes") throw std::invalid_argument("read_mesh: missing nodes");
    for (std::size_t i = 0; i < count; ++i) {
        double x, y;
        int b;
        if (!(is >> x >> y >> b)) throw std::invalid_argument("read_mesh: bad node row");
    }
    if (!(is >> tag >> count) || tag != "elements") throw std::invalid_argument("read_mesh: missing elements");
    std::vector<ElementGeometry> rects(count);
    for (auto& r : rects) {
        int n;
        for (int k = 0; k < 4; ++k)
            if (!(is >> n)) throw std::invalid_argument("read_mesh: bad element row");
        if (!(is >> r.x0 >> r.y0 >> r.hx >> r.hy)) throw std::invalid_argument("read_mesh: bad element row");
    }
    return mesh_from_rectangles(dim, rects, std::move(spec));
}

}  // namespace pufem
