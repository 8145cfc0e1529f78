#pragma once

#include <json.hpp>

#include <array>
#include <fstream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pufem/analysis.hpp"

namespace pufem {

using Json = nlohmann::ordered_json;

/// Raised for malformed or inconsistent experiment descriptions.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Shape { strip, rectangle, lshape };

inline std::string to_string(Shape s) {
    switch (s) {
        case Shape::strip: return "strip";
        case Shape::rectangle: return "rectangle";
        case Shape::lshape: return "lshape";
    }
    return "?";
}

inline Shape shape_from_string(const std::string& s) {
    if (s == "strip") return Shape::strip;
    if (s == "rectangle" || s == "square") return Shape::rectangle;
    if (s == "lshape") return Shape::lshape;
    throw ConfigError("unknown geometry shape '" + s + "'");
}

struct FrequencyGrid {
    /// Explicit list; when set it overrides the uniform grid.
    std::optional<std::vector<double>> list;
    double start_hz = 100.0;
    double stop_hz = 4000.0;
    int count = 79;
    bool exclude_resonances = true;
    double resonance_window = 0.01;
};

struct FieldRequest {
    double frequency_hz = 1000.0;
    int nx = 101;
    int ny = 101;
    /// Random interface points used for the C1 continuity check.
    int continuity_samples = 200;
};

struct ConvergeRequest {
    RefinementMode mode = RefinementMode::h;
    std::vector<int> ladder{4, 8, 16, 32, 64};
    double frequency_hz = 1000.0;
};

struct TableRequest {
    std::vector<EfficiencyCell> cells = default_efficiency_cells();
    int elements_per_side = 4;
};

/// Fully resolved experiment description. Defaults describe the steel plate
/// with L = 0.5 m, H = 2 mm, a 4 x 4 mesh and q = 30, p = 3 enrichment.
struct ExperimentConfig {
    PlateMaterial material = PlateMaterial::steel();
    Shape shape = Shape::rectangle;
    double lx = 0.5;
    double ly = 0.5;
    int elements_x = 4;
    int elements_y = 4;
    /// Optional mesh file (write_mesh format); overrides the generated mesh.
    std::string mesh_file;
    std::optional<BoundarySpec> boundary;
    Method method = Method::pufem;
    EnrichmentPlan plan = [] {
        EnrichmentPlan p;
        p.wave_count = 30;
        return p;
    }();
    std::vector<LoadSpec> loads{LoadSpec::point(1.0, 0.125, 0.125)};
    FrequencyGrid frequencies;
    std::vector<std::array<double, 2>> observation_points;
    FieldRequest field;
    ConvergeRequest converge;
    TableRequest table;
    LShapeConfig lshape;
    bool reference = true;
    ModalOptions modal;
    SolverOptions solver;
    std::optional<int> quadrature_points;

    int dimension() const noexcept { return shape == Shape::strip ? 1 : 2; }

    BoundarySpec resolved_boundary() const {
        if (boundary) return *boundary;
        return shape == Shape::lshape ? BoundarySpec::lshape(lx) : BoundarySpec{};
    }

    Mesh build_mesh() const {
        if (!mesh_file.empty()) {
            std::ifstream in(mesh_file);
            if (!in) throw ConfigError("cannot open mesh file '" + mesh_file + "'");
            return read_mesh(in);
        }
        switch (shape) {
            case Shape::strip: return interval_mesh(lx, elements_x, resolved_boundary());
            case Shape::rectangle: return uniform_rect_mesh(lx, ly, elements_x, elements_y, resolved_boundary());
            case Shape::lshape: return lshape_mesh(lx, elements_x);
        }
        throw ConfigError("bad shape");
    }

    Problem problem() const {
        return {material, std::make_shared<const Mesh>(build_mesh()), method, plan, loads};
    }

    SolveSettings settings() const {
        SolveSettings s;
        s.solver = solver;
        s.assembly.quadrature_points = quadrature_points;
        return s;
    }

    /// Observation points, defaulting to the point-load positions (or the
    /// domain centre for distributed loads).
    std::vector<std::array<double, 2>> observation() const {
        if (!observation_points.empty()) return observation_points;
        std::vector<std::array<double, 2>> pts;
        for (const auto& l : loads)
            if (l.kind == LoadSpec::Kind::point) pts.push_back({l.x, dimension() == 1 ? 0.0 : l.y});
        if (pts.empty()) pts.push_back({0.5 * lx, dimension() == 1 ? 0.0 : 0.5 * ly});
        return pts;
    }

    std::vector<double> frequency_list() const {
        if (frequencies.list) return *frequencies.list;
        if (frequencies.exclude_resonances && shape != Shape::lshape)
            return sweep_frequencies(frequencies.start_hz, frequencies.stop_hz, frequencies.count, material, lx,
                                     shape == Shape::strip ? 0.0 : ly, frequencies.resonance_window);
        return sweep_frequencies(frequencies.start_hz, frequencies.stop_hz, frequencies.count, material, lx, ly, 0.0);
    }

    /// Checks the parts used by `command` (frf, field, converge, table, lshape).
    void validate(const std::string& command) const {
        const auto require = [](bool ok, const std::string& what) {
            if (!ok) throw ConfigError(what);
        };
        require(lx > 0.0 && ly > 0.0, "geometry: lengths must be positive");
        require(elements_x >= 1 && elements_y >= 1, "mesh: need at least one element per direction");
        if (shape == Shape::lshape) require(elements_x % 2 == 0, "mesh: L-shape needs an even element count per side");
        if (method == Method::pufem) {
            try {
                plan.validate(dimension());
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
        require(!loads.empty(), "loads: at least one load is required");
        for (const auto& l : loads) {
            if (l.kind != LoadSpec::Kind::point) continue;
            require(l.x >= 0.0 && l.x <= lx, "loads: point load outside the plate");
            if (dimension() == 2) require(l.y >= 0.0 && l.y <= ly, "loads: point load outside the plate");
        }
        if (command == "frf") {
            if (frequencies.list) {
                require(!frequencies.list->empty(), "frequencies: list is empty");
                for (double f : *frequencies.list) require(f > 0.0, "frequencies: values must be positive");
            } else {
                require(frequencies.count >= 1, "frequencies: count must be >= 1");
                require(frequencies.start_hz > 0.0 && frequencies.stop_hz >= frequencies.start_hz,
                        "frequencies: need 0 < start <= stop");
            }
        }
        if (command == "field") {
            require(field.frequency_hz > 0.0, "field: frequency must be positive");
            require(field.nx >= 2 && (dimension() == 1 || field.ny >= 2), "field: grid needs at least 2 points per axis");
            require(field.continuity_samples >= 0, "field: continuity_samples must be >= 0");
        }
        if (command == "converge") {
            require(!converge.ladder.empty(), "converge: ladder is empty");
            require(converge.frequency_hz > 0.0, "converge: frequency must be positive");
            for (int v : converge.ladder)
                require(converge.mode == RefinementMode::h ? v >= 1 : v >= 0, "converge: invalid ladder value");
            require(shape != Shape::lshape, "converge: needs a strip or rectangle with a modal reference");
        }
        if (command == "table") {
            require(!table.cells.empty(), "table: no cells");
            require(table.elements_per_side >= 1, "table: elements_per_side must be >= 1");
            for (const auto& c : table.cells) require(c.kh > 0.0 && c.p >= 0 && c.q >= 0, "table: invalid cell");
        }
        if (command == "lshape") {
            require(lshape.fem_ladder.size() >= 2, "lshape: fem_ladder needs at least two meshes");
            for (int m : lshape.fem_ladder) require(m >= 2 && m % 2 == 0, "lshape: ladder meshes must be even");
            require(lshape.pufem_per_side >= 2 && lshape.pufem_per_side % 2 == 0,
                    "lshape: pufem_per_side must be even");
            require(lshape.kh > 0.0, "lshape: kh must be positive");
        }
    }
};

namespace detail {

template <class T>
void read(const Json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("key '") + key + "': " + e.what());
    }
}

inline const Json& section(const Json& j, const char* key) {
    static const Json empty = Json::object();
    if (!j.contains(key)) return empty;
    if (!j.at(key).is_object()) throw ConfigError(std::string("section '") + key + "' must be an object");
    return j.at(key);
}

inline LoadSpec load_from_json(const Json& j) {
    std::string kind = "point";
    double mag = 1.0, x = 0.0, y = 0.0;
    read(j, "kind", kind);
    read(j, "magnitude", mag);
    read(j, "x", x);
    read(j, "y", y);
    if (kind == "point") return LoadSpec::point(mag, x, y);
    if (kind == "uniform") return LoadSpec::uniform(mag);
    throw ConfigError("loads: unknown kind '" + kind + "'");
}

inline Json load_to_json(const LoadSpec& l) {
    Json j{{"kind", to_string(l.kind)}, {"magnitude", l.magnitude}};
    if (l.kind == LoadSpec::Kind::point) {
        j["x"] = l.x;
        j["y"] = l.y;
    }
    return j;
}

inline EnrichmentPlan plan_from_json(const Json& j, EnrichmentPlan plan) {
    read(j, "p", plan.polynomial_order);
    if (j.contains("p_internal") && !j.at("p_internal").is_null()) plan.internal_order = j.at("p_internal").get<int>();
    read(j, "q", plan.wave_count);
    read(j, "deflection", plan.deflection_angle);
    if (j.contains("multiplier_terms") && !j.at("multiplier_terms").is_null())
        plan.multiplier_terms = j.at("multiplier_terms").get<int>();
    read(j, "monomial_scale", plan.monomial_scale);
    return plan;
}

inline Json plan_to_json(const EnrichmentPlan& p) {
    Json j{{"p", p.polynomial_order}, {"q", p.wave_count}, {"deflection", p.deflection_angle},
           {"monomial_scale", p.monomial_scale}};
    j["p_internal"] = p.internal_order ? Json(*p.internal_order) : Json(nullptr);
    j["multiplier_terms"] = p.multiplier_terms ? Json(*p.multiplier_terms) : Json(nullptr);
    return j;
}

inline BoundarySpec boundary_from_json(const Json& j) {
    BoundarySpec b;
    std::string def = "ss";
    read(j, "default", def);
    b.default_condition = edge_condition_from_string(def);
    if (j.contains("segments"))
        for (const auto& s : j.at("segments")) {
            BoundarySegment seg;
            const auto from = s.at("from").get<std::array<double, 2>>();
            const auto to = s.at("to").get<std::array<double, 2>>();
            seg.x0 = from[0];
            seg.y0 = from[1];
            seg.x1 = to[0];
            seg.y1 = to[1];
            seg.condition = edge_condition_from_string(s.at("condition").get<std::string>());
            b.segments.push_back(seg);
        }
    return b;
}

inline Json boundary_to_json(const BoundarySpec& b) {
    Json segs = Json::array();
    for (const auto& s : b.segments)
        segs.push_back({{"from", {s.x0, s.y0}}, {"to", {s.x1, s.y1}}, {"condition", to_string(s.condition)}});
    return {{"default", to_string(b.default_condition)}, {"segments", segs}};
}

}  // namespace detail

/// Parses a JSON experiment description; missing keys keep their defaults.
inline ExperimentConfig config_from_json(const Json& root) {
    if (!root.is_object()) throw ConfigError("configuration must be a JSON object");
    ExperimentConfig c;
    try {
        const Json& m = detail::section(root, "material");
        double e = c.material.youngs_modulus(), nu = c.material.poisson_ratio(), rho = c.material.density(),
               h = c.material.thickness();
        detail::read(m, "youngs_modulus", e);
        detail::read(m, "poisson_ratio", nu);
        detail::read(m, "density", rho);
        detail::read(m, "thickness", h);
        c.material = PlateMaterial(e, nu, rho, h);

        const Json& g = detail::section(root, "geometry");
        std::string shape = to_string(c.shape);
        detail::read(g, "shape", shape);
        c.shape = shape_from_string(shape);
        detail::read(g, "length", c.lx);
        c.ly = c.lx;
        detail::read(g, "width", c.ly);

        const Json& mesh = detail::section(root, "mesh");
        detail::read(mesh, "elements_per_side", c.elements_x);
        c.elements_y = c.elements_x;
        detail::read(mesh, "elements_x", c.elements_x);
        detail::read(mesh, "elements_y", c.elements_y);
        detail::read(mesh, "file", c.mesh_file);
        if (root.contains("boundary")) c.boundary = detail::boundary_from_json(detail::section(root, "boundary"));

        std::string method = to_string(c.method);
        detail::read(root, "method", method);
        c.method = method_from_string(method);
        if (c.shape == Shape::strip) c.plan.wave_count = 0;
        c.plan = detail::plan_from_json(detail::section(root, "enrichment"), c.plan);

        if (root.contains("loads")) {
            c.loads.clear();
            for (const auto& l : root.at("loads")) c.loads.push_back(detail::load_from_json(l));
        } else if (c.shape != Shape::rectangle) {
            c.loads = {c.shape == Shape::strip ? LoadSpec::point(1.0, 0.25 * c.lx) : LoadSpec::uniform(1.0)};
        }

        const Json& fr = detail::section(root, "frequencies");
        if (fr.contains("list")) c.frequencies.list = fr.at("list").get<std::vector<double>>();
        detail::read(fr, "start", c.frequencies.start_hz);
        detail::read(fr, "stop", c.frequencies.stop_hz);
        detail::read(fr, "count", c.frequencies.count);
        detail::read(fr, "exclude_resonances", c.frequencies.exclude_resonances);
        detail::read(fr, "resonance_window", c.frequencies.resonance_window);

        detail::read(root, "observation_points", c.observation_points);

        const Json& fd = detail::section(root, "field");
        detail::read(fd, "frequency", c.field.frequency_hz);
        detail::read(fd, "nx", c.field.nx);
        detail::read(fd, "ny", c.field.ny);
        detail::read(fd, "continuity_samples", c.field.continuity_samples);

        const Json& cv = detail::section(root, "converge");
        std::string mode = to_string(c.converge.mode);
        detail::read(cv, "mode", mode);
        c.converge.mode = refinement_mode_from_string(mode);
        detail::read(cv, "ladder", c.converge.ladder);
        detail::read(cv, "frequency", c.converge.frequency_hz);

        const Json& tb = detail::section(root, "table");
        detail::read(tb, "elements_per_side", c.table.elements_per_side);
        if (tb.contains("cells")) {
            c.table.cells.clear();
            for (const auto& cell : tb.at("cells")) {
                EfficiencyCell ec;
                detail::read(cell, "kh", ec.kh);
                detail::read(cell, "p", ec.p);
                detail::read(cell, "q", ec.q);
                if (cell.contains("p_internal") && !cell.at("p_internal").is_null())
                    ec.p_internal = cell.at("p_internal").get<int>();
                c.table.cells.push_back(ec);
            }
        }

        const Json& ls = detail::section(root, "lshape");
        detail::read(ls, "pufem_per_side", c.lshape.pufem_per_side);
        detail::read(ls, "kh", c.lshape.kh);
        detail::read(ls, "fem_ladder", c.lshape.fem_ladder);
        detail::read(ls, "self_convergence_tolerance", c.lshape.self_convergence_tolerance);
        detail::read(ls, "require_converged", c.lshape.require_converged);
        if (ls.contains("enrichment")) c.lshape.plan = detail::plan_from_json(ls.at("enrichment"), c.lshape.plan);

        const Json& rf = detail::section(root, "reference");
        detail::read(rf, "enabled", c.reference);
        detail::read(rf, "cap_factor", c.modal.cap_factor);
        detail::read(rf, "margin", c.modal.margin);
        detail::read(rf, "min_modes", c.modal.min_modes);
        detail::read(rf, "resonance_tolerance", c.modal.resonance_tolerance);

        const Json& sv = detail::section(root, "solver");
        std::string eq = to_string(c.solver.equilibration);
        detail::read(sv, "equilibration", eq);
        c.solver.equilibration = equilibration_from_string(eq);
        detail::read(sv, "equilibration_sweeps", c.solver.equilibration_sweeps);
        detail::read(sv, "estimate_condition", c.solver.estimate_condition);
        if (sv.contains("quadrature_points") && !sv.at("quadrature_points").is_null())
            c.quadrature_points = sv.at("quadrature_points").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    c.lshape.material = c.material;
    c.lshape.length = c.lx;
    c.lshape.settings = c.settings();
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    Json j;
    try {
        j = Json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    return config_from_json(j);
}

/// Resolved configuration (all defaults filled in) for provenance records.
inline Json config_to_json(const ExperimentConfig& c) {
    Json j;
    j["material"] = {{"youngs_modulus", c.material.youngs_modulus()},
                     {"poisson_ratio", c.material.poisson_ratio()},
                     {"density", c.material.density()},
                     {"thickness", c.material.thickness()}};
    j["geometry"] = {{"shape", to_string(c.shape)}, {"length", c.lx}, {"width", c.ly}};
    j["mesh"] = {{"elements_x", c.elements_x}, {"elements_y", c.elements_y}, {"file", c.mesh_file}};
    j["boundary"] = detail::boundary_to_json(c.resolved_boundary());
    j["method"] = to_string(c.method);
    j["enrichment"] = detail::plan_to_json(c.plan);
    j["loads"] = Json::array();
    for (const auto& l : c.loads) j["loads"].push_back(detail::load_to_json(l));
    Json fr{{"start", c.frequencies.start_hz},
            {"stop", c.frequencies.stop_hz},
            {"count", c.frequencies.count},
            {"exclude_resonances", c.frequencies.exclude_resonances},
            {"resonance_window", c.frequencies.resonance_window}};
    if (c.frequencies.list) fr["list"] = *c.frequencies.list;
    j["frequencies"] = fr;
    j["observation_points"] = c.observation();
    j["field"] = {{"frequency", c.field.frequency_hz},
                  {"nx", c.field.nx},
                  {"ny", c.field.ny},
                  {"continuity_samples", c.field.continuity_samples}};
    j["converge"] = {{"mode", to_string(c.converge.mode)},
                     {"ladder", c.converge.ladder},
                     {"frequency", c.converge.frequency_hz}};
    Json cells = Json::array();
    for (const auto& cell : c.table.cells)
        cells.push_back({{"kh", cell.kh},
                         {"p", cell.p},
                         {"p_internal", cell.p_internal ? Json(*cell.p_internal) : Json(nullptr)},
                         {"q", cell.q}});
    j["table"] = {{"elements_per_side", c.table.elements_per_side}, {"cells", cells}};
    j["lshape"] = {{"pufem_per_side", c.lshape.pufem_per_side},
                   {"kh", c.lshape.kh},
                   {"fem_ladder", c.lshape.fem_ladder},
                   {"self_convergence_tolerance", c.lshape.self_convergence_tolerance},
                   {"require_converged", c.lshape.require_converged},
                   {"enrichment", detail::plan_to_json(c.lshape.plan)}};
    j["reference"] = {{"enabled", c.reference},
                      {"cap_factor", c.modal.cap_factor},
                      {"margin", c.modal.margin},
                      {"min_modes", c.modal.min_modes},
                      {"resonance_tolerance", c.modal.resonance_tolerance}};
    j["solver"] = {{"equilibration", to_string(c.solver.equilibration)},
                   {"equilibration_sweeps", c.solver.equilibration_sweeps},
                   {"estimate_condition", c.solver.estimate_condition},
                   {"quadrature_points", c.quadrature_points ? Json(*c.quadrature_points) : Json(nullptr)}};
    return j;
}

}  // namespace pufem
