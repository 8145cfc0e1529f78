#pragma once

#include <Eigen/Dense>

#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "pufem/assembly.hpp"
#include "pufem/core_model.hpp"
#include "pufem/field.hpp"
#include "pufem/linear_solver.hpp"
#include "pufem/mesh.hpp"
#include "pufem/reference_solutions.hpp"
#include "pufem/space.hpp"

namespace pufem {

/// Reference field sampled on a tensor grid: out(i, j) = W(xs[i], ys[j]).
using GridFunction = std::function<Eigen::MatrixXcd(std::span<const double>, std::span<const double>)>;

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Results must be
/// written by index; the first exception is rethrown.
template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, count); ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

/// Relative L2 error (percent) of `solution` against `reference` over the
/// solution's mesh, using the assembly quadrature of each element.
inline double l2_error(const FieldSolution& solution, const GridFunction& reference,
                       std::optional<int> quadrature = std::nullopt) {
    const DisplacementSpace& space = solution.space();
    const bool two_d = space.dimension() == 2;
    double num = 0.0, den = 0.0;
    AssemblyOptions opt;
    opt.quadrature_points = quadrature;
    for (int e = 0; e < static_cast<int>(space.mesh().element_count()); ++e) {
        const QuadratureRule rule = gauss_legendre(element_quadrature_points(space, e, opt));
        const auto& g = space.element(e).geometry;
        std::vector<double> xs, ys;
        for (double t : rule.points) xs.push_back(g.x0 + 0.5 * (t + 1.0) * g.hx);
        if (two_d) {
            for (double t : rule.points) ys.push_back(g.y0 + 0.5 * (t + 1.0) * g.hy);
        } else {
            ys.push_back(0.0);
        }
        const detail::BasisTable table = detail::tabulate(space, e, rule, 0);
        const auto dofs = space.element_dofs(e);
        Eigen::VectorXcd c(static_cast<Eigen::Index>(dofs.size()));
        for (std::size_t i = 0; i < dofs.size(); ++i) c[static_cast<Eigen::Index>(i)] = solution.coefficients()[static_cast<Eigen::Index>(dofs[i])];
        const Eigen::VectorXcd wh = table.value * c;
        const Eigen::MatrixXcd ref = reference(xs, ys);
        const std::size_t nq1 = rule.size();
        for (std::size_t j = 0; j < ys.size(); ++j)
            for (std::size_t i = 0; i < nq1; ++i) {
                const auto q = static_cast<Eigen::Index>(j * nq1 + i);
                const Complex r = ref(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                num += table.weights[q] * std::norm(wh[q] - r);
                den += table.weights[q] * std::norm(r);
            }
    }
    if (!(den > 0.0)) throw std::invalid_argument("l2_error: reference has zero norm");
    return 100.0 * std::sqrt(num / den);
}

inline GridFunction as_grid_function(const FieldSolution& f) {
    return [f](std::span<const double> xs, std::span<const double> ys) { return f.evaluate_grid(xs, ys); };
}

/// kappa = h / lambda_b (NaN unless the mesh is uniform with square
/// elements) and tau = lambda_b sqrt(N_dof / S) (1D: lambda_b N_dof / L).
struct DiscretizationMetrics {
    double kappa = std::numeric_limits<double>::quiet_NaN();
    double tau = std::numeric_limits<double>::quiet_NaN();
};

inline DiscretizationMetrics discretization_metrics(const Mesh& mesh, double k, std::size_t displacement_dofs) {
    const double lambda = 2.0 * std::numbers::pi / k;
    DiscretizationMetrics m;
    if (auto h = mesh.uniform_size()) m.kappa = *h / lambda;
    const double n = static_cast<double>(displacement_dofs);
    m.tau = mesh.dimension() == 1 ? lambda * n / mesh.area() : lambda * std::sqrt(n / mesh.area());
    return m;
}

/// Everything needed to set up one forced-response computation.
struct Problem {
    PlateMaterial material = PlateMaterial::steel();
    std::shared_ptr<const Mesh> mesh;
    Method method = Method::pufem;
    EnrichmentPlan plan;
    std::vector<LoadSpec> loads;
};

struct SolveSettings {
    SolverOptions solver;
    AssemblyOptions assembly;
    /// Classical systems with more displacement DOFs than this use the sparse path.
    std::size_t sparse_threshold = 4000;
};

struct SolvedField {
    FieldSolution field;
    SolveReport report;
    std::size_t displacement_dofs = 0;
    std::size_t multiplier_dofs = 0;
    double assembly_seconds = 0.0;
    double solve_seconds = 0.0;
    std::vector<std::string> diagnostics;
};

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline SolvedField solve_problem(const Problem& problem, Frequency f, const SolveSettings& settings = {}) {
    if (!problem.mesh) throw std::invalid_argument("solve_problem: missing mesh");
    const double k = flexural_wavenumber(problem.material, f);
    auto space = std::make_shared<const DisplacementSpace>(problem.mesh, problem.method, problem.plan, k);
    const auto t0 = std::chrono::steady_clock::now();
    if (problem.method == Method::classical && space->dof_count() > settings.sparse_threshold) {
        const SparseSystem sys = assemble_sparse(*space, problem.material, f, problem.loads, settings.assembly);
        const double ta = seconds_since(t0);
        const auto t1 = std::chrono::steady_clock::now();
        SolveReport rep = solve_sparse(sys);
        const double ts = seconds_since(t1);
        Eigen::VectorXcd coeff = rep.singular ? Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(space->dof_count()))
                                              : rep.coefficients;
        const std::size_t constrained = space->classical_constrained_dofs().size();
        return {FieldSolution(space, std::move(coeff)), std::move(rep), space->dof_count(), constrained, ta, ts, {}};
    }
    const AssembledSystem sys = assemble(*space, problem.material, f, problem.loads, settings.assembly);
    const double ta = seconds_since(t0);
    const auto t1 = std::chrono::steady_clock::now();
    SolveReport rep = solve(sys, settings.solver);
    const double ts = seconds_since(t1);
    Eigen::VectorXcd coeff =
        rep.singular ? Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(space->dof_count())) : rep.coefficients;
    return {FieldSolution(space, std::move(coeff)), std::move(rep), sys.displacement_dofs(), sys.multiplier_dofs(),
            ta, ts, sys.diagnostics};
}

/// Domain extents of a rectangular (or 1D) mesh; nullopt if the mesh does not
/// fill its bounding box.
inline std::optional<std::array<double, 2>> rectangle_extent(const Mesh& mesh) {
    const double lx = mesh.x_lines().back() - mesh.x_lines().front();
    if (mesh.dimension() == 1) return std::array<double, 2>{lx, 1.0};
    const double ly = mesh.y_lines().back() - mesh.y_lines().front();
    if (std::abs(mesh.area() - lx * ly) > 1e-12 * lx * ly) return std::nullopt;
    if (mesh.x_lines().front() != 0.0 || mesh.y_lines().front() != 0.0) return std::nullopt;
    return std::array<double, 2>{lx, ly};
}

/// Modal-superposition reference for a simply supported strip or rectangle.
inline GridFunction modal_reference(const Problem& problem, Frequency f, ModalOptions opt = {}) {
    const Mesh& mesh = *problem.mesh;
    const auto extent = rectangle_extent(mesh);
    if (!extent) throw std::invalid_argument("modal_reference: domain is not a rectangle");
    if (mesh.dimension() == 2)
        for (const auto& e : mesh.boundary_edges())
            if (e.condition != EdgeCondition::simply_supported)
                throw std::invalid_argument("modal_reference: all edges must be simply supported");
    if (mesh.dimension() == 1 && mesh.constrained_points().size() != 2)
        throw std::invalid_argument("modal_reference: both strip ends must be simply supported");
    if (problem.loads.empty()) throw std::invalid_argument("modal_reference: no load");
    if (mesh.dimension() == 1) {
        std::vector<StripModalReference> refs;
        for (const auto& l : problem.loads) refs.emplace_back(problem.material, (*extent)[0], l, f, opt);
        return [refs](std::span<const double> xs, std::span<const double> ys) {
            Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(ys.size()));
            for (const auto& r : refs) out += r.evaluate_grid(xs, ys);
            return out;
        };
    }
    std::vector<PlateModalReference> refs;
    for (const auto& l : problem.loads) refs.emplace_back(problem.material, (*extent)[0], (*extent)[1], l, f, opt);
    return [refs](std::span<const double> xs, std::span<const double> ys) {
        Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(ys.size()));
        for (const auto& r : refs) out += r.evaluate_grid(xs, ys);
        return out;
    };
}

/// One line of a study table.
struct StudyRow {
    std::string label;
    std::string method;
    double frequency_hz = 0.0;
    double kh = 0.0;
    int elements = 0;
    int p = 0;
    int p_internal = 0;
    int q = 0;
    std::size_t dofs = 0;
    std::size_t multipliers = 0;
    double error_percent = std::numeric_limits<double>::quiet_NaN();
    double kappa = std::numeric_limits<double>::quiet_NaN();
    double tau = std::numeric_limits<double>::quiet_NaN();
    double condition = std::numeric_limits<double>::quiet_NaN();
    double residual = std::numeric_limits<double>::quiet_NaN();
    bool ill_conditioned = false;
    bool singular = false;
    double wall_seconds = 0.0;
};

struct StudyResult {
    std::vector<StudyRow> rows;
    /// Fitted convergence order for h-refinement.
    std::optional<double> slope;
    std::vector<std::string> notes;
};

/// Largest element dimension (the h in kh).
inline double characteristic_size(const Mesh& mesh) {
    if (auto h = mesh.uniform_size()) return *h;
    double h = 0.0;
    for (const auto& e : mesh.elements())
        h = std::max(h, mesh.dimension() == 1 ? e.geometry.hx : std::max(e.geometry.hx, e.geometry.hy));
    return h;
}

inline StudyRow describe(const Problem& problem, Frequency f, const SolvedField& s, std::string label) {
    StudyRow row;
    row.label = std::move(label);
    row.method = to_string(problem.method);
    row.frequency_hz = f.hz();
    const double k = flexural_wavenumber(problem.material, f);
    row.kh = k * characteristic_size(*problem.mesh);
    row.elements = static_cast<int>(problem.mesh->element_count());
    if (problem.method == Method::pufem) {
        row.p = problem.plan.polynomial_order;
        row.p_internal = problem.plan.order_for(false);
        row.q = problem.plan.wave_count;
    } else {
        row.p = row.p_internal = 3;
    }
    row.dofs = s.displacement_dofs;
    row.multipliers = s.multiplier_dofs;
    const auto m = discretization_metrics(*problem.mesh, k, s.displacement_dofs);
    row.kappa = m.kappa;
    row.tau = m.tau;
    row.condition = s.report.condition_estimate;
    row.residual = s.report.residual;
    row.ill_conditioned = s.report.ill_conditioned;
    row.singular = s.report.singular;
    row.wall_seconds = s.assembly_seconds + s.solve_seconds;
    return row;
}

/// Uniform grid [start, stop] with `count` points, dropping frequencies within
/// +-window (relative) of a natural frequency of the simply supported
/// reference (strip when ly <= 0).
inline std::vector<double> sweep_frequencies(double start_hz, double stop_hz, int count, const PlateMaterial& m,
                                             double lx, double ly, double window = 0.01) {
    if (count < 1 || !(start_hz > 0.0) || stop_hz < start_hz)
        throw std::invalid_argument("sweep_frequencies: need count >= 1 and 0 < start <= stop");
    std::vector<double> naturals;
    const double top = 2.0 * std::numbers::pi * stop_hz * (1.0 + window);
    for (int a = 1;; ++a) {
        const double w1 = ly > 0.0 ? plate_natural_frequency(m, lx, ly, a, 1) : strip_natural_frequency(m, lx, a);
        if (w1 > top) break;
        if (ly <= 0.0) {
            naturals.push_back(w1);
            continue;
        }
        for (int b = 1;; ++b) {
            const double w = plate_natural_frequency(m, lx, ly, a, b);
            if (w > top) break;
            naturals.push_back(w);
        }
    }
    std::vector<double> out;
    for (int i = 0; i < count; ++i) {
        const double f = count == 1 ? start_hz : start_hz + (stop_hz - start_hz) * i / (count - 1);
        const double w = 2.0 * std::numbers::pi * f;
        bool near = false;
        for (double wn : naturals) near = near || std::abs(w - wn) <= window * wn;
        if (!near) out.push_back(f);
    }
    return out;
}

struct FrfOptions {
    bool with_reference = true;
    ModalOptions modal;
    SolveSettings settings;
    int threads = 1;
};

struct FrfSample {
    double frequency_hz = 0.0;
    std::size_t point = 0;
    double x = 0.0;
    double y = 0.0;
    Complex w;
    std::optional<Complex> reference;
};

struct FrfResult {
    StudyResult study;
    std::vector<FrfSample> samples;
};

/// Per-frequency assemble + solve, sampling W at the observation points.
inline FrfResult frf_sweep(const Problem& problem, std::span<const double> frequencies_hz,
                           const std::vector<std::array<double, 2>>& points, const FrfOptions& opt = {}) {
    if (frequencies_hz.empty()) throw std::invalid_argument("frf_sweep: empty frequency list");
    std::vector<StudyRow> rows(frequencies_hz.size());
    std::vector<std::vector<FrfSample>> samples(frequencies_hz.size());
    parallel_for(frequencies_hz.size(), opt.threads, [&](std::size_t i) {
        const Frequency f = Frequency::from_hz(frequencies_hz[i]);
        const SolvedField s = solve_problem(problem, f, opt.settings);
        rows[i] = describe(problem, f, s, "frf");
        std::optional<GridFunction> ref;
        if (opt.with_reference) {
            ref = modal_reference(problem, f, opt.modal);
            if (!s.report.singular) rows[i].error_percent = l2_error(s.field, *ref);
        }
        for (std::size_t p = 0; p < points.size(); ++p) {
            FrfSample smp{frequencies_hz[i], p, points[p][0], points[p][1], s.field(points[p][0], points[p][1]), {}};
            if (ref) {
                const double xs[1] = {points[p][0]}, ys[1] = {points[p][1]};
                smp.reference = (*ref)(xs, ys)(0, 0);
            }
            samples[i].push_back(smp);
        }
    });
    FrfResult out;
    out.study.rows = std::move(rows);
    for (auto& v : samples) out.samples.insert(out.samples.end(), v.begin(), v.end());
    return out;
}

/// Least-squares slope of log(error) against log(h) over the last 3-4 ladder
/// points. A leading point is dropped while the fit residual exceeds 0.1 in
/// natural log (pre-asymptotic behaviour).
inline std::optional<double> fit_convergence_slope(std::span<const double> h, std::span<const double> error) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < h.size() && i < error.size(); ++i)
        if (h[i] > 0.0 && error[i] > 0.0 && std::isfinite(error[i])) {
            lx.push_back(std::log(h[i]));
            ly.push_back(std::log(error[i]));
        }
    if (lx.size() < 2) return std::nullopt;
    const auto fit = [&](std::size_t first) {
        const std::size_t n = lx.size() - first;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = first; i < lx.size(); ++i) {
            sx += lx[i];
            sy += ly[i];
            sxx += lx[i] * lx[i];
            sxy += lx[i] * ly[i];
        }
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        const double icpt = (sy - slope * sx) / n;
        double worst = 0.0;
        for (std::size_t i = first; i < lx.size(); ++i) worst = std::max(worst, std::abs(ly[i] - icpt - slope * lx[i]));
        return std::pair{slope, worst};
    };
    std::size_t first = lx.size() > 4 ? lx.size() - 4 : 0;
    auto [slope, worst] = fit(first);
    while (worst > 0.1 && lx.size() - first > 3) std::tie(slope, worst) = fit(++first);
    return slope;
}

enum class RefinementMode { h, q, p };

inline std::string to_string(RefinementMode m) { return m == RefinementMode::h ? "h" : m == RefinementMode::q ? "q" : "p"; }

inline RefinementMode refinement_mode_from_string(const std::string& s) {
    if (s == "h") return RefinementMode::h;
    if (s == "q") return RefinementMode::q;
    if (s == "p") return RefinementMode::p;
    throw std::invalid_argument("unknown refinement mode '" + s + "'");
}

struct ConvergenceConfig {
    Problem base;
    RefinementMode mode = RefinementMode::h;
    /// h: elements per side; q: wave counts; p: polynomial orders.
    std::vector<int> ladder;
    double frequency_hz = 1000.0;
    ModalOptions modal;
    SolveSettings settings;
    int threads = 1;
};

/// Problem at one ladder step.
inline Problem ladder_problem(const ConvergenceConfig& cfg, int value) {
    Problem p = cfg.base;
    switch (cfg.mode) {
        case RefinementMode::h: {
            const auto extent = rectangle_extent(*cfg.base.mesh);
            if (!extent) throw std::invalid_argument("convergence_study: h-refinement needs a rectangular domain");
            p.mesh = std::make_shared<const Mesh>(
                cfg.base.mesh->dimension() == 1
                    ? interval_mesh((*extent)[0], value, cfg.base.mesh->boundary())
                    : uniform_rect_mesh((*extent)[0], (*extent)[1], value, value, cfg.base.mesh->boundary()));
            break;
        }
        case RefinementMode::q: p.plan.wave_count = value; break;
        case RefinementMode::p: p.plan.polynomial_order = value; break;
    }
    return p;
}

inline StudyResult convergence_study(const ConvergenceConfig& cfg) {
    if (cfg.ladder.empty()) throw std::invalid_argument("convergence_study: empty ladder");
    const Frequency f = Frequency::from_hz(cfg.frequency_hz);
    StudyResult out;
    out.rows.resize(cfg.ladder.size());
    parallel_for(cfg.ladder.size(), cfg.threads, [&](std::size_t i) {
        const Problem p = ladder_problem(cfg, cfg.ladder[i]);
        const SolvedField s = solve_problem(p, f, cfg.settings);
        StudyRow row = describe(p, f, s, to_string(cfg.mode));
        if (!s.report.singular) row.error_percent = l2_error(s.field, modal_reference(p, f, cfg.modal));
        out.rows[i] = row;
    });
    if (cfg.mode == RefinementMode::h) {
        std::vector<double> hs, es;
        for (std::size_t i = 0; i < out.rows.size(); ++i) {
            hs.push_back(characteristic_size(*ladder_problem(cfg, cfg.ladder[i]).mesh));
            es.push_back(out.rows[i].error_percent);
        }
        out.slope = fit_convergence_slope(hs, es);
    }
    return out;
}

/// One (kh, p, q) cell of a kappa-tau-error table; p_internal < p gives the
/// adaptive plan with reduced interior polynomials.
struct EfficiencyCell {
    double kh = 5.0;
    int p = 3;
    std::optional<int> p_internal;
    int q = 15;
};

struct EfficiencyConfig {
    PlateMaterial material = PlateMaterial::steel();
    double length = 0.5;
    int elements_per_side = 4;
    LoadSpec load = LoadSpec::uniform(1.0);
    std::vector<EfficiencyCell> cells;
    ModalOptions modal;
    SolveSettings settings;
    int threads = 1;
};

/// Square simply supported plate, uniform square mesh; each cell sets the
/// frequency from kh = k h.
inline StudyResult efficiency_table(const EfficiencyConfig& cfg) {
    if (cfg.cells.empty()) throw std::invalid_argument("efficiency_table: no cells");
    auto mesh = std::make_shared<const Mesh>(
        uniform_rect_mesh(cfg.length, cfg.length, cfg.elements_per_side, cfg.elements_per_side));
    const double h = cfg.length / cfg.elements_per_side;
    StudyResult out;
    out.rows.resize(cfg.cells.size());
    parallel_for(cfg.cells.size(), cfg.threads, [&](std::size_t i) {
        const auto& c = cfg.cells[i];
        Problem p{cfg.material, mesh, Method::pufem, {}, {cfg.load}};
        p.plan.polynomial_order = c.p;
        p.plan.internal_order = c.p_internal;
        p.plan.wave_count = c.q;
        const Frequency f = frequency_for_wavenumber(cfg.material, c.kh / h);
        const SolvedField s = solve_problem(p, f, cfg.settings);
        StudyRow row = describe(p, f, s, "table");
        row.kh = c.kh;
        if (!s.report.singular) row.error_percent = l2_error(s.field, modal_reference(p, f, cfg.modal));
        out.rows[i] = row;
    });
    return out;
}

/// kh / p / q grid of the square-plate efficiency study (kh = 5..20, p = 3, 5).
inline std::vector<EfficiencyCell> default_efficiency_cells() {
    std::vector<EfficiencyCell> cells;
    const std::array<std::pair<double, std::array<int, 3>>, 4> grid{
        {{5.0, {15, 20, 25}}, {10.0, {25, 30, 35}}, {15.0, {30, 40, 50}}, {20.0, {30, 45, 60}}}};
    for (int p : {3, 5})
        for (const auto& [kh, qs] : grid)
            for (int q : qs) cells.push_back({kh, p, std::nullopt, q});
    return cells;
}

struct LShapeConfig {
    PlateMaterial material = PlateMaterial::steel();
    double length = 0.5;
    int pufem_per_side = 4;
    double kh = 20.0;
    EnrichmentPlan plan = [] {
        EnrichmentPlan p;
        p.polynomial_order = 7;
        p.wave_count = 60;
        return p;
    }();
    /// Classical CR elements per side along the reference ladder.
    std::vector<int> fem_ladder{128, 192, 256};
    /// Required change (percent) between the last two ladder meshes.
    double self_convergence_tolerance = 0.2;
    LoadSpec load = LoadSpec::uniform(1.0);
    SolveSettings settings;
    bool require_converged = true;
};

struct LShapeResult {
    std::size_t pufem_dofs = 0;
    StudyRow pufem;
    /// CR ladder; error_percent holds the change to the next finer mesh
    /// (NaN on the finest).
    std::vector<StudyRow> fem;
    /// Difference of each ladder mesh to the finest (percent).
    std::vector<double> fem_to_finest;
    double difference_percent = std::numeric_limits<double>::quiet_NaN();
    double last_change_percent = std::numeric_limits<double>::quiet_NaN();
    bool fem_converged = false;
};

/// PUFEM on the L-shaped plate against a self-converged classical CR ladder.
/// Differences are relative L2 norms evaluated on the PUFEM quadrature with
/// the finer field as reference.
inline LShapeResult lshape_crossval(const LShapeConfig& cfg) {
    if (cfg.fem_ladder.size() < 2) throw std::invalid_argument("lshape_crossval: need at least two ladder meshes");
    const double h = cfg.length / cfg.pufem_per_side;
    const Frequency f = frequency_for_wavenumber(cfg.material, cfg.kh / h);
    Problem pu{cfg.material, std::make_shared<const Mesh>(lshape_mesh(cfg.length, cfg.pufem_per_side)), Method::pufem,
               cfg.plan, {cfg.load}};
    const SolvedField pu_sol = solve_problem(pu, f, cfg.settings);
    LShapeResult out;
    out.pufem = describe(pu, f, pu_sol, "lshape-pufem");
    out.pufem.kh = cfg.kh;
    out.pufem_dofs = pu_sol.displacement_dofs;

    std::vector<FieldSolution> fem;
    for (int m : cfg.fem_ladder) {
        Problem cr{cfg.material, std::make_shared<const Mesh>(lshape_mesh(cfg.length, m)), Method::classical, {}, {cfg.load}};
        SolvedField s = solve_problem(cr, f, cfg.settings);
        out.fem.push_back(describe(cr, f, s, "lshape-cr"));
        fem.push_back(std::move(s.field));
    }
    // The PUFEM quadrature is the common measuring stick; the FEM field at
    // index i is compared with index i+1.
    const auto diff = [&](const FieldSolution& a, const FieldSolution& ref) {
        const GridFunction r = as_grid_function(ref);
        const GridFunction av = as_grid_function(a);
        double num = 0.0, den = 0.0;
        const DisplacementSpace& space = pu_sol.field.space();
        for (int e = 0; e < static_cast<int>(space.mesh().element_count()); ++e) {
            const QuadratureRule rule = gauss_legendre(element_quadrature_points(space, e, cfg.settings.assembly));
            const auto& g = space.element(e).geometry;
            std::vector<double> xs, ys;
            for (double t : rule.points) xs.push_back(g.x0 + 0.5 * (t + 1.0) * g.hx);
            for (double t : rule.points) ys.push_back(g.y0 + 0.5 * (t + 1.0) * g.hy);
            const Eigen::MatrixXcd rv = r(xs, ys), avv = av(xs, ys);
            for (std::size_t j = 0; j < ys.size(); ++j)
                for (std::size_t i = 0; i < xs.size(); ++i) {
                    const double w = rule.weights[i] * rule.weights[j];
                    const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
                    num += w * std::norm(avv(ii, jj) - rv(ii, jj));
                    den += w * std::norm(rv(ii, jj));
                }
        }
        if (!(den > 0.0)) throw std::runtime_error("lshape_crossval: reference field vanishes");
        return 100.0 * std::sqrt(num / den);
    };
    for (std::size_t i = 0; i + 1 < fem.size(); ++i) out.fem[i].error_percent = diff(fem[i], fem[i + 1]);
    for (const auto& f_i : fem) out.fem_to_finest.push_back(diff(f_i, fem.back()));
    out.last_change_percent = out.fem[fem.size() - 2].error_percent;
    out.fem_converged = out.last_change_percent < cfg.self_convergence_tolerance;
    out.difference_percent = l2_error(pu_sol.field, as_grid_function(fem.back()));
    out.pufem.error_percent = out.difference_percent;
    if (cfg.require_converged && !out.fem_converged)
        throw std::runtime_error("lshape_crossval: classical reference ladder not self-converged (last change " +
                                 std::to_string(out.last_change_percent) + "%)");
    return out;
}

}  // namespace pufem
