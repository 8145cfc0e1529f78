// Command-line driver: reads a JSON experiment description, runs one study and
// writes CSV tables plus a run.json provenance record.

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <thread>

#include "pufem/config.hpp"
#include "pufem/io.hpp"
#include "pufem/pufem.hpp"

namespace fs = std::filesystem;
using namespace pufem;

namespace {

struct RunContext {
    ExperimentConfig config;
    fs::path out;
    int threads = 1;
    unsigned seed = 0;
    bool verbose = false;
    Json record;
};

void log(const RunContext& ctx, const std::string& msg) {
    if (ctx.verbose) std::cerr << "[pufem] " << msg << "\n";
}

Json environment(const RunContext& ctx) {
    Json env;
#if defined(__clang__)
    env["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
    env["compiler"] = std::string("gcc ") + __VERSION__;
#else
    env["compiler"] = "unknown";
#endif
    env["cxx_standard"] = static_cast<long>(__cplusplus);
    env["hardware_threads"] = std::thread::hardware_concurrency();
    env["threads"] = ctx.threads;
    env["seed"] = ctx.seed;
    env["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                           std::to_string(EIGEN_MINOR_VERSION);
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    env["started_utc"] = stamp;
    return env;
}

Json warnings_of(const StudyResult& r) {
    Json w = Json::array();
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        if (r.rows[i].ill_conditioned)
            w.push_back("row " + std::to_string(i) + ": condition estimate " + format_number(r.rows[i].condition) +
                        " exceeds 1e16");
        if (r.rows[i].singular) w.push_back("row " + std::to_string(i) + ": singular system");
    }
    for (const auto& n : r.notes) w.push_back(n);
    return w;
}

void write_study(RunContext& ctx, const StudyResult& r) {
    study_table(r).write(ctx.out / "study.csv");
    timing_table(r).write(ctx.out / "timings.csv");
    ctx.record["warnings"] = warnings_of(r);
    double total = 0.0;
    Json per_row = Json::array();
    for (const auto& row : r.rows) {
        total += row.wall_seconds;
        per_row.push_back(row.wall_seconds);
    }
    ctx.record["timings"]["rows_s"] = per_row;
    ctx.record["timings"]["rows_total_s"] = total;
    for (const auto& w : ctx.record["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
}

/// Largest relative jump of W, W_x, W_y across random interior interfaces.
double continuity_check(const FieldSolution& field, unsigned seed, int samples) {
    const Mesh& mesh = field.space().mesh();
    if (mesh.dimension() != 2 || samples == 0) return 0.0;
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double scale = 0.0;
    for (const auto& n : mesh.nodes()) scale = std::max(scale, std::abs(field(n.x, n.y)));
    double worst = 0.0;
    const auto& xs = mesh.x_lines();
    const auto& ys = mesh.y_lines();
    for (int s = 0; s < samples; ++s) {
        const bool vertical = unit(rng) < 0.5;
        const auto& lines = vertical ? xs : ys;
        const auto& other = vertical ? ys : xs;
        if (lines.size() < 3) continue;
        const auto i = 1 + static_cast<std::size_t>(unit(rng) * static_cast<double>(lines.size() - 2));
        const double c = lines[std::min(i, lines.size() - 2)];
        const double t = other.front() + unit(rng) * (other.back() - other.front());
        const double x = vertical ? c : t, y = vertical ? t : c;
        const double eps = 1e-12 * (other.back() - other.front());
        const double xa = vertical ? x - eps : x, ya = vertical ? y : y - eps;
        const double xb = vertical ? x + eps : x, yb = vertical ? y : y + eps;
        const int ea = mesh.locate(xa, ya), eb = mesh.locate(xb, yb);
        if (ea < 0 || eb < 0 || ea == eb) continue;
        const auto side = [&](int e) {
            const auto& g = field.space().element(e).geometry;
            LocalPoint lp = to_local(g, x, y);
            lp.xi = std::clamp(lp.xi, -1.0, 1.0);
            lp.eta = std::clamp(lp.eta, -1.0, 1.0);
            return field.evaluate_in_element(e, lp, 1);
        };
        const auto a = side(ea), b = side(eb);
        const double k = field.space().wavenumber();
        const double dscale = scale * std::max(k, 1.0);
        worst = std::max({worst, std::abs(a.value - b.value) / scale, std::abs(a.dx - b.dx) / dscale,
                          std::abs(a.dy - b.dy) / dscale});
    }
    return worst;
}

int run_frf(RunContext& ctx) {
    const Problem problem = ctx.config.problem();
    FrfOptions opt;
    opt.with_reference = ctx.config.reference && ctx.config.shape != Shape::lshape;
    opt.modal = ctx.config.modal;
    opt.settings = ctx.config.settings();
    opt.threads = ctx.threads;
    const auto freqs = ctx.config.frequency_list();
    if (freqs.empty()) throw ConfigError("frequencies: no frequency left after excluding resonances");
    log(ctx, "frf: " + std::to_string(freqs.size()) + " frequencies");
    const FrfResult r = frf_sweep(problem, freqs, ctx.config.observation(), opt);
    frf_table(r).write(ctx.out / "frf.csv");
    write_study(ctx, r.study);
    ctx.record["results"]["frequencies"] = freqs.size();
    return 0;
}

int run_field(RunContext& ctx) {
    const Problem problem = ctx.config.problem();
    const Frequency f = Frequency::from_hz(ctx.config.field.frequency_hz);
    const SolvedField s = solve_problem(problem, f, ctx.config.settings());
    StudyResult study;
    study.rows.push_back(describe(problem, f, s, "field"));
    std::optional<GridFunction> ref;
    if (ctx.config.reference && ctx.config.shape != Shape::lshape) {
        ref = modal_reference(problem, f, ctx.config.modal);
        if (!s.report.singular) study.rows[0].error_percent = l2_error(s.field, *ref);
    }
    const Mesh& mesh = *problem.mesh;
    const double x0 = mesh.x_lines().front(), x1 = mesh.x_lines().back();
    const double y0 = mesh.y_lines().front(), y1 = mesh.y_lines().back();
    const int nx = ctx.config.field.nx;
    const int ny = mesh.dimension() == 1 ? 1 : ctx.config.field.ny;
    CsvTable t({"x[m]", "y[m]", "re_w[m]", "im_w[m]", "abs_w[m]", "re_w_ref[m]", "im_w_ref[m]"});
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double x = x0 + (x1 - x0) * i / (nx - 1);
            const double y = ny == 1 ? 0.0 : y0 + (y1 - y0) * j / (ny - 1);
            if (mesh.locate(x, y) < 0) continue;
            const Complex w = s.field(x, y);
            Complex r(std::nan(""), std::nan(""));
            if (ref) {
                const double xs[1] = {x}, ys[1] = {y};
                r = (*ref)(xs, ys)(0, 0);
            }
            t.add_row({format_number(x), format_number(y), format_number(w.real()), format_number(w.imag()),
                       format_number(std::abs(w)), format_number(r.real()), format_number(r.imag())});
        }
    t.write(ctx.out / "field.csv");
    write_study(ctx, study);
    ctx.record["results"]["continuity_max_relative_jump"] =
        continuity_check(s.field, ctx.seed, ctx.config.field.continuity_samples);
    ctx.record["results"]["continuity_samples"] = ctx.config.field.continuity_samples;
    ctx.record["timings"]["assembly_s"] = s.assembly_seconds;
    ctx.record["timings"]["solve_s"] = s.solve_seconds;
    return 0;
}

int run_converge(RunContext& ctx) {
    ConvergenceConfig cfg;
    cfg.base = ctx.config.problem();
    cfg.mode = ctx.config.converge.mode;
    cfg.ladder = ctx.config.converge.ladder;
    cfg.frequency_hz = ctx.config.converge.frequency_hz;
    cfg.modal = ctx.config.modal;
    cfg.settings = ctx.config.settings();
    cfg.threads = ctx.threads;
    const StudyResult r = convergence_study(cfg);
    write_study(ctx, r);
    ctx.record["results"]["slope"] = r.slope ? Json(*r.slope) : Json(nullptr);
    if (r.slope) std::cout << "fitted slope: " << format_number(*r.slope) << "\n";
    return 0;
}

int run_table(RunContext& ctx) {
    EfficiencyConfig cfg;
    cfg.material = ctx.config.material;
    cfg.length = ctx.config.lx;
    cfg.elements_per_side = ctx.config.table.elements_per_side;
    cfg.cells = ctx.config.table.cells;
    cfg.modal = ctx.config.modal;
    cfg.settings = ctx.config.settings();
    cfg.threads = ctx.threads;
    if (!ctx.config.loads.empty()) cfg.load = ctx.config.loads.front();
    write_study(ctx, efficiency_table(cfg));
    return 0;
}

int run_lshape(RunContext& ctx) {
    const LShapeResult r = lshape_crossval(ctx.config.lshape);
    StudyResult study;
    study.rows.push_back(r.pufem);
    for (const auto& row : r.fem) study.rows.push_back(row);
    write_study(ctx, study);
    ctx.record["results"]["difference_percent"] = r.difference_percent;
    ctx.record["results"]["fem_last_change_percent"] = r.last_change_percent;
    ctx.record["results"]["fem_converged"] = r.fem_converged;
    ctx.record["results"]["fem_to_finest_percent"] = r.fem_to_finest;
    std::cout << "relative difference PUFEM vs CR: " << format_number(r.difference_percent) << " %\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Thin-plate bending PUFEM studies"};
    app.require_subcommand(1, 1);
    RunContext ctx;
    std::string config_path;
    std::string out_dir = "out";
    app.add_option("--config", config_path, "JSON experiment description (defaults apply when omitted)");
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();
    app.add_option("--threads", ctx.threads, "Worker threads for independent study cells")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--seed", ctx.seed, "Seed for random evaluation points in property checks")->capture_default_str();
    app.add_flag("--verbose", ctx.verbose, "Progress messages on stderr");

    const std::vector<std::pair<std::string, std::string>> commands{
        {"frf", "Frequency sweep at observation points"},
        {"field", "Displacement field on a sampling grid"},
        {"converge", "h-, q- or p-convergence ladder"},
        {"table", "kappa / tau / error efficiency table"},
        {"lshape", "L-shaped plate against a classical reference ladder"}};
    for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        ctx.config = config_path.empty() ? config_from_json(Json::object()) : load_config(config_path);
        ctx.config.validate(command);
        ctx.out = out_dir;
        fs::create_directories(ctx.out);
        ctx.record["command"] = command;
        ctx.record["config_path"] = config_path;
        ctx.record["config"] = config_to_json(ctx.config);
        ctx.record["environment"] = environment(ctx);
        log(ctx, "running " + command);
        const auto t0 = std::chrono::steady_clock::now();
        int status = 0;
        if (command == "frf") status = run_frf(ctx);
        else if (command == "field") status = run_field(ctx);
        else if (command == "converge") status = run_converge(ctx);
        else if (command == "table") status = run_table(ctx);
        else status = run_lshape(ctx);
        ctx.record["timings"]["total_s"] = seconds_since(t0);
        std::ofstream(ctx.out / "run.json") << ctx.record.dump(2) << "\n";
        log(ctx, "wrote " + ctx.out.string());
        return status;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
