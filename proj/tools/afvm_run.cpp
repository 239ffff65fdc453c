// Runs one adaptive or uniform experiment and writes records.csv and summary.json.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "afvm/adaptivity.hpp"
#include "afvm/errors.hpp"
#include "afvm/problems.hpp"
#include "afvm/report.hpp"
#include "afvm/summary.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;

struct RunConfig {
    std::string problem = "square-smooth";
    double theta = 0.5;
    double theta_prime = 0.5;
    std::string mode = "adaptive";
    long long max_elements = 3'000'000;
    int levels = 0;
    double eta_tol = 0.0;
    std::filesystem::path out = "out";
    bool fem_compare = true;
    bool fem_compare_set = false;
    bool matrix_dump = false;
    bool skip_suites = false;
    bool quiet = false;
};

afvm::ProblemSpec load_problem(const std::string& selector) {
    if (selector == "square-smooth" || selector == "lshape-singular") return afvm::builtin_problem(selector);
    if (std::filesystem::exists(selector)) return afvm::problem_from_json(std::filesystem::path(selector));
    throw afvm::UnknownBuiltin("unknown problem '" + selector + "' (not a builtin name or an existing config file)");
}

void validate(const RunConfig& cfg) {
    if (!(cfg.theta > 0.0 && cfg.theta <= 1.0)) throw afvm::ValidationError("theta must lie in (0,1]");
    if (!(cfg.theta_prime > 0.0 && cfg.theta_prime <= cfg.theta))
        throw afvm::ValidationError("theta-prime must lie in (0,theta]");
    if (cfg.mode != "adaptive" && cfg.mode != "uniform") throw afvm::ValidationError("mode must be adaptive or uniform");
    if (cfg.max_elements < 1) throw afvm::ValidationError("max-elements must be positive");
    if (cfg.levels < 0) throw afvm::ValidationError("levels must be non-negative");
    if (!(cfg.eta_tol >= 0.0)) throw afvm::ValidationError("eta-tol must be non-negative");
}

void write_outputs(const RunConfig& cfg, const afvm::ProblemSpec& problem, const afvm::RunDescription& desc,
                   const afvm::AdaptiveRun& run) {
    afvm::write_records_csv(run.records, cfg.out / "records.csv");
    const auto checks = afvm::evaluate_run(problem, desc, run, !cfg.skip_suites);
    const nlohmann::json summary = afvm::build_summary(problem, desc, run, checks);
    std::ofstream out(cfg.out / "summary.json", std::ios::binary);
    if (!out) throw afvm::IoError("cannot write " + (cfg.out / "summary.json").string());
    out << summary.dump(2) << '\n';
    if (!cfg.quiet) {
        for (const auto& c : checks) {
            const char* status = !c.passed ? "n/a " : (*c.passed ? "PASS" : "FAIL");
            std::fprintf(stderr, "[%s] %s: %s\n", status, c.name.c_str(), c.detail.c_str());
        }
    }
}

} // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    CLI::App app{"Adaptive vertex-centered finite volume solver for -div(A grad u) = f"};
    app.add_option("--problem", cfg.problem, "builtin name (square-smooth, lshape-singular) or problem config JSON");
    app.add_option("--theta", cfg.theta, "Doerfler parameter for the estimator, in (0,1]");
    app.add_option("--theta-prime", cfg.theta_prime, "Doerfler parameter for the oscillations, in (0,theta]");
    app.add_option("--mode", cfg.mode, "adaptive or uniform");
    app.add_option("--max-elements", cfg.max_elements, "stop once a mesh has at least this many elements");
    app.add_option("--levels", cfg.levels, "number of levels to record (0: no limit)");
    app.add_option("--eta-tol", cfg.eta_tol, "stop once eta falls below this value");
    app.add_option("--out", cfg.out, "output directory");
    app.add_flag("--fem-compare,!--no-fem-compare", cfg.fem_compare,
                 "also solve the FEM system on every mesh (default when an exact solution exists)")
        ->each([&](const std::string&) { cfg.fem_compare_set = true; });
    app.add_flag("--matrix-dump", cfg.matrix_dump, "write every FVM matrix as `i j value` lines");
    app.add_flag("--skip-suites", cfg.skip_suites, "leave the mesh-independent property suites out of summary.json");
    app.add_flag("--quiet", cfg.quiet, "no progress output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    afvm::ProblemSpec problem;
    afvm::RunDescription desc;
    afvm::AdaptiveOptions options;
    try {
        validate(cfg);
        problem = load_problem(cfg.problem);
        std::filesystem::create_directories(cfg.out);
        if (!std::filesystem::is_directory(cfg.out))
            throw afvm::ValidationError("output path " + cfg.out.string() + " is not a directory");
        desc = {cfg.problem, cfg.mode == "adaptive" ? afvm::RunMode::Adaptive : afvm::RunMode::Uniform, cfg.theta,
                cfg.theta_prime};
        options.theta = cfg.theta;
        options.theta_prime = cfg.theta_prime;
        options.stop = {cfg.max_elements, cfg.levels, cfg.eta_tol};
        options.fem_compare = cfg.fem_compare_set ? cfg.fem_compare : problem.exact.has_value();
        if (cfg.matrix_dump) options.matrix_dump_dir = cfg.out;
        if (!cfg.quiet) {
            options.on_level = [](const afvm::AdaptiveRecord& r) {
                std::fprintf(stderr, "level %3d  elements %9lld  eta %.4e  osc %.4e  E %.4e\n", r.level, r.n_elements,
                             r.eta, r.osc, r.energy_error);
            };
        }
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const afvm::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }

    try {
        const afvm::AdaptiveRun run = desc.mode == afvm::RunMode::Adaptive
                                          ? afvm::run_adaptive(problem, options)
                                          : afvm::run_uniform(problem, cfg.levels > 0 ? cfg.levels : 1000, options);
        write_outputs(cfg, problem, desc, run);
    } catch (const afvm::SolverFailure& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        if (!e.partial().records.empty()) afvm::write_records_csv(e.partial().records, cfg.out / "records.csv");
        return kExitSolver;
    } catch (const afvm::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const afvm::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
