#include "afvm/adaptivity.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "afvm/discretization.hpp"
#include "afvm/dual_mesh.hpp"
#include "afvm/estimator.hpp"
#include "afvm/nvb.hpp"

namespace afvm {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void check_parameters(double theta, double theta_prime) {
    if (!(theta > 0.0 && theta <= 1.0)) throw ValidationError("theta must lie in (0,1]");
    if (!(theta_prime > 0.0 && theta_prime <= theta)) throw ValidationError("theta-prime must lie in (0,theta]");
}

// indices sorted by descending value, ties by ascending index
std::vector<ElementId> descending_order(std::span<const double> values) {
    std::vector<ElementId> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](ElementId a, ElementId b) {
        const double va = values[static_cast<std::size_t>(a)];
        const double vb = values[static_cast<std::size_t>(b)];
        return va != vb ? va > vb : a < b;
    });
    return order;
}

struct Level {
    AdaptiveRecord record;
    LevelMonitors monitors;
    EstimatorOutput estimate;
    std::vector<double> solution;
};

Level measure_level(const ProblemSpec& problem, const Triangulation& mesh, const AdaptiveOptions& options, int level,
                    const AdaptiveRun& so_far) {
    Level out;
    AdaptiveRecord& rec = out.record;
    rec.level = level;
    rec.n_elements = static_cast<long long>(mesh.num_elements());
    rec.n_nodes = static_cast<long long>(mesh.num_vertices());
    rec.sigma = shape_regularity(mesh);
    out.monitors.min_angle = min_angle(mesh);

    auto start = Clock::now();
    const DualMesh dual = build_dual(mesh);
    const AssembledSystem fvm = assemble_fvm(mesh, dual, problem);
    if (!options.matrix_dump_dir.empty())
        write_matrix_coordinates(fvm.matrix, options.matrix_dump_dir / ("fvm_matrix_level" + std::to_string(level) + ".txt"));
    NodalSolution solved;
    try {
        solved = solve_system(fvm);
    } catch (const Error& ex) {
        throw SolverFailure(level, ex.what(), so_far);
    }
    rec.wall_ms_solve = ms_since(start);
    rec.solve_iters = solved.report.iterations;
    out.monitors.solve_residual = solved.report.residual;
    out.monitors.solve_method = solved.report.method;
    out.solution = std::move(solved.values);

    start = Clock::now();
    out.estimate = compute_estimator(mesh, problem, out.solution);
    rec.eta = out.estimate.eta();
    rec.osc = out.estimate.osc();
    rec.wall_ms_estimate = ms_since(start);

    if (problem.exact) rec.energy_error = energy_error(mesh, problem, out.solution);
    if (options.fem_compare) {
        NodalSolution fem;
        try {
            fem = solve_system(assemble_fem(mesh, problem));
        } catch (const Error& ex) {
            throw SolverFailure(level, std::string("FEM comparison: ") + ex.what(), so_far);
        }
        out.monitors.fem_solve_residual = fem.report.residual;
        if (problem.exact) rec.fem_energy_error = energy_error(mesh, problem, fem.values);
        std::vector<double> diff(fem.values.size());
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = fem.values[i] - out.solution[i];
        out.monitors.galerkin_constant = galerkin_defect(mesh, problem, out.solution, fem.values, diff, rec.osc).constant;
        out.monitors.fem_osc = compute_estimator(mesh, problem, fem.values).osc();
    }
    return out;
}

bool stop_after(const AdaptiveRecord& rec, const StopCriteria& stop, std::size_t n_records) {
    if (rec.eta <= stop.eta_tol) return true;
    if (rec.n_elements >= stop.max_elements) return true;
    return stop.max_levels > 0 && n_records >= static_cast<std::size_t>(stop.max_levels);
}

} // namespace

ElementSet doerfler_mark(std::span<const double> indicators_sq, double theta) {
    if (!(theta > 0.0 && theta <= 1.0)) throw ValidationError("theta must lie in (0,1]");
    for (double v : indicators_sq)
        if (!(v >= 0.0)) throw ValidationError("indicators must be non-negative");
    const std::vector<ElementId> order = descending_order(indicators_sq);
    // the total is summed in the same order as the prefix so that θ = 1 is reached exactly
    double total = 0.0;
    for (ElementId e : order) total += indicators_sq[static_cast<std::size_t>(e)];
    ElementSet marked;
    if (total == 0.0) return marked;
    double sum = 0.0;
    for (ElementId e : order) {
        if (sum >= theta * total) break;
        sum += indicators_sq[static_cast<std::size_t>(e)];
        marked.push_back(e);
    }
    std::sort(marked.begin(), marked.end());
    return marked;
}

MarkResult two_stage_mark(std::span<const double> eta_sq, std::span<const double> osc_sq, double theta,
                          double theta_prime) {
    check_parameters(theta, theta_prime);
    if (eta_sq.size() != osc_sq.size()) throw DimensionMismatch("estimator and oscillation indicators differ in length");
    MarkResult r;
    r.marked_eta = doerfler_mark(eta_sq, theta);
    r.converged = r.marked_eta.empty();
    r.marked = r.marked_eta;

    double osc_total = 0.0;
    for (ElementId e : descending_order(osc_sq)) osc_total += osc_sq[static_cast<std::size_t>(e)];
    double osc_marked = 0.0;
    for (ElementId e : r.marked_eta) osc_marked += osc_sq[static_cast<std::size_t>(e)];
    if (osc_total > 0.0) {
        r.osc_fraction_eta = osc_marked / osc_total;
        if (osc_marked < theta_prime * osc_total) {
            std::vector<char> in_set(osc_sq.size(), 0);
            for (ElementId e : r.marked) in_set[static_cast<std::size_t>(e)] = 1;
            for (ElementId e : descending_order(osc_sq)) {
                if (osc_marked >= theta_prime * osc_total) break;
                if (in_set[static_cast<std::size_t>(e)]) continue;
                r.marked.push_back(e);
                osc_marked += osc_sq[static_cast<std::size_t>(e)];
            }
            std::sort(r.marked.begin(), r.marked.end());
        }
        r.osc_fraction = osc_marked / osc_total;
    }
    r.ratio_card = r.marked_eta.empty() ? 1.0
                                        : static_cast<double>(r.marked.size()) / static_cast<double>(r.marked_eta.size());
    return r;
}

AdaptiveRun run_adaptive(const ProblemSpec& problem, const AdaptiveOptions& options) {
    check_parameters(options.theta, options.theta_prime);
    AdaptiveRun run;
    Triangulation mesh = problem.initial_mesh;
    for (int level = 0;; ++level) {
        Level lv = measure_level(problem, mesh, options, level, run);

        auto start = Clock::now();
        const MarkResult mark = two_stage_mark(lv.estimate.eta_sq, lv.estimate.osc_sq, options.theta, options.theta_prime);
        lv.record.ratio_card = mark.ratio_card;
        lv.record.osc_fraction_eta = mark.osc_fraction_eta;
        lv.monitors.n_marked_eta = static_cast<long long>(mark.marked_eta.size());
        lv.monitors.n_marked = static_cast<long long>(mark.marked.size());
        lv.monitors.osc_fraction = mark.osc_fraction;
        if (lv.estimate.eta_sq_total > 0.0)
            lv.monitors.eta_fraction = subset_total(lv.estimate, mark.marked_eta).eta_sq / lv.estimate.eta_sq_total;

        const bool done = mark.converged || stop_after(lv.record, options.stop, run.records.size() + 1);
        if (!done) mesh = refine(mesh, mark.marked).new_mesh;
        lv.record.wall_ms_refine = done ? 0.0 : ms_since(start);

        if (options.on_level) options.on_level(lv.record);
        run.records.push_back(lv.record);
        run.monitors.push_back(std::move(lv.monitors));
        if (done) {
            run.converged = mark.converged;
            run.final_solution = std::move(lv.solution);
            break;
        }
    }
    run.final_mesh = std::move(mesh);
    return run;
}

AdaptiveRun run_uniform(const ProblemSpec& problem, int n_levels, const AdaptiveOptions& options) {
    if (n_levels < 1) throw ValidationError("levels must be at least 1");
    AdaptiveRun run;
    Triangulation mesh = problem.initial_mesh;
    StopCriteria stop = options.stop;
    stop.max_levels = n_levels;
    for (int level = 0;; ++level) {
        Level lv = measure_level(problem, mesh, options, level, run);
        const bool done = stop_after(lv.record, stop, run.records.size() + 1);
        if (!done) {
            const auto start = Clock::now();
            mesh = refine_uniform(mesh).new_mesh;
            lv.record.wall_ms_refine = ms_since(start);
        }
        if (options.on_level) options.on_level(lv.record);
        run.records.push_back(lv.record);
        run.monitors.push_back(std::move(lv.monitors));
        if (done) {
            run.final_solution = std::move(lv.solution);
            break;
        }
    }
    run.final_mesh = std::move(mesh);
    return run;
}

double record_field(const AdaptiveRecord& r, const std::string& field) {
    if (field == "level") return r.level;
    if (field == "n_elements") return static_cast<double>(r.n_elements);
    if (field == "n_nodes") return static_cast<double>(r.n_nodes);
    if (field == "eta") return r.eta;
    if (field == "osc") return r.osc;
    if (field == "energy_error") return r.energy_error;
    if (field == "fem_energy_error") return r.fem_energy_error;
    if (field == "ratio_card") return r.ratio_card;
    if (field == "osc_fraction_eta") return r.osc_fraction_eta;
    if (field == "sigma") return r.sigma;
    if (field == "solve_iters") return static_cast<double>(r.solve_iters);
    if (field == "wall_ms_solve") return r.wall_ms_solve;
    if (field == "wall_ms_estimate") return r.wall_ms_estimate;
    if (field == "wall_ms_refine") return r.wall_ms_refine;
    throw ValidationError("unknown record field '" + field + "'");
}

double fit_rate(std::span<const AdaptiveRecord> records, const std::string& field, int window) {
    if (window < 3 || records.size() < 3)
        throw InsufficientData("rate fit needs at least 3 records, got window " + std::to_string(window) + " over " +
                               std::to_string(records.size()));
    const std::size_t n = std::min(records.size(), static_cast<std::size_t>(window));
    const auto tail = records.subspan(records.size() - n);
    double sx = 0.0, sy = 0.0;
    std::vector<double> xs, ys;
    for (const AdaptiveRecord& r : tail) {
        const double y = record_field(r, field);
        if (!(y > 0.0) || r.n_elements <= 0)
            throw InsufficientData("field '" + field + "' is not positive at level " + std::to_string(r.level));
        xs.push_back(std::log(static_cast<double>(r.n_elements)));
        ys.push_back(std::log(y));
        sx += xs.back();
        sy += ys.back();
    }
    const double mx = sx / static_cast<double>(n);
    const double my = sy / static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if (sxx == 0.0) throw InsufficientData("element counts do not vary over the fit window");
    return sxy / sxx;
}

} // namespace afvm
