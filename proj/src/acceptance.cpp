#include "afvm/acceptance.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "afvm/discretization.hpp"
#include "afvm/dual_mesh.hpp"
#include "afvm/estimator.hpp"
#include "afvm/nvb.hpp"
#include "afvm/quadrature.hpp"

namespace afvm {

namespace {

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

// Refines by marking every element independently with probability p (at
// least one element) until the mesh has at least `target` elements.
Triangulation random_refinement(Triangulation mesh, std::size_t target, double p, std::mt19937_64& rng) {
    std::bernoulli_distribution coin(p);
    while (mesh.num_elements() < target) {
        ElementSet marked;
        for (std::size_t e = 0; e < mesh.num_elements(); ++e)
            if (coin(rng)) marked.push_back(static_cast<ElementId>(e));
        if (marked.empty()) marked.push_back(0);
        mesh = refine(mesh, marked).new_mesh;
    }
    return mesh;
}

Triangulation with_region_tags(const Triangulation& mesh, int n_regions, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(0, n_regions - 1);
    std::vector<int> tags(mesh.num_elements());
    for (int& t : tags) t = pick(rng);
    return build_triangulation({mesh.vertices().begin(), mesh.vertices().end()},
                               {mesh.elements().begin(), mesh.elements().end()},
                               {mesh.ref_edges().begin(), mesh.ref_edges().end()}, std::move(tags),
                               {mesh.generations().begin(), mesh.generations().end()});
}

bool on_polygon_boundary(std::span<const Vec2> polygon, const Vec2& x, double tol) {
    for (std::size_t i = 0, j = polygon.size() - 1; i < polygon.size(); j = i++) {
        const Vec2 ab = polygon[j] - polygon[i];
        const double t = std::clamp(dot(x - polygon[i], ab) / dot(ab, ab), 0.0, 1.0);
        if (norm(x - (polygon[i] + ab * t)) <= tol) return true;
    }
    return false;
}

} // namespace

CheckResult combine(std::string name, std::span<const CheckResult> parts) {
    CheckResult r;
    r.name = std::move(name);
    for (const CheckResult& p : parts) {
        for (const auto& [k, v] : p.measurements) r.measure(p.name + "." + k, v);
        if (!r.detail.empty()) r.detail += "; ";
        r.detail += p.name + ": " + p.detail;
        if (!p.passed) continue;
        r.passed = r.passed.value_or(true) && *p.passed;
    }
    return r;
}

std::optional<std::pair<double, double>> reference_eigenvalue_bounds(const std::string& label) {
    if (label == "square-smooth") return std::pair{0.82293, 10.84096};
    if (label == "lshape-singular") return std::pair{0.46689, 5.14751};
    return std::nullopt;
}

CheckResult check_coefficient_bounds(const ProblemSpec& problem, double tol, int grid) {
    CheckResult r;
    r.name = "coefficient_bounds";
    const EigenvalueSample s = sample_eigenvalues(problem, grid);
    r.measure("lambda_min", s.lambda_min);
    r.measure("lambda_max", s.lambda_max);
    r.measure("max_of_smallest_eigenvalue", s.max_of_smallest);
    const auto ref = reference_eigenvalue_bounds(problem.label);
    if (!ref) {
        r.detail = "no reference bounds for '" + problem.label + "'";
        return r;
    }
    r.measure("reference_lambda_min", ref->first);
    r.measure("reference_lambda_max", ref->second);
    const bool min_ok = std::abs(s.lambda_min - ref->first) <= tol;
    const bool max_ok = std::abs(s.lambda_max - ref->second) <= tol;
    r.passed = min_ok && max_ok && s.symmetric;
    r.detail = "lambda_min " + fmt(s.lambda_min) + " vs " + fmt(ref->first) + (min_ok ? " ok" : " MISMATCH") +
               ", lambda_max " + fmt(s.lambda_max) + " vs " + fmt(ref->second) + (max_ok ? " ok" : " MISMATCH");
    if (!max_ok) r.detail += " (max over x of the smallest eigenvalue is " + fmt(s.max_of_smallest) + ")";
    return r;
}

CheckResult check_rates(std::string name, std::span<const AdaptiveRecord> records, int window,
                        std::span<const RateWindow> criteria) {
    CheckResult r;
    r.name = std::move(name);
    for (const RateWindow& c : criteria) {
        if (!r.detail.empty()) r.detail += ", ";
        try {
            const double slope = fit_rate(records, c.field, window);
            r.measure(c.field + "_slope", slope);
            const bool ok = slope >= c.lo && slope <= c.hi;
            r.passed = r.passed.value_or(true) && ok;
            r.detail += c.field + " slope " + fmt(slope) + " in [" + fmt(c.lo) + ", " + fmt(c.hi) + "]" + (ok ? "" : " FAILED");
        } catch (const InsufficientData& ex) {
            r.passed = false;
            r.detail += c.field + ": " + ex.what();
        }
    }
    if (!records.empty()) r.measure("final_elements", static_cast<double>(records.back().n_elements));
    return r;
}

CheckResult check_marking_bounds(std::span<const AdaptiveRecord> records, double max_ratio, double min_fraction) {
    CheckResult r;
    r.name = "marking_bounds";
    double worst_ratio = 0.0;
    double worst_fraction = std::numeric_limits<double>::infinity();
    int levels = 0;
    for (const AdaptiveRecord& rec : records) {
        if (std::isnan(rec.ratio_card) || std::isnan(rec.osc_fraction_eta)) continue;
        ++levels;
        worst_ratio = std::max(worst_ratio, rec.ratio_card);
        worst_fraction = std::min(worst_fraction, rec.osc_fraction_eta);
    }
    if (levels == 0) {
        r.detail = "no marking data (uniform run)";
        return r;
    }
    r.measure("max_ratio_card", worst_ratio);
    r.measure("min_osc_fraction_eta", worst_fraction);
    r.passed = worst_ratio <= max_ratio && worst_fraction >= min_fraction;
    r.detail = "max #M/#M_eta " + fmt(worst_ratio) + " (<= " + fmt(max_ratio) + "), min osc(M_eta)^2/osc^2 " +
               fmt(worst_fraction) + " (>= " + fmt(min_fraction) + ") over " + std::to_string(levels) + " levels";
    return r;
}

CheckResult check_linear_convergence(std::span<const AdaptiveRecord> records, int first_level, double limit) {
    CheckResult r;
    r.name = "linear_convergence";
    double log_sum = 0.0;
    int n = 0;
    for (std::size_t i = 0; i + 1 < records.size(); ++i) {
        if (records[i].level < first_level) continue;
        log_sum += std::log(records[i + 1].eta / records[i].eta);
        ++n;
    }
    if (n == 0) {
        r.detail = "fewer than two levels after level " + std::to_string(first_level);
        return r;
    }
    const double geo = std::exp(log_sum / n);
    r.measure("eta_contraction_geomean", geo);
    r.passed = geo <= limit;
    r.detail = "geometric mean of eta_{l+1}/eta_l " + fmt(geo) + " (<= " + fmt(limit) + ") over " + std::to_string(n) +
               " steps";
    return r;
}

CheckResult check_monitor_drift(std::span<const AdaptiveRecord> records, int reference_level, double factor) {
    CheckResult r;
    r.name = "reliability_efficiency";
    const AdaptiveRecord* ref = nullptr;
    for (const AdaptiveRecord& rec : records)
        if (rec.level == reference_level) ref = &rec;
    if (!ref || std::isnan(ref->energy_error)) {
        r.detail = "no exact error at level " + std::to_string(reference_level);
        return r;
    }
    auto reliability = [](const AdaptiveRecord& x) { return x.energy_error / x.eta; };
    auto efficiency = [](const AdaptiveRecord& x) { return x.eta / std::hypot(x.energy_error, x.osc); };
    const double rel0 = reliability(*ref);
    const double eff0 = efficiency(*ref);
    double rel_lo = 1.0, rel_hi = 1.0, eff_lo = 1.0, eff_hi = 1.0, rel_max = 0.0, eff_max = 0.0;
    for (const AdaptiveRecord& rec : records) {
        rel_max = std::max(rel_max, reliability(rec));
        eff_max = std::max(eff_max, efficiency(rec));
        if (rec.level <= reference_level) continue;
        rel_lo = std::min(rel_lo, reliability(rec) / rel0);
        rel_hi = std::max(rel_hi, reliability(rec) / rel0);
        eff_lo = std::min(eff_lo, efficiency(rec) / eff0);
        eff_hi = std::max(eff_hi, efficiency(rec) / eff0);
    }
    r.measure("reliability_ratio_max", rel_max);
    r.measure("efficiency_ratio_max", eff_max);
    r.measure("reliability_drift_min", rel_lo);
    r.measure("reliability_drift_max", rel_hi);
    r.measure("efficiency_drift_min", eff_lo);
    r.measure("efficiency_drift_max", eff_hi);
    r.passed = rel_lo >= 1.0 / factor && rel_hi <= factor && eff_lo >= 1.0 / factor && eff_hi <= factor;
    r.detail = "E/eta drift [" + fmt(rel_lo) + ", " + fmt(rel_hi) + "], eta/sqrt(E^2+osc^2) drift [" + fmt(eff_lo) +
               ", " + fmt(eff_hi) + "] relative to level " + std::to_string(reference_level) + " (allowed factor " +
               fmt(factor) + ")";
    return r;
}

CheckResult check_galerkin_drift(std::span<const LevelMonitors> monitors, int first, int last, int reference_level,
                                 double factor) {
    CheckResult r;
    r.name = "quasi_galerkin_defect";
    if (static_cast<int>(monitors.size()) <= reference_level ||
        std::isnan(monitors[static_cast<std::size_t>(reference_level)].galerkin_constant)) {
        r.detail = "no FEM comparison up to level " + std::to_string(reference_level);
        return r;
    }
    const double c_ref = monitors[static_cast<std::size_t>(reference_level)].galerkin_constant;
    double c_max = 0.0, worst_drift = 0.0;
    const int top = std::min(last, static_cast<int>(monitors.size()) - 1);
    for (int l = first; l <= top; ++l) {
        const double c = monitors[static_cast<std::size_t>(l)].galerkin_constant;
        c_max = std::max(c_max, c);
        if (l > reference_level) worst_drift = std::max(worst_drift, c / c_ref);
    }
    r.measure("galerkin_constant_max", c_max);
    r.measure("galerkin_constant_reference", c_ref);
    r.measure("galerkin_drift_max", worst_drift);
    r.passed = std::isfinite(c_max) && worst_drift <= factor;
    r.detail = "max C over levels " + std::to_string(first) + ".." + std::to_string(top) + " = " + fmt(c_max) +
               ", max C_l/C_" + std::to_string(reference_level) + " = " + fmt(worst_drift) + " (<= " + fmt(factor) + ")";
    return r;
}

CheckResult check_fvm_fem_identity(double tol, std::uint64_t seed) {
    CheckResult r;
    r.name = "fvm_fem_identity";
    std::mt19937_64 rng(seed);
    std::vector<Triangulation> meshes;
    const ProblemSpec square = problem_square_smooth();
    const ProblemSpec lshape = problem_lshape_singular();
    meshes.push_back(refine_uniform(refine_uniform(refine_uniform(square.initial_mesh).new_mesh).new_mesh).new_mesh);
    meshes.push_back(random_refinement(square.initial_mesh, 4000, 0.15, rng));
    meshes.push_back(refine_uniform(refine_uniform(lshape.initial_mesh).new_mesh).new_mesh);
    meshes.push_back(random_refinement(lshape.initial_mesh, 6000, 0.1, rng));
    meshes.push_back(refine_uniform(refine_uniform(refine_uniform(refine_uniform(square.initial_mesh).new_mesh).new_mesh).new_mesh).new_mesh);

    // elementwise-constant SPD coefficients, one per region tag
    const std::vector<Mat2> tensors{{1.0, 0.0, 0.0, 1.0}, {3.0, 0.5, 0.5, 1.0}, {0.2, -0.05, -0.05, 0.7}, {12.0, 4.0, 4.0, 9.0}};
    double worst = 0.0, largest_mesh = 0.0;
    for (const Triangulation& base : meshes) {
        ProblemSpec p;
        p.label = "piecewise-constant";
        p.initial_mesh = with_region_tags(base, static_cast<int>(tensors.size()), rng);
        p.coefficient = [tensors](const Vec2&, int region) { return tensors[static_cast<std::size_t>(region)]; };
        p.coefficient_kind = CoefficientKind::ElementwiseConstant;
        p.source = [](const Vec2&, int) { return 1.0; };
        p.dirichlet = [](const Vec2& x) { return x.x; };
        p.fd_step = default_fd_step(p.initial_mesh);
        const Triangulation& mesh = p.initial_mesh;
        largest_mesh = std::max(largest_mesh, static_cast<double>(mesh.num_elements()));
        const AssembledSystem fvm = assemble_fvm(mesh, build_dual(mesh), p);
        const AssembledSystem fem = assemble_fem(mesh, p);
        const SparseMatrix& a = fvm.coupling;
        const SparseMatrix& b = fem.coupling;
        for (int i = 0; i < a.rows; ++i) {
            for (int k = a.offsets[static_cast<std::size_t>(i)]; k < a.offsets[static_cast<std::size_t>(i) + 1]; ++k)
                worst = std::max(worst, std::abs(a.values[static_cast<std::size_t>(k)] - b.at(i, a.columns[static_cast<std::size_t>(k)])));
            for (int k = b.offsets[static_cast<std::size_t>(i)]; k < b.offsets[static_cast<std::size_t>(i) + 1]; ++k)
                worst = std::max(worst, std::abs(b.values[static_cast<std::size_t>(k)] - a.at(i, b.columns[static_cast<std::size_t>(k)])));
        }
    }
    r.measure("max_entry_difference", worst);
    r.measure("meshes", static_cast<double>(meshes.size()));
    r.measure("largest_mesh_elements", largest_mesh);
    r.passed = worst <= tol && largest_mesh <= 1e4;
    r.detail = "max |A_fvm - A_fem| = " + fmt(worst) + " over " + std::to_string(meshes.size()) +
               " meshes up to " + fmt(largest_mesh) + " elements (<= " + fmt(tol) + ")";
    return r;
}

CheckResult check_box_residual(double tol, std::uint64_t seed) {
    CheckResult r;
    r.name = "box_residual_identity";
    std::mt19937_64 rng(seed);
    constexpr int kRegions = 7;
    std::uniform_real_distribution<double> value(-1.0, 1.0);
    std::vector<double> f_values(kRegions);
    for (double& v : f_values) v = value(rng);

    ProblemSpec p;
    p.label = "box-balance";
    p.initial_mesh = with_region_tags(random_refinement(problem_lshape_singular().initial_mesh, 1500, 0.15, rng), kRegions, rng);
    p.coefficient = [](const Vec2&, int) { return Mat2::identity(); };
    p.coefficient_kind = CoefficientKind::ElementwiseConstant;
    p.source = [f_values](const Vec2&, int region) { return f_values[static_cast<std::size_t>(region)]; };
    p.dirichlet = [](const Vec2& x) { return std::sin(x.x) + x.y; };
    p.fd_step = default_fd_step(p.initial_mesh);
    const Triangulation& mesh = p.initial_mesh;
    const DualMesh dual = build_dual(mesh);
    const AssembledSystem system = assemble_fvm(mesh, dual, p);
    const NodalSolution u = solve_system(system, SolverMethod::DenseLU);

    std::vector<double> balance(mesh.num_vertices(), 0.0), scale(mesh.num_vertices(), 0.0);
    for (std::size_t idx = 0; idx < mesh.num_elements(); ++idx) {
        const auto e = static_cast<ElementId>(idx);
        const auto residual = volume_residual(mesh, p, u.values, e);
        for (int k = 0; k < 3; ++k) {
            const auto piece = dual.box_piece(mesh, e, k);
            const double v = integrate_triangle(residual, {piece[0], piece[1], piece[2]}, 5) +
                             integrate_triangle(residual, {piece[0], piece[2], piece[3]}, 5);
            const auto node = static_cast<std::size_t>(mesh.element(e)[static_cast<std::size_t>(k)]);
            balance[node] += v;
            scale[node] += std::abs(v);
        }
    }
    for (std::size_t id = 0; id < mesh.num_edges(); ++id) {
        const Edge& ed = mesh.edge(static_cast<EdgeId>(id));
        if (ed.is_boundary()) continue;
        const auto jump = edge_jump(mesh, p, u.values, static_cast<EdgeId>(id));
        const Vec2 a = mesh.vertex(ed.v0);
        const Vec2 b = mesh.vertex(ed.v1);
        const Vec2 m = midpoint(a, b);
        const double ja = integrate_segment(jump, a, m, 3);
        const double jb = integrate_segment(jump, m, b, 3);
        balance[static_cast<std::size_t>(ed.v0)] -= ja;
        scale[static_cast<std::size_t>(ed.v0)] += std::abs(ja);
        balance[static_cast<std::size_t>(ed.v1)] -= jb;
        scale[static_cast<std::size_t>(ed.v1)] += std::abs(jb);
    }
    double worst = 0.0;
    int boxes = 0;
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
        if (!dual.node_is_interior(static_cast<VertexId>(v))) continue;
        ++boxes;
        worst = std::max(worst, std::abs(balance[v]) / scale[v]);
    }
    r.measure("max_relative_imbalance", worst);
    r.measure("interior_boxes", boxes);
    r.passed = worst <= tol;
    r.detail = "max relative box imbalance " + fmt(worst) + " over " + std::to_string(boxes) + " boxes (<= " + fmt(tol) + ")";
    return r;
}

CheckResult check_interpolation_orthogonality(int trials, double tol, std::uint64_t seed) {
    CheckResult r;
    r.name = "interpolation_orthogonality";
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> value(-1.0, 1.0);
    const std::vector<Triangulation> meshes{random_refinement(problem_square_smooth().initial_mesh, 800, 0.2, rng),
                                            random_refinement(problem_lshape_singular().initial_mesh, 800, 0.2, rng)};
    double worst_element = 0.0, worst_facet = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        const Triangulation& mesh = meshes[static_cast<std::size_t>(trial) % meshes.size()];
        const DualMesh dual = build_dual(mesh);
        std::vector<double> v(mesh.num_vertices());
        double vmax = 0.0;
        for (double& x : v) {
            x = value(rng);
            vmax = std::max(vmax, std::abs(x));
        }
        const BoxFunction star = interpolate_dual(mesh, v);
        for (std::size_t idx = 0; idx < mesh.num_elements(); ++idx) {
            const auto e = static_cast<ElementId>(idx);
            const auto& t = mesh.element(e);
            const double area = mesh.area(e);
            const double exact = area * (v[static_cast<std::size_t>(t[0])] + v[static_cast<std::size_t>(t[1])] + v[static_cast<std::size_t>(t[2])]) / 3.0;
            worst_element = std::max(worst_element, std::abs(exact - star.integral_over_element(mesh, dual, e)) / (area * vmax));
        }
        for (std::size_t id = 0; id < mesh.num_edges(); ++id) {
            const Edge& ed = mesh.edge(static_cast<EdgeId>(id));
            const double len = norm(mesh.vertex(ed.v1) - mesh.vertex(ed.v0));
            const double exact = 0.5 * len * (v[static_cast<std::size_t>(ed.v0)] + v[static_cast<std::size_t>(ed.v1)]);
            worst_facet = std::max(worst_facet, std::abs(exact - star.integral_over_edge(mesh, static_cast<EdgeId>(id))) / (len * vmax));
        }
    }
    r.measure("max_element_defect", worst_element);
    r.measure("max_facet_defect", worst_facet);
    r.measure("trials", trials);
    r.passed = worst_element <= tol && worst_facet <= tol;
    r.detail = "max relative |int_T (v - I*v)| " + fmt(worst_element) + ", |int_F (v - I*v)| " + fmt(worst_facet) +
               " over " + std::to_string(trials) + " random functions (<= " + fmt(tol) + ")";
    return r;
}

CheckResult check_doerfler_minimality(int trials, int max_length, std::uint64_t seed) {
    CheckResult r;
    r.name = "doerfler_minimality";
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> length(1, max_length);
    std::uniform_int_distribution<int> eighths(0, 32); // dyadic values keep every subset sum exact
    std::uniform_int_distribution<int> twentieths(1, 20);
    int mismatches = 0, violations = 0;
    for (int trial = 0; trial < trials; ++trial) {
        const int n = length(rng);
        std::vector<double> ind(static_cast<std::size_t>(n));
        for (double& x : ind) x = eighths(rng) / 8.0;
        const double theta = twentieths(rng) / 20.0;
        double total = 0.0;
        for (double x : ind) total += x;

        int best = n + 1;
        if (total == 0.0) best = 0;
        for (std::uint32_t mask = 0; mask < (1u << n) && total > 0.0; ++mask) {
            double sum = 0.0;
            for (int i = 0; i < n; ++i)
                if (mask & (1u << i)) sum += ind[static_cast<std::size_t>(i)];
            if (sum >= theta * total) best = std::min(best, std::popcount(mask));
        }
        const ElementSet marked = doerfler_mark(ind, theta);
        double marked_sum = 0.0;
        for (ElementId e : marked) marked_sum += ind[static_cast<std::size_t>(e)];
        if (static_cast<int>(marked.size()) != best) ++mismatches;
        if (marked_sum < theta * total) ++violations;
    }
    r.measure("trials", trials);
    r.measure("cardinality_mismatches", mismatches);
    r.measure("criterion_violations", violations);
    r.passed = mismatches == 0 && violations == 0;
    r.detail = std::to_string(mismatches) + " cardinality mismatches and " + std::to_string(violations) +
               " criterion violations in " + std::to_string(trials) + " trials (length <= " + std::to_string(max_length) + ")";
    return r;
}

CheckResult check_nvb_suite(int levels, double area_tol, std::uint64_t seed) {
    CheckResult r;
    r.name = "nvb_suite";
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(0.2);
    bool conforming = true, partition = true, subset = true, angles = true;
    double worst_area = 0.0, overall_min_angle = std::numbers::pi;
    long long final_elements = 0;
    for (const ProblemSpec& problem : {problem_square_smooth(), problem_lshape_singular()}) {
        Triangulation mesh = problem.initial_mesh;
        const double domain_area = mesh.total_area();
        std::vector<double> angle_history{min_angle(mesh)};
        for (int level = 1; level <= levels; ++level) {
            ElementSet marked;
            for (std::size_t e = 0; e < mesh.num_elements(); ++e)
                if (coin(rng)) marked.push_back(static_cast<ElementId>(e));
            if (marked.empty()) marked.push_back(0);
            const RefinementResult res = refine(mesh, marked);
            subset = subset && std::includes(res.refined_set.begin(), res.refined_set.end(), marked.begin(), marked.end());

            std::vector<double> child_area(mesh.num_elements(), 0.0);
            std::vector<int> children(mesh.num_elements(), 0);
            for (std::size_t c = 0; c < res.new_mesh.num_elements(); ++c) {
                const auto parent = static_cast<std::size_t>(res.parent_of[c]);
                child_area[parent] += res.new_mesh.area(static_cast<ElementId>(c));
                ++children[parent];
            }
            for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
                const double a = mesh.area(static_cast<ElementId>(e));
                const double err = std::abs(child_area[e] - a) / a;
                worst_area = std::max(worst_area, err);
                partition = partition && err <= area_tol && children[e] >= 1 && children[e] <= 4;
            }
            worst_area = std::max(worst_area, std::abs(res.new_mesh.total_area() - domain_area) / domain_area);

            mesh = res.new_mesh;
            // hanging nodes would show up as "boundary" edges inside the domain
            for (const Edge& ed : mesh.edges()) {
                if (!ed.is_boundary()) continue;
                const Vec2 m = midpoint(mesh.vertex(ed.v0), mesh.vertex(ed.v1));
                conforming = conforming && on_polygon_boundary(problem.boundary_polygon, m, 1e-12);
            }
            angle_history.push_back(min_angle(mesh));
        }
        // no decay of the minimum angle in the second half of the run
        const auto mid = angle_history.begin() + static_cast<std::ptrdiff_t>(angle_history.size() / 2);
        const double first_half = *std::min_element(angle_history.begin(), mid);
        const double second_half = *std::min_element(mid, angle_history.end());
        angles = angles && second_half >= first_half - 1e-12;
        overall_min_angle = std::min({overall_min_angle, first_half, second_half});
        final_elements += static_cast<long long>(mesh.num_elements());
    }
    r.measure("max_relative_area_defect", worst_area);
    r.measure("min_angle_degrees", overall_min_angle * 180.0 / std::numbers::pi);
    r.measure("final_elements_total", static_cast<double>(final_elements));
    r.passed = conforming && partition && subset && angles;
    r.detail = std::string("conforming ") + (conforming ? "yes" : "NO") + ", area partition " + fmt(worst_area) +
               (partition ? "" : " FAILED") + ", marked in refined " + (subset ? "yes" : "NO") + ", min angle " +
               fmt(overall_min_angle * 180.0 / std::numbers::pi) + " deg" + (angles ? " stable" : " DECAYING") +
               " over " + std::to_string(levels) + " levels";
    return r;
}

} // namespace afvm
