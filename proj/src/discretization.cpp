#include "afvm/discretization.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "afvm/errors.hpp"
#include "afvm/quadrature.hpp"

namespace afvm {

namespace {

constexpr int kFluxGaussPoints = 2;
constexpr int kStiffnessDegree = 2;
constexpr int kLoadDegree = 5;
constexpr int kErrorDegree = 5;

struct NodeNumbering {
    std::vector<int> unknown_of_node;
    std::vector<VertexId> node_of_unknown;
    std::vector<double> lifted;
};

NodeNumbering number_nodes(const Triangulation& mesh, const ProblemSpec& problem) {
    NodeNumbering n;
    n.unknown_of_node.assign(mesh.num_vertices(), -1);
    n.lifted.assign(mesh.num_vertices(), 0.0);
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
        const auto id = static_cast<VertexId>(v);
        if (mesh.is_boundary_vertex(id)) {
            n.lifted[v] = problem.dirichlet(mesh.vertex(id));
        } else {
            n.unknown_of_node[v] = static_cast<int>(n.node_of_unknown.size());
            n.node_of_unknown.push_back(id);
        }
    }
    return n;
}

AssembledSystem finalize(NodeNumbering numbering, TripletAccumulator& coupling, std::vector<double> load,
                         bool symmetric) {
    AssembledSystem s;
    s.coupling = coupling.to_csr();
    s.load = std::move(load);
    s.unknown_of_node = std::move(numbering.unknown_of_node);
    s.node_of_unknown = std::move(numbering.node_of_unknown);
    s.lifted_dirichlet = std::move(numbering.lifted);
    s.symmetric = symmetric;

    const int n = static_cast<int>(s.node_of_unknown.size());
    std::vector<int> rows(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i;
    s.matrix = submatrix(s.coupling, rows, n, s.unknown_of_node, n);

    const std::vector<double> lift = spmv(s.coupling, s.lifted_dirichlet);
    s.rhs.resize(s.load.size());
    for (std::size_t i = 0; i < s.rhs.size(); ++i) s.rhs[i] = s.load[i] - lift[i];
    return s;
}

} // namespace

AssembledSystem assemble_fvm(const Triangulation& mesh, const DualMesh& dual, const ProblemSpec& problem) {
    NodeNumbering numbering = number_nodes(mesh, problem);
    const int n = static_cast<int>(numbering.node_of_unknown.size());
    TripletAccumulator coupling(n, static_cast<int>(mesh.num_vertices()));
    coupling.reserve(mesh.num_elements() * 9);
    std::vector<double> load(static_cast<std::size_t>(n), 0.0);
    const auto gauss = gauss_rule(kFluxGaussPoints);
    const auto segments = dual.segments();

    for (std::size_t idx = 0; idx < mesh.num_elements(); ++idx) {
        const auto e = static_cast<ElementId>(idx);
        const int region = mesh.region_tag(e);
        const auto& t = mesh.element(e);
        const auto grads = mesh.hat_gradients(e);
        for (int k = 0; k < 3; ++k) {
            const int row = numbering.unknown_of_node[static_cast<std::size_t>(t[static_cast<std::size_t>(k)])];
            if (row < 0) continue;
            // outward flux of each hat through the two segments of V_i ∩ T
            std::array<double, 3> flux{};
            for (int s = 0; s < 2; ++s) {
                const FluxSegment& seg = segments[static_cast<std::size_t>(6 * e + 2 * k + s)];
                Mat2 a_int;
                for (const auto& q : gauss) a_int += (q.weight * seg.length) * problem.coefficient(seg.start + (seg.end - seg.start) * q.t, region);
                for (std::size_t j = 0; j < 3; ++j) flux[j] += dot(a_int * grads[j], seg.unit_normal);
            }
            for (std::size_t j = 0; j < 3; ++j) coupling.add(row, t[j], -flux[j]);

            const auto piece = dual.box_piece(mesh, e, k);
            auto f = [&](const Vec2& x) { return problem.source(x, region); };
            load[static_cast<std::size_t>(row)] += integrate_triangle(f, {piece[0], piece[1], piece[2]}, kLoadDegree) +
                                                  integrate_triangle(f, {piece[0], piece[2], piece[3]}, kLoadDegree);
        }
    }
    return finalize(std::move(numbering), coupling, std::move(load), false);
}

AssembledSystem assemble_fem(const Triangulation& mesh, const ProblemSpec& problem) {
    NodeNumbering numbering = number_nodes(mesh, problem);
    const int n = static_cast<int>(numbering.node_of_unknown.size());
    TripletAccumulator coupling(n, static_cast<int>(mesh.num_vertices()));
    coupling.reserve(mesh.num_elements() * 9);
    std::vector<double> load(static_cast<std::size_t>(n), 0.0);
    const auto stiffness_rule = triangle_rule(kStiffnessDegree);
    const auto load_rule = triangle_rule(kLoadDegree);

    for (std::size_t idx = 0; idx < mesh.num_elements(); ++idx) {
        const auto e = static_cast<ElementId>(idx);
        const int region = mesh.region_tag(e);
        const auto& t = mesh.element(e);
        const auto p = mesh.corners(e);
        const auto grads = mesh.hat_gradients(e);
        const double area = mesh.area(e);
        Mat2 a_int;
        for (const auto& q : stiffness_rule) a_int += (q.weight * area) * problem.coefficient(map_barycentric(p, q.barycentric), region);
        std::array<double, 3> f_int{};
        for (const auto& q : load_rule) {
            const double fx = q.weight * area * problem.source(map_barycentric(p, q.barycentric), region);
            for (std::size_t i = 0; i < 3; ++i) f_int[i] += fx * q.barycentric[i];
        }
        for (std::size_t i = 0; i < 3; ++i) {
            const int row = numbering.unknown_of_node[static_cast<std::size_t>(t[i])];
            if (row < 0) continue;
            for (std::size_t j = 0; j < 3; ++j) coupling.add(row, t[j], dot(a_int * grads[j], grads[i]));
            load[static_cast<std::size_t>(row)] += f_int[i];
        }
    }
    return finalize(std::move(numbering), coupling, std::move(load), true);
}

NodalSolution solve_system(const AssembledSystem& system, SolverMethod method, double tol) {
    const SparseMatrix& a = system.matrix;
    const std::vector<double>& b = system.rhs;
    SolveResult result;
    if (method == SolverMethod::Auto) {
        try {
            result = system.symmetric ? solve_cg(a, b, tol, kMaxSolverIterations)
                                      : solve_general(a, b, tol, kMaxSolverIterations);
        } catch (const Error&) {
            if (system.num_unknowns() > static_cast<std::size_t>(kDenseFallbackLimit)) throw;
            result = SolveResult{};
            result.x = solve_dense_lu(a, b);
            result.report.method = "dense-lu";
            result.report.residual = relative_residual(a, result.x, b);
        }
    } else if (method == SolverMethod::ConjugateGradient) {
        result = solve_cg(a, b, tol, kMaxSolverIterations);
    } else if (method == SolverMethod::General) {
        result = solve_general(a, b, tol, kMaxSolverIterations);
    } else {
        result.x = solve_dense_lu(a, b);
        result.report.method = "dense-lu";
        result.report.residual = relative_residual(a, result.x, b);
    }

    NodalSolution out;
    out.values = system.lifted_dirichlet;
    for (std::size_t i = 0; i < system.node_of_unknown.size(); ++i)
        out.values[static_cast<std::size_t>(system.node_of_unknown[i])] = result.x[i];
    out.report = std::move(result.report);
    return out;
}

double energy_product(const Triangulation& mesh, const ProblemSpec& problem, std::span<const double> v,
                      std::span<const double> w) {
    if (v.size() != mesh.num_vertices() || w.size() != mesh.num_vertices())
        throw DimensionMismatch("nodal vectors do not match the mesh");
    const auto rule = triangle_rule(kStiffnessDegree);
    double sum = 0.0;
    for (std::size_t idx = 0; idx < mesh.num_elements(); ++idx) {
        const auto e = static_cast<ElementId>(idx);
        const auto& t = mesh.element(e);
        const auto p = mesh.corners(e);
        const auto grads = mesh.hat_gradients(e);
        Vec2 gv, gw;
        for (std::size_t i = 0; i < 3; ++i) {
            gv += grads[i] * v[static_cast<std::size_t>(t[i])];
            gw += grads[i] * w[static_cast<std::size_t>(t[i])];
        }
        Mat2 a_int;
        for (const auto& q : rule) a_int += q.weight * problem.coefficient(map_barycentric(p, q.barycentric), mesh.region_tag(e));
        sum += mesh.area(e) * dot(a_int * gv, gw);
    }
    return sum;
}

double energy_error(const Triangulation& mesh, const ProblemSpec& problem, std::span<const double> nodal_solution) {
    if (!problem.exact) throw MissingExact("problem '" + problem.label + "' has no exact solution");
    if (nodal_solution.size() != mesh.num_vertices()) throw DimensionMismatch("nodal vector does not match the mesh");
    const auto rule = triangle_rule(kErrorDegree);
    double sum = 0.0;
    for (std::size_t idx = 0; idx < mesh.num_elements(); ++idx) {
        const auto e = static_cast<ElementId>(idx);
        const auto& t = mesh.element(e);
        const auto p = mesh.corners(e);
        const auto grads = mesh.hat_gradients(e);
        Vec2 gh;
        for (std::size_t i = 0; i < 3; ++i) gh += grads[i] * nodal_solution[static_cast<std::size_t>(t[i])];
        double local = 0.0;
        for (const auto& q : rule) {
            const Vec2 x = map_barycentric(p, q.barycentric);
            const Vec2 d = exact_gradient(*problem.exact, x, problem.fd_step) - gh;
            local += q.weight * dot(problem.coefficient(x, mesh.region_tag(e)) * d, d);
        }
        sum += mesh.area(e) * local;
    }
    return std::sqrt(sum);
}

GalerkinDefect galerkin_defect(const Triangulation& mesh, const ProblemSpec& problem, std::span<const double> u_fvm,
                               std::span<const double> u_fem, std::span<const double> test_vector, double osc) {
    if (u_fvm.size() != u_fem.size()) throw DimensionMismatch("FVM and FEM solutions differ in length");
    std::vector<double> diff(u_fem.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = u_fem[i] - u_fvm[i];
    GalerkinDefect g;
    g.defect = std::abs(energy_product(mesh, problem, diff, test_vector));
    const double test_norm = std::sqrt(std::max(0.0, energy_product(mesh, problem, test_vector, test_vector)));
    if (osc <= 0.0 || test_norm <= 0.0) {
        g.zero_oscillation = true;
        g.constant = g.defect;
    } else {
        g.constant = g.defect / (test_norm * osc);
    }
    return g;
}

void write_matrix_coordinates(const SparseMatrix& matrix, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    char buf[32];
    for (int i = 0; i < matrix.rows; ++i) {
        for (int k = matrix.offsets[static_cast<std::size_t>(i)]; k < matrix.offsets[static_cast<std::size_t>(i) + 1]; ++k) {
            const auto res = std::to_chars(buf, buf + sizeof buf, matrix.values[static_cast<std::size_t>(k)]);
            out << i << ' ' << matrix.columns[static_cast<std::size_t>(k)] << ' ' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)) << '\n';
        }
    }
    if (!out) throw IoError("failed writing " + path.string());
}

} // namespace afvm
