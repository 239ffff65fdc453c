#include "afvm/estimator.hpp"

#include <cmath>
#include <string>

#include "afvm/errors.hpp"
#include "afvm/quadrature.hpp"

namespace afvm {

namespace {

constexpr int kVolumeDegree = 5;
constexpr int kEdgeGaussPoints = 3;

Vec2 discrete_gradient(const Triangulation& mesh, std::span<const double> u, ElementId e) {
    const auto& t = mesh.element(e);
    const auto grads = mesh.hat_gradients(e);
    Vec2 g;
    for (std::size_t i = 0; i < 3; ++i) g += grads[i] * u[static_cast<std::size_t>(t[i])];
    return g;
}

void check_length(const Triangulation& mesh, std::span<const double> u) {
    if (u.size() != mesh.num_vertices())
        throw DimensionMismatch("nodal vector of length " + std::to_string(u.size()) + " on a mesh with " +
                                std::to_string(mesh.num_vertices()) + " vertices");
}

} // namespace

double EstimatorOutput::eta() const { return std::sqrt(eta_sq_total); }
double EstimatorOutput::osc() const { return std::sqrt(osc_sq_total); }

LocalFunction volume_residual(const Triangulation& mesh, const ProblemSpec& problem,
                              std::span<const double> nodal_solution, ElementId e) {
    check_length(mesh, nodal_solution);
    if (e < 0 || static_cast<std::size_t>(e) >= mesh.num_elements())
        throw IndexOutOfRange("element " + std::to_string(e) + " out of range");
    const Vec2 grad = discrete_gradient(mesh, nodal_solution, e);
    const int region = mesh.region_tag(e);
    if (problem.coefficient_kind == CoefficientKind::ElementwiseConstant)
        return [&problem, region](const Vec2& x) { return problem.source(x, region); };
    return [&problem, region, grad](const Vec2& x) {
        return problem.source(x, region) + dot(coefficient_divergence(problem.coefficient, x, region, problem.fd_step), grad);
    };
}

LocalFunction edge_jump(const Triangulation& mesh, const ProblemSpec& problem, std::span<const double> nodal_solution,
                        EdgeId edge) {
    check_length(mesh, nodal_solution);
    const Edge& ed = mesh.edge(edge);
    if (ed.is_boundary()) throw BoundaryEdge("edge " + std::to_string(edge) + " lies on the boundary");
    const ElementId t0 = ed.elements[0];
    const ElementId t1 = ed.elements[1];
    const Vec2 n0 = element_geometry(mesh, t0).edge_unit_normals[static_cast<std::size_t>(ed.local[0])];
    const Vec2 g0 = discrete_gradient(mesh, nodal_solution, t0);
    const Vec2 g1 = discrete_gradient(mesh, nodal_solution, t1);
    const int r0 = mesh.region_tag(t0);
    const int r1 = mesh.region_tag(t1);
    // n_T' = −n_T
    return [&problem, n0, g0, g1, r0, r1](const Vec2& x) {
        return dot(problem.coefficient(x, r0) * g0 - problem.coefficient(x, r1) * g1, n0);
    };
}

EstimatorOutput compute_estimator(const Triangulation& mesh, const ProblemSpec& problem,
                                  std::span<const double> nodal_solution) {
    check_length(mesh, nodal_solution);
    const std::size_t ne = mesh.num_elements();
    EstimatorOutput out;
    out.eta_sq.assign(ne, 0.0);
    out.osc_sq.assign(ne, 0.0);

    const auto rule = triangle_rule(kVolumeDegree);
    std::vector<double> values(rule.size());
    for (std::size_t idx = 0; idx < ne; ++idx) {
        const auto e = static_cast<ElementId>(idx);
        const auto residual = volume_residual(mesh, problem, nodal_solution, e);
        const auto p = mesh.corners(e);
        double mean = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            values[q] = residual(map_barycentric(p, rule[q].barycentric));
            mean += rule[q].weight * values[q];
        }
        double full = 0.0, centered = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            full += rule[q].weight * values[q] * values[q];
            centered += rule[q].weight * (values[q] - mean) * (values[q] - mean);
        }
        // h_T² ‖·‖²_T = |T| · |T| · (weighted mean of the square)
        const double area = mesh.area(e);
        out.eta_sq[idx] = area * area * full;
        out.osc_sq[idx] = area * area * centered;
    }

    const auto gauss = gauss_rule(kEdgeGaussPoints);
    std::vector<double> jumps(gauss.size());
    for (std::size_t id = 0; id < mesh.num_edges(); ++id) {
        const Edge& ed = mesh.edge(static_cast<EdgeId>(id));
        if (ed.is_boundary()) continue;
        const auto jump = edge_jump(mesh, problem, nodal_solution, static_cast<EdgeId>(id));
        const Vec2 a = mesh.vertex(ed.v0);
        const Vec2 b = mesh.vertex(ed.v1);
        double mean = 0.0;
        for (std::size_t q = 0; q < gauss.size(); ++q) {
            jumps[q] = jump(a + (b - a) * gauss[q].t);
            mean += gauss[q].weight * jumps[q];
        }
        double full = 0.0, centered = 0.0;
        for (std::size_t q = 0; q < gauss.size(); ++q) {
            full += gauss[q].weight * jumps[q] * jumps[q];
            centered += gauss[q].weight * (jumps[q] - mean) * (jumps[q] - mean);
        }
        const double length = norm(b - a);
        for (ElementId t : ed.elements) {
            const double h = std::sqrt(mesh.area(t));
            out.eta_sq[static_cast<std::size_t>(t)] += h * length * full;
            out.osc_sq[static_cast<std::size_t>(t)] += h * length * centered;
        }
    }

    for (std::size_t idx = 0; idx < ne; ++idx) {
        out.eta_sq_total += out.eta_sq[idx];
        out.osc_sq_total += out.osc_sq[idx];
    }
    return out;
}

SubsetTotals subset_total(const EstimatorOutput& output, std::span<const ElementId> elements) {
    SubsetTotals s;
    for (ElementId e : elements) {
        if (e < 0 || static_cast<std::size_t>(e) >= output.eta_sq.size())
            throw IndexOutOfRange("element " + std::to_string(e) + " out of range");
        s.eta_sq += output.eta_sq[static_cast<std::size_t>(e)];
        s.osc_sq += output.osc_sq[static_cast<std::size_t>(e)];
    }
    return s;
}

} // namespace afvm
