#pragma once

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "afvm/mesh.hpp"
#include "afvm/nvb.hpp"
#include "afvm/problems.hpp"

namespace afvm::test {

inline Triangulation unit_triangle() { return build_triangulation({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}); }

// Unit square split along the diagonal (0,0)-(1,1); both reference edges lie on it.
inline Triangulation two_triangle_square() {
    return build_triangulation({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 2, 3}}, {2, 0});
}

// Unit square split into four triangles at the center node 4.
inline Triangulation criss_cross_square() {
    return build_triangulation({{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}},
                               {{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}}, {0, 0, 0, 0});
}

inline Triangulation refine_uniformly(Triangulation mesh, int times) {
    for (int i = 0; i < times; ++i) mesh = refine_uniform(mesh).new_mesh;
    return mesh;
}

// Marks every element with probability p, at least one.
inline Triangulation random_refine(Triangulation mesh, int rounds, double p, std::mt19937_64& rng) {
    std::bernoulli_distribution coin(p);
    for (int r = 0; r < rounds; ++r) {
        std::vector<ElementId> marked;
        for (std::size_t e = 0; e < mesh.num_elements(); ++e)
            if (coin(rng)) marked.push_back(static_cast<ElementId>(e));
        if (marked.empty()) marked.push_back(0);
        mesh = refine(mesh, marked).new_mesh;
    }
    return mesh;
}

// −div(A∇u) = f with constant A and f; Dirichlet data g.
inline ProblemSpec constant_problem(const Triangulation& mesh, Mat2 a, double f, ScalarField g = {}) {
    ProblemSpec p;
    p.label = "test";
    p.initial_mesh = mesh;
    p.coefficient = [a](const Vec2&, int) { return a; };
    p.coefficient_kind = CoefficientKind::ElementwiseConstant;
    p.source = [f](const Vec2&, int) { return f; };
    p.dirichlet = g ? std::move(g) : ScalarField([](const Vec2&) { return 0.0; });
    p.fd_step = default_fd_step(mesh);
    return p;
}

// Nodal interpolant of a scalar field.
inline std::vector<double> interpolate(const Triangulation& mesh, const ScalarField& u) {
    std::vector<double> v;
    for (const Vec2& x : mesh.vertices()) v.push_back(u(x));
    return v;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace afvm::test
