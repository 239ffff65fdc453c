#include "afvm/problems.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "afvm/errors.hpp"
#include "afvm/expression.hpp"

namespace afvm {

namespace {

// 4th-order central difference of g along direction `dir`
template <class F>
auto central_difference(const F& g, const Vec2& x, const Vec2& dir, double h) {
    return (g(x - 2.0 * h * dir) - 8.0 * g(x - h * dir) + 8.0 * g(x + h * dir) - g(x + 2.0 * h * dir)) *
           (1.0 / (12.0 * h));
}

// Criss-cross triangulation of unit cells [x0, x0+1] × [y0, y0+1] given by
// their lower-left corners; every cell is split into 4 triangles at its
// center, with the cell side as reference edge.
Triangulation criss_cross(const std::vector<Vec2>& cells) {
    std::vector<Vec2> vertices;
    auto vertex_id = [&](const Vec2& p) {
        for (std::size_t i = 0; i < vertices.size(); ++i)
            if (vertices[i] == p) return static_cast<VertexId>(i);
        vertices.push_back(p);
        return static_cast<VertexId>(vertices.size() - 1);
    };
    std::vector<std::array<VertexId, 3>> elements;
    std::vector<int> refs;
    for (const Vec2& c : cells) {
        const VertexId c00 = vertex_id(c);
        const VertexId c10 = vertex_id(c + Vec2{1.0, 0.0});
        const VertexId c11 = vertex_id(c + Vec2{1.0, 1.0});
        const VertexId c01 = vertex_id(c + Vec2{0.0, 1.0});
        const VertexId m = vertex_id(c + Vec2{0.5, 0.5});
        for (auto t : {std::array{c00, c10, m}, std::array{c10, c11, m}, std::array{c11, c01, m}, std::array{c01, c00, m}}) {
            elements.push_back(t);
            refs.push_back(0);
        }
    }
    return build_triangulation(std::move(vertices), std::move(elements), std::move(refs));
}

Mat2 expression_matrix(const std::array<Expression, 4>& a, const Vec2& x) {
    return {a[0](x), a[1](x), a[2](x), a[3](x)};
}

Expression parse_expression(const nlohmann::json& j, const char* what) {
    if (j.is_number()) return Expression::constant(j.get<double>());
    if (j.is_string()) return Expression::parse(j.get<std::string>());
    throw ParseError(std::string(what) + " must be a number or an expression string");
}

} // namespace

bool polygon_contains(std::span<const Vec2> polygon, const Vec2& x) {
    if (polygon.empty()) return true;
    double scale = 0.0;
    for (const Vec2& p : polygon) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
    const double tol = 1e-12 * std::max(scale, 1.0);
    bool inside = false;
    for (std::size_t i = 0, j = polygon.size() - 1; i < polygon.size(); j = i++) {
        const Vec2& a = polygon[i];
        const Vec2& b = polygon[j];
        const Vec2 ab = b - a;
        const double len = norm(ab);
        const double t = std::clamp(dot(x - a, ab) / (len * len), 0.0, 1.0);
        if (norm(x - (a + ab * t)) <= tol) return true;
        if ((a.y > x.y) != (b.y > x.y) && x.x < (b.x - a.x) * (x.y - a.y) / (b.y - a.y) + a.x) inside = !inside;
    }
    return inside;
}

bool ProblemSpec::contains(const Vec2& x) const { return polygon_contains(boundary_polygon, x); }

double default_fd_step(const Triangulation& mesh) {
    Vec2 lo = mesh.vertex(0), hi = mesh.vertex(0);
    for (const Vec2& p : mesh.vertices()) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    return 1e-4 * norm(hi - lo);
}

Vec2 exact_gradient(const ExactSolution& exact, const Vec2& x, double step) {
    if (exact.gradient) return exact.gradient(x);
    const auto& u = exact.value;
    return {central_difference(u, x, {1.0, 0.0}, step), central_difference(u, x, {0.0, 1.0}, step)};
}

Vec2 coefficient_divergence(const CoefficientFunction& coefficient, const Vec2& x, int region, double step) {
    auto a = [&](const Vec2& y) { return coefficient(y, region); };
    const Mat2 d1 = central_difference(a, x, {1.0, 0.0}, step);
    const Mat2 d2 = central_difference(a, x, {0.0, 1.0}, step);
    return {d1.a11 + d2.a21, d1.a12 + d2.a22};
}

double derive_source(const ExactSolution& exact, const CoefficientFunction& coefficient, const Vec2& x, int region,
                     double step, std::span<const Vec2> domain) {
    if (!domain.empty() && !polygon_contains(domain, x))
        throw EvaluationOutsideDomain("source requested at (" + std::to_string(x.x) + ", " + std::to_string(x.y) +
                                      ") outside the domain");
    if (exact.hessian) {
        const Mat2 a = coefficient(x, region);
        const Mat2 hess = exact.hessian(x);
        const Vec2 grad = exact_gradient(exact, x, step);
        return -(a.contract(hess) + dot(coefficient_divergence(coefficient, x, region, step), grad));
    }
    auto flux = [&](const Vec2& y) { return coefficient(y, region) * exact_gradient(exact, y, step); };
    const Vec2 d1 = central_difference(flux, x, {1.0, 0.0}, step);
    const Vec2 d2 = central_difference(flux, x, {0.0, 1.0}, step);
    return -(d1.x + d2.y);
}

ProblemSpec problem_square_smooth() {
    ProblemSpec p;
    p.label = "square-smooth";
    p.initial_mesh = criss_cross({{-1.0, -1.0}, {0.0, -1.0}, {-1.0, 0.0}, {0.0, 0.0}});
    p.boundary_polygon = {{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}};
    p.coefficient = [](const Vec2& x, int) {
        const double off = 9.0 * x.x * x.y;
        return Mat2{10.0 + std::cos(x.x), off, off, 10.0 + std::sin(x.y)};
    };
    ExactSolution exact;
    exact.value = [](const Vec2& x) {
        const double rho = x.x * x.x + x.y * x.y;
        return (1.0 - 10.0 * rho) * std::exp(-5.0 * rho);
    };
    // u = (1 - 10ρ) e^{-5ρ}, ρ = |x|²:  ∇u = x g(ρ) with g = e^{-5ρ}(100ρ - 30)
    exact.gradient = [](const Vec2& x) {
        const double rho = x.x * x.x + x.y * x.y;
        const double g = std::exp(-5.0 * rho) * (100.0 * rho - 30.0);
        return Vec2{x.x * g, x.y * g};
    };
    exact.hessian = [](const Vec2& x) {
        const double rho = x.x * x.x + x.y * x.y;
        const double e = std::exp(-5.0 * rho);
        const double g = e * (100.0 * rho - 30.0);
        const double dg = e * (250.0 - 500.0 * rho);
        const double off = 2.0 * x.x * x.y * dg;
        return Mat2{g + 2.0 * x.x * x.x * dg, off, off, g + 2.0 * x.y * x.y * dg};
    };
    p.exact = exact;
    p.dirichlet = exact.value;
    p.lambda_min = 0.82293;
    p.lambda_max = 19.69215;
    p.fd_step = default_fd_step(p.initial_mesh);
    p.source = [coefficient = p.coefficient, exact, step = p.fd_step](const Vec2& x, int region) {
        return derive_source(exact, coefficient, x, region, step);
    };
    return p;
}

ProblemSpec problem_lshape_singular() {
    ProblemSpec p;
    p.label = "lshape-singular";
    p.initial_mesh = criss_cross({{-1.0, -1.0}, {-1.0, 0.0}, {0.0, 0.0}});
    p.boundary_polygon = {{-1.0, -1.0}, {0.0, -1.0}, {0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {-1.0, 1.0}};
    p.coefficient = [](const Vec2& x, int) {
        const double rho = x.x * x.x + x.y * x.y;
        return Mat2{5.0 + rho * std::cos(x.x), rho * rho, rho * rho, 5.0 + rho * std::sin(x.y)};
    };
    // φ ∈ [0, 3π/2] on Ω; the branch cut sits inside the removed quadrant at
    // angle −π/4 so stencils leaving Ω across either leg stay analytic.
    auto polar = [](const Vec2& x) {
        double phi = std::atan2(x.y, x.x);
        if (phi < -0.25 * std::numbers::pi) phi += 2.0 * std::numbers::pi;
        return std::pair{std::hypot(x.x, x.y), phi};
    };
    ExactSolution exact;
    exact.value = [polar](const Vec2& x) {
        const auto [r, phi] = polar(x);
        return std::pow(r, 2.0 / 3.0) * std::sin(2.0 * phi / 3.0);
    };
    // u = Im z^{2/3}:  ∇u = (2/3) r^{-1/3} (−sin(φ/3), cos(φ/3))
    exact.gradient = [polar](const Vec2& x) {
        const auto [r, phi] = polar(x);
        if (r == 0.0) return Vec2{};
        const double s = 2.0 / 3.0 * std::pow(r, -1.0 / 3.0);
        return Vec2{-s * std::sin(phi / 3.0), s * std::cos(phi / 3.0)};
    };
    // D²u from Im/Re of −(2/9) z^{-4/3}; trace free since u is harmonic
    exact.hessian = [polar](const Vec2& x) {
        const auto [r, phi] = polar(x);
        if (r == 0.0) return Mat2{};
        const double s = 2.0 / 9.0 * std::pow(r, -4.0 / 3.0);
        const double hxx = s * std::sin(4.0 * phi / 3.0);
        const double hxy = -s * std::cos(4.0 * phi / 3.0);
        return Mat2{hxx, hxy, hxy, -hxx};
    };
    p.exact = exact;
    p.dirichlet = exact.value;
    p.lambda_min = 0.46689;
    p.lambda_max = 10.39310;
    p.fd_step = default_fd_step(p.initial_mesh);
    p.source = [coefficient = p.coefficient, exact, step = p.fd_step](const Vec2& x, int region) {
        return derive_source(exact, coefficient, x, region, step);
    };
    return p;
}

ProblemSpec builtin_problem(const std::string& name) {
    if (name == "square-smooth") return problem_square_smooth();
    if (name == "lshape-singular") return problem_lshape_singular();
    throw UnknownBuiltin("unknown builtin problem '" + name + "'");
}

ProblemSpec problem_from_json(const nlohmann::json& config, const std::filesystem::path& base_dir) {
    try {
        if (config.contains("builtin")) return builtin_problem(config.at("builtin").get<std::string>());

        ProblemSpec p;
        p.label = config.value("label", std::string("custom"));
        const auto& mesh_json = config.at("mesh");
        if (mesh_json.is_string()) {
            std::ifstream in(base_dir / mesh_json.get<std::string>());
            if (!in) throw ParseError("cannot open mesh file " + mesh_json.get<std::string>());
            p.initial_mesh = mesh_from_json(nlohmann::json::parse(in));
        } else {
            p.initial_mesh = mesh_from_json(mesh_json);
        }
        p.fd_step = default_fd_step(p.initial_mesh);

        const auto& coeff = config.at("coefficient");
        if (!coeff.is_array() || coeff.size() != 2 || coeff[0].size() != 2 || coeff[1].size() != 2)
            throw ParseError("coefficient must be a 2x2 array");
        const std::array<Expression, 4> a{parse_expression(coeff[0][0], "coefficient"),
                                          parse_expression(coeff[0][1], "coefficient"),
                                          parse_expression(coeff[1][0], "coefficient"),
                                          parse_expression(coeff[1][1], "coefficient")};
        // symmetry is checked at every vertex and element centroid of the initial mesh
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        auto check_point = [&](const Vec2& x) {
            const Mat2 m = expression_matrix(a, x);
            const double scale = std::max({std::abs(m.a11), std::abs(m.a22), std::abs(m.a12), std::abs(m.a21), 1.0});
            if (std::abs(m.a12 - m.a21) > 1e-12 * scale)
                throw NonSymmetricCoefficient("coefficient is not symmetric at (" + std::to_string(x.x) + ", " +
                                              std::to_string(x.y) + ")");
            const auto ev = symmetric_eigenvalues(m);
            lo = std::min(lo, ev[0]);
            hi = std::max(hi, ev[1]);
        };
        for (const Vec2& x : p.initial_mesh.vertices()) check_point(x);
        for (std::size_t e = 0; e < p.initial_mesh.num_elements(); ++e)
            check_point(element_geometry(p.initial_mesh, static_cast<ElementId>(e)).centroid);
        p.lambda_min = lo;
        p.lambda_max = hi;
        p.coefficient = [a](const Vec2& x, int) { return expression_matrix(a, x); };
        p.coefficient_kind = std::all_of(a.begin(), a.end(), [](const Expression& e) { return e.is_constant(); })
                                 ? CoefficientKind::ElementwiseConstant
                                 : CoefficientKind::Analytic;

        if (config.contains("exact") && !config.at("exact").is_null()) {
            const Expression u = parse_expression(config.at("exact"), "exact");
            const Expression ux = u.derivative(0);
            const Expression uy = u.derivative(1);
            ExactSolution exact;
            exact.value = u;
            exact.gradient = [ux, uy](const Vec2& x) { return Vec2{ux(x), uy(x)}; };
            p.exact = exact;
        }

        const auto& source = config.at("source");
        if (source.is_string() && source.get<std::string>() == "derived") {
            if (!p.exact) throw ParseError("source \"derived\" requires an exact solution");
            p.source = [coefficient = p.coefficient, exact = *p.exact, step = p.fd_step](const Vec2& x, int region) {
                return derive_source(exact, coefficient, x, region, step);
            };
        } else {
            const Expression f = parse_expression(source, "source");
            p.source = [f](const Vec2& x, int) { return f(x); };
        }

        if (config.contains("dirichlet") && !config.at("dirichlet").is_null()) {
            p.dirichlet = parse_expression(config.at("dirichlet"), "dirichlet");
        } else if (p.exact) {
            p.dirichlet = p.exact->value;
        } else {
            p.dirichlet = [](const Vec2&) { return 0.0; };
        }
        return p;
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(std::string("invalid problem config: ") + ex.what());
    }
}

ProblemSpec problem_from_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open problem config " + path.string());
    nlohmann::json config;
    try {
        config = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(path.string() + ": " + ex.what());
    }
    return problem_from_json(config, path.parent_path());
}

EigenvalueSample sample_eigenvalues(const ProblemSpec& problem, int n) {
    Vec2 lo = problem.initial_mesh.vertex(0), hi = lo;
    for (const Vec2& p : problem.initial_mesh.vertices()) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    EigenvalueSample s{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                       -std::numeric_limits<double>::infinity(), true};
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const Vec2 x{lo.x + (hi.x - lo.x) * i / (n - 1), lo.y + (hi.y - lo.y) * j / (n - 1)};
            if (!problem.contains(x)) continue;
            const Mat2 a = problem.coefficient(x, 0);
            if (std::abs(a.a12 - a.a21) > 1e-12 * std::max(1.0, std::abs(a.a12))) s.symmetric = false;
            const auto ev = symmetric_eigenvalues(a);
            s.lambda_min = std::min(s.lambda_min, ev[0]);
            s.lambda_max = std::max(s.lambda_max, ev[1]);
            s.max_of_smallest = std::max(s.max_of_smallest, ev[0]);
        }
    }
    return s;
}

} // namespace afvm
