#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "afvm/geometry.hpp"
#include "afvm/mesh.hpp"

namespace afvm {

/// Diffusion coefficient A(x); `region` is the region tag of the element the
/// point is evaluated from, so traces on either side of an interface differ.
using CoefficientFunction = std::function<Mat2(const Vec2& x, int region)>;
using SourceFunction = std::function<double(const Vec2& x, int region)>;
using ScalarField = std::function<double(const Vec2&)>;
using VectorField = std::function<Vec2(const Vec2&)>;
using MatrixField = std::function<Mat2(const Vec2&)>;

enum class CoefficientKind { Analytic, ElementwiseConstant };

struct ExactSolution {
    ScalarField value;
    VectorField gradient; ///< empty: differenced from `value`
    MatrixField hessian;  ///< optional; enables the product-rule source route
};

/// −div(A∇u) = f in Ω, u = g on Γ.
struct ProblemSpec {
    std::string label;
    Triangulation initial_mesh;
    std::vector<Vec2> boundary_polygon; ///< outer boundary, CCW; empty when unknown
    CoefficientFunction coefficient;
    CoefficientKind coefficient_kind = CoefficientKind::Analytic;
    SourceFunction source;
    ScalarField dirichlet;
    std::optional<ExactSolution> exact;
    double lambda_min = 0.0; ///< declared eigenvalue bounds of A over Ω
    double lambda_max = 0.0;
    double fd_step = 0.0;    ///< differencing step, 1e-4 · diam(Ω)

    bool contains(const Vec2& x) const;
};

/// 1e-4 times the diameter of the mesh's bounding box.
double default_fd_step(const Triangulation& mesh);

/// Point-in-polygon test; points on the boundary (up to a relative 1e-12) count as inside.
bool polygon_contains(std::span<const Vec2> polygon, const Vec2& x);

/// f(x) = −div(A∇u)(x).
///
/// With a Hessian available: f = −(A : D²u + (div A)·∇u), div A by 4th-order
/// central differences. Otherwise the flux components A∇u are differenced
/// with 4th-order central stencils of width `step`. Throws
/// EvaluationOutsideDomain if `domain` is non-empty and x lies outside it.
double derive_source(const ExactSolution& exact, const CoefficientFunction& coefficient, const Vec2& x, int region,
                     double step, std::span<const Vec2> domain = {});

/// ∇u from the analytic gradient, or by 4th-order differences of u.
Vec2 exact_gradient(const ExactSolution& exact, const Vec2& x, double step);

/// Column divergence (Σ_i ∂_i A_i1, Σ_i ∂_i A_i2) by 4th-order differences.
Vec2 coefficient_divergence(const CoefficientFunction& coefficient, const Vec2& x, int region, double step);

ProblemSpec problem_square_smooth();
ProblemSpec problem_lshape_singular();

/// Builtin lookup by name ("square-smooth", "lshape-singular"); throws UnknownBuiltin.
ProblemSpec builtin_problem(const std::string& name);

/// Throws ParseError, UnknownBuiltin or NonSymmetricCoefficient.
ProblemSpec problem_from_json(const nlohmann::json& config, const std::filesystem::path& base_dir = {});
ProblemSpec problem_from_json(const std::filesystem::path& path);

/// Sampled extrema of the eigenvalues of A over an n×n grid of the bounding
/// box, restricted to points inside Ω.
struct EigenvalueSample {
    double lambda_min;       ///< min_x of the smallest eigenvalue
    double lambda_max;       ///< max_x of the largest eigenvalue
    double max_of_smallest;  ///< max_x of the smallest eigenvalue
    bool symmetric;
};
EigenvalueSample sample_eigenvalues(const ProblemSpec& problem, int n);

} // namespace afvm
