#pragma once

#include <functional>
#include <span>
#include <vector>

#include "afvm/mesh.hpp"
#include "afvm/problems.hpp"

namespace afvm {

/// Per-element weighted-residual indicators and data oscillations.
///
/// eta_sq[T] = h_T² ‖f + div(A∇v)‖²_T + h_T ‖[A∇v]‖²_{∂T\Γ}, h_T = |T|^{1/2}.
/// osc_sq[T] has the same form with the elementwise mean removed from the
/// volume residual and the facet mean removed from each jump. Every interior
/// edge enters the indicators of both of its elements.
struct EstimatorOutput {
    std::vector<double> eta_sq;
    std::vector<double> osc_sq;
    double eta_sq_total = 0.0;
    double osc_sq_total = 0.0;

    double eta() const;
    double osc() const;
};

// Captures the problem by reference; the problem must outlive it.
using LocalFunction = std::function<double(const Vec2&)>;

/// x ↦ f(x) + div(A∇v)(x) on element e; div A is differenced unless A is
/// elementwise constant.
LocalFunction volume_residual(const Triangulation& mesh, const ProblemSpec& problem,
                              std::span<const double> nodal_solution, ElementId e);

/// x ↦ (A∇v)|_T·n_T + (A∇v)|_T'·n_T' on the interior edge, each trace
/// evaluated with its own element's region tag. Throws BoundaryEdge.
LocalFunction edge_jump(const Triangulation& mesh, const ProblemSpec& problem, std::span<const double> nodal_solution,
                        EdgeId edge);

/// Degree-5 volume quadrature, 3-point Gauss on edges.
EstimatorOutput compute_estimator(const Triangulation& mesh, const ProblemSpec& problem,
                                  std::span<const double> nodal_solution);

struct SubsetTotals {
    double eta_sq = 0.0;
    double osc_sq = 0.0;
};

/// Sums over the given elements. Throws IndexOutOfRange.
SubsetTotals subset_total(const EstimatorOutput& output, std::span<const ElementId> elements);

} // namespace afvm
