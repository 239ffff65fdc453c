#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "afvm/dual_mesh.hpp"
#include "afvm/mesh.hpp"
#include "afvm/problems.hpp"
#include "afvm/sparse.hpp"

namespace afvm {

/// Linear system over the interior nodes with Dirichlet values lifted to the
/// right-hand side.
struct AssembledSystem {
    SparseMatrix matrix;                  ///< unknowns × unknowns
    std::vector<double> rhs;              ///< load − coupling · lifted_dirichlet
    SparseMatrix coupling;                ///< unknowns × all nodes, before elimination
    std::vector<double> load;             ///< per unknown: ∫_{V_i} f (FVM) or ∫ f φ_i (FEM)
    std::vector<int> unknown_of_node;     ///< -1 for boundary nodes
    std::vector<VertexId> node_of_unknown;
    std::vector<double> lifted_dirichlet; ///< g(a_i) at boundary nodes, 0 elsewhere
    bool symmetric = false;

    std::size_t num_unknowns() const { return node_of_unknown.size(); }
};

/// Vertex-centered finite volumes: row i is −∫_{∂V_i} A∇u·n ds = ∫_{V_i} f dx.
///
/// Fluxes use 2-point Gauss on each dual segment; ∫_{V_i ∩ T} f splits the
/// box piece into two triangles with the degree-5 rule.
AssembledSystem assemble_fvm(const Triangulation& mesh, const DualMesh& dual, const ProblemSpec& problem);

/// P1 Galerkin: degree-2 quadrature for A, degree 5 for the load.
AssembledSystem assemble_fem(const Triangulation& mesh, const ProblemSpec& problem);

enum class SolverMethod { Auto, ConjugateGradient, General, DenseLU };

struct NodalSolution {
    std::vector<double> values; ///< all nodes, Dirichlet values included
    LinearSolveReport report;
};

/// Auto picks CG for symmetric systems and BiCGStab/GMRES otherwise, and
/// falls back to dense LU when the iterative method fails on at most 2000
/// unknowns. Throws NoConvergence, BreakdownDetected or SingularMatrix.
NodalSolution solve_system(const AssembledSystem& system, SolverMethod method = SolverMethod::Auto,
                           double tol = 1e-10);

inline constexpr int kMaxSolverIterations = 20000;
inline constexpr int kDenseFallbackLimit = 2000;

/// Σ_T ∫_T A ∇v·∇w with the degree-2 rule used by the FEM stiffness matrix.
double energy_product(const Triangulation& mesh, const ProblemSpec& problem, std::span<const double> v,
                      std::span<const double> w);

/// |||u − u_h||| with the degree-5 rule. Throws MissingExact.
double energy_error(const Triangulation& mesh, const ProblemSpec& problem, std::span<const double> nodal_solution);

struct GalerkinDefect {
    double defect = 0.0;   ///< |A(u_fem − u_fvm, v)|
    double constant = 0.0; ///< defect / (|||v||| · osc); equals defect when flagged
    bool zero_oscillation = false;
};

/// Observed constant of the quasi-Galerkin orthogonality
/// |A(u − u_fvm, v)| ≤ C |||v||| osc, using A(u − u_fem, v) = 0.
GalerkinDefect galerkin_defect(const Triangulation& mesh, const ProblemSpec& problem, std::span<const double> u_fvm,
                               std::span<const double> u_fem, std::span<const double> test_vector, double osc);

/// Writes `i j value` lines, 0-based. Throws IoError.
void write_matrix_coordinates(const SparseMatrix& matrix, const std::filesystem::path& path);

} // namespace afvm
