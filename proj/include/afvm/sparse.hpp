#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace afvm {

/// Compressed sparse row matrix. Column indices are sorted and unique per row.
struct SparseMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<int> offsets{0}; ///< size rows + 1
    std::vector<int> columns;
    std::vector<double> values;

    std::size_t nonzeros() const { return values.size(); }
    /// Stored value, or 0 when (i, j) is not in the pattern.
    double at(int i, int j) const;
    std::vector<double> diagonal() const;
    static SparseMatrix identity(int n);
};

/// Coordinate-list accumulator; duplicates are summed on conversion.
class TripletAccumulator {
public:
    TripletAccumulator(int rows, int cols) : rows_(rows), cols_(cols) {}
    void add(int i, int j, double v);
    void reserve(std::size_t n) { entries_.reserve(n); }
    /// Entries that sum to exactly zero stay in the pattern.
    SparseMatrix to_csr() const;

private:
    struct Entry {
        int i, j;
        double v;
    };
    int rows_;
    int cols_;
    std::vector<Entry> entries_;
};

/// y = A x. Throws DimensionMismatch.
std::vector<double> spmv(const SparseMatrix& a, std::span<const double> x);
void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y);

/// Restriction of `a` to the given rows and columns (maps from old to new
/// index, -1 drops the index).
SparseMatrix submatrix(const SparseMatrix& a, std::span<const int> row_map, int new_rows, std::span<const int> col_map,
                       int new_cols);

bool is_symmetric(const SparseMatrix& a, double rel_tol);

/// ‖b − Ax‖ / ‖b‖, or ‖b − Ax‖ when b = 0.
double relative_residual(const SparseMatrix& a, std::span<const double> x, std::span<const double> b);

struct LinearSolveReport {
    std::string method;
    int iterations = 0;
    double residual = 0.0; ///< relative residual, recomputed from the returned iterate
    double wall_ms = 0.0;
};

struct SolveResult {
    std::vector<double> x;
    LinearSolveReport report;
};

/// Called after every iteration with the iteration count and the current iterate.
using IterationObserver = std::function<void(int, std::span<const double>)>;

/// Jacobi-preconditioned conjugate gradients. Throws NotSymmetric,
/// NoConvergence or BreakdownDetected.
SolveResult solve_cg(const SparseMatrix& a, std::span<const double> b, double tol, int max_iters,
                     const IterationObserver& observer = {});

/// Jacobi-preconditioned BiCGStab; on breakdown or stagnation restarts with
/// GMRES(50) from the best iterate. Throws NoConvergence.
SolveResult solve_general(const SparseMatrix& a, std::span<const double> b, double tol, int max_iters);

/// Restarted GMRES with right Jacobi preconditioning.
SolveResult solve_gmres(const SparseMatrix& a, std::span<const double> b, double tol, int max_iters, int restart = 50,
                        std::span<const double> x0 = {});

/// Dense LU with partial pivoting. Throws SingularMatrix when a pivot falls
/// below 1e-14 times the largest matrix entry.
std::vector<double> solve_dense_lu(const SparseMatrix& a, std::span<const double> b);

} // namespace afvm
