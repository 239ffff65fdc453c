#include <doctest.h>

#include <cmath>
#include <random>

#include "afvm/errors.hpp"
#include "afvm/sparse.hpp"

using namespace afvm;

namespace {

using Dense = std::vector<std::vector<double>>;

SparseMatrix from_dense(const Dense& d) {
    TripletAccumulator acc(static_cast<int>(d.size()), static_cast<int>(d[0].size()));
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = 0; j < d[i].size(); ++j)
            if (d[i][j] != 0.0) acc.add(static_cast<int>(i), static_cast<int>(j), d[i][j]);
    return acc.to_csr();
}

std::vector<double> dense_multiply(const Dense& d, const std::vector<double>& x) {
    std::vector<double> y(d.size(), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j) y[i] += d[i][j] * x[j];
    return y;
}

// 5-point Laplacian on an m×m interior grid: SPD.
SparseMatrix laplacian(int m) {
    TripletAccumulator acc(m * m, m * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const int r = i * m + j;
            acc.add(r, r, 4.0);
            if (i > 0) acc.add(r, r - m, -1.0);
            if (i + 1 < m) acc.add(r, r + m, -1.0);
            if (j > 0) acc.add(r, r - 1, -1.0);
            if (j + 1 < m) acc.add(r, r + 1, -1.0);
        }
    return acc.to_csr();
}

// Laplacian plus a skew convection term: nonsymmetric, diagonally dominant.
SparseMatrix convection_diffusion(int m, double c) {
    TripletAccumulator acc(m * m, m * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const int r = i * m + j;
            acc.add(r, r, 4.0);
            if (j > 0) acc.add(r, r - 1, -1.0 - c);
            if (j + 1 < m) acc.add(r, r + 1, -1.0 + c);
            if (i > 0) acc.add(r, r - m, -1.0);
            if (i + 1 < m) acc.add(r, r + m, -1.0);
        }
    return acc.to_csr();
}

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = val(rng);
    return v;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST_SUITE("sparse_linalg") {

TEST_CASE("accumulator sums duplicates and sorts columns") {
    TripletAccumulator acc(2, 3);
    acc.add(0, 2, 1.0);
    acc.add(0, 0, 2.0);
    acc.add(0, 2, 0.5);
    acc.add(1, 1, -1.0);
    acc.add(1, 1, 1.0);
    const SparseMatrix a = acc.to_csr();
    CHECK(a.at(0, 0) == 2.0);
    CHECK(a.at(0, 2) == 1.5);
    CHECK(a.at(0, 1) == 0.0);
    CHECK(a.at(1, 1) == 0.0);
    CHECK(a.nonzeros() == 3);
    CHECK(a.columns == std::vector<int>{0, 2, 1});
    CHECK_THROWS_AS(acc.add(2, 0, 1.0), IndexOutOfRange);
    CHECK_THROWS_AS(acc.add(0, -1, 1.0), IndexOutOfRange);
}

TEST_CASE("spmv") {
    const std::vector<double> x{1.0, -2.0, 3.5};
    CHECK(spmv(SparseMatrix::identity(3), x) == x);
    TripletAccumulator zero(3, 3);
    CHECK(spmv(zero.to_csr(), x) == std::vector<double>{0.0, 0.0, 0.0});
    CHECK_THROWS_AS(spmv(SparseMatrix::identity(2), x), DimensionMismatch);

    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::bernoulli_distribution fill(0.1);
    Dense d(50, std::vector<double>(50, 0.0));
    for (auto& row : d)
        for (double& v : row)
            if (fill(rng)) v = val(rng);
    const auto v = random_vector(50, rng);
    CHECK(max_abs_diff(spmv(from_dense(d), v), dense_multiply(d, v)) <= 1e-13);
}

TEST_CASE("submatrix and symmetry") {
    const SparseMatrix a = laplacian(3);
    CHECK(is_symmetric(a, 1e-14));
    CHECK_FALSE(is_symmetric(convection_diffusion(3, 0.3), 1e-10));
    // keep nodes 0, 4, 8 (the diagonal of the grid)
    std::vector<int> map(9, -1);
    map[0] = 0;
    map[4] = 1;
    map[8] = 2;
    const SparseMatrix s = submatrix(a, map, 3, map, 3);
    CHECK(s.at(0, 0) == 4.0);
    CHECK(s.at(0, 1) == 0.0);
    CHECK(s.at(2, 2) == 4.0);
    CHECK(a.diagonal() == std::vector<double>(9, 4.0));
}

TEST_CASE("dense LU") {
    TripletAccumulator acc(5, 5);
    for (int i = 0; i < 5; ++i) acc.add(i, i, i + 1.0);
    const auto x = solve_dense_lu(acc.to_csr(), std::vector<double>(5, 1.0));
    for (int i = 0; i < 5; ++i) CHECK(x[static_cast<std::size_t>(i)] == doctest::Approx(1.0 / (i + 1)).epsilon(1e-15));

    TripletAccumulator zeros(3, 3);
    CHECK_THROWS_AS(solve_dense_lu(zeros.to_csr(), std::vector<double>(3, 1.0)), SingularMatrix);
    const SparseMatrix rank_one = from_dense({{1, 2}, {2, 4}});
    CHECK_THROWS_AS(solve_dense_lu(rank_one, std::vector<double>{1, 1}), SingularMatrix);
    // needs pivoting
    const auto y = solve_dense_lu(from_dense({{0, 1}, {1, 0}}), std::vector<double>{2, 3});
    CHECK(y == std::vector<double>{3, 2});
}

TEST_CASE("identity systems converge immediately") {
    const std::vector<double> b{1, 2, 3};
    const SolveResult cg = solve_cg(SparseMatrix::identity(3), b, 1e-10, 100);
    CHECK(cg.x == b);
    CHECK(cg.report.iterations <= 1);
    const SolveResult gen = solve_general(SparseMatrix::identity(3), b, 1e-10, 100);
    CHECK(max_abs_diff(gen.x, b) <= 1e-14);
    CHECK(gen.report.iterations <= 1);
}

TEST_CASE("iterative solvers agree with dense LU") {
    std::mt19937_64 rng(22);
    const SparseMatrix spd = laplacian(15);
    const auto b = random_vector(225, rng);
    const auto reference = solve_dense_lu(spd, b);
    const SolveResult cg = solve_cg(spd, b, 1e-12, 1000);
    CHECK(max_abs_diff(cg.x, reference) <= 1e-9);
    CHECK(cg.report.method == "cg");

    const SparseMatrix ns = convection_diffusion(15, 0.4);
    const auto ref_ns = solve_dense_lu(ns, b);
    CHECK(max_abs_diff(solve_general(ns, b, 1e-12, 1000).x, ref_ns) <= 1e-9);
    CHECK(max_abs_diff(solve_gmres(ns, b, 1e-12, 1000).x, ref_ns) <= 1e-9);
}

TEST_CASE("reported residuals are recomputed from the iterate") {
    std::mt19937_64 rng(23);
    const auto b = random_vector(100, rng);
    for (const SolveResult& r : {solve_cg(laplacian(10), b, 1e-10, 1000), solve_general(convection_diffusion(10, 0.3), b, 1e-10, 1000)}) {
        const SparseMatrix& a = r.report.method == "cg" ? laplacian(10) : convection_diffusion(10, 0.3);
        CHECK(std::abs(r.report.residual - relative_residual(a, r.x, b)) <= 1e-12);
        CHECK(r.report.residual <= 1e-10);
    }
}

TEST_CASE("CG error decreases monotonically in the energy norm") {
    std::mt19937_64 rng(24);
    const SparseMatrix a = laplacian(10);
    const auto b = random_vector(100, rng);
    const auto reference = solve_dense_lu(a, b);
    std::vector<double> energies;
    auto observer = [&](int, std::span<const double> x) {
        std::vector<double> e(x.size());
        for (std::size_t i = 0; i < e.size(); ++i) e[i] = x[i] - reference[i];
        const auto ae = spmv(a, e);
        double s = 0.0;
        for (std::size_t i = 0; i < e.size(); ++i) s += e[i] * ae[i];
        energies.push_back(s);
    };
    solve_cg(a, b, 1e-12, 1000, observer);
    REQUIRE(energies.size() > 5);
    for (std::size_t k = 1; k < energies.size(); ++k) CHECK(energies[k] <= energies[k - 1] * (1.0 + 1e-12) + 1e-28);
}

TEST_CASE("solver failure modes") {
    CHECK_THROWS_AS(solve_cg(convection_diffusion(4, 0.5), std::vector<double>(16, 1.0), 1e-10, 100), NotSymmetric);
    CHECK_THROWS_AS(solve_cg(laplacian(20), std::vector<double>(400, 1.0), 1e-14, 2), NoConvergence);
    CHECK_THROWS_AS(solve_cg(laplacian(3), std::vector<double>(4, 1.0), 1e-10, 100), DimensionMismatch);
}

TEST_CASE("zero right-hand side gives the zero solution") {
    const SolveResult r = solve_general(convection_diffusion(5, 0.2), std::vector<double>(25, 0.0), 1e-10, 100);
    CHECK(r.x == std::vector<double>(25, 0.0));
    CHECK(r.report.residual == 0.0);
}

} // TEST_SUITE
