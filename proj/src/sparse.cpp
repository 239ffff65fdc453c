#include "afvm/sparse.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "afvm/errors.hpp"

namespace afvm {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// y += s x
void axpy(double s, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

std::vector<double> inverse_diagonal(const SparseMatrix& a) {
    std::vector<double> d = a.diagonal();
    for (double& v : d) v = (v != 0.0) ? 1.0 / v : 1.0;
    return d;
}

void check_square(const SparseMatrix& a, std::size_t n) {
    if (a.rows != a.cols || static_cast<std::size_t>(a.rows) != n)
        throw DimensionMismatch("system is " + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                                " with right-hand side of length " + std::to_string(n));
}

class Stopwatch {
public:
    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

SolveResult finish(const SparseMatrix& a, std::span<const double> b, std::vector<double> x, std::string method,
                   int iterations, const Stopwatch& clock) {
    SolveResult r;
    r.report.method = std::move(method);
    r.report.iterations = iterations;
    r.report.residual = relative_residual(a, x, b);
    r.x = std::move(x);
    r.report.wall_ms = clock.elapsed_ms();
    return r;
}

} // namespace

double SparseMatrix::at(int i, int j) const {
    const auto begin = columns.begin() + offsets[static_cast<std::size_t>(i)];
    const auto end = columns.begin() + offsets[static_cast<std::size_t>(i) + 1];
    const auto it = std::lower_bound(begin, end, j);
    if (it == end || *it != j) return 0.0;
    return values[static_cast<std::size_t>(it - columns.begin())];
}

std::vector<double> SparseMatrix::diagonal() const {
    std::vector<double> d(static_cast<std::size_t>(std::min(rows, cols)), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = at(static_cast<int>(i), static_cast<int>(i));
    return d;
}

SparseMatrix SparseMatrix::identity(int n) {
    SparseMatrix m;
    m.rows = m.cols = n;
    m.offsets.resize(static_cast<std::size_t>(n) + 1);
    std::iota(m.offsets.begin(), m.offsets.end(), 0);
    m.columns.resize(static_cast<std::size_t>(n));
    std::iota(m.columns.begin(), m.columns.end(), 0);
    m.values.assign(static_cast<std::size_t>(n), 1.0);
    return m;
}

void TripletAccumulator::add(int i, int j, double v) {
    if (i < 0 || i >= rows_ || j < 0 || j >= cols_)
        throw IndexOutOfRange("entry (" + std::to_string(i) + ", " + std::to_string(j) + ") outside a " +
                              std::to_string(rows_) + "x" + std::to_string(cols_) + " matrix");
    entries_.push_back({i, j, v});
}

SparseMatrix TripletAccumulator::to_csr() const {
    // counting sort by row, then sort each row by column and merge duplicates
    SparseMatrix m;
    m.rows = rows_;
    m.cols = cols_;
    std::vector<int> count(static_cast<std::size_t>(rows_) + 1, 0);
    for (const Entry& e : entries_) ++count[static_cast<std::size_t>(e.i) + 1];
    std::partial_sum(count.begin(), count.end(), count.begin());
    std::vector<std::pair<int, double>> sorted(entries_.size());
    std::vector<int> fill(count.begin(), count.end() - 1);
    for (const Entry& e : entries_) sorted[static_cast<std::size_t>(fill[static_cast<std::size_t>(e.i)]++)] = {e.j, e.v};

    m.offsets.assign(static_cast<std::size_t>(rows_) + 1, 0);
    m.columns.reserve(entries_.size());
    m.values.reserve(entries_.size());
    for (int i = 0; i < rows_; ++i) {
        auto begin = sorted.begin() + count[static_cast<std::size_t>(i)];
        auto end = sorted.begin() + count[static_cast<std::size_t>(i) + 1];
        std::stable_sort(begin, end, [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto it = begin; it != end; ++it) {
            if (!m.columns.empty() && static_cast<int>(m.columns.size()) > m.offsets[static_cast<std::size_t>(i)] &&
                m.columns.back() == it->first) {
                m.values.back() += it->second;
            } else {
                m.columns.push_back(it->first);
                m.values.push_back(it->second);
            }
        }
        m.offsets[static_cast<std::size_t>(i) + 1] = static_cast<int>(m.columns.size());
    }
    return m;
}

void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y) {
    if (x.size() != static_cast<std::size_t>(a.cols) || y.size() != static_cast<std::size_t>(a.rows))
        throw DimensionMismatch("spmv with a " + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                                " matrix and a vector of length " + std::to_string(x.size()));
    for (int i = 0; i < a.rows; ++i) {
        double s = 0.0;
        for (int k = a.offsets[static_cast<std::size_t>(i)]; k < a.offsets[static_cast<std::size_t>(i) + 1]; ++k)
            s += a.values[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(a.columns[static_cast<std::size_t>(k)])];
        y[static_cast<std::size_t>(i)] = s;
    }
}

std::vector<double> spmv(const SparseMatrix& a, std::span<const double> x) {
    std::vector<double> y(static_cast<std::size_t>(a.rows));
    spmv(a, x, y);
    return y;
}

SparseMatrix submatrix(const SparseMatrix& a, std::span<const int> row_map, int new_rows, std::span<const int> col_map,
                       int new_cols) {
    if (row_map.size() != static_cast<std::size_t>(a.rows) || col_map.size() != static_cast<std::size_t>(a.cols))
        throw DimensionMismatch("index maps do not match the matrix dimensions");
    // columns are re-sorted after remapping, so any index maps are accepted
    std::vector<int> old_row(static_cast<std::size_t>(new_rows), -1);
    for (int i = 0; i < a.rows; ++i)
        if (row_map[static_cast<std::size_t>(i)] >= 0) old_row[static_cast<std::size_t>(row_map[static_cast<std::size_t>(i)])] = i;
    SparseMatrix m;
    m.rows = new_rows;
    m.cols = new_cols;
    m.offsets.assign(static_cast<std::size_t>(new_rows) + 1, 0);
    std::vector<std::pair<int, double>> row;
    for (int r = 0; r < new_rows; ++r) {
        const int i = old_row[static_cast<std::size_t>(r)];
        row.clear();
        if (i >= 0) {
            for (int k = a.offsets[static_cast<std::size_t>(i)]; k < a.offsets[static_cast<std::size_t>(i) + 1]; ++k) {
                const int j = col_map[static_cast<std::size_t>(a.columns[static_cast<std::size_t>(k)])];
                if (j >= 0) row.emplace_back(j, a.values[static_cast<std::size_t>(k)]);
            }
            std::sort(row.begin(), row.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
        }
        for (const auto& [j, v] : row) {
            m.columns.push_back(j);
            m.values.push_back(v);
        }
        m.offsets[static_cast<std::size_t>(r) + 1] = static_cast<int>(m.columns.size());
    }
    return m;
}

bool is_symmetric(const SparseMatrix& a, double rel_tol) {
    if (a.rows != a.cols) return false;
    double scale = 0.0;
    for (double v : a.values) scale = std::max(scale, std::abs(v));
    for (int i = 0; i < a.rows; ++i) {
        for (int k = a.offsets[static_cast<std::size_t>(i)]; k < a.offsets[static_cast<std::size_t>(i) + 1]; ++k) {
            const int j = a.columns[static_cast<std::size_t>(k)];
            if (std::abs(a.values[static_cast<std::size_t>(k)] - a.at(j, i)) > rel_tol * scale) return false;
        }
    }
    return true;
}

double relative_residual(const SparseMatrix& a, std::span<const double> x, std::span<const double> b) {
    std::vector<double> r = spmv(a, x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    const double nb = norm2(b);
    return nb > 0.0 ? norm2(r) / nb : norm2(r);
}

SolveResult solve_cg(const SparseMatrix& a, std::span<const double> b, double tol, int max_iters,
                     const IterationObserver& observer) {
    const Stopwatch clock;
    check_square(a, b.size());
    if (!is_symmetric(a, 1e-10)) throw NotSymmetric("conjugate gradients require a symmetric matrix");
    const std::size_t n = b.size();
    const std::vector<double> dinv = inverse_diagonal(a);
    std::vector<double> x(n, 0.0), r(b.begin(), b.end()), z(n), p(n), q(n);
    const double nb = norm2(b);
    if (nb == 0.0) return finish(a, b, std::move(x), "cg", 0, clock);

    for (std::size_t i = 0; i < n; ++i) z[i] = dinv[i] * r[i];
    p = z;
    double rz = dot(r, z);
    for (int it = 1; it <= max_iters; ++it) {
        spmv(a, p, q);
        const double pq = dot(p, q);
        if (!(pq > 0.0)) throw BreakdownDetected("conjugate gradients: non-positive curvature p'Ap = " + std::to_string(pq));
        const double alpha = rz / pq;
        axpy(alpha, p, x);
        axpy(-alpha, q, r);
        if (observer) observer(it, x);
        if (norm2(r) <= tol * nb) {
            // the recurrence can drift from the true residual; confirm before returning
            SolveResult res = finish(a, b, std::move(x), "cg", it, clock);
            if (res.report.residual <= tol) return res;
            x = std::move(res.x);
            r = spmv(a, x);
            for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = dinv[i] * r[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw NoConvergence("conjugate gradients did not reach " + std::to_string(tol) + " in " +
                        std::to_string(max_iters) + " iterations");
}

SolveResult solve_gmres(const SparseMatrix& a, std::span<const double> b, double tol, int max_iters, int restart,
                        std::span<const double> x0) {
    const Stopwatch clock;
    check_square(a, b.size());
    const std::size_t n = b.size();
    const std::vector<double> dinv = inverse_diagonal(a);
    std::vector<double> x(n, 0.0);
    if (!x0.empty()) x.assign(x0.begin(), x0.end());
    const double nb = norm2(b);
    if (nb == 0.0) return finish(a, b, std::vector<double>(n, 0.0), "gmres", 0, clock);

    const std::size_t m = static_cast<std::size_t>(std::max(1, restart));
    std::vector<std::vector<double>> v(m + 1, std::vector<double>(n));
    std::vector<std::vector<double>> h(m + 1, std::vector<double>(m, 0.0));
    std::vector<double> cs(m), sn(m), g(m + 1), w(n), z(n);
    int total = 0;
    while (total < max_iters) {
        std::vector<double> r = spmv(a, x);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
        double beta = norm2(r);
        if (beta <= tol * nb) break;
        for (std::size_t i = 0; i < n; ++i) v[0][i] = r[i] / beta;
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;
        std::size_t k = 0;
        for (; k < m && total < max_iters; ++k, ++total) {
            for (std::size_t i = 0; i < n; ++i) z[i] = dinv[i] * v[k][i];
            spmv(a, z, w);
            for (std::size_t j = 0; j <= k; ++j) { // modified Gram-Schmidt
                h[j][k] = dot(w, v[j]);
                axpy(-h[j][k], v[j], w);
            }
            h[k + 1][k] = norm2(w);
            if (h[k + 1][k] > 0.0)
                for (std::size_t i = 0; i < n; ++i) v[k + 1][i] = w[i] / h[k + 1][k];
            for (std::size_t j = 0; j < k; ++j) {
                const double t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            const double denom = std::hypot(h[k][k], h[k + 1][k]);
            if (denom == 0.0) throw BreakdownDetected("GMRES: zero Hessenberg column");
            cs[k] = h[k][k] / denom;
            sn[k] = h[k + 1][k] / denom;
            h[k][k] = denom;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            if (std::abs(g[k + 1]) <= tol * nb || h[k][k] == 0.0) {
                ++k;
                ++total;
                break;
            }
        }
        // back substitution for the Krylov coefficients, then x += M⁻¹ V y
        std::vector<double> y(k, 0.0);
        for (std::size_t i = k; i-- > 0;) {
            double s = g[i];
            for (std::size_t j = i + 1; j < k; ++j) s -= h[i][j] * y[j];
            y[i] = s / h[i][i];
        }
        std::fill(z.begin(), z.end(), 0.0);
        for (std::size_t j = 0; j < k; ++j) axpy(y[j], v[j], z);
        for (std::size_t i = 0; i < n; ++i) x[i] += dinv[i] * z[i];
    }
    SolveResult res = finish(a, b, std::move(x), "gmres", total, clock);
    if (!(res.report.residual <= tol))
        throw NoConvergence("GMRES did not reach " + std::to_string(tol) + " in " + std::to_string(max_iters) +
                            " iterations (residual " + std::to_string(res.report.residual) + ")");
    return res;
}

SolveResult solve_general(const SparseMatrix& a, std::span<const double> b, double tol, int max_iters) {
    const Stopwatch clock;
    check_square(a, b.size());
    const std::size_t n = b.size();
    const std::vector<double> dinv = inverse_diagonal(a);
    std::vector<double> x(n, 0.0);
    const double nb = norm2(b);
    if (nb == 0.0) return finish(a, b, std::move(x), "bicgstab", 0, clock);

    // right-preconditioned BiCGStab: solves A M⁻¹ y = b, x = M⁻¹ y
    std::vector<double> r(b.begin(), b.end()), r0 = r, p(n, 0.0), v(n, 0.0), s(n), t(n), ph(n), sh(n);
    std::vector<double> best = x;
    double best_res = 1.0;
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    int it = 1;
    for (; it <= max_iters; ++it) {
        const double rho_new = dot(r0, r);
        if (std::abs(rho_new) < 1e-300 || omega == 0.0) break;
        const double beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
        for (std::size_t i = 0; i < n; ++i) ph[i] = dinv[i] * p[i];
        spmv(a, ph, v);
        const double r0v = dot(r0, v);
        if (r0v == 0.0) break;
        alpha = rho / r0v;
        for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
        if (norm2(s) <= tol * nb) {
            axpy(alpha, ph, x);
            SolveResult res = finish(a, b, std::move(x), "bicgstab", it, clock);
            if (res.report.residual <= tol) return res;
            x = std::move(res.x);
            break;
        }
        for (std::size_t i = 0; i < n; ++i) sh[i] = dinv[i] * s[i];
        spmv(a, sh, t);
        const double tt = dot(t, t);
        if (tt == 0.0) break;
        omega = dot(t, s) / tt;
        axpy(alpha, ph, x);
        axpy(omega, sh, x);
        for (std::size_t i = 0; i < n; ++i) r[i] = s[i] - omega * t[i];
        const double rel = norm2(r) / nb;
        if (rel < best_res) {
            best_res = rel;
            best = x;
        }
        if (!std::isfinite(rel)) break;
        if (rel <= tol) {
            SolveResult res = finish(a, b, std::move(x), "bicgstab", it, clock);
            if (res.report.residual <= tol) return res;
            x = std::move(res.x);
            break;
        }
    }
    // restart from the best iterate with GMRES
    SolveResult res = solve_gmres(a, b, tol, max_iters, 50, best);
    res.report.method = "bicgstab+gmres";
    res.report.iterations += std::min(it, max_iters);
    res.report.wall_ms = clock.elapsed_ms();
    return res;
}

std::vector<double> solve_dense_lu(const SparseMatrix& a, std::span<const double> b) {
    check_square(a, b.size());
    const std::size_t n = b.size();
    std::vector<double> lu(n * n, 0.0);
    double scale = 0.0;
    for (int i = 0; i < a.rows; ++i) {
        for (int k = a.offsets[static_cast<std::size_t>(i)]; k < a.offsets[static_cast<std::size_t>(i) + 1]; ++k) {
            lu[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(a.columns[static_cast<std::size_t>(k)])] =
                a.values[static_cast<std::size_t>(k)];
            scale = std::max(scale, std::abs(a.values[static_cast<std::size_t>(k)]));
        }
    }
    std::vector<double> x(b.begin(), b.end());
    if (n == 0) return x;
    const double threshold = 1e-14 * scale;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t i = c + 1; i < n; ++i)
            if (std::abs(lu[i * n + c]) > std::abs(lu[piv * n + c])) piv = i;
        if (!(std::abs(lu[piv * n + c]) > threshold))
            throw SingularMatrix("dense LU: pivot " + std::to_string(lu[piv * n + c]) + " in column " +
                                 std::to_string(c));
        if (piv != c) {
            std::swap_ranges(lu.begin() + static_cast<std::ptrdiff_t>(c * n),
                             lu.begin() + static_cast<std::ptrdiff_t>((c + 1) * n),
                             lu.begin() + static_cast<std::ptrdiff_t>(piv * n));
            std::swap(x[c], x[piv]);
        }
        const double d = lu[c * n + c];
        for (std::size_t i = c + 1; i < n; ++i) {
            const double f = lu[i * n + c] / d;
            if (f == 0.0) continue;
            for (std::size_t j = c + 1; j < n; ++j) lu[i * n + j] -= f * lu[c * n + j];
            x[i] -= f * x[c];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = x[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= lu[i * n + j] * x[j];
        x[i] = s / lu[i * n + i];
    }
    return x;
}

} // namespace afvm
