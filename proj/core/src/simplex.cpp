#include "ncu/simplex.hpp"

#include <cmath>
#include <cstddef>
#include <limits>

#include "ncu/errors.hpp"

namespace ncu {

namespace {

// Tableau in canonical form: basis columns are unit vectors, the objective
// row holds reduced costs of a maximization problem.
struct Tableau {
    std::size_t rows = 0, cols = 0;  // cols excludes the rhs column
    std::vector<std::vector<double>> a;  // rows x (cols+1)
    std::vector<double> obj;             // cols+1, last entry = -objective value
    std::vector<std::size_t> basis;

    void pivot(std::size_t pr, std::size_t pc) {
        const double pivot_val = a[pr][pc];
        for (double& v : a[pr]) v /= pivot_val;
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == pr) continue;
            const double f = a[r][pc];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= cols; ++j) a[r][j] -= f * a[pr][j];
        }
        const double f = obj[pc];
        if (f != 0.0) {
            for (std::size_t j = 0; j <= cols; ++j) obj[j] -= f * a[pr][j];
        }
        basis[pr] = pc;
    }

    // Bland's rule: smallest improving column, smallest basic index on ties.
    // Returns false at optimality; throws on unbounded columns.
    bool step(const std::vector<bool>& allowed, double tol, bool* unbounded) {
        std::size_t enter = cols;
        for (std::size_t j = 0; j < cols; ++j) {
            if (allowed[j] && obj[j] > tol) { enter = j; break; }
        }
        if (enter == cols) return false;

        std::size_t leave = rows;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < rows; ++r) {
            if (a[r][enter] > tol) {
                const double ratio = a[r][cols] / a[r][enter];
                if (ratio < best_ratio - tol ||
                    (ratio < best_ratio + tol && (leave == rows || basis[r] < basis[leave]))) {
                    best_ratio = ratio;
                    leave = r;
                }
            }
        }
        if (leave == rows) {
            *unbounded = true;
            return false;
        }
        pivot(leave, enter);
        return true;
    }
};

}  // namespace

LpResult simplex_max(const std::vector<double>& c,
                     const std::vector<std::vector<double>>& A,
                     const std::vector<double>& b,
                     double tol) {
    const std::size_t n = c.size();
    const std::size_t m = A.size();

    // Columns: n structural, m slacks, then one artificial per negative-rhs row.
    std::size_t n_art = 0;
    for (double bi : b) {
        if (bi < 0.0) ++n_art;
    }
    Tableau t;
    t.rows = m;
    t.cols = n + m + n_art;
    t.a.assign(m, std::vector<double>(t.cols + 1, 0.0));
    t.basis.assign(m, 0);

    std::size_t art = n + m;
    for (std::size_t r = 0; r < m; ++r) {
        const double sign = (b[r] < 0.0) ? -1.0 : 1.0;
        for (std::size_t j = 0; j < n; ++j) t.a[r][j] = sign * A[r][j];
        t.a[r][n + r] = sign;  // slack
        t.a[r][t.cols] = sign * b[r];
        if (b[r] < 0.0) {
            t.a[r][art] = 1.0;
            t.basis[r] = art++;
        } else {
            t.basis[r] = n + r;
        }
    }

    std::vector<bool> allowed(t.cols, true);
    const std::size_t max_iters = 10000;

    if (n_art > 0) {
        // Phase 1: maximize -(sum of artificials); feasible iff optimum is 0.
        t.obj.assign(t.cols + 1, 0.0);
        for (std::size_t j = n + m; j < t.cols; ++j) t.obj[j] = -1.0;
        for (std::size_t r = 0; r < m; ++r) {
            if (t.basis[r] >= n + m) {
                for (std::size_t j = 0; j <= t.cols; ++j) t.obj[j] += t.a[r][j];
            }
        }
        bool unbounded = false;
        std::size_t iters = 0;
        while (t.step(allowed, tol, &unbounded)) {
            if (++iters > max_iters)
                throw ExecutionError("lp_stall", "simplex: phase 1 iteration cap reached");
        }
        if (-t.obj[t.cols] < -tol) return {LpStatus::infeasible, 0.0, {}};

        // Drive leftover artificials out of the basis where possible.
        for (std::size_t r = 0; r < m; ++r) {
            if (t.basis[r] < n + m) continue;
            for (std::size_t j = 0; j < n + m; ++j) {
                if (std::abs(t.a[r][j]) > tol) {
                    t.pivot(r, j);
                    break;
                }
            }
        }
        for (std::size_t j = n + m; j < t.cols; ++j) allowed[j] = false;
    }

    // Phase 2 objective over structural variables.
    t.obj.assign(t.cols + 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) t.obj[j] = c[j];
    for (std::size_t r = 0; r < m; ++r) {
        const std::size_t bj = t.basis[r];
        if (bj < n && t.obj[bj] != 0.0) {
            const double f = t.obj[bj];
            for (std::size_t j = 0; j <= t.cols; ++j) t.obj[j] -= f * t.a[r][j];
        }
    }

    bool unbounded = false;
    std::size_t iters = 0;
    while (t.step(allowed, tol, &unbounded)) {
        if (++iters > max_iters)
            throw ExecutionError("lp_stall", "simplex: phase 2 iteration cap reached");
    }
    if (unbounded) return {LpStatus::unbounded, 0.0, {}};

    LpResult res;
    res.status = LpStatus::optimal;
    res.x.assign(n, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        if (t.basis[r] < n) res.x[t.basis[r]] = t.a[r][t.cols];
    }
    res.value = -t.obj[t.cols];
    return res;
}

}  // namespace ncu
