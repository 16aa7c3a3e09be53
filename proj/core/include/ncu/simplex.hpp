#pragma once

#include <vector>

namespace ncu {

enum class LpStatus { optimal, unbounded, infeasible };

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    double value = 0.0;
    std::vector<double> x;
};

/// Dense two-phase primal simplex with Bland's rule:
///   maximize c.x subject to A x <= b, x >= 0.
/// Small problems only (the NA check has at most children + 2d rows).
/// Deterministic; tol guards pivot selection and feasibility tests.
LpResult simplex_max(const std::vector<double>& c,
                     const std::vector<std::vector<double>>& A,
                     const std::vector<double>& b,
                     double tol = 1e-9);

}  // namespace ncu
