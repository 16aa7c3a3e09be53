#pragma once

#include <cstddef>
#include <vector>

#include "ncu/tree.hpp"
#include "ncu/utility.hpp"

namespace ncu {

/// Symmetric stake grid for the reference optimizer: an odd number of
/// equally spaced points with 0 exactly in the middle and exact +/- pairs.
struct StrategyGrid {
    double bound = 1.0;
    std::size_t resolution = 101;

    std::vector<double> points() const;
};

struct OracleResult {
    double value = 0.0;                // grid optimum of E U(V_T) from x0
    std::vector<double> xi;            // node-indexed stake (0 at leaves)
    std::vector<double> wealth;        // node-indexed realized wealth
    std::size_t evaluations = 0;       // utility reads actually performed
};

/// Exhaustive reference optimizer for one-asset trees. Strategies are
/// predictable, so each internal node picks its stake independently given
/// its realized wealth; the optimum is enumerated recursively from the
/// root, then the stake at every reached node is re-enumerated at its
/// exact wealth. Ties keep the first (smallest) stake in ascending scan
/// order. Refuses to start when the utility-evaluation budget (1e8)
/// would be exceeded.
OracleResult brute_force_value(const ScenarioTree& tree, const Utility& u, double x0,
                               const StrategyGrid& grid);

}  // namespace ncu
