#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ncu/noarb.hpp"
#include "ncu/onestep.hpp"
#include "ncu/tree.hpp"
#include "ncu/utility.hpp"
#include "ncu/value_slice.hpp"

namespace ncu {

struct SolveConfig {
    double x0 = 0.0;
    double window_lo = -10.0;
    double window_hi = 10.0;
    std::size_t grid_n = 2001;

    /// How the wealth bound N propagates below the terminal depth:
    /// max_child takes the largest child bound, markov takes
    /// 2 E(N' | node) / kappa (more conservative, never smaller).
    enum class NVariant { max_child, markov };
    NVariant n_variant = NVariant::max_child;
};

struct WellposedReport {
    bool ok = false;
    std::string reason;
    AeCertificate ae;
    IllposedDemo demo;
};

/// Certifies the utility's declared elasticity data and, on failure,
/// explains the refusal and carries the divergence demo.
WellposedReport check_wellposed(const Utility& u);

/// One visited node of the optimal-strategy walk. Internal nodes carry the
/// strategy chosen at their exact wealth; leaves carry terminal wealth with
/// an empty strategy.
struct PathStep {
    int node = -1;
    int depth = 0;
    double wealth = 0.0;
    std::vector<double> xi;       // strategy embedded back into R^d
    double value_exact = 0.0;     // re-solved at the exact wealth (leaf: U(wealth))
    double value_interp = 0.0;    // stored slice read at the same wealth
    double residual = 0.0;        // |value_exact - value_interp|
    double radius = 0.0;          // strategy ball K used at this node
    bool extrapolated = false;    // wealth left the trusted slice window
};

/// Fitted polynomial growth envelope of one depth's value slices:
/// smallest c with U_t(x) <= c (1 + |x|)^gamma_plus on the grid, and
/// -U_t(x) <= c (1 + |x|)^gamma_minus.
struct DepthEnvelope {
    double c_plus = 0.0;
    double c_minus = 0.0;
};

struct SolveOutput {
    std::vector<ValueSlice> slices;            // node-indexed value functions
    std::vector<double> nbound;                // node-indexed wealth bounds (0 at leaves)
    std::vector<NodeCertificate> certificates; // per internal node, depth order
    AeCertificate ae;
    double growth_c = 0.0;

    double value_at_x0 = 0.0;                  // root problem re-solved exactly at x0
    std::vector<double> root_xi;               // optimal initial strategy in R^d

    std::vector<PathStep> path;                // every node, depth order
    double expected_terminal_utility = 0.0;    // E U(V_T) under the extracted strategy
    double extraction_gap = 0.0;               // |expected_terminal_utility - value_at_x0|

    double max_residual = 0.0;                 // over internal path steps
    double interp_bound = 0.0;                 // max interpolation error bound, internal slices
    double residual_tolerance = 0.0;           // 5 (interp_bound + 1e-8 (1 + |value_at_x0|))
    bool extrapolated = false;                 // any on-path extrapolation: output is uncertified

    std::vector<DepthEnvelope> envelopes;      // per depth 0..T
};

/// Backward induction over the scenario tree on a shared uniform wealth
/// grid, wealth-bound propagation, and optimal-strategy extraction with
/// per-node consistency residuals.
class DpSolver {
public:
    /// Validates everything upfront: tree consistency, no arbitrage
    /// (ValidationError "na_violated"), well-posedness of the utility
    /// (ValidationError "illposed"), and the window/grid config.
    DpSolver(ScenarioTree tree, Utility utility, SolveConfig cfg);

    SolveOutput run();

    const ScenarioTree& tree() const noexcept { return tree_; }
    const Utility& utility() const noexcept { return utility_; }
    const WellposedReport& wellposed() const noexcept { return wellposed_; }

    /// One-step subproblem of an internal node; populated during run().
    const OneStepProblem& problem(int node) const;

private:
    double terminal_nbound(double kappa) const;
    double child_nprime(int child, double big_i) const;
    void make_problem(int node);

    ScenarioTree tree_;
    Utility utility_;
    SolveConfig cfg_;
    WellposedReport wellposed_;
    double growth_c_ = 0.0;

    std::vector<NodeCertificate> certs_;
    std::vector<int> cert_of_node_;
    std::vector<ValueSlice> slices_;
    std::vector<double> nbound_;
    std::vector<std::optional<OneStepProblem>> problems_;
    std::vector<std::vector<std::vector<double>>> child_coords_;  // node -> child -> D-coords
};

}  // namespace ncu
