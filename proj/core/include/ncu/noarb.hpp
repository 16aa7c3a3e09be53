#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ncu/tree.hpp"

namespace ncu {

/// Orthonormal basis of D, the linear span of the child price increments at
/// a node. Empty basis means D = {0}.
struct SubspaceBasis {
    std::vector<std::vector<double>> vectors;  // pairwise orthonormal, length d each

    int dim() const noexcept { return static_cast<int>(vectors.size()); }

    /// Coordinates of the orthogonal projection of xi in this basis.
    std::vector<double> to_coords(std::span<const double> xi) const;

    /// Embeds D-coordinates back into R^d.
    std::vector<double> from_coords(std::span<const double> y) const;
};

/// Orthogonal projection of xi onto D. Payoffs are unchanged: for every
/// child increment ds in D, project(xi) . ds == xi . ds.
std::vector<double> project_onto_D(std::span<const double> xi, const SubspaceBasis& basis);

/// Basis of span{delta S_child} at an internal node.
SubspaceBasis support_subspace(const ScenarioTree& tree, int node);

struct NaWitness {
    std::string node_id;
    std::vector<double> xi;  // direction with xi . delta S >= 0 for all children, > 0 for some
};

struct NaCheck {
    bool ok = false;
    std::optional<NaWitness> witness;
};

/// One-step no-arbitrage check at every internal node, via a per-node LP:
/// maximize sum_j xi . dS_j subject to xi . dS_j >= 0 and xi in [-1,1]^d.
/// The market is arbitrage-free iff every such optimum is 0.
NaCheck check_na(const ScenarioTree& tree);

struct NaConstants {
    double delta = 0.0;  // every unit xi in D loses at least 2*delta at some child
    double kappa = 0.0;  // minimal child conditional probability
};

/// Quantitative NA constants at a node: delta = half the minimum over unit
/// xi in D of max_j(-xi . dS_j), kappa = min child cond_prob. Guarantees
/// P(xi . dS <= -delta | node) >= kappa for every unit xi in D.
/// Sphere minimization: exhaustive for dim 1, angular grid (step <= 0.01 rad)
/// plus local refinement for dim 2 and 3; higher dimensions are rejected.
NaConstants na_constants(const ScenarioTree& tree, int node, const SubspaceBasis& basis);

struct NodeCertificate {
    std::string node_id;
    int node_index = -1;
    SubspaceBasis basis;
    bool na_ok = false;
    double delta = 0.0;  // 0 when dim(D) == 0
    double kappa = 0.0;
};

/// Certificates for all internal nodes; throws ValidationError("na_violated")
/// if any node admits arbitrage.
std::vector<NodeCertificate> certify_tree(const ScenarioTree& tree);

}  // namespace ncu
