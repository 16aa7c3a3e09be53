#pragma once

#include <cstddef>
#include <functional>
#include <istream>
#include <map>
#include <string>
#include <vector>

namespace ncu {

/// One atom of the filtration at its depth. Prices are discounted asset
/// prices of length d; cond_prob is the conditional transition probability
/// from the parent (1 for the root).
struct Node {
    std::string id;
    int parent = -1;  // index into ScenarioTree::nodes(), -1 for the root
    double cond_prob = 1.0;
    std::vector<double> price;
    int depth = 0;
    std::vector<int> children;
};

/// A random variable measurable at one depth: node id -> value.
struct AdaptedScalar {
    int depth = 0;
    std::map<std::string, double> values;
};

/// Finite filtered market (Omega, F_t, P, S_t). Immutable after load; safe
/// to share across threads.
class ScenarioTree {
public:
    /// Parses and validates the JSON document described in the README
    /// (fields d, horizon, nodes[{id, parent, cond_prob, price}]).
    /// Probabilities at each internal node must sum to 1 within 1e-12 and
    /// are renormalized exactly; every violation names the offending node.
    static ScenarioTree load(const std::string& json_text);
    static ScenarioTree load_stream(std::istream& in);

    /// Assembles a tree from parts and validates. parent entries use node
    /// indices; depth and children are derived, not trusted.
    static ScenarioTree build(int dim, int horizon, std::vector<Node> nodes);

    int horizon() const noexcept { return horizon_; }
    int dim() const noexcept { return dim_; }
    std::size_t node_count() const noexcept { return nodes_.size(); }
    const Node& node(int i) const { return nodes_.at(static_cast<std::size_t>(i)); }
    int root() const noexcept { return root_; }

    /// Node indices at one depth, in input order (deterministic).
    const std::vector<int>& at_depth(int t) const { return by_depth_.at(static_cast<std::size_t>(t)); }

    /// Index of a node id; throws ValidationError for unknown ids.
    int index_of(const std::string& id) const;

    bool is_leaf(int i) const { return nodes_[static_cast<std::size_t>(i)].children.empty(); }

    /// Price increment S_t - S_{t-1} at a non-root node.
    std::vector<double> delta_s(int i) const;

    /// Product of conditional probabilities along the root path.
    double path_prob(int i) const;

    /// Conditional expectation at an internal node: sum of cond_prob * value
    /// over children. The map form requires a value for every child.
    double cond_expect(int i, const std::map<std::string, double>& child_values) const;
    double cond_expect(int i, const std::function<double(int)>& child_value) const;

    /// E(Z) for a leaf assignment, folded depth by depth through
    /// cond_expect (tower property). The map form requires every leaf.
    double total_expect(const std::map<std::string, double>& leaf_values) const;
    double total_expect(const std::function<double(int)>& leaf_value) const;

private:
    void validate_and_index();

    int dim_ = 0;
    int horizon_ = 0;
    int root_ = -1;
    std::vector<Node> nodes_;
    std::vector<std::vector<int>> by_depth_;
};

}  // namespace ncu
