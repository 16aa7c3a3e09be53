#include "ncu/oracle.hpp"

#include <cmath>
#include <limits>

#include "ncu/errors.hpp"

namespace ncu {

std::vector<double> StrategyGrid::points() const {
    if (!(bound > 0.0)) throw ValidationError("grid_invalid", "stake bound must be positive");
    if (resolution < 3 || resolution % 2 == 0)
        throw ValidationError("grid_invalid", "stake resolution must be odd and at least 3");
    const std::size_t k = (resolution - 1) / 2;
    const double step = bound / static_cast<double>(k);
    std::vector<double> pts(resolution);
    // (i - k) * step keeps 0 exact and +/- pairs exact negatives.
    for (std::size_t i = 0; i < resolution; ++i)
        pts[i] = (static_cast<double>(i) - static_cast<double>(k)) * step;
    return pts;
}

namespace {

double cost_of(const ScenarioTree& tree, int node, double res) {
    if (tree.is_leaf(node)) return 1.0;
    double inner = 0.0;
    for (int child : tree.node(node).children) inner += cost_of(tree, child, res);
    return res * inner;
}

struct Enumerator {
    const ScenarioTree& tree;
    const Utility& u;
    const std::vector<double>& stakes;
    const std::vector<double>& ds;  // per-node price increment (one asset)
    std::size_t evals = 0;

    double value(int node, double wealth) {
        if (tree.is_leaf(node)) {
            ++evals;
            return u(wealth);
        }
        const Node& nd = tree.node(node);
        double best = -std::numeric_limits<double>::infinity();
        for (double s : stakes) {
            double acc = 0.0;
            for (int child : nd.children)
                acc += tree.node(child).cond_prob *
                       value(child, wealth + s * ds[static_cast<std::size_t>(child)]);
            if (acc > best) best = acc;
        }
        return best;
    }

    // Best stake at one node given its realized wealth; ascending scan,
    // strict improvement only, so ties keep the smallest stake.
    std::pair<double, double> argmax(int node, double wealth) {
        const Node& nd = tree.node(node);
        double best = -std::numeric_limits<double>::infinity();
        double best_s = stakes.front();
        for (double s : stakes) {
            double acc = 0.0;
            for (int child : nd.children)
                acc += tree.node(child).cond_prob *
                       value(child, wealth + s * ds[static_cast<std::size_t>(child)]);
            if (acc > best) {
                best = acc;
                best_s = s;
            }
        }
        return {best_s, best};
    }
};

}  // namespace

OracleResult brute_force_value(const ScenarioTree& tree, const Utility& u, double x0,
                               const StrategyGrid& grid) {
    if (tree.dim() != 1)
        throw ValidationError("oracle_dim", "reference optimizer handles one asset only");

    const double res = static_cast<double>(grid.resolution);
    double budget = cost_of(tree, tree.root(), res);
    for (int t = 1; t < tree.horizon(); ++t) {
        for (int node : tree.at_depth(t)) {
            if (!tree.is_leaf(node)) budget += cost_of(tree, node, res);
        }
    }
    if (budget > 1e8)
        throw ExecutionError("oracle_budget",
                             "reference optimizer would need " + std::to_string(budget) +
                                 " utility reads; the budget is 1e8");

    const std::vector<double> stakes = grid.points();
    std::vector<double> ds(tree.node_count(), 0.0);
    for (std::size_t i = 0; i < tree.node_count(); ++i) {
        if (static_cast<int>(i) != tree.root()) ds[i] = tree.delta_s(static_cast<int>(i))[0];
    }

    Enumerator en{tree, u, stakes, ds};
    OracleResult out;
    out.xi.assign(tree.node_count(), 0.0);
    out.wealth.assign(tree.node_count(), 0.0);
    out.wealth[static_cast<std::size_t>(tree.root())] = x0;

    for (int t = 0; t < tree.horizon(); ++t) {
        for (int node : tree.at_depth(t)) {
            const double w = out.wealth[static_cast<std::size_t>(node)];
            const auto [s, val] = en.argmax(node, w);
            out.xi[static_cast<std::size_t>(node)] = s;
            if (node == tree.root()) out.value = val;
            for (int child : tree.node(node).children)
                out.wealth[static_cast<std::size_t>(child)] = w + s * ds[static_cast<std::size_t>(child)];
        }
    }
    out.evaluations = en.evals;
    return out;
}

}  // namespace ncu
