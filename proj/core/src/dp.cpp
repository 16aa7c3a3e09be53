#include "ncu/dp.hpp"

#include <algorithm>
#include <cmath>

#include "ncu/errors.hpp"
#include "ncu/parallel.hpp"

namespace ncu {

WellposedReport check_wellposed(const Utility& u) {
    WellposedReport r;
    r.ae = certify_ae(u);
    r.demo = detect_illposed(u);
    if (!r.ae.order_ok) {
        r.reason = "gamma_plus >= gamma_minus: scaling a favorable stake grows expected utility "
                   "without bound, so no optimizer exists";
    } else if (!r.ae.plus_ok) {
        r.reason = "declared gamma_plus does not dominate the gains growth of the utility";
    } else if (!r.ae.minus_ok) {
        r.reason = "declared gamma_minus is not dominated by the loss growth of the utility";
    } else if (!r.ae.negative_at_xunder) {
        r.reason = "U(-xunder) must be strictly negative";
    } else {
        r.ok = true;
    }
    return r;
}

DpSolver::DpSolver(ScenarioTree tree, Utility utility, SolveConfig cfg)
    : tree_(std::move(tree)), utility_(std::move(utility)), cfg_(cfg) {
    if (tree_.horizon() < 1) throw ValidationError("config", "tree horizon must be at least 1");
    if (!(cfg_.window_lo < cfg_.window_hi)) throw ValidationError("config", "window needs lo < hi");
    if (cfg_.grid_n < 3) throw ValidationError("config", "grid needs at least 3 points");
    if (cfg_.x0 < cfg_.window_lo || cfg_.x0 > cfg_.window_hi)
        throw ValidationError("config", "x0 lies outside the wealth window");
    wellposed_ = check_wellposed(utility_);
    if (!wellposed_.ok) throw ValidationError("illposed", wellposed_.reason);
    growth_c_ = wellposed_.ae.growth_c;
    certs_ = certify_tree(tree_);
    cert_of_node_.assign(tree_.node_count(), -1);
    for (std::size_t i = 0; i < certs_.size(); ++i)
        cert_of_node_[static_cast<std::size_t>(certs_[i].node_index)] = static_cast<int>(i);
}

const OneStepProblem& DpSolver::problem(int node) const {
    if (node < 0 || node >= static_cast<int>(problems_.size()) ||
        !problems_[static_cast<std::size_t>(node)])
        throw ValidationError("no_problem", "no one-step problem at this node");
    return *problems_[static_cast<std::size_t>(node)];
}

double DpSolver::terminal_nbound(double kappa) const {
    const double target = 2.0 * growth_c_ / kappa + 1.0;
    const double ratio = target / (-utility_(-utility_.xunder()));
    // The margin keeps the bound strict after the scaling inequality is
    // applied with equality.
    return utility_.xunder() * std::max(1.0, std::pow(ratio, 1.0 / utility_.gamma_minus())) *
           (1.0 + 1e-6);
}

double DpSolver::child_nprime(int child, double big_i) const {
    return problems_[static_cast<std::size_t>(child)]->nprime(big_i);
}

void DpSolver::make_problem(int node) {
    const Node& nd = tree_.node(node);
    const NodeCertificate& cert = certs_[static_cast<std::size_t>(cert_of_node_[static_cast<std::size_t>(node)])];
    std::vector<ChildOutcome> children;
    children.reserve(nd.children.size());
    auto& coords = child_coords_[static_cast<std::size_t>(node)];
    coords.clear();
    for (int child : nd.children) {
        ChildOutcome ch;
        ch.prob = tree_.node(child).cond_prob;
        ch.y = cert.basis.to_coords(tree_.delta_s(child));
        coords.push_back(ch.y);
        if (tree_.is_leaf(child)) {
            // Terminal payoffs read the utility exactly; no window applies.
            ch.value = [u = &utility_](double w) { return (*u)(w); };
        } else {
            const ValueSlice* s = &slices_[static_cast<std::size_t>(child)];
            ch.value = [s](double w) { return (*s)(w); };
            ch.covers = [s](double w) { return s->covers(w); };
        }
        children.push_back(std::move(ch));
    }
    problems_[static_cast<std::size_t>(node)].emplace(std::move(children), cert.delta, cert.kappa,
                                                      utility_.gamma_plus(), utility_.gamma_minus(),
                                                      growth_c_, nbound_[static_cast<std::size_t>(node)]);
}

SolveOutput DpSolver::run() {
    const std::size_t n_nodes = tree_.node_count();
    slices_.assign(n_nodes, ValueSlice());
    nbound_.assign(n_nodes, 0.0);
    problems_.assign(n_nodes, std::nullopt);
    child_coords_.assign(n_nodes, {});

    SolveOutput out;
    out.ae = wellposed_.ae;
    out.growth_c = growth_c_;
    out.certificates = certs_;

    const double lo = cfg_.window_lo, hi = cfg_.window_hi;
    const std::size_t gn = cfg_.grid_n;
    const double step = (hi - lo) / static_cast<double>(gn - 1);

    for (int leaf : tree_.at_depth(tree_.horizon())) {
        slices_[static_cast<std::size_t>(leaf)] =
            ValueSlice::sample(lo, hi, gn, [&](double x) { return utility_(x); });
    }

    for (int t = tree_.horizon() - 1; t >= 0; --t) {
        const auto& level = tree_.at_depth(t);

        // Wealth bounds first: they feed the strategy radius of this depth.
        for (int node : level) {
            const NodeCertificate& cert =
                certs_[static_cast<std::size_t>(cert_of_node_[static_cast<std::size_t>(node)])];
            if (t == tree_.horizon() - 1) {
                nbound_[static_cast<std::size_t>(node)] = terminal_nbound(cert.kappa);
            } else {
                const double big_i = (2.0 * growth_c_ / cert.kappa + 1.0) * (1.0 + 1e-6);
                const Node& nd = tree_.node(node);
                if (cfg_.n_variant == SolveConfig::NVariant::max_child) {
                    double nb = 0.0;
                    for (int child : nd.children) nb = std::max(nb, child_nprime(child, big_i));
                    nbound_[static_cast<std::size_t>(node)] = nb;
                } else {
                    double acc = 0.0;
                    for (int child : nd.children)
                        acc += tree_.node(child).cond_prob * child_nprime(child, big_i);
                    nbound_[static_cast<std::size_t>(node)] = 2.0 * acc / cert.kappa;
                }
            }
        }
        for (int node : level) make_problem(node);

        std::vector<std::vector<double>> vals(level.size(), std::vector<double>(gn));
        parallel_for(level.size() * gn, [&](std::size_t k) {
            const std::size_t ni = k / gn, gi = k % gn;
            const double x = lo + step * static_cast<double>(gi);
            vals[ni][gi] = problems_[static_cast<std::size_t>(level[ni])]->solve(x).value;
        });
        for (std::size_t ni = 0; ni < level.size(); ++ni)
            slices_[static_cast<std::size_t>(level[ni])] = ValueSlice(lo, hi, std::move(vals[ni]));
    }

    out.slices = slices_;
    out.nbound = nbound_;

    // Strategy extraction re-solves every visited node at its exact wealth;
    // the stored slices only serve as a consistency reference.
    std::vector<double> wealth(n_nodes, 0.0);
    wealth[static_cast<std::size_t>(tree_.root())] = cfg_.x0;
    out.path.reserve(n_nodes);
    for (int t = 0; t <= tree_.horizon(); ++t) {
        for (int node : tree_.at_depth(t)) {
            PathStep ps;
            ps.node = node;
            ps.depth = t;
            ps.wealth = wealth[static_cast<std::size_t>(node)];
            const ValueSlice& slice = slices_[static_cast<std::size_t>(node)];
            if (!tree_.is_leaf(node)) {
                const OneStepProblem& p = *problems_[static_cast<std::size_t>(node)];
                const OneStepSolution sol = p.solve(ps.wealth);
                const NodeCertificate& cert =
                    certs_[static_cast<std::size_t>(cert_of_node_[static_cast<std::size_t>(node)])];
                ps.xi = cert.basis.from_coords(sol.xi);
                ps.value_exact = sol.value;
                ps.value_interp = slice(ps.wealth);
                ps.residual = std::abs(sol.value - ps.value_interp);
                ps.radius = sol.radius;
                ps.extrapolated = sol.out_of_window || !slice.covers(ps.wealth);
                const Node& nd = tree_.node(node);
                const auto& coords = child_coords_[static_cast<std::size_t>(node)];
                for (std::size_t j = 0; j < nd.children.size(); ++j) {
                    double inc = 0.0;
                    for (std::size_t i = 0; i < coords[j].size(); ++i) inc += sol.xi[i] * coords[j][i];
                    wealth[static_cast<std::size_t>(nd.children[j])] = ps.wealth + inc;
                }
                if (node == tree_.root()) {
                    out.value_at_x0 = sol.value;
                    out.root_xi = ps.xi;
                }
                out.max_residual = std::max(out.max_residual, ps.residual);
                out.extrapolated = out.extrapolated || ps.extrapolated;
            } else {
                ps.value_exact = utility_(ps.wealth);
                ps.value_interp = slice(ps.wealth);
                ps.extrapolated = !slice.covers(ps.wealth);
            }
            out.path.push_back(std::move(ps));
        }
    }

    double eu = 0.0;
    for (int leaf : tree_.at_depth(tree_.horizon()))
        eu += tree_.path_prob(leaf) * utility_(wealth[static_cast<std::size_t>(leaf)]);
    out.expected_terminal_utility = eu;
    out.extraction_gap = std::abs(eu - out.value_at_x0);

    double ib = 0.0;
    for (int t = 0; t < tree_.horizon(); ++t) {
        for (int node : tree_.at_depth(t))
            ib = std::max(ib, slices_[static_cast<std::size_t>(node)].interp_error_bound());
    }
    out.interp_bound = ib;
    out.residual_tolerance = 5.0 * (ib + 1e-8 * (1.0 + std::abs(out.value_at_x0)));

    out.envelopes.resize(static_cast<std::size_t>(tree_.horizon()) + 1);
    for (int t = 0; t <= tree_.horizon(); ++t) {
        DepthEnvelope env;
        for (int node : tree_.at_depth(t)) {
            const ValueSlice& slice = slices_[static_cast<std::size_t>(node)];
            const auto& v = slice.values();
            for (std::size_t i = 0; i < v.size(); ++i) {
                const double x = slice.grid_point(i);
                env.c_plus = std::max(
                    env.c_plus, std::max(v[i], 0.0) / std::pow(1.0 + std::abs(x), utility_.gamma_plus()));
                env.c_minus = std::max(
                    env.c_minus,
                    std::max(-v[i], 0.0) / std::pow(1.0 + std::abs(x), utility_.gamma_minus()));
            }
        }
        out.envelopes[static_cast<std::size_t>(t)] = env;
    }
    return out;
}

}  // namespace ncu
