#include "ncu/noarb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ncu/errors.hpp"
#include "ncu/simplex.hpp"

namespace ncu {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace

std::vector<double> SubspaceBasis::to_coords(std::span<const double> xi) const {
    std::vector<double> y(vectors.size());
    for (std::size_t k = 0; k < vectors.size(); ++k) y[k] = dot(xi, vectors[k]);
    return y;
}

std::vector<double> SubspaceBasis::from_coords(std::span<const double> y) const {
    if (vectors.empty()) return {};
    std::vector<double> xi(vectors[0].size(), 0.0);
    for (std::size_t k = 0; k < vectors.size(); ++k) {
        for (std::size_t i = 0; i < xi.size(); ++i) xi[i] += y[k] * vectors[k][i];
    }
    return xi;
}

std::vector<double> project_onto_D(std::span<const double> xi, const SubspaceBasis& basis) {
    if (basis.dim() == 0) return std::vector<double>(xi.size(), 0.0);
    const std::vector<double> y = basis.to_coords(xi);
    return basis.from_coords(y);
}

SubspaceBasis support_subspace(const ScenarioTree& tree, int node) {
    SubspaceBasis basis;
    const Node& nd = tree.node(node);
    for (int child : nd.children) {
        std::vector<double> v = tree.delta_s(child);
        const double scale = std::max(1.0, norm(v));
        // Modified Gram-Schmidt with one reorthogonalization pass.
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& e : basis.vectors) {
                const double r = dot(v, e);
                for (std::size_t i = 0; i < v.size(); ++i) v[i] -= r * e[i];
            }
        }
        const double rn = norm(v);
        if (rn > 1e-10 * scale) {
            for (double& x : v) x /= rn;
            basis.vectors.push_back(std::move(v));
        }
    }
    return basis;
}

NaCheck check_na(const ScenarioTree& tree) {
    const int d = tree.dim();
    for (int t = 0; t < tree.horizon(); ++t) {
        for (int idx : tree.at_depth(t)) {
            const Node& nd = tree.node(idx);
            if (nd.children.empty()) continue;

            std::vector<std::vector<double>> ds;
            ds.reserve(nd.children.size());
            for (int child : nd.children) ds.push_back(tree.delta_s(child));

            // Arbitrage at this node iff some xi in [-1,1]^d has
            // xi . dS_j >= 0 for all children with a strict inequality.
            // Substituting u = xi + 1 in [0,2]^d gives a standard-form LP.
            const std::size_t m = ds.size();
            std::vector<double> c(d, 0.0);
            double shift = 0.0;
            for (const auto& s : ds) {
                for (int i = 0; i < d; ++i) c[static_cast<std::size_t>(i)] += s[static_cast<std::size_t>(i)];
            }
            for (double ci : c) shift -= ci;

            std::vector<std::vector<double>> A(m + static_cast<std::size_t>(d),
                                               std::vector<double>(static_cast<std::size_t>(d), 0.0));
            std::vector<double> b(m + static_cast<std::size_t>(d), 0.0);
            for (std::size_t j = 0; j < m; ++j) {
                double row_sum = 0.0;
                for (int i = 0; i < d; ++i) {
                    A[j][static_cast<std::size_t>(i)] = -ds[j][static_cast<std::size_t>(i)];
                    row_sum += ds[j][static_cast<std::size_t>(i)];
                }
                b[j] = -row_sum;
            }
            for (int i = 0; i < d; ++i) {
                A[m + static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
                b[m + static_cast<std::size_t>(i)] = 2.0;
            }

            const LpResult lp = simplex_max(c, A, b);
            if (lp.status != LpStatus::optimal)
                throw ExecutionError("lp_failed", "no-arbitrage check: LP did not solve at node " + nd.id);
            const double gain = lp.value + shift;
            if (gain > 1e-9) {
                NaWitness w;
                w.node_id = nd.id;
                std::vector<double> xi(lp.x);
                for (double& x : xi) x -= 1.0;
                const SubspaceBasis basis = support_subspace(tree, idx);
                std::vector<double> proj = project_onto_D(xi, basis);
                const double pn = norm(proj);
                if (pn > 1e-12) {
                    for (double& x : proj) x /= pn;
                    w.xi = std::move(proj);
                } else {
                    w.xi = std::move(xi);
                }
                return {false, std::move(w)};
            }
        }
    }
    return {true, std::nullopt};
}

namespace {

// Worst one-step loss of the unit direction with D-coordinates y:
// g(y) = max over children of -(y . coords(dS_child)).
double worst_loss(const std::vector<std::vector<double>>& coords, std::span<const double> y) {
    double g = -std::numeric_limits<double>::infinity();
    for (const auto& c : coords) g = std::max(g, -dot(y, c));
    return g;
}

double min_on_circle(const std::vector<std::vector<double>>& coords) {
    constexpr int kSteps = 629;  // step < 0.01 rad
    const double two_pi = 2.0 * std::numbers::pi;
    double best_theta = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kSteps; ++i) {
        const double theta = two_pi * i / kSteps;
        const double y[2] = {std::cos(theta), std::sin(theta)};
        const double g = worst_loss(coords, y);
        if (g < best) {
            best = g;
            best_theta = theta;
        }
    }
    // Shrinking-grid refinement around the best angle.
    double width = two_pi / kSteps;
    for (int round = 0; round < 30; ++round) {
        double local_best = best_theta;
        for (int i = -16; i <= 16; ++i) {
            const double theta = best_theta + width * i / 16.0;
            const double y[2] = {std::cos(theta), std::sin(theta)};
            const double g = worst_loss(coords, y);
            if (g < best) {
                best = g;
                local_best = theta;
            }
        }
        best_theta = local_best;
        width *= 0.25;
    }
    return best;
}

double min_on_sphere(const std::vector<std::vector<double>>& coords) {
    constexpr int kThetaSteps = 316;  // polar step < 0.01 rad
    constexpr int kPhiSteps = 629;
    const double pi = std::numbers::pi;
    double best = std::numeric_limits<double>::infinity();
    double best_t = 0.0, best_p = 0.0;
    for (int a = 0; a <= kThetaSteps; ++a) {
        const double theta = pi * a / kThetaSteps;
        const double st = std::sin(theta), ct = std::cos(theta);
        for (int b = 0; b < kPhiSteps; ++b) {
            const double phi = 2.0 * pi * b / kPhiSteps;
            const double y[3] = {st * std::cos(phi), st * std::sin(phi), ct};
            const double g = worst_loss(coords, y);
            if (g < best) {
                best = g;
                best_t = theta;
                best_p = phi;
            }
        }
    }
    // Pattern search over the angle pair, diagonal moves included.
    double step = pi / kThetaSteps;
    while (step > 1e-12) {
        bool improved = false;
        for (int dt = -1; dt <= 1; ++dt) {
            for (int dp = -1; dp <= 1; ++dp) {
                if (dt == 0 && dp == 0) continue;
                const double theta = best_t + step * dt;
                const double phi = best_p + step * dp;
                const double st = std::sin(theta);
                const double y[3] = {st * std::cos(phi), st * std::sin(phi), std::cos(theta)};
                const double g = worst_loss(coords, y);
                if (g < best) {
                    best = g;
                    best_t = theta;
                    best_p = phi;
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return best;
}

}  // namespace

NaConstants na_constants(const ScenarioTree& tree, int node, const SubspaceBasis& basis) {
    const Node& nd = tree.node(node);
    if (nd.children.empty())
        throw ValidationError("not_internal", "na_constants: node " + nd.id + " has no children");

    NaConstants out;
    out.kappa = std::numeric_limits<double>::infinity();
    for (int child : nd.children) out.kappa = std::min(out.kappa, tree.node(child).cond_prob);

    const int k = basis.dim();
    if (k == 0) {
        out.delta = 0.0;
        return out;
    }
    if (k > 3)
        throw ValidationError("unsupported_dim", "na_constants: dim(D) > 3 at node " + nd.id);

    std::vector<std::vector<double>> coords;
    coords.reserve(nd.children.size());
    for (int child : nd.children) coords.push_back(basis.to_coords(tree.delta_s(child)));

    double min_g = 0.0;
    if (k == 1) {
        const double plus[1] = {1.0};
        const double minus[1] = {-1.0};
        min_g = std::min(worst_loss(coords, plus), worst_loss(coords, minus));
    } else if (k == 2) {
        min_g = min_on_circle(coords);
    } else {
        min_g = min_on_sphere(coords);
    }
    out.delta = 0.5 * min_g;
    return out;
}

std::vector<NodeCertificate> certify_tree(const ScenarioTree& tree) {
    const NaCheck na = check_na(tree);
    if (!na.ok)
        throw ValidationError("na_violated",
                              "arbitrage opportunity at node " + na.witness->node_id);

    std::vector<NodeCertificate> certs;
    for (int t = 0; t < tree.horizon(); ++t) {
        for (int idx : tree.at_depth(t)) {
            if (tree.node(idx).children.empty()) continue;
            NodeCertificate cert;
            cert.node_id = tree.node(idx).id;
            cert.node_index = idx;
            cert.basis = support_subspace(tree, idx);
            cert.na_ok = true;
            const NaConstants nc = na_constants(tree, idx, cert.basis);
            cert.delta = nc.delta;
            cert.kappa = nc.kappa;
            certs.push_back(std::move(cert));
        }
    }
    return certs;
}

}  // namespace ncu
