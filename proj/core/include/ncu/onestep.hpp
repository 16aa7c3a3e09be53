#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace ncu {

/// One child outcome of a one-step problem: conditional probability, price
/// increment in D-coordinates, and that child's continuation value. covers
/// may be null; when present it reports whether a wealth argument lies
/// inside the child's trusted (non-extrapolated) range.
struct ChildOutcome {
    double prob = 0.0;
    std::vector<double> y;
    std::function<double(double)> value;
    std::function<bool(double)> covers;
};

struct OneStepSolution {
    double value = 0.0;
    std::vector<double> xi;      // optimal strategy in D-coordinates
    double radius = 0.0;         // search ball radius K(x) that was used
    bool out_of_window = false;  // a child evaluation at the optimum was extrapolated
};

/// Exponent eta strictly between gamma_plus/gamma_minus and 1, used by the
/// a-priori strategy bounds.
double choose_eta(double gamma_plus, double gamma_minus);

/// maximize over xi in D of G(x, xi) = E(V(x + xi . dS) | H) for one node,
/// with quantitative no-arbitrage data (delta, kappa), growth data
/// (gamma_plus, gamma_minus, growth_c), and a wealth bound N with
/// E(V(-N) | H) <= -1/2. The optimum is certified to lie in a computable
/// ball |xi| <= K(x): outside it, doing nothing is at least as good.
class OneStepProblem {
public:
    OneStepProblem(std::vector<ChildOutcome> children, double delta, double kappa,
                   double gamma_plus, double gamma_minus, double growth_c, double nbound);

    /// All children read the same continuation value function.
    static OneStepProblem shared_value(
        const std::vector<std::pair<double, std::vector<double>>>& moves,
        std::function<double(double)> value, double delta, double kappa, double gamma_plus,
        double gamma_minus, double growth_c, double nbound);

    int dim() const noexcept { return dim_; }
    const std::vector<ChildOutcome>& children() const noexcept { return children_; }
    double delta() const noexcept { return delta_; }
    double kappa() const noexcept { return kappa_; }
    double gamma_plus() const noexcept { return gamma_plus_; }
    double gamma_minus() const noexcept { return gamma_minus_; }
    double growth_c() const noexcept { return growth_c_; }
    double nbound() const noexcept { return nbound_; }
    double eta() const noexcept { return eta_; }

    /// E(V^+(1 + |Y|) | H).
    double envelope_L() const;

    /// Strategy radius ingredients; k-names follow the a-priori bound chain.
    double k0(double xplus) const;
    double k1(double xplus) const;
    double k2(double xminus) const;
    /// K(x) = max(k1(x^+), k2(x^-)); any |xi| > K(x) is beaten by xi = 0.
    double radius(double x) const;

    /// Stake bound entering the wealth-bound propagation.
    double ktilde1() const;
    /// N' with E(V(-N') | H) <= -I for the given I >= 1/2.
    double nprime(double big_i) const;

    /// G(x, y) = E(V(x + y . dS) | H) with y in D-coordinates.
    double bellman(double x, std::span<const double> y) const;

    /// Multistart coarse log grid over the certified ball followed by local
    /// refinement. Ties prefer smaller |xi|, then lexicographically larger.
    OneStepSolution solve(double x) const;

private:
    std::vector<ChildOutcome> children_;
    int dim_ = 0;
    double delta_ = 0.0, kappa_ = 0.0;
    double gamma_plus_ = 0.0, gamma_minus_ = 0.0;
    double growth_c_ = 0.0, nbound_ = 0.0;
    double eta_ = 0.0;
};

}  // namespace ncu
