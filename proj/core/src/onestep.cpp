#include "ncu/onestep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ncu/errors.hpp"

namespace ncu {

double choose_eta(double gamma_plus, double gamma_minus) {
    return std::min(0.999, 0.5 * (gamma_plus / gamma_minus + 1.0));
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double neg_part(double z) { return z < 0.0 ? -z : 0.0; }

struct Candidate {
    double value = -std::numeric_limits<double>::infinity();
    std::vector<double> y;
};

/// Champion order: larger value wins outside a relative tie window; inside
/// it, smaller |y| wins, then the lexicographically larger point.
bool better(const Candidate& a, const Candidate& b) {
    const double tie = 1e-9 * (1.0 + std::max(std::abs(a.value), std::abs(b.value)));
    if (a.value > b.value + tie) return true;
    if (b.value > a.value + tie) return false;
    const double na = norm(a.y), nb = norm(b.y);
    if (na < nb - 1e-12) return true;
    if (nb < na - 1e-12) return false;
    return std::lexicographical_compare(b.y.begin(), b.y.end(), a.y.begin(), a.y.end());
}

std::vector<double> log_range(double lo, double hi, int n) {
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(n));
    const double r = std::log(hi / lo);
    for (int i = 0; i < n; ++i) g.push_back(lo * std::exp(r * i / (n - 1)));
    return g;
}

}  // namespace

OneStepProblem::OneStepProblem(std::vector<ChildOutcome> children, double delta, double kappa,
                               double gamma_plus, double gamma_minus, double growth_c,
                               double nbound)
    : children_(std::move(children)),
      delta_(delta),
      kappa_(kappa),
      gamma_plus_(gamma_plus),
      gamma_minus_(gamma_minus),
      growth_c_(growth_c),
      nbound_(nbound) {
    if (children_.empty())
        throw ValidationError("onestep_invalid", "one-step problem needs at least one child");
    dim_ = static_cast<int>(children_[0].y.size());
    double psum = 0.0;
    for (const auto& ch : children_) {
        if (static_cast<int>(ch.y.size()) != dim_)
            throw ValidationError("onestep_invalid", "children disagree on dimension");
        if (!(ch.prob > 0.0))
            throw ValidationError("onestep_invalid", "child probabilities must be positive");
        if (!ch.value) throw ValidationError("onestep_invalid", "child needs a value function");
        psum += ch.prob;
    }
    if (std::abs(psum - 1.0) > 1e-9)
        throw ValidationError("onestep_invalid", "child probabilities must sum to 1");
    if (!(gamma_plus_ > 0.0) || !(gamma_minus_ > 0.0) || !(gamma_plus_ < gamma_minus_))
        throw ValidationError("illposed_exponents", "need 0 < gamma_plus < gamma_minus");
    if (!(growth_c_ > 0.0) || !(nbound_ > 0.0))
        throw ValidationError("onestep_invalid", "growth constant and wealth bound must be positive");
    if (dim_ > 0 && (!(delta_ > 0.0) || !(kappa_ > 0.0) || kappa_ > 1.0))
        throw ValidationError("onestep_invalid", "need delta > 0 and kappa in (0, 1]");
    eta_ = choose_eta(gamma_plus_, gamma_minus_);
}

OneStepProblem OneStepProblem::shared_value(
    const std::vector<std::pair<double, std::vector<double>>>& moves,
    std::function<double(double)> value, double delta, double kappa, double gamma_plus,
    double gamma_minus, double growth_c, double nbound) {
    std::vector<ChildOutcome> children;
    children.reserve(moves.size());
    for (const auto& [p, y] : moves) children.push_back({p, y, value, nullptr});
    return OneStepProblem(std::move(children), delta, kappa, gamma_plus, gamma_minus, growth_c,
                          nbound);
}

double OneStepProblem::envelope_L() const {
    double s = 0.0;
    for (const auto& ch : children_) s += ch.prob * std::max(ch.value(1.0 + norm(ch.y)), 0.0);
    return s;
}

double OneStepProblem::k0(double xplus) const {
    const double z = (xplus + nbound_) / delta_;
    return std::max({1.0, xplus, std::pow(z, 1.0 / (1.0 - eta_)), z});
}

double OneStepProblem::k1(double xplus) const {
    const double e = 1.0 / (eta_ * gamma_minus_ - gamma_plus_);
    const double l = envelope_L();
    return std::max({k0(xplus), std::pow(6.0 * l / kappa_, e), std::pow(6.0 * growth_c_ / kappa_, e)});
}

double OneStepProblem::k2(double xminus) const {
    double ev = 0.0;
    for (const auto& ch : children_) ev += ch.prob * ch.value(-xminus);
    return std::pow(6.0 * neg_part(ev) / kappa_, 1.0 / (eta_ * gamma_minus_));
}

double OneStepProblem::radius(double x) const {
    if (dim_ == 0) return 0.0;
    return std::max(k1(std::max(x, 0.0)), k2(std::max(-x, 0.0)));
}

double OneStepProblem::ktilde1() const {
    const double e = 1.0 / (eta_ * gamma_minus_ - gamma_plus_);
    const double l = envelope_L();
    const double z = nbound_ / delta_;
    return std::max({1.0, z, std::pow(z, 1.0 / (1.0 - eta_)), std::pow(8.0 * l / kappa_, e),
                     std::pow(8.0 * growth_c_ / kappa_, e)});
}

double OneStepProblem::nprime(double big_i) const {
    if (!(big_i >= 0.5))
        throw ValidationError("invalid_target", "wealth bound propagation needs I >= 1/2");
    if (dim_ == 0) {
        // No strategies here: push wealth down until the plain conditional
        // expectation crosses -I, then bisect. Returns the safe (crossed)
        // side.
        double lo = 0.0;
        double hi = std::max(1.0, nbound_);
        int guard = 0;
        while (bellman(-hi, {}) > -big_i) {
            lo = hi;
            hi *= 2.0;
            if (++guard > 300)
                throw ExecutionError(
                    "nbound_unreachable",
                    "wealth bound propagation: conditional expectation never reaches -I");
        }
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (bellman(-mid, {}) > -big_i)
                lo = mid;
            else
                hi = mid;
        }
        return hi;
    }
    const double kt = ktilde1();
    double ev = 0.0;
    for (const auto& ch : children_) ev += ch.prob * std::max(ch.value(kt * norm(ch.y)), 0.0);
    return nbound_ * std::pow((2.0 / kappa_) * (big_i + ev), 1.0 / gamma_minus_);
}

double OneStepProblem::bellman(double x, std::span<const double> y) const {
    double s = 0.0;
    for (const auto& ch : children_) s += ch.prob * ch.value(x + dot(y, ch.y));
    return s;
}

OneStepSolution OneStepProblem::solve(double x) const {
    OneStepSolution sol;
    if (dim_ == 0) {
        sol.value = bellman(x, {});
        sol.xi = {};
        for (const auto& ch : children_) {
            if (ch.covers && !ch.covers(x)) sol.out_of_window = true;
        }
        return sol;
    }

    const double big_k = radius(x);
    sol.radius = big_k;

    // Signed log-spaced axis grid: half the magnitudes resolve stakes up to
    // 1 + |x|, the other half reach out to the certified radius.
    const int mags = dim_ <= 2 ? 64 : 32;
    const int half = mags / 2;
    const double mlo = big_k * (dim_ == 1 ? 1e-9 : 1e-6);
    const double mmid = std::clamp(1.0 + std::abs(x), 2.0 * mlo, 0.5 * big_k);
    std::vector<double> magnitudes = log_range(mlo, mmid, half);
    {
        std::vector<double> outer = log_range(mmid, big_k, half + 1);
        magnitudes.insert(magnitudes.end(), outer.begin() + 1, outer.end());
    }
    // Child wealth crosses zero at |y| = |x / Y_jk|; there the utility kink
    // carves the profile into pieces that are individually concave whenever
    // the children read the utility directly. Pin these magnitudes onto the
    // ladder so refinement brackets never straddle a kink, and remember them
    // as segment boundaries for the seeding below.
    std::vector<double> kink_mags;
    for (const auto& ch : children_) {
        for (double yk : ch.y) {
            if (yk == 0.0 || x == 0.0) continue;
            const double m = std::abs(x / yk);
            if (m > mlo && m < big_k) kink_mags.push_back(m);
        }
    }
    std::sort(kink_mags.begin(), kink_mags.end());
    for (double& m : kink_mags) {
        auto at = std::lower_bound(magnitudes.begin(), magnitudes.end(), m);
        if (at != magnitudes.end() && *at <= m * (1.0 + 1e-12)) {
            m = *at;  // coincides with a ladder point; reuse it as boundary
            continue;
        }
        if (at != magnitudes.begin() && *(at - 1) >= m * (1.0 - 1e-12)) {
            m = *(at - 1);
            continue;
        }
        magnitudes.insert(at, m);
    }
    std::vector<double> axis;
    axis.reserve(2 * magnitudes.size() + 1);
    for (auto it = magnitudes.rbegin(); it != magnitudes.rend(); ++it) axis.push_back(-*it);
    axis.push_back(0.0);
    for (double m : magnitudes) axis.push_back(m);

    // The zero stake is always admissible, so the champion never falls
    // below the do-nothing value.
    Candidate champ{bellman(x, std::vector<double>(static_cast<std::size_t>(dim_), 0.0)),
                    std::vector<double>(static_cast<std::size_t>(dim_), 0.0)};

    if (dim_ == 1) {
        std::vector<double> vals(axis.size());
        for (std::size_t i = 0; i < axis.size(); ++i) {
            vals[i] = bellman(x, std::span(&axis[i], 1));
            Candidate c{vals[i], {axis[i]}};
            if (better(c, champ)) champ = c;
        }

        // Brackets to refine, from two complementary rules. Local maxima of
        // the coarse profile (leftmost point of a tied plateau) catch every
        // basin the grid resolves; ranking by raw value instead would let a
        // flat region crowd out a narrow basin. But a basin lying between
        // two kink crossings can be invisible to that rule: both samples
        // straddling its peak may score below their outer neighbors. Between
        // consecutive crossings the profile is concave (for utility-reading
        // children), so the best sample of each such segment brackets that
        // segment's peak; add one bracket per segment unconditionally.
        std::vector<std::pair<double, double>> brackets;
        std::vector<std::size_t> maxima;
        for (std::size_t i = 0; i < vals.size(); ++i) {
            const bool up_left = i == 0 || vals[i] > vals[i - 1];
            const bool up_right = i + 1 == vals.size() || vals[i] >= vals[i + 1];
            if (up_left && up_right) maxima.push_back(i);
        }
        const std::size_t keep = std::min<std::size_t>(8, maxima.size());
        std::partial_sort(maxima.begin(), maxima.begin() + static_cast<std::ptrdiff_t>(keep),
                          maxima.end(),
                          [&](std::size_t a, std::size_t b) { return vals[a] > vals[b]; });
        for (std::size_t s = 0; s < keep; ++s) {
            const std::size_t i = maxima[s];
            brackets.emplace_back(axis[i == 0 ? 0 : i - 1],
                                  axis[std::min(i + 1, axis.size() - 1)]);
        }

        std::vector<std::size_t> bounds{0, axis.size() - 1};
        bounds.push_back(static_cast<std::size_t>(
            std::lower_bound(axis.begin(), axis.end(), 0.0) - axis.begin()));
        for (double m : kink_mags) {
            for (double signed_m : {-m, m}) {
                const auto at = std::lower_bound(axis.begin(), axis.end(),
                                                 signed_m * (1.0 + (signed_m < 0 ? 1e-12 : -1e-12)));
                if (at != axis.end()) bounds.push_back(static_cast<std::size_t>(at - axis.begin()));
            }
        }
        std::sort(bounds.begin(), bounds.end());
        bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
        for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
            const std::size_t lo = bounds[b], hi = bounds[b + 1];
            if (hi - lo < 2) continue;
            std::size_t best = lo;
            for (std::size_t i = lo + 1; i <= hi; ++i)
                if (vals[i] > vals[best]) best = i;
            brackets.emplace_back(axis[best == lo ? lo : best - 1],
                                  axis[best == hi ? hi : best + 1]);
        }

        const double gr = 0.6180339887498949;
        for (const auto& [a0, b0] : brackets) {
            double a = a0, b = b0;
            double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
            double yv[1] = {c1};
            double f1 = bellman(x, std::span(yv, 1));
            yv[0] = c2;
            double f2 = bellman(x, std::span(yv, 1));
            for (int it = 0; it < 200 && (b - a) > 1e-13 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
                if (f1 < f2) {
                    a = c1;
                    c1 = c2;
                    f1 = f2;
                    c2 = a + gr * (b - a);
                    yv[0] = c2;
                    f2 = bellman(x, std::span(yv, 1));
                } else {
                    b = c2;
                    c2 = c1;
                    f2 = f1;
                    c1 = b - gr * (b - a);
                    yv[0] = c1;
                    f1 = bellman(x, std::span(yv, 1));
                }
            }
            yv[0] = 0.5 * (a + b);
            Candidate ref{bellman(x, std::span(yv, 1)), {yv[0]}};
            if (better(ref, champ)) champ = ref;
        }
    } else {
        // Cartesian lattice over the axes, filtered to the certified ball.
        // Out-of-ball cells keep -inf so they never seed or win.
        const std::size_t n_axis = axis.size();
        const std::size_t ud = static_cast<std::size_t>(dim_);
        std::size_t total = 1;
        for (int i = 0; i < dim_; ++i) total *= n_axis;
        std::vector<double> vals(total, -std::numeric_limits<double>::infinity());
        std::vector<double> point(ud, 0.0);
        std::vector<std::size_t> idx(ud, 0);
        for (std::size_t f = 0; f < total; ++f) {
            for (std::size_t i = 0; i < ud; ++i) point[i] = axis[idx[i]];
            if (norm(point) <= big_k) {
                vals[f] = bellman(x, point);
                Candidate c{vals[f], point};
                if (better(c, champ)) champ = c;
            }
            for (std::size_t k = 0; k < ud; ++k) {
                if (++idx[k] < n_axis) break;
                idx[k] = 0;
            }
        }
        // Lattice local maxima as seeds, one per tied plateau: strictly above
        // lower-index neighbours, at least the higher-index ones.
        std::vector<std::size_t> seeds;
        std::vector<std::ptrdiff_t> off(ud, -1);
        std::vector<std::size_t> cell(ud, 0);
        for (std::size_t f = 0; f < total; ++f) {
            if (vals[f] == -std::numeric_limits<double>::infinity()) {
                for (std::size_t k = 0; k < ud; ++k) {
                    if (++cell[k] < n_axis) break;
                    cell[k] = 0;
                }
                continue;
            }
            bool is_max = true;
            std::fill(off.begin(), off.end(), -1);
            while (is_max) {
                bool all_zero = true;
                for (auto d : off) {
                    if (d != 0) all_zero = false;
                }
                bool in_range = true;
                std::size_t nf = 0;
                for (std::size_t k = ud; k-- > 0;) {
                    const auto j = static_cast<std::ptrdiff_t>(cell[k]) + off[k];
                    if (j < 0 || j >= static_cast<std::ptrdiff_t>(n_axis)) {
                        in_range = false;
                        break;
                    }
                    nf = nf * n_axis + static_cast<std::size_t>(j);
                }
                if (!all_zero && in_range) {
                    if (nf < f ? !(vals[f] > vals[nf]) : !(vals[f] >= vals[nf])) is_max = false;
                }
                std::size_t k = 0;
                for (; k < ud; ++k) {
                    if (++off[k] <= 1) break;
                    off[k] = -1;
                }
                if (k == ud) break;
            }
            if (is_max) seeds.push_back(f);
            for (std::size_t k = 0; k < ud; ++k) {
                if (++cell[k] < n_axis) break;
                cell[k] = 0;
            }
        }
        const std::size_t keep = std::min<std::size_t>(8, seeds.size());
        std::partial_sort(seeds.begin(), seeds.begin() + static_cast<std::ptrdiff_t>(keep),
                          seeds.end(),
                          [&](std::size_t a, std::size_t b) { return vals[a] > vals[b]; });
        // Pattern search with diagonal moves from each seed.
        for (std::size_t s = 0; s < keep; ++s) {
            std::vector<double> y(ud);
            {
                std::size_t f = seeds[s];
                for (std::size_t k = 0; k < ud; ++k) {
                    y[k] = axis[f % n_axis];
                    f /= n_axis;
                }
            }
            double val = vals[seeds[s]];
            double step = 0.3 * (norm(y) + mlo);
            int evals = 0;
            std::vector<double> cand(y.size());
            while (step > 1e-13 * (1.0 + norm(y)) && evals < 20000) {
                double best_val = val;
                std::vector<double> best_y;
                std::vector<int> dir(y.size(), -1);
                bool more = true;
                while (more) {
                    bool all_zero = true;
                    for (int d : dir) {
                        if (d != 0) all_zero = false;
                    }
                    if (!all_zero) {
                        for (std::size_t i = 0; i < y.size(); ++i) cand[i] = y[i] + step * dir[i];
                        if (norm(cand) <= big_k) {
                            const double v = bellman(x, cand);
                            ++evals;
                            if (v > best_val) {
                                best_val = v;
                                best_y = cand;
                            }
                        }
                    }
                    std::size_t k = 0;
                    for (; k < dir.size(); ++k) {
                        if (++dir[k] <= 1) break;
                        dir[k] = -1;
                    }
                    more = k < dir.size();
                }
                if (!best_y.empty()) {
                    y = best_y;
                    val = best_val;
                } else {
                    step *= 0.5;
                }
            }
            Candidate ref{val, y};
            if (better(ref, champ)) champ = ref;
        }
    }

    sol.value = champ.value;
    sol.xi = champ.y;
    for (const auto& ch : children_) {
        if (ch.covers && !ch.covers(x + dot(sol.xi, ch.y))) sol.out_of_window = true;
    }
    return sol;
}

}  // namespace ncu
