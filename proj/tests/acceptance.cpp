// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit when any
// criterion fails. Tolerances are pinned here, next to the checks they
// guard, so a change to either is visible in one diff.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ncu/dp.hpp"
#include "ncu/errors.hpp"
#include "ncu/noarb.hpp"
#include "ncu/oracle.hpp"
#include "ncu/tree.hpp"
#include "ncu/utility.hpp"

using namespace ncu;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string fixture(const std::string& name) { return read_file(std::string(NCU_FIXTURE_DIR) + "/" + name); }
std::string fixture_path(const std::string& name) { return std::string(NCU_FIXTURE_DIR) + "/" + name; }

/// Runs the installed CLI, returns its exit code; stderr goes to err_path.
int run_cli(const std::string& args, const std::string& err_path) {
    const std::string cmd =
        std::string("\"") + NCU_CLI_PATH + "\" " + args + " >/dev/null 2>\"" + err_path + "\"";
    const int rc = std::system(cmd.c_str());
    if (rc < 0) return -1;
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::filesystem::path scratch_dir(const std::string& leaf) {
    auto dir = std::filesystem::temp_directory_path() / "ncu_acceptance" / leaf;
    std::filesystem::create_directories(dir);
    return dir;
}

struct Result {
    bool pass = true;
    std::string detail;

    void fail(const std::string& why) {
        pass = false;
        if (!detail.empty()) detail += "; ";
        detail += why;
    }
};

/// A solved fixture kept alive so per-node subproblems stay accessible.
struct Solved {
    std::string name;
    std::unique_ptr<DpSolver> solver;
    SolveOutput out;
    int horizon = 0;
    int dim = 0;
};

Solved solve_fixture(const std::string& tree_file, const std::string& utility_file, double x0,
                     double lo, double hi, std::size_t grid) {
    auto tree = ScenarioTree::load(fixture(tree_file));
    auto u = Utility::load(fixture(utility_file));
    SolveConfig cfg;
    cfg.x0 = x0;
    cfg.window_lo = lo;
    cfg.window_hi = hi;
    cfg.grid_n = grid;
    Solved s;
    s.name = tree_file;
    s.horizon = tree.horizon();
    s.dim = tree.dim();
    s.solver = std::make_unique<DpSolver>(std::move(tree), std::move(u), cfg);
    s.out = s.solver->run();
    return s;
}

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------- criterion 1

Result criterion_illposed_series() {
    Result r;
    auto u = Utility::load(fixture("utility_twopiece_steep.json"));
    auto demo = detect_illposed(u);
    if (!demo.illposed) r.fail("steep pair not flagged ill-posed");
    if (demo.p != 0.5) r.fail("demo probability is " + fmt(demo.p) + ", want 1/2");

    // term(n) must equal (n^1.5 - n^0.5)/2 to 1e-12 relative, n = 1..1e4.
    double worst = 0.0;
    for (int n = 1; n <= 10000; ++n) {
        const double closed = 0.5 * (std::pow(n, 1.5) - std::pow(n, 0.5));
        const double got = demo.term(n);
        const double err = std::abs(got - closed) / std::max(1.0, std::abs(closed));
        worst = std::max(worst, err);
    }
    if (worst > 1e-12) r.fail("series deviates from (n^a - n^b)/2 by " + fmt(worst));

    // Unbounded increasing: strictly monotone from n0 on, with real growth.
    for (int n = std::max(1, demo.n0); n < 10000; ++n)
        if (!(demo.term(n + 1) > demo.term(n))) {
            r.fail("series not strictly increasing at n=" + std::to_string(n));
            break;
        }
    if (!(demo.term(10000) > 1e5)) r.fail("series fails to grow: term(1e4)=" + fmt(demo.term(10000)));

    // The solver itself must refuse the gamma_plus >= gamma_minus regime
    // with exit code 1 and an "illposed" error object.
    for (const char* bad : {"utility_twopiece_illposed.json", "utility_twopiece_steep.json"}) {
        const auto dir = scratch_dir(std::string("c1_") + bad);
        const auto err = (dir / "stderr.txt").string();
        const int rc = run_cli("solve --tree \"" + fixture_path("tree_binomial_t1.json") +
                                   "\" --utility \"" + fixture_path(bad) + "\" --output \"" +
                                   dir.string() + "\"",
                               err);
        if (rc != 1) r.fail(std::string(bad) + ": exit code " + std::to_string(rc) + ", want 1");
        if (read_file(err).find("illposed") == std::string::npos)
            r.fail(std::string(bad) + ": stderr lacks illposed error object");
    }
    return r;
}

// ---------------------------------------------------------------- criterion 2

Result criterion_onestep_closed_form(const Solved& t1) {
    Result r;
    const double closed = 0.5 * (std::sqrt(1.0 / 3.0) - std::pow(1.0 / 3.0, 1.5));
    const double rel = std::abs(t1.out.value_at_x0 - closed) / closed;
    if (rel > 1e-9) r.fail("U0(0) off closed form by rel " + fmt(rel));
    if (t1.out.root_xi.size() != 1) {
        r.fail("root strategy dimension " + std::to_string(t1.out.root_xi.size()));
    } else if (std::abs(std::abs(t1.out.root_xi[0]) - 1.0 / 3.0) > 1e-5) {
        r.fail("|xi| = " + fmt(std::abs(t1.out.root_xi[0])) + ", want 1/3 within 1e-5");
    }
    return r;
}

// ---------------------------------------------------------------- criterion 3

Result criterion_ball_probes(const std::vector<Solved>& solved) {
    Result r;
    for (const auto& s : solved) {
        std::size_t checked = 0, violations = 0;
        double worst = 0.0;
        for (const auto& step : s.out.path) {
            if (s.solver->tree().is_leaf(step.node)) continue;
            const auto& prob = s.solver->problem(step.node);
            if (prob.dim() == 0) continue;
            const auto d = static_cast<std::size_t>(prob.dim());
            const double base = prob.bellman(step.wealth, std::vector<double>(d, 0.0));
            std::mt19937_64 rng(0x5eedu + static_cast<std::uint64_t>(step.node));
            std::uniform_real_distribution<double> mag(step.radius, 2.0 * step.radius);
            std::normal_distribution<double> gauss;
            std::vector<double> y(d);
            for (int i = 0; i < 1000; ++i) {
                double nrm = 0.0;
                do {
                    nrm = 0.0;
                    for (auto& v : y) {
                        v = gauss(rng);
                        nrm += v * v;
                    }
                    nrm = std::sqrt(nrm);
                } while (nrm == 0.0);
                const double m = mag(rng);
                for (auto& v : y) v *= m / nrm;
                const double gap = prob.bellman(step.wealth, y) - base;
                ++checked;
                // zero violations; 1e-12 relative absorbs arithmetic noise only
                if (gap > 1e-12 * (1.0 + std::abs(base))) {
                    ++violations;
                    worst = std::max(worst, gap);
                }
            }
        }
        if (violations > 0)
            r.fail(s.name + ": " + std::to_string(violations) + "/" + std::to_string(checked) +
                   " ball probes beat doing nothing (worst " + fmt(worst) + ")");
    }
    return r;
}

// ---------------------------------------------------------------- criterion 4

Result downside_level_checks(const Solved& s) {
    Result r;
    const auto& tree = s.solver->tree();
    std::map<int, const NodeCertificate*> cert_of;
    for (const auto& c : s.out.certificates) cert_of[c.node_index] = &c;

    for (int i = 0; i < static_cast<int>(tree.node_count()); ++i) {
        if (tree.is_leaf(i)) continue;
        const auto* cert = cert_of.at(i);
        const double level = -2.0 * s.out.growth_c / cert->kappa - 1.0;
        const double nb = s.out.nbound[static_cast<std::size_t>(i)];
        for (int c : tree.node(i).children) {
            const double v = s.out.slices[static_cast<std::size_t>(c)](-nb);
            // strict inequality, no tolerance
            if (!(v < level))
                r.fail(s.name + " node " + tree.node(i).id + ": U_t(-N) = " + fmt(v) +
                       " not below " + fmt(level));
        }
    }
    return r;
}

Result criterion_downside_levels(const std::vector<Solved>& solved) {
    Result r;
    for (const auto& s : solved) {
        auto one = downside_level_checks(s);
        if (!one.pass) r.fail(one.detail);

        // One-step fixtures also expose v(-N') <= -I directly.
        if (s.horizon != 1) continue;
        const auto& prob = s.solver->problem(s.solver->tree().root());
        const double big_i = 2.0 * s.out.growth_c / prob.kappa() + 1.0;
        for (double I : {0.5, 1.0, big_i}) {
            const double nprime = prob.nprime(I);
            const double v = prob.solve(-nprime).value;
            // exact terminal evaluators; tolerance covers optimizer
            // termination only (interpolation error is zero at depth 1)
            if (!(v <= -I + 1e-9 * (1.0 + I)))
                r.fail(s.name + ": v(-N'(" + fmt(I) + ")) = " + fmt(v) + " above " + fmt(-I));
        }
    }
    return r;
}

// ---------------------------------------------------------------- criterion 5

Result residual_checks(const Solved& s) {
    Result r;
    // r_t <= 5x the grid interpolation error bound (plus arithmetic floor)
    const double tol = 5.0 * (s.out.interp_bound + 1e-8 * (1.0 + std::abs(s.out.value_at_x0)));
    if (!(s.out.max_residual <= tol))
        r.fail(s.name + ": residual " + fmt(s.out.max_residual) + " above " + fmt(tol));
    if (!(s.out.extraction_gap <= tol))
        r.fail(s.name + ": |E U(V_T) - U0(x0)| = " + fmt(s.out.extraction_gap) + " above " + fmt(tol));
    if (s.out.extrapolated) r.fail(s.name + ": optimal path left the wealth window");
    return r;
}

Result criterion_residuals(const std::vector<Solved>& solved) {
    Result r;
    for (const auto& s : solved) {
        auto one = residual_checks(s);
        if (!one.pass) r.fail(one.detail);
    }
    return r;
}

// ---------------------------------------------------------------- criterion 6

Result criterion_oracle_equivalence() {
    Result r;
    auto s = solve_fixture("tree_binomial_t2.json", "utility_twopiece.json", 0.0, -4.0, 4.0, 40001);
    auto tree = ScenarioTree::load(fixture("tree_binomial_t2.json"));
    auto u = Utility::load(fixture("utility_twopiece.json"));
    auto oracle = brute_force_value(tree, u, 0.0, StrategyGrid{1.0, 4001});

    const double rel = std::abs(s.out.value_at_x0 - oracle.value) / std::abs(oracle.value);
    if (!(rel <= 1e-6))
        r.fail("dp " + fmt(s.out.value_at_x0) + " vs oracle " + fmt(oracle.value) + ": rel " +
               fmt(rel) + " above 1e-6");
    return r;
}

// ---------------------------------------------------------------- criterion 7

Result growth_inequality_probes(const Utility& u, const std::string& name) {
    Result r;
    const double c = u.c();
    std::size_t violations = 0;
    double worst = 0.0;
    auto check = [&](double lhs, double rhs) {
        const double gap = lhs - rhs;
        if (gap > 1e-9 * (1.0 + std::abs(rhs))) {
            ++violations;
            worst = std::max(worst, gap);
        }
    };
    for (int li = 0; li <= 32; ++li) {
        const double lambda = std::pow(10.0, li / 32.0);  // [1, 10]
        for (int xi = 0; xi <= 32; ++xi) {
            const double span = std::pow(1000.0, xi / 32.0);  // [1, 1000]
            const double xp = u.xbar() * span;
            check(u(lambda * xp), std::pow(lambda, u.gamma_plus()) * (u(xp) + c));
            const double xm = -u.xunder() * span;
            check(u(lambda * xm), std::pow(lambda, u.gamma_minus()) * u(xm));
        }
    }
    if (violations > 0)
        r.fail(name + ": " + std::to_string(violations) + " growth-inequality violations (worst " +
               fmt(worst) + ")");
    return r;
}

Result criterion_invariants(const std::vector<Solved>& solved) {
    Result r;
    for (const auto& s : solved) {
        const auto& u = s.solver->utility();
        std::size_t dom_viol = 0, mono_viol = 0;
        for (const auto& slice : s.out.slices) {
            for (std::size_t j = 0; j < slice.size(); ++j) {
                const double ux = u(slice.grid_point(j));
                if (slice.values()[j] < ux - 1e-9 * (1.0 + std::abs(ux))) ++dom_viol;
                if (j > 0 && slice.values()[j] < slice.values()[j - 1]) ++mono_viol;
            }
        }
        if (dom_viol > 0) r.fail(s.name + ": U_t < U at " + std::to_string(dom_viol) + " grid points");
        if (mono_viol > 0) r.fail(s.name + ": slice decreases at " + std::to_string(mono_viol) + " points");
    }
    for (const char* uf :
         {"utility_twopiece.json", "utility_boundedexp.json", "utility_piecewise.json"}) {
        auto one = growth_inequality_probes(Utility::load(fixture(uf)), uf);
        if (!one.pass) r.fail(one.detail);
    }
    return r;
}

// ---------------------------------------------------------------- criterion 8

/// Exact arbitrage reference for lattice-valued increments, d <= 2. The cone
/// {xi : xi . dS_j >= 0 for all j} is rational polyhedral; if any direction
/// earns a strict positive dot somewhere, one of finitely many candidates
/// does: a child increment or a 90-degree rotation of one. Integer dots make
/// every sign exact.
bool reference_arbitrage_at(const std::vector<std::vector<double>>& moves) {
    std::vector<std::vector<double>> candidates;
    const std::size_t d = moves.empty() ? 0 : moves[0].size();
    for (const auto& v : moves) {
        bool zero = true;
        for (double x : v) zero = zero && x == 0.0;
        if (zero) continue;
        candidates.push_back(v);
        std::vector<double> neg(v);
        for (auto& x : neg) x = -x;
        candidates.push_back(neg);
        if (d == 2) {
            candidates.push_back({-v[1], v[0]});
            candidates.push_back({v[1], -v[0]});
        }
    }
    for (const auto& c : candidates) {
        bool all_nonneg = true, some_pos = false;
        for (const auto& v : moves) {
            double dot = 0.0;
            for (std::size_t k = 0; k < d; ++k) dot += c[k] * v[k];
            if (dot < 0.0) all_nonneg = false;
            if (dot > 0.0) some_pos = true;
        }
        if (all_nonneg && some_pos) return true;
    }
    return false;
}

ScenarioTree random_tree(std::mt19937_64& rng) {
    const int d = 1 + static_cast<int>(rng() % 2);
    const int horizon = 1 + static_cast<int>(rng() % 2);
    std::vector<Node> nodes;
    Node root;
    root.id = "n0";
    root.parent = -1;
    root.cond_prob = 1.0;
    root.price.assign(static_cast<std::size_t>(d), 0.0);
    nodes.push_back(root);

    std::vector<int> frontier{0};
    for (int t = 0; t < horizon; ++t) {
        std::vector<int> next;
        for (int parent : frontier) {
            const int branches = 2 + static_cast<int>(rng() % 2);
            int weight_sum = 0;
            std::vector<int> weights(static_cast<std::size_t>(branches));
            for (auto& w : weights) {
                w = 1 + static_cast<int>(rng() % 4);
                weight_sum += w;
            }
            for (int b = 0; b < branches; ++b) {
                Node n;
                n.id = "n" + std::to_string(nodes.size());
                n.parent = parent;
                n.cond_prob = static_cast<double>(weights[static_cast<std::size_t>(b)]) /
                              static_cast<double>(weight_sum);
                n.price = nodes[static_cast<std::size_t>(parent)].price;
                for (auto& p : n.price) p += static_cast<double>(static_cast<int>(rng() % 5) - 2);
                next.push_back(static_cast<int>(nodes.size()));
                nodes.push_back(std::move(n));
            }
        }
        frontier = std::move(next);
    }
    return ScenarioTree::build(d, horizon, std::move(nodes));
}

Result criterion_na_randomized() {
    Result r;
    std::mt19937_64 rng(20260816u);
    int na_trees = 0, arb_trees = 0;
    for (int trial = 0; trial < 100; ++trial) {
        auto tree = random_tree(rng);

        bool reference_arb = false;
        for (int i = 0; i < static_cast<int>(tree.node_count()); ++i) {
            if (tree.is_leaf(i)) continue;
            std::vector<std::vector<double>> moves;
            for (int c : tree.node(i).children) moves.push_back(tree.delta_s(c));
            if (reference_arbitrage_at(moves)) reference_arb = true;
        }

        const auto check = check_na(tree);
        if (check.ok == reference_arb) {
            r.fail("trial " + std::to_string(trial) + ": check_na says " +
                   (check.ok ? "NA" : "arbitrage") + ", sign enumeration disagrees");
            continue;
        }
        if (!check.ok) {
            ++arb_trees;
            continue;
        }

        // Certificate validity: unit directions drawn in D must lose at
        // least delta with conditional probability at least kappa.
        ++na_trees;
        std::normal_distribution<double> gauss;
        for (const auto& cert : certify_tree(tree)) {
            const int node = cert.node_index;
            if (cert.basis.dim() == 0) continue;
            if (!(cert.delta > 0.0) || !(cert.kappa > 0.0)) {
                r.fail("trial " + std::to_string(trial) + ": degenerate certificate at " +
                       cert.node_id);
                continue;
            }
            std::vector<double> y(static_cast<std::size_t>(cert.basis.dim()));
            for (int probe = 0; probe < 10000; ++probe) {
                double nrm = 0.0;
                do {
                    nrm = 0.0;
                    for (auto& v : y) {
                        v = gauss(rng);
                        nrm += v * v;
                    }
                    nrm = std::sqrt(nrm);
                } while (nrm == 0.0);
                for (auto& v : y) v /= nrm;
                const auto xi = cert.basis.from_coords(y);
                double mass = 0.0;
                for (int c : tree.node(node).children) {
                    const auto ds = tree.delta_s(c);
                    double dot = 0.0;
                    for (std::size_t k = 0; k < ds.size(); ++k) dot += xi[k] * ds[k];
                    if (dot <= -cert.delta + 1e-9) mass += tree.node(c).cond_prob;
                }
                if (!(mass >= cert.kappa - 1e-9)) {
                    r.fail("trial " + std::to_string(trial) + " node " + cert.node_id +
                           ": loss mass " + fmt(mass) + " below kappa " + fmt(cert.kappa));
                    break;
                }
            }
        }
    }
    if (na_trees == 0 || arb_trees == 0)
        r.fail("degenerate sample: " + std::to_string(na_trees) + " NA / " +
               std::to_string(arb_trees) + " arbitrage trees");
    if (r.pass)
        r.detail = std::to_string(na_trees) + " NA + " + std::to_string(arb_trees) +
                   " arbitrage trees, all agreeing";
    return r;
}

// ---------------------------------------------------------------- criterion 9

Result criterion_bounded_above() {
    Result r;
    for (const char* tf : {"tree_binomial_t1.json", "tree_binomial_t2.json"}) {
        auto s = solve_fixture(tf, "utility_boundedexp.json", 0.0, -6.0, 6.0, 3001);
        const auto& u = s.solver->utility();
        if (!u.bounded_above()) r.fail("fixture not bounded above");
        if (!std::isfinite(s.out.value_at_x0)) r.fail(std::string(tf) + ": value not finite");
        if (!(s.out.value_at_x0 < u.upper_bound()))
            r.fail(std::string(tf) + ": value " + fmt(s.out.value_at_x0) + " reaches sup U");

        // The positive-side growth check must hold without binding: the
        // certificate is analytic and every slice stays below sup U.
        if (!s.out.ae.plus_ok || !s.out.ae.analytic)
            r.fail(std::string(tf) + ": positive-side certificate not analytic");
        for (const auto& slice : s.out.slices)
            for (double v : slice.values())
                if (v > u.upper_bound() + 1e-9) r.fail(std::string(tf) + ": slice exceeds sup U");

        auto c4 = downside_level_checks(s);
        if (!c4.pass) r.fail(c4.detail);
        auto c5 = residual_checks(s);
        if (!c5.pass) r.fail(c5.detail);
    }
    return r;
}

// --------------------------------------------------------------- criterion 10

Result criterion_determinism() {
    Result r;
    const std::string args =
        "solve --tree \"" + fixture_path("tree_binomial_t2.json") + "\" --utility \"" +
        fixture_path("utility_twopiece.json") +
        "\" --x0 0 --window=-4,4 --grid 2001 --probes 64 --seed 42 --output \"";
    const auto dir_a = scratch_dir("c10_a"), dir_b = scratch_dir("c10_b");
    const auto err_a = (dir_a / "stderr.txt").string(), err_b = (dir_b / "stderr.txt").string();
    if (run_cli(args + dir_a.string() + "\"", err_a) != 0) r.fail("first run failed");
    if (run_cli(args + dir_b.string() + "\"", err_b) != 0) r.fail("second run failed");
    if (!r.pass) return r;

    for (const char* name : {"solve_report.json", "value_slices.csv"}) {
        const auto a = read_file((dir_a / name).string());
        const auto b = read_file((dir_b / name).string());
        if (a.empty()) r.fail(std::string(name) + " is empty");
        if (a != b) r.fail(std::string(name) + " differs between identical runs");
    }
    const auto report = read_file((dir_a / "solve_report.json").string());
    if (report.find("config_hash") == std::string::npos) r.fail("report lacks config hash");
    if (report.find("\"version\"") == std::string::npos) r.fail("report lacks library version");
    return r;
}

}  // namespace

int main() {
    int failures = 0;
    const auto report = [&](int id, const std::string& label, const Result& r, double seconds) {
        std::printf("[%s] %2d %-28s (%.2fs)%s%s\n", r.pass ? "PASS" : "FAIL", id, label.c_str(),
                    seconds, r.detail.empty() ? "" : " ", r.detail.c_str());
        if (!r.pass) ++failures;
    };
    const auto timed = [](const std::function<Result()>& f, double* seconds) {
        const auto t0 = std::chrono::steady_clock::now();
        Result r;
        try {
            r = f();
        } catch (const std::exception& e) {
            r.fail(std::string("exception: ") + e.what());
        }
        *seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return r;
    };

    double sec = 0.0;

    auto c1 = timed(criterion_illposed_series, &sec);
    if (sec >= 1.0) c1.fail("runtime " + fmt(sec) + "s, budget 1s");
    report(1, "ill-posedness series", c1, sec);

    auto c2 = timed(
        [] {
            return criterion_onestep_closed_form(
                solve_fixture("tree_binomial_t1.json", "utility_twopiece.json", 0.0, -4.0, 4.0, 2001));
        },
        &sec);
    if (sec >= 1.0) c2.fail("runtime " + fmt(sec) + "s, budget 1s");
    report(2, "one-step closed form", c2, sec);

    // Fixtures shared by criteria 3, 4, 5, 7: binomial and trinomial trees,
    // horizons 1 and 2, asset dimensions 1 and 2.
    std::vector<Solved> solved;
    auto prep = timed(
        [&] {
            solved.push_back(solve_fixture("tree_binomial_t1.json", "utility_twopiece.json", 0.0, -4.0, 4.0, 2001));
            solved.push_back(solve_fixture("tree_binomial_t2.json", "utility_twopiece.json", 0.0, -4.0, 4.0, 2001));
            solved.push_back(solve_fixture("tree_binomial_skew_t1.json", "utility_twopiece.json", 0.0, -6.0, 6.0, 2001));
            solved.push_back(solve_fixture("tree_trinomial_t1.json", "utility_twopiece.json", 0.0, -4.0, 4.0, 2001));
            solved.push_back(solve_fixture("tree_trinomial_t2_d2.json", "utility_twopiece.json", 0.5, -6.0, 6.0, 201));
            // window sized so the downside level -N stays inside it
            solved.push_back(solve_fixture("tree_cross_t1.json", "utility_twopiece.json", 0.0, -6.0, 6.0, 2001));
            solved.push_back(solve_fixture("tree_zerovol_t1.json", "utility_twopiece.json", 0.25, -4.0, 4.0, 2001));
            return Result{};
        },
        &sec);
    const double prep_sec = sec;
    const auto dependent = [&](int id, const std::string& label, const std::function<Result()>& f,
                               double extra = 0.0) {
        if (!prep.pass) {
            report(id, label, prep, prep_sec);
            return;
        }
        auto r = timed(f, &sec);
        report(id, label, r, sec + extra);
    };

    dependent(3, "strategy-ball certificates", [&] { return criterion_ball_probes(solved); },
              prep_sec);
    dependent(4, "downside wealth levels", [&] { return criterion_downside_levels(solved); });
    dependent(5, "dp consistency residuals", [&] { return criterion_residuals(solved); });

    auto c6 = timed(criterion_oracle_equivalence, &sec);
    if (sec >= 60.0) c6.fail("runtime " + fmt(sec) + "s, budget 60s");
    report(6, "oracle equivalence", c6, sec);

    dependent(7, "value-function invariants", [&] { return criterion_invariants(solved); });

    auto c8 = timed(criterion_na_randomized, &sec);
    report(8, "randomized NA certificates", c8, sec);

    auto c9 = timed(criterion_bounded_above, &sec);
    report(9, "bounded-above regime", c9, sec);

    auto c10 = timed(criterion_determinism, &sec);
    report(10, "byte-identical reports", c10, sec);

    if (failures == 0)
        std::printf("all criteria passed\n");
    else
        std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
