// Command line front end: no-arbitrage checks, utility certification,
// ill-posedness demos, the dynamic-programming solver, and the enumeration
// cross-check. Reports are deterministic: sorted keys, no timestamps, and
// identical config + seed reproduces identical bytes.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ncu/dp.hpp"
#include "ncu/errors.hpp"
#include "ncu/noarb.hpp"
#include "ncu/oracle.hpp"
#include "ncu/tree.hpp"
#include "ncu/utility.hpp"

using nlohmann::json;
using namespace ncu;

namespace {

constexpr const char* kVersion = "0.1.0";

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hash_hex(const json& config) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a64(config.dump()));
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ValidationError("io", "cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ExecutionError("io", "cannot write " + path.string());
    f << text;
}

void write_report(const std::filesystem::path& dir, const std::string& name, const json& body) {
    write_file(dir / name, body.dump(2) + "\n");
}

json ae_json(const AeCertificate& ae) {
    return {{"plus_ok", ae.plus_ok},
            {"minus_ok", ae.minus_ok},
            {"negative_at_xunder", ae.negative_at_xunder},
            {"order_ok", ae.order_ok},
            {"analytic", ae.analytic},
            {"growth_constant", ae.growth_c},
            {"ok", ae.ok()}};
}

json cert_json(const NodeCertificate& c) {
    return {{"node", c.node_id},
            {"dim", c.basis.dim()},
            {"delta", c.delta},
            {"kappa", c.kappa}};
}

json demo_json(const IllposedDemo& d) {
    return {{"illposed", d.illposed},
            {"p", d.p},
            {"alpha", d.alpha},
            {"beta", d.beta},
            {"n0", d.n0}};
}

struct SolveArgs {
    std::string tree_path;
    std::string utility_path;
    double x0 = 0.0;
    std::string window = "-10,10";
    std::size_t grid = 2001;
    std::string n_variant = "max";
    std::string output = ".";
    std::uint64_t seed = 0;
    std::size_t probes = 64;
};

void add_solve_options(CLI::App* cmd, SolveArgs& a) {
    cmd->add_option("--tree", a.tree_path, "scenario tree JSON file")->required();
    cmd->add_option("--utility", a.utility_path, "utility JSON file")->required();
    cmd->add_option("--x0", a.x0, "initial wealth");
    cmd->add_option("--window", a.window, "wealth grid window LO,HI");
    cmd->add_option("--grid", a.grid, "wealth grid points");
    cmd->add_option("--n-variant", a.n_variant, "wealth bound propagation: max or markov")
        ->check(CLI::IsMember({"max", "markov"}));
    cmd->add_option("--output", a.output, "report directory");
    cmd->add_option("--seed", a.seed, "probe RNG seed");
    cmd->add_option("--probes", a.probes, "radius probes per internal node (0 disables)");
}

std::pair<double, double> parse_window(const std::string& w) {
    const auto comma = w.find(',');
    if (comma == std::string::npos)
        throw ValidationError("config", "--window expects LO,HI");
    try {
        return {std::stod(w.substr(0, comma)), std::stod(w.substr(comma + 1))};
    } catch (const std::exception&) {
        throw ValidationError("config", "--window expects numeric LO,HI");
    }
}

SolveConfig to_config(const SolveArgs& a) {
    if (a.grid < 101) throw ValidationError("config", "grid needs at least 101 points");
    SolveConfig cfg;
    cfg.x0 = a.x0;
    std::tie(cfg.window_lo, cfg.window_hi) = parse_window(a.window);
    cfg.grid_n = a.grid;
    cfg.n_variant = a.n_variant == "markov" ? SolveConfig::NVariant::markov
                                            : SolveConfig::NVariant::max_child;
    return cfg;
}

json solve_config_json(const char* command, const SolveArgs& a) {
    return {{"command", command}, {"tree", a.tree_path},   {"utility", a.utility_path},
            {"x0", a.x0},         {"window", a.window},    {"grid", a.grid},
            {"n_variant", a.n_variant},                    {"seed", a.seed},
            {"probes", a.probes}};
}

struct ProbeTally {
    std::size_t drawn = 0;
    std::size_t violations = 0;
    double worst_gap = 0.0;

    void record(double gap, double tol) {
        ++drawn;
        if (gap > tol) {
            ++violations;
            worst_gap = std::max(worst_gap, gap);
        }
    }

    json to_json() const {
        return {{"drawn", drawn}, {"violations", violations}, {"worst_gap", worst_gap}};
    }
};

/// Randomized invariant checks at every internal node. Radius: stakes drawn
/// with |y| in [K, 2K] at the node's realized wealth must not beat doing
/// nothing. Domination: the value slice must stay above the raw utility
/// across the window, up to its own interpolation error. Per-node generators
/// keep the draws independent of node order and thread scheduling.
json run_probes(const DpSolver& solver, const SolveOutput& out, std::uint64_t seed,
                std::size_t per_node) {
    ProbeTally radius, domination;
    const auto& u = solver.utility();
    for (const auto& step : out.path) {
        if (solver.tree().is_leaf(step.node)) continue;
        std::mt19937_64 rng(seed + fnv1a64(solver.tree().node(step.node).id));

        const auto& prob = solver.problem(step.node);
        if (prob.dim() > 0) {
            const double base = prob.bellman(
                step.wealth, std::vector<double>(static_cast<std::size_t>(prob.dim()), 0.0));
            std::uniform_real_distribution<double> mag(step.radius, 2.0 * step.radius);
            std::normal_distribution<double> gauss;
            std::vector<double> y(static_cast<std::size_t>(prob.dim()));
            for (std::size_t i = 0; i < per_node; ++i) {
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
                const double g = prob.bellman(step.wealth, y);
                radius.record(g - base, 1e-12 * (1.0 + std::abs(base)));
            }
        }

        const auto& slice = out.slices[static_cast<std::size_t>(step.node)];
        // Between grid points the slice is a chord, so a utility kink inside
        // one cell can poke above it by at most the interpolation bound.
        const double slack = slice.interp_error_bound();
        std::uniform_real_distribution<double> wealth(slice.lo(), slice.hi());
        for (std::size_t i = 0; i < per_node; ++i) {
            const double x = wealth(rng);
            const double ux = u(x);
            domination.record(ux - slice(x), slack + 1e-9 * (1.0 + std::abs(ux)));
        }
    }
    return {{"per_node", per_node},
            {"radius", radius.to_json()},
            {"domination", domination.to_json()}};
}

std::string slices_csv(const ScenarioTree& tree, const SolveOutput& out) {
    std::string csv = "node,depth,x,value\n";
    char row[128];
    for (std::size_t i = 0; i < out.slices.size(); ++i) {
        const auto& nd = tree.node(static_cast<int>(i));
        const auto& slice = out.slices[i];
        for (std::size_t j = 0; j < slice.size(); ++j) {
            std::snprintf(row, sizeof row, "%s,%d,%.17g,%.17g\n", nd.id.c_str(), nd.depth,
                          slice.grid_point(j), slice.values()[j]);
            csv += row;
        }
    }
    return csv;
}

json solve_report(const DpSolver& solver, const SolveOutput& out) {
    const auto& tree = solver.tree();
    json nbound = json::object();
    for (int i = 0; i < static_cast<int>(tree.node_count()); ++i) {
        if (!tree.is_leaf(i)) nbound[tree.node(i).id] = out.nbound[static_cast<std::size_t>(i)];
    }
    json certs = json::array();
    for (const auto& c : out.certificates) certs.push_back(cert_json(c));
    json envelopes = json::array();
    for (std::size_t t = 0; t < out.envelopes.size(); ++t)
        envelopes.push_back({{"depth", t},
                             {"c_plus", out.envelopes[t].c_plus},
                             {"c_minus", out.envelopes[t].c_minus}});
    json path = json::array();
    for (const auto& s : out.path)
        path.push_back({{"node", tree.node(s.node).id},
                        {"depth", s.depth},
                        {"wealth", s.wealth},
                        {"xi", s.xi},
                        {"value_exact", s.value_exact},
                        {"value_interp", s.value_interp},
                        {"residual", s.residual},
                        {"radius", s.radius},
                        {"extrapolated", s.extrapolated}});
    return {{"value_at_x0", out.value_at_x0},
            {"root_xi", out.root_xi},
            {"expected_terminal_utility", out.expected_terminal_utility},
            {"extraction_gap", out.extraction_gap},
            {"max_residual", out.max_residual},
            {"interp_bound", out.interp_bound},
            {"residual_tolerance", out.residual_tolerance},
            {"extrapolated", out.extrapolated},
            {"growth_constant", out.growth_c},
            {"ae", ae_json(out.ae)},
            {"nbound", nbound},
            {"certificates", certs},
            {"envelopes", envelopes},
            {"path", path},
            {"slices_file", "value_slices.csv"}};
}

int cmd_check_na(const std::string& tree_path, const std::string& output) {
    auto tree = ScenarioTree::load(read_file(tree_path));
    const json config{{"command", "check-na"}, {"tree", tree_path}};
    json report{{"version", kVersion}, {"config", config}, {"config_hash", hash_hex(config)}};

    auto check = check_na(tree);
    report["ok"] = check.ok;
    if (check.ok) {
        json certs = json::array();
        for (const auto& c : certify_tree(tree)) certs.push_back(cert_json(c));
        report["certificates"] = certs;
        report["witness"] = nullptr;
    } else {
        report["certificates"] = json::array();
        report["witness"] = {{"node", check.witness->node_id}, {"xi", check.witness->xi}};
    }
    write_report(output, "na_report.json", report);
    if (!check.ok)
        throw ValidationError("na_violated",
                              "arbitrage at node " + check.witness->node_id +
                                  "; see na_report.json");
    return 0;
}

int cmd_certify_utility(const std::string& utility_path, const std::string& output) {
    auto u = Utility::load(read_file(utility_path));
    const json config{{"command", "certify-utility"}, {"utility", utility_path}};

    auto report_of = [&](const WellposedReport& wp) {
        json report{{"version", kVersion},
                    {"config", config},
                    {"config_hash", hash_hex(config)},
                    {"family", u.family() == UtilityFamily::two_piece_power ? "two_piece_power"
                               : u.family() == UtilityFamily::bounded_exp  ? "bounded_exp"
                                                                           : "piecewise_user"},
                    {"params", u.params()},
                    {"gamma_plus", u.gamma_plus()},
                    {"gamma_minus", u.gamma_minus()},
                    {"xbar", u.xbar()},
                    {"xunder", u.xunder()},
                    {"c", u.c()},
                    {"bounded_above", u.bounded_above()},
                    {"growth_constant", growth_constant(u)},
                    {"ae", ae_json(wp.ae)},
                    {"illposed", demo_json(wp.demo)},
                    {"wellposed", wp.ok},
                    {"reason", wp.reason}};
        if (u.bounded_above()) report["upper_bound"] = u.upper_bound();
        return report;
    };

    auto wp = check_wellposed(u);
    write_report(output, "utility_report.json", report_of(wp));
    if (!wp.ok) throw ValidationError("illposed", wp.reason + "; see utility_report.json");
    return 0;
}

int cmd_illposed_demo(const std::string& utility_path, std::size_t n_max,
                      const std::string& output) {
    auto u = Utility::load(read_file(utility_path));
    const json config{{"command", "illposed-demo"}, {"utility", utility_path}, {"n_max", n_max}};

    auto demo = detect_illposed(u);
    std::string csv = "n,term\n";
    std::size_t rows = 0;
    if (demo.illposed) {
        char row[64];
        for (std::size_t n = 1; n <= n_max; ++n) {
            std::snprintf(row, sizeof row, "%zu,%.17g\n", n, demo.term(static_cast<double>(n)));
            csv += row;
            ++rows;
        }
    }
    write_file(std::filesystem::path(output) / "illposed_series.csv", csv);

    json report{{"version", kVersion},       {"config", config},
                {"config_hash", hash_hex(config)},
                {"n_max", n_max},            {"rows", rows},
                {"series_file", "illposed_series.csv"}};
    report.update(demo_json(demo));
    write_report(output, "illposed_report.json", report);
    return 0;
}

int cmd_solve(const SolveArgs& a) {
    auto tree = ScenarioTree::load(read_file(a.tree_path));
    auto u = Utility::load(read_file(a.utility_path));
    const json config = solve_config_json("solve", a);

    DpSolver solver(std::move(tree), std::move(u), to_config(a));
    auto out = solver.run();

    json report{{"version", kVersion}, {"config", config}, {"config_hash", hash_hex(config)}};
    report.update(solve_report(solver, out));
    report["probes"] =
        a.probes == 0 ? json(nullptr) : run_probes(solver, out, a.seed, a.probes);
    write_report(a.output, "solve_report.json", report);
    write_file(std::filesystem::path(a.output) / "value_slices.csv",
               slices_csv(solver.tree(), out));
    return 0;
}

int cmd_oracle_compare(const SolveArgs& a, double oracle_bound, std::size_t oracle_res) {
    auto tree = ScenarioTree::load(read_file(a.tree_path));
    auto u = Utility::load(read_file(a.utility_path));
    json config = solve_config_json("oracle-compare", a);
    config["oracle_bound"] = oracle_bound;
    config["oracle_res"] = oracle_res;

    DpSolver solver(tree, u, to_config(a));
    auto out = solver.run();
    auto oracle = brute_force_value(tree, u, a.x0, StrategyGrid{oracle_bound, oracle_res});

    const double abs_diff = std::abs(out.value_at_x0 - oracle.value);
    json report{{"version", kVersion},
                {"config", config},
                {"config_hash", hash_hex(config)},
                {"dp", {{"value", out.value_at_x0}, {"root_xi", out.root_xi}}},
                {"oracle",
                 {{"value", oracle.value},
                  {"root_xi", oracle.xi[static_cast<std::size_t>(solver.tree().root())]},
                  {"evaluations", oracle.evaluations}}},
                {"abs_diff", abs_diff},
                {"rel_diff", abs_diff / std::max(1e-300, std::abs(oracle.value))}};
    write_report(a.output, "oracle_report.json", report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"expected-utility portfolio solver on scenario trees"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string na_tree, na_out = ".";
    auto* na = app.add_subcommand("check-na", "one-step no-arbitrage check and certificates");
    na->add_option("--tree", na_tree, "scenario tree JSON file")->required();
    na->add_option("--output", na_out, "report directory");

    std::string cu_utility, cu_out = ".";
    auto* cu = app.add_subcommand("certify-utility", "elasticity and well-posedness certificate");
    cu->add_option("--utility", cu_utility, "utility JSON file")->required();
    cu->add_option("--output", cu_out, "report directory");

    std::string id_utility, id_out = ".";
    std::size_t id_nmax = 10000;
    auto* id = app.add_subcommand("illposed-demo", "divergent expected-utility series");
    id->add_option("--utility", id_utility, "utility JSON file")->required();
    id->add_option("--n-max", id_nmax, "largest stake in the series");
    id->add_option("--output", id_out, "report directory");

    SolveArgs solve_args;
    auto* sv = app.add_subcommand("solve", "backward induction with certificates");
    add_solve_options(sv, solve_args);

    SolveArgs cmp_args;
    double cmp_bound = 1.0;
    std::size_t cmp_res = 4001;
    auto* cmp = app.add_subcommand("oracle-compare", "solver against exhaustive enumeration");
    add_solve_options(cmp, cmp_args);
    cmp->add_option("--oracle-bound", cmp_bound, "stake bound of the enumeration grid");
    cmp->add_option("--oracle-res", cmp_res, "stake resolution of the enumeration grid");

    CLI11_PARSE(app, argc, argv);

    try {
        if (na->parsed()) return cmd_check_na(na_tree, na_out);
        if (cu->parsed()) return cmd_certify_utility(cu_utility, cu_out);
        if (id->parsed()) return cmd_illposed_demo(id_utility, id_nmax, id_out);
        if (sv->parsed()) return cmd_solve(solve_args);
        if (cmp->parsed()) return cmd_oracle_compare(cmp_args, cmp_bound, cmp_res);
    } catch (const ValidationError& e) {
        json err{{"error", {{"code", e.code()}, {"message", e.what()}}}};
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 1;
    } catch (const ExecutionError& e) {
        json err{{"error", {{"code", e.code()}, {"message", e.what()}}}};
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 2;
    } catch (const std::exception& e) {
        json err{{"error", {{"code", "internal"}, {"message", e.what()}}}};
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 2;
    }
    return 0;
}
