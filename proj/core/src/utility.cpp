#include "ncu/utility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "ncu/errors.hpp"

namespace ncu {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw ValidationError("utility_invalid", "utility: " + what); }

double require_number(const json& j, const char* key, const char* where) {
    if (!j.contains(key) || !j.at(key).is_number()) {
        throw ValidationError("utility_schema",
                              std::string("utility: ") + where + " needs numeric field '" + key + "'");
    }
    const double v = j.at(key).get<double>();
    if (!std::isfinite(v)) bad(std::string("field '") + key + "' is not finite");
    return v;
}

double eval_piecewise(const std::vector<std::array<double, 2>>& pts, double x) {
    const std::size_t n = pts.size();
    if (x <= pts[0][0]) {
        const double s = (pts[1][1] - pts[0][1]) / (pts[1][0] - pts[0][0]);
        return pts[0][1] + s * (x - pts[0][0]);
    }
    if (x >= pts[n - 1][0]) {
        const double s = (pts[n - 1][1] - pts[n - 2][1]) / (pts[n - 1][0] - pts[n - 2][0]);
        return pts[n - 1][1] + s * (x - pts[n - 1][0]);
    }
    std::size_t lo = 0, hi = n - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (pts[mid][0] <= x) lo = mid; else hi = mid;
    }
    const double w = (x - pts[lo][0]) / (pts[hi][0] - pts[lo][0]);
    return pts[lo][1] + w * (pts[hi][1] - pts[lo][1]);
}

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    const double r = std::log(hi / lo);
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = lo * std::exp(r * i / (n - 1));
    return g;
}

}  // namespace

void Utility::validate_common() const {
    if (!(gamma_plus_ > 0.0) || !std::isfinite(gamma_plus_)) bad("gamma_plus must be positive");
    if (!(gamma_minus_ > 0.0) || !std::isfinite(gamma_minus_)) bad("gamma_minus must be positive");
    if (!(xbar_ > 0.0) || !std::isfinite(xbar_)) bad("xbar must be positive");
    if (!(xunder_ > 0.0) || !std::isfinite(xunder_)) bad("xunder must be positive");
    if (!(c_ >= 0.0) || !std::isfinite(c_)) bad("c must be nonnegative");
}

Utility Utility::two_piece_power(double a_plus, double alpha, double a_minus, double beta,
                                 double gamma_plus, double gamma_minus, double xbar,
                                 double xunder, double c) {
    Utility u;
    u.family_ = UtilityFamily::two_piece_power;
    u.params_ = {{"a_plus", a_plus}, {"alpha", alpha}, {"a_minus", a_minus}, {"beta", beta}};
    u.gamma_plus_ = gamma_plus;
    u.gamma_minus_ = gamma_minus;
    u.xbar_ = xbar;
    u.xunder_ = xunder;
    u.c_ = c;
    u.validate_common();
    if (!(a_plus > 0.0) || !(a_minus > 0.0)) bad("piece coefficients must be positive");
    if (!(alpha > 0.0) || !(beta > 0.0)) bad("piece exponents must be positive");
    return u;
}

Utility Utility::bounded_exp(double a, double k, double gamma_plus, double gamma_minus,
                             double xbar, double xunder, double c) {
    Utility u;
    u.family_ = UtilityFamily::bounded_exp;
    u.params_ = {{"a", a}, {"k", k}};
    u.gamma_plus_ = gamma_plus;
    u.gamma_minus_ = gamma_minus;
    u.xbar_ = xbar;
    u.xunder_ = xunder;
    u.c_ = c;
    u.validate_common();
    if (!(a > 0.0) || !(k > 0.0)) bad("bounded_exp needs a > 0 and k > 0");
    return u;
}

Utility Utility::piecewise(std::vector<std::array<double, 2>> points, double gamma_plus,
                           double gamma_minus, double xbar, double xunder, double c) {
    Utility u;
    u.family_ = UtilityFamily::piecewise_user;
    u.points_ = std::move(points);
    u.gamma_plus_ = gamma_plus;
    u.gamma_minus_ = gamma_minus;
    u.xbar_ = xbar;
    u.xunder_ = xunder;
    u.c_ = c;
    u.validate_common();
    const auto& pts = u.points_;
    if (pts.size() < 2) bad("piecewise needs at least two points");
    bool has_origin = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!std::isfinite(pts[i][0]) || !std::isfinite(pts[i][1])) bad("piecewise point is not finite");
        if (i > 0 && !(pts[i][0] > pts[i - 1][0])) bad("piecewise x values must be strictly increasing");
        if (i > 0 && pts[i][1] < pts[i - 1][1]) bad("piecewise values must be nondecreasing");
        if (pts[i][0] == 0.0 && pts[i][1] == 0.0) has_origin = true;
    }
    if (!has_origin) bad("piecewise must pass through (0, 0)");
    return u;
}

Utility Utility::load(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError("utility_schema", std::string("utility: ") + e.what());
    }
    if (!j.is_object() || !j.contains("family") || !j.at("family").is_string())
        throw ValidationError("utility_schema", "utility: top level needs a 'family' string");
    const std::string fam = j.at("family").get<std::string>();
    const double gp = require_number(j, "gamma_plus", "top level");
    const double gm = require_number(j, "gamma_minus", "top level");
    const double xb = require_number(j, "xbar", "top level");
    const double xu = require_number(j, "xunder", "top level");
    const double c = require_number(j, "c", "top level");
    const json params = j.contains("params") ? j.at("params") : json::object();

    if (fam == "two_piece_power") {
        return two_piece_power(require_number(params, "a_plus", "params"),
                               require_number(params, "alpha", "params"),
                               require_number(params, "a_minus", "params"),
                               require_number(params, "beta", "params"), gp, gm, xb, xu, c);
    }
    if (fam == "bounded_exp") {
        return bounded_exp(require_number(params, "a", "params"),
                           require_number(params, "k", "params"), gp, gm, xb, xu, c);
    }
    if (fam == "piecewise_user") {
        if (!params.contains("points") || !params.at("points").is_array())
            throw ValidationError("utility_schema", "utility: params.points must be an array");
        std::vector<std::array<double, 2>> pts;
        for (const auto& p : params.at("points")) {
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                throw ValidationError("utility_schema", "utility: each point must be [x, u]");
            pts.push_back({p[0].get<double>(), p[1].get<double>()});
        }
        return piecewise(std::move(pts), gp, gm, xb, xu, c);
    }
    throw ValidationError("utility_schema", "utility: unknown family '" + fam + "'");
}

Utility Utility::load_stream(std::istream& in) {
    std::ostringstream buf;
    buf << in.rdbuf();
    return load(buf.str());
}

double Utility::operator()(double x) const {
    switch (family_) {
        case UtilityFamily::two_piece_power: {
            if (x >= 0.0) return params_.at("a_plus") * std::pow(x, params_.at("alpha"));
            return -params_.at("a_minus") * std::pow(-x, params_.at("beta"));
        }
        case UtilityFamily::bounded_exp:
            return params_.at("a") * (1.0 - std::exp(-params_.at("k") * x));
        case UtilityFamily::piecewise_user:
            return eval_piecewise(points_, x);
    }
    return 0.0;
}

bool Utility::bounded_above() const {
    switch (family_) {
        case UtilityFamily::two_piece_power:
            return false;
        case UtilityFamily::bounded_exp:
            return true;
        case UtilityFamily::piecewise_user: {
            const std::size_t n = points_.size();
            return points_[n - 1][1] == points_[n - 2][1];
        }
    }
    return false;
}

double Utility::upper_bound() const {
    switch (family_) {
        case UtilityFamily::bounded_exp:
            return params_.at("a");
        case UtilityFamily::piecewise_user:
            return points_.back()[1];
        case UtilityFamily::two_piece_power:
            break;
    }
    return std::numeric_limits<double>::infinity();
}

namespace {

bool sampled_plus(const Utility& u) {
    const auto lambdas = log_grid(1.0, 1e3, 60);
    const auto xs = log_grid(u.xbar(), u.xbar() * 1e3, 60);
    for (double x : xs) {
        const double base = u(x) + u.c();
        const double tol = 1e-9 * (1.0 + std::abs(u(x)));
        for (double l : lambdas) {
            if (u(l * x) > std::pow(l, u.gamma_plus()) * base + tol) return false;
        }
    }
    return true;
}

bool sampled_minus(const Utility& u) {
    const auto lambdas = log_grid(1.0, 1e3, 60);
    const auto xs = log_grid(u.xunder(), u.xunder() * 1e3, 60);
    for (double ax : xs) {
        const double x = -ax;
        const double tol = 1e-9 * (1.0 + std::abs(u(x)));
        for (double l : lambdas) {
            if (u(l * x) > std::pow(l, u.gamma_minus()) * u(x) + tol) return false;
        }
    }
    return true;
}

}  // namespace

AeCertificate certify_ae(const Utility& u) {
    AeCertificate cert;
    cert.order_ok = u.gamma_plus() < u.gamma_minus();
    cert.negative_at_xunder = u(-u.xunder()) < 0.0;
    cert.growth_c = growth_constant(u);

    switch (u.family()) {
        case UtilityFamily::two_piece_power: {
            // Power pieces scale exactly: U(l x) = l^alpha U(x) on gains and
            // l^beta U(x) on losses, so exponent order decides both sides.
            cert.plus_ok = u.gamma_plus() >= u.params().at("alpha");
            cert.minus_ok = u.params().at("beta") >= u.gamma_minus();
            cert.analytic = true;
            break;
        }
        case UtilityFamily::bounded_exp: {
            const double a = u.params().at("a");
            const double k = u.params().at("k");
            // Gains: U < a everywhere, so c >= a exp(-k xbar) forces
            // U(x) + c >= a >= U(l x) on x >= xbar.
            const bool plus_analytic = u.c() >= a * std::exp(-k * u.xbar());
            // Losses: x U'(x)/U(x) = k|x| / (1 - exp(-k|x|)) is increasing in
            // |x|, so its value at xunder bounds the whole ray.
            const double r = k * u.xunder() / (1.0 - std::exp(-k * u.xunder()));
            const bool minus_analytic = r >= u.gamma_minus();
            cert.plus_ok = plus_analytic || sampled_plus(u);
            cert.minus_ok = minus_analytic || sampled_minus(u);
            cert.analytic = plus_analytic && minus_analytic;
            break;
        }
        case UtilityFamily::piecewise_user: {
            cert.plus_ok = sampled_plus(u);
            cert.minus_ok = sampled_minus(u);
            cert.analytic = false;
            break;
        }
    }
    return cert;
}

double growth_constant(const Utility& u) {
    return std::max(u(u.xbar()), -u(-u.xunder())) + u.c();
}

IllposedDemo detect_illposed(const Utility& u) {
    IllposedDemo demo;
    double coef_up = 1.0, coef_down = 1.0;
    switch (u.family()) {
        case UtilityFamily::two_piece_power:
            demo.alpha = u.params().at("alpha");
            demo.beta = u.params().at("beta");
            coef_up = u.params().at("a_plus");
            coef_down = u.params().at("a_minus");
            break;
        case UtilityFamily::bounded_exp:
            // Bounded above: no stake can push expected utility to infinity.
            demo.alpha = u.gamma_plus();
            demo.beta = u.gamma_minus();
            break;
        case UtilityFamily::piecewise_user: {
            // Terminal slopes govern growth; both sides are asymptotically linear.
            const auto& pts = u.points();
            const std::size_t n = pts.size();
            demo.alpha = 1.0;
            demo.beta = 1.0;
            coef_up = (pts[n - 1][1] - pts[n - 2][1]) / (pts[n - 1][0] - pts[n - 2][0]);
            coef_down = (pts[1][1] - pts[0][1]) / (pts[1][0] - pts[0][0]);
            break;
        }
    }

    const bool tie = demo.alpha == demo.beta;
    demo.p = tie ? 0.75 : 0.5;
    if (u.family() == UtilityFamily::bounded_exp) {
        demo.illposed = false;
    } else if (demo.alpha > demo.beta) {
        demo.illposed = true;
    } else if (tie) {
        demo.illposed = demo.p * coef_up > (1.0 - demo.p) * coef_down && coef_up > 0.0;
    } else {
        demo.illposed = false;
    }

    demo.n0 = 1;
    if (demo.illposed && demo.alpha > demo.beta) {
        const double ratio = ((1.0 - demo.p) * coef_down * demo.beta) /
                             (demo.p * coef_up * demo.alpha);
        if (ratio > 1.0)
            demo.n0 = static_cast<int>(std::ceil(std::pow(ratio, 1.0 / (demo.alpha - demo.beta))));
    }

    const double p = demo.p;
    demo.term = [u, p](double n) { return p * u(n) + (1.0 - p) * u(-n); };
    return demo;
}

}  // namespace ncu
