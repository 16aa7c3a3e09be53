#pragma once

#include <array>
#include <functional>
#include <istream>
#include <map>
#include <string>
#include <vector>

namespace ncu {

enum class UtilityFamily { two_piece_power, bounded_exp, piecewise_user };

/// Nondecreasing utility on the whole real line with U(0) = 0, together
/// with declared asymptotic-elasticity data (gamma_plus, gamma_minus,
/// xbar, xunder, c). The declared data is certified by certify_ae, not
/// trusted.
class Utility {
public:
    /// Parses {"family", "params", "gamma_plus", "gamma_minus", "xbar",
    /// "xunder", "c"}; rejects malformed or non-monotone inputs.
    static Utility load(const std::string& json_text);
    static Utility load_stream(std::istream& in);

    /// U(x) = a_plus x^alpha on x >= 0, -a_minus (-x)^beta on x < 0.
    static Utility two_piece_power(double a_plus, double alpha, double a_minus, double beta,
                                   double gamma_plus, double gamma_minus, double xbar,
                                   double xunder, double c);

    /// U(x) = a (1 - exp(-k x)); bounded above by a.
    static Utility bounded_exp(double a, double k, double gamma_plus, double gamma_minus,
                               double xbar, double xunder, double c);

    /// Piecewise linear through the given points (strictly increasing x,
    /// nondecreasing values, must pass through (0,0)); extended beyond the
    /// ends with the terminal segment slopes.
    static Utility piecewise(std::vector<std::array<double, 2>> points, double gamma_plus,
                             double gamma_minus, double xbar, double xunder, double c);

    double operator()(double x) const;

    UtilityFamily family() const noexcept { return family_; }
    double gamma_plus() const noexcept { return gamma_plus_; }
    double gamma_minus() const noexcept { return gamma_minus_; }
    double xbar() const noexcept { return xbar_; }
    double xunder() const noexcept { return xunder_; }
    double c() const noexcept { return c_; }

    /// True when sup U < infinity (bounded_exp always; piecewise when the
    /// last segment is flat).
    bool bounded_above() const;
    /// sup U; only meaningful when bounded_above().
    double upper_bound() const;

    /// Family parameters by name (a_plus, alpha, ... / a, k), for reports.
    const std::map<std::string, double>& params() const noexcept { return params_; }
    /// Knot list; empty unless piecewise_user.
    const std::vector<std::array<double, 2>>& points() const noexcept { return points_; }

private:
    Utility() = default;
    void validate_common() const;

    UtilityFamily family_ = UtilityFamily::two_piece_power;
    std::map<std::string, double> params_;
    std::vector<std::array<double, 2>> points_;
    double gamma_plus_ = 0.0, gamma_minus_ = 0.0;
    double xbar_ = 1.0, xunder_ = 1.0, c_ = 0.0;
};

/// Outcome of checking the declared elasticity data against the function.
struct AeCertificate {
    bool plus_ok = false;     // U(l x) <= l^gamma_plus (U(x) + c) for l >= 1, x >= xbar
    bool minus_ok = false;    // U(l x) <= l^gamma_minus U(x) for l >= 1, x <= -xunder
    bool negative_at_xunder = false;  // U(-xunder) < 0
    bool order_ok = false;    // gamma_plus < gamma_minus
    bool analytic = false;    // closed-form criteria; false means sampled probes
    double growth_c = 0.0;    // C with U(l x) <= l^g U(x) + C l^g for g in {gamma_plus, gamma_minus}

    bool ok() const noexcept { return plus_ok && minus_ok && negative_at_xunder && order_ok; }
};

/// Certifies the asymptotic elasticity inequalities. Closed-form criteria
/// are used where the family admits them; otherwise probes lambda on a
/// log grid over [1, 1e3] and x on log grids above xbar / below -xunder,
/// with tolerance 1e-9 (1 + |U(x)|) per probe.
AeCertificate certify_ae(const Utility& u);

/// C = max(U(xbar), -U(-xunder)) + c. With a passing certificate this C
/// satisfies U(lambda x) <= lambda^g U(x) + C lambda^g for all real x,
/// lambda >= 1, and both exponents g.
double growth_constant(const Utility& u);

/// A two-point one-step market scaled by the stake n, exhibiting an
/// expected-utility series that diverges whenever the positive growth
/// exponent reaches the negative one.
struct IllposedDemo {
    bool illposed = false;
    double p = 0.5;       // up-move probability of the demo market
    double alpha = 0.0;   // growth exponent on gains
    double beta = 0.0;    // growth exponent on losses
    int n0 = 1;           // term(n) is strictly increasing for n >= n0 when illposed
    std::function<double(double)> term;  // expected utility at stake n
};

/// Builds the divergence demo for this utility: term(n) = p U(n) + (1-p) U(-n),
/// with p = 1/2 when the gain exponent strictly dominates and p = 3/4 on a tie.
IllposedDemo detect_illposed(const Utility& u);

}  // namespace ncu
