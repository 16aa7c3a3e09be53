#include "ncu/value_slice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ncu/errors.hpp"

namespace ncu {

ValueSlice::ValueSlice(double lo, double hi, std::vector<double> values)
    : lo_(lo), hi_(hi), v_(std::move(values)) {
    if (v_.size() < 2) throw ValidationError("slice_invalid", "value slice needs at least 2 points");
    if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
        throw ValidationError("slice_invalid", "value slice needs a finite window with hi > lo");
    step_ = (hi_ - lo_) / static_cast<double>(v_.size() - 1);

    double max_abs = 0.0;
    for (double x : v_) {
        if (!std::isfinite(x)) throw ExecutionError("slice_nonfinite", "value slice holds a non-finite value");
        max_abs = std::max(max_abs, std::abs(x));
    }
    for (std::size_t i = 1; i < v_.size(); ++i) {
        wobble_ = std::max(wobble_, v_[i - 1] - v_[i]);
    }
    wobble_ = std::max(wobble_, 0.0);
    if (wobble_ > 1e-9 * (1.0 + max_abs)) {
        throw ExecutionError("monotonicity",
                             "value slice decreases by " + std::to_string(wobble_) +
                                 "; beyond the clip threshold");
    }
    for (std::size_t i = 1; i < v_.size(); ++i) v_[i] = std::max(v_[i], v_[i - 1]);
}

ValueSlice ValueSlice::sample(double lo, double hi, std::size_t n,
                              const std::function<double(double)>& f) {
    std::vector<double> v(n);
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) v[i] = f(lo + step * static_cast<double>(i));
    return ValueSlice(lo, hi, std::move(v));
}

double ValueSlice::operator()(double x) const {
    const std::size_t n = v_.size();
    if (x <= lo_) {
        const double s = (v_[1] - v_[0]) / step_;
        return v_[0] + s * (x - lo_);
    }
    if (x >= hi_) {
        const double s = (v_[n - 1] - v_[n - 2]) / step_;
        return v_[n - 1] + s * (x - hi_);
    }
    const double u = (x - lo_) / step_;
    std::size_t i = static_cast<std::size_t>(u);
    if (i > n - 2) i = n - 2;
    double w = u - static_cast<double>(i);
    // Snap within a few ulps of a grid point so grid reads return the stored
    // value exactly; monotone invariants are checked pointwise on the grid.
    const double snap = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(u));
    if (w < snap) w = 0.0;
    else if (1.0 - w < snap) w = 1.0;
    return v_[i] + w * (v_[i + 1] - v_[i]);
}

double ValueSlice::interp_error_bound() const {
    double b = 0.0;
    for (std::size_t i = 1; i + 1 < v_.size(); ++i) {
        b = std::max(b, std::abs(v_[i + 1] - 2.0 * v_[i] + v_[i - 1]) * 0.5);
    }
    return b;
}

}  // namespace ncu
