#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace ncu {

/// Nondecreasing piecewise linear function sampled on a uniform wealth
/// grid. Evaluation interpolates linearly inside [lo, hi] and extrapolates
/// with the edge segment slopes outside. Tiny monotonicity wobble (from
/// optimizer termination error) is clipped away at construction; anything
/// beyond the clip threshold aborts, because it signals a real defect.
class ValueSlice {
public:
    ValueSlice() = default;

    /// values.size() >= 2, evenly spaced over [lo, hi].
    ValueSlice(double lo, double hi, std::vector<double> values);

    /// Samples f on the grid and builds the slice.
    static ValueSlice sample(double lo, double hi, std::size_t n,
                             const std::function<double(double)>& f);

    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    double step() const noexcept { return step_; }
    std::size_t size() const noexcept { return v_.size(); }
    double grid_point(std::size_t i) const { return lo_ + step_ * static_cast<double>(i); }
    const std::vector<double>& values() const noexcept { return v_; }

    double operator()(double x) const;
    bool covers(double x) const noexcept { return x >= lo_ && x <= hi_; }

    /// Upper bound on the interpolation error against a piecewise linear
    /// target sampled on this grid: max_i |v[i+1] - 2 v[i] + v[i-1]| / 2.
    /// A kink inside one cell bends the sampled chord by at most this much.
    double interp_error_bound() const;

    /// Largest pre-clip monotonicity violation (diagnostic; 0 if clean).
    double clipped_wobble() const noexcept { return wobble_; }

private:
    double lo_ = 0.0, hi_ = 0.0, step_ = 0.0;
    std::vector<double> v_;
    double wobble_ = 0.0;
};

}  // namespace ncu
