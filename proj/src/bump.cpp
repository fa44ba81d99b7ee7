#include "trl/bump.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace trl {

namespace {

double raw_bump(double w) noexcept {
    if (w <= 0.0 || w >= 1.0) return 0.0;
    return std::exp(-1.0 / (w * (1.0 - w)));
}

// Cubic Hermite table of s on [0, 1/2]; the other half follows by symmetry.
class SmoothstepTable {
public:
    static constexpr int kNodes = 4096;  // intervals on [0, 1/2]

    SmoothstepTable() {
        using boost::math::quadrature::gauss;
        h_ = 0.5 / kNodes;
        std::vector<long double> cumulative(kNodes + 1, 0.0L);
        for (int i = 0; i < kNodes; ++i) {
            const double a = i * h_, b = (i + 1) * h_;
            cumulative[i + 1] = cumulative[i] + gauss<double, 10>::integrate(raw_bump, a, b);
        }
        // int_0^1 b = 2 int_0^{1/2} b
        const long double total = 2.0L * cumulative[kNodes];
        inv_total_ = static_cast<double>(1.0L / total);
        value_.resize(kNodes + 1);
        slope_.resize(kNodes + 1);
        for (int i = 0; i <= kNodes; ++i) {
            value_[i] = static_cast<double>(cumulative[i] / total);
            slope_[i] = raw_bump(i * h_) * inv_total_;
        }
        value_[kNodes] = 0.5;
    }

    double lower_half(double v) const noexcept {
        const double pos = v / h_;
        auto i = static_cast<int>(pos);
        if (i >= kNodes) return 0.5;
        const double t = pos - i;
        const double t2 = t * t, t3 = t2 * t;
        const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
        const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
        return h00 * value_[i] + h10 * h_ * slope_[i] + h01 * value_[i + 1] + h11 * h_ * slope_[i + 1];
    }

    double inv_total() const noexcept { return inv_total_; }

private:
    double h_;
    double inv_total_;
    std::vector<double> value_, slope_;
};

const SmoothstepTable& table() {
    static const SmoothstepTable t;
    return t;
}

}  // namespace

double smoothstep(double v) noexcept {
    if (v <= 0.0) return 0.0;
    if (v >= 1.0) return 1.0;
    if (v == 0.5) return 0.5;
    if (v < 0.5) return table().lower_half(v);
    return 1.0 - table().lower_half(1.0 - v);
}

double smoothstep_derivative(double v) noexcept { return raw_bump(v) * table().inv_total(); }

double gamma_cutoff(double u) noexcept {
    const double a = std::abs(u);
    if (a <= 1.0) return 1.0;
    if (a >= 2.0) return 0.0;
    return smoothstep(2.0 - a);
}

BumpProfile::BumpProfile(bool annular, double rise_lo, double rise_hi, double inner, double outer)
    : annular_(annular), rise_lo_(rise_lo), rise_hi_(rise_hi), inner_(inner), outer_(outer) {}

BumpProfile::BumpProfile(const BumpProfile& other)
    : annular_(other.annular_),
      rise_lo_(other.rise_lo_),
      rise_hi_(other.rise_hi_),
      inner_(other.inner_),
      outer_(other.outer_) {}

BumpProfile& BumpProfile::operator=(const BumpProfile& other) {
    if (this == &other) return *this;
    annular_ = other.annular_;
    rise_lo_ = other.rise_lo_;
    rise_hi_ = other.rise_hi_;
    inner_ = other.inner_;
    outer_ = other.outer_;
    std::lock_guard lock(memo_mutex_);
    memo_.clear();
    return *this;
}

BumpProfile BumpProfile::plateau(double inner, double outer) { return {false, 0.0, 0.0, inner, outer}; }

BumpProfile BumpProfile::annular(double rise_lo, double rise_hi, double inner, double outer) {
    return {true, rise_lo, rise_hi, inner, outer};
}

double BumpProfile::operator()(double u) const noexcept {
    const double a = std::abs(u);
    if (a >= outer_) return 0.0;
    if (annular_) {
        if (a <= rise_lo_) return 0.0;
        if (a < rise_hi_) return smoothstep((a - rise_lo_) / (rise_hi_ - rise_lo_));
    }
    if (a <= inner_) return 1.0;
    return smoothstep((outer_ - a) / (outer_ - inner_));
}

double BumpProfile::integral() const noexcept {
    double total = 2.0 * inner_ + (outer_ - inner_);
    if (annular_) total -= 2.0 * rise_lo_ + (rise_hi_ - rise_lo_);
    return total;
}

double BumpProfile::hat(double xi) const {
    xi = std::abs(xi);
    const auto key = std::bit_cast<std::uint64_t>(xi);
    {
        std::lock_guard lock(memo_mutex_);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    }
    const double v = hat_uncached(xi);
    std::lock_guard lock(memo_mutex_);
    if (memo_.size() > (1u << 20)) memo_.clear();
    memo_.emplace(key, v);
    return v;
}

double BumpProfile::hat_uncached(double xi) const {
    using boost::math::quadrature::gauss;
    constexpr double two_pi = 2.0 * std::numbers::pi;
    if (xi == 0.0) return integral();
    // 2 int_0^inf eta(u) cos(2 pi u xi) du; flat pieces in closed form.
    auto flat = [&](double lo, double hi) {
        return (std::sin(two_pi * hi * xi) - std::sin(two_pi * lo * xi)) / (std::numbers::pi * xi);
    };
    auto ramp = [&](double lo, double hi) {
        const double width = hi - lo;
        const int panels = std::max(8, static_cast<int>(std::ceil(4.0 * width * xi)));
        const double step = width / panels;
        double acc = 0.0;
        for (int p = 0; p < panels; ++p) {
            const double a = lo + p * step;
            acc += gauss<double, 20>::integrate([&](double u) { return (*this)(u) * std::cos(two_pi * u * xi); },
                                                a, a + step);
        }
        return 2.0 * acc;
    };
    if (annular_) return ramp(rise_lo_, rise_hi_) + flat(rise_hi_, inner_) + ramp(inner_, outer_);
    return flat(0.0, inner_) + ramp(inner_, outer_);
}

const BumpProfile& arc_bump() {
    static const BumpProfile b = BumpProfile::plateau(1.0 / 20.0, 1.0 / 10.0);
    return b;
}

const BumpProfile& annular_bump() {
    static const BumpProfile b = BumpProfile::annular(1.0 / 8.0, 1.0 / 4.0, 1.0 / 2.0, 1.0);
    return b;
}

const BumpProfile& filled_bump() {
    static const BumpProfile b = BumpProfile::plateau(1.0 / 2.0, 1.0);
    return b;
}

}  // namespace trl
