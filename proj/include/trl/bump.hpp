#pragma once

// Smooth compactly supported profiles shared by the propagator and kernel
// modules. Every transition uses the normalized bump-integral smoothstep
// s(v) = int_0^v b / int_0^1 b with b(w) = exp(-1/(w(1-w))).

#include <cstdint>
#include <mutex>
#include <unordered_map>

namespace trl {

/// s(v): 0 for v <= 0, 1 for v >= 1, C-infinity, s(v) + s(1-v) = 1 exactly.
double smoothstep(double v) noexcept;

/// s'(v) = b(v) / int_0^1 b.
double smoothstep_derivative(double v) noexcept;

/// Even profile 1 on [-1,1], 0 outside (-2,2).
double gamma_cutoff(double u) noexcept;

/// Even, compactly supported profile built from smoothstep transitions.
///   Plateau:  1 on |u| <= inner, falls to 0 on [inner, outer].
///   Annular:  0 on |u| <= rise_lo, rises on [rise_lo, rise_hi], 1 up to
///             inner, falls to 0 on [inner, outer].
class BumpProfile {
public:
    static BumpProfile plateau(double inner, double outer);
    static BumpProfile annular(double rise_lo, double rise_hi, double inner, double outer);

    double operator()(double u) const noexcept;

    /// hat(xi) = int eta(u) e(-u xi) du (real, profile is even). Memoized.
    double hat(double xi) const;

    /// int eta = hat(0), in closed form (transitions integrate to half width).
    double integral() const noexcept;

    /// sup |hat| = hat(0) for a nonnegative profile.
    double hat_max() const noexcept { return integral(); }

    double support() const noexcept { return outer_; }
    bool is_annular() const noexcept { return annular_; }

    BumpProfile(const BumpProfile& other);
    BumpProfile& operator=(const BumpProfile& other);

private:
    BumpProfile(bool annular, double rise_lo, double rise_hi, double inner, double outer);
    double hat_uncached(double xi) const;

    bool annular_;
    double rise_lo_, rise_hi_, inner_, outer_;
    mutable std::mutex memo_mutex_;
    mutable std::unordered_map<std::uint64_t, double> memo_;
};

/// Arc bump: 1 on |u| <= 1/20, supported in |u| <= 1/10. Also serves as the
/// centre cutoff eta_0.
const BumpProfile& arc_bump();

/// Dyadic-arc bump: 1 on 1/4 <= |u| <= 1/2, supported in 1/8 <= |u| <= 1.
const BumpProfile& annular_bump();

/// Top dyadic level: the annulus filled in (1 on |u| <= 1/2, supported in |u| <= 1).
const BumpProfile& filled_bump();

}  // namespace trl
