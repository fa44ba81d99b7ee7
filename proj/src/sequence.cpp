#include "trl/sequence.hpp"

#include <cmath>

#include "trl/error.hpp"

namespace trl {

KroneckerSequence::KroneckerSequence(int d, std::vector<double> shift) : d_(d), shift_(std::move(shift)) {
    require(d >= 1, ErrorCode::InvalidArgument, "KroneckerSequence: d must be >= 1");
    if (shift_.empty()) shift_.assign(static_cast<std::size_t>(d), 0.5);
    require(static_cast<int>(shift_.size()) == d, ErrorCode::InvalidArgument, "KroneckerSequence: shift size");
    double phi = 2.0;
    for (int it = 0; it < 64; ++it) phi = std::pow(1.0 + phi, 1.0 / (d + 1));
    alpha_.resize(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) alpha_[static_cast<std::size_t>(j)] = std::fmod(std::pow(1.0 / phi, j + 1), 1.0);
}

void KroneckerSequence::point(std::size_t i, double* out) const noexcept {
    // i * alpha reduced in extended precision so long runs stay uniform
    const long double il = static_cast<long double>(i);
    for (int j = 0; j < d_; ++j) {
        const auto jj = static_cast<std::size_t>(j);
        long double v = static_cast<long double>(shift_[jj]) + il * static_cast<long double>(alpha_[jj]);
        v -= std::floor(v);
        out[j] = static_cast<double>(v);
        if (out[j] >= 1.0) out[j] = 0.0;
    }
}

}  // namespace trl
