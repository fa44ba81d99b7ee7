#pragma once

// Deterministic low-discrepancy points on the torus: the Kronecker (R_d)
// sequence x_i = frac(shift + i * alpha) with alpha_j = phi_d^{-j}, phi_d the
// unique positive root of x^{d+1} = x + 1.

#include <cstddef>
#include <vector>

namespace trl {

class KroneckerSequence {
public:
    explicit KroneckerSequence(int d, std::vector<double> shift = {});
    int dim() const noexcept { return d_; }
    /// Writes the i-th point (d coordinates in [0,1)) into out.
    void point(std::size_t i, double* out) const noexcept;

private:
    int d_;
    std::vector<double> alpha_;
    std::vector<double> shift_;
};

}  // namespace trl
