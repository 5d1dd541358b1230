#pragma once
// Small numeric helpers shared across the library: compensated summation,
// exact integer powers, and sign-symmetric limiter arithmetic.  Everything
// here is deterministic: no reassociation, no platform-dependent intrinsics.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace vfp {

/// Neumaier-compensated accumulator.  Reductions that feed invariants
/// (mass, moments, distances) go through this so that their error stays
/// O(eps) instead of O(n*eps).
class KahanSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
    KahanSum acc;
    for (double x : xs) acc.add(x);
    return acc.value();
}

/// x^k by repeated multiplication.  Deterministic, and exactly
/// sign-symmetric: pow_int(-x, k) == +-pow_int(x, k) in IEEE arithmetic.
inline double pow_int(double x, unsigned k) {
    double r = 1.0;
    for (unsigned i = 0; i < k; ++i) r *= x;
    return r;
}

/// minmod slope limiter, written so that minmod(-a, -b) == -minmod(a, b)
/// bit for bit (needed for the exact mirror-symmetry guarantees).
inline double minmod(double a, double b) {
    if (a > 0.0 && b > 0.0) return a < b ? a : b;
    if (a < 0.0 && b < 0.0) return a > b ? a : b;
    return 0.0;
}

/// Bernoulli function w / (e^w - 1), the exponential-fitting weight of the
/// implicit momentum-diffusion step.  Series branch keeps full accuracy
/// through w = 0.
inline double bernoulli_weight(double w) {
    if (std::abs(w) < 1e-5) {
        // w/(e^w-1) = 1 - w/2 + w^2/12 - w^4/720 + ...
        return 1.0 - 0.5 * w + w * w / 12.0;
    }
    return w / std::expm1(w);
}

}  // namespace vfp
