#pragma once
// Adaptive Simpson quadrature on an interval, with an explicit result type
// instead of silent failure: callers decide whether a non-converged panel
// is an error.

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace vfp {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = true;
    std::size_t evaluations = 0;
};

namespace detail {

template <class F>
void adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                          double whole, double tol, int depth, int force,
                          QuadratureResult& out) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    out.evaluations += 2;
    const double h6 = (b - a) / 12.0;
    const double left = h6 * (fa + 4.0 * flm + fm);
    const double right = h6 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    // The error estimate compares two samplings of the same panel; a narrow
    // feature lying between all sample points makes both samplings agree on
    // nothing, so the first `force` levels subdivide unconditionally.
    if (depth <= 0 || (force <= 0 && std::abs(delta) <= 15.0 * tol)) {
        out.value += left + right + delta / 15.0;
        out.error_estimate += std::abs(delta) / 15.0;
        if (depth <= 0 && std::abs(delta) > 15.0 * tol) out.converged = false;
        return;
    }
    adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, force - 1, out);
    adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, force - 1, out);
}

}  // namespace detail

/// Integrate f over [a, b] to absolute tolerance abs_tol.  The first
/// min_depth levels subdivide unconditionally so that features narrower than
/// (b - a) / 2^min_depth still intersect the sample set before the error
/// estimate is trusted; max_depth caps the recursion either way.
template <class F>
QuadratureResult adaptive_simpson(const F& f, double a, double b, double abs_tol,
                                  int max_depth = 48, int min_depth = 6) {
    if (!(a < b)) throw std::invalid_argument("adaptive_simpson: need a < b");
    if (!(abs_tol > 0.0)) throw std::invalid_argument("adaptive_simpson: need abs_tol > 0");
    QuadratureResult out;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    out.evaluations = 3;
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, abs_tol, max_depth, min_depth, out);
    return out;
}

}  // namespace vfp
