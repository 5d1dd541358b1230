#pragma once
// Invariant probabilities.  A stationary state solves the self-consistency
// equation rho = C exp(-(p^2/2 + V + F * rho) / lambda); the map rho ->
// gibbs_map(rho) is iterated with damping, and for quadratic kernels
// G = alpha q^2 / 2 the problem reduces to a scalar fixed point for the
// mean m, which is what the branch finder and phase scan work with.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "vfp/diagnostics.hpp"
#include "vfp/grid.hpp"
#include "vfp/model.hpp"
#include "vfp/numeric.hpp"
#include "vfp/polynomial.hpp"
#include "vfp/quadrature.hpp"

namespace vfp {

/// One application of the self-consistency map: freeze the mean field of
/// rho, return the normalized Gibbs state of the frozen Hamiltonian.
/// Separable, so it costs n_q + n_p exponentials plus an outer product.
inline PhaseDensity gibbs_map(const PhaseDensity& rho, const ConfiningPotential& v,
                              const InteractionPotential& g, double lambda) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("gibbs_map: lambda must be positive");
    const PhaseGrid& grid = rho.grid();
    const std::size_t nq = grid.n_q(), np = grid.n_p();

    std::vector<double> a(nq);
    for (std::size_t i = 0; i < nq; ++i) a[i] = v.value(grid.q_center(i));
    if (!g.is_zero()) {
        const Polynomial field = convolve_interaction(g, rho.q_moments(g.degree()));
        for (std::size_t i = 0; i < nq; ++i) a[i] += field(grid.q_center(i));
    }
    const double a_min = *std::min_element(a.begin(), a.end());
    for (double& x : a) x = std::exp(-(x - a_min) / lambda);

    std::vector<double> b(np);
    for (std::size_t j = 0; j < np; ++j) {
        const double p = grid.p_center(j);
        b[j] = std::exp(-0.5 * p * p / lambda);
    }

    PhaseDensity out(grid);
    for (std::size_t i = 0; i < nq; ++i)
        for (std::size_t j = 0; j < np; ++j) out.at(i, j) = a[i] * b[j];
    out.renormalize();
    return out;
}

struct FixedPointResult {
    PhaseDensity density;
    double residual = 0.0;       // l1 distance between iterate and its image
    std::size_t iterations = 0;
    bool converged = false;
};

/// Damped iteration rho <- (1-theta) rho + theta T(rho) until the residual
/// |rho - T(rho)|_1 drops below tol.  Non-convergence is reported, not
/// thrown: the caller may inspect the best iterate.
inline FixedPointResult fixed_point(PhaseDensity rho, const ConfiningPotential& v,
                                    const InteractionPotential& g, double lambda,
                                    double theta = 0.5, double tol = 1e-12,
                                    std::size_t max_iter = 5000) {
    if (!(theta > 0.0 && theta <= 1.0))
        throw std::invalid_argument("fixed_point: damping theta must be in (0, 1]");
    if (!(tol > 0.0)) throw std::invalid_argument("fixed_point: tol must be positive");
    double residual = 0.0;
    for (std::size_t it = 1; it <= max_iter; ++it) {
        const PhaseDensity image = gibbs_map(rho, v, g, lambda);
        residual = l1_distance(rho, image);
        if (residual <= tol)
            return {std::move(rho), residual, it, true};
        auto& cur = rho.values();
        const auto& img = image.values();
        for (std::size_t n = 0; n < cur.size(); ++n)
            cur[n] = (1.0 - theta) * cur[n] + theta * img[n];
        rho.renormalize();
    }
    return {std::move(rho), residual, max_iter, false};
}

namespace detail {

/// Normalization integral and first two raw moments of the tilted measure
/// nu_m proportional to exp(-(V(q) + alpha (q-m)^2 / 2) / lambda) on
/// [-half_width, half_width].  The exponent is shifted by its sampled
/// maximum before exponentiation; tails must be below 1e-14 of the peak.
struct TiltedMoments {
    double mean = 0.0;
    double second = 0.0;
};

inline TiltedMoments tilted_moments(const ConfiningPotential& v, double alpha, double lambda,
                                    double m, double half_width) {
    const auto exponent = [&](double q) {
        const double d = q - m;
        return -(v.value(q) + 0.5 * alpha * d * d) / lambda;
    };
    double shift = -std::numeric_limits<double>::infinity();
    for (int s = -512; s <= 512; ++s) {
        const double q = half_width * static_cast<double>(s) / 512.0;
        shift = std::max(shift, exponent(q));
    }
    const auto w = [&](double q) { return std::exp(exponent(q) - shift); };
    if (w(-half_width) > 1e-14 || w(half_width) > 1e-14)
        throw std::runtime_error(
            "tilted_moments: integrand tail exceeds 1e-14 of the peak at +-" +
            std::to_string(half_width) + "; widen the interval");
    const double tol = 1e-12;
    const auto den = adaptive_simpson(w, -half_width, half_width, tol);
    const auto num1 =
        adaptive_simpson([&](double q) { return q * w(q); }, -half_width, half_width, tol);
    const auto num2 =
        adaptive_simpson([&](double q) { return q * q * w(q); }, -half_width, half_width, tol);
    if (!den.converged || !num1.converged || !num2.converged)
        throw std::runtime_error("tilted_moments: quadrature did not converge");
    if (!(den.value > 0.0))
        throw std::runtime_error("tilted_moments: degenerate normalization");
    return {num1.value / den.value, num2.value / den.value};
}

}  // namespace detail

/// Scalar self-consistency map Phi(m) = mean of nu_m for the quadratic
/// kernel G = alpha q^2 / 2.  Stationary means are exactly the fixed
/// points m = Phi(m).
inline double scalar_self_consistency(const ConfiningPotential& v, double alpha, double lambda,
                                      double m, double half_width = 12.0) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("scalar map: alpha must be >= 0");
    if (!(lambda > 0.0)) throw std::invalid_argument("scalar map: lambda must be positive");
    return detail::tilted_moments(v, alpha, lambda, m, half_width).mean;
}

/// All fixed points of Phi on [-m_max, m_max]: sign-change scan on 2048
/// uniform nodes, bisection on each bracket, deduplication, and exact
/// symmetrization when V is even.
inline std::vector<double> find_branches(const ConfiningPotential& v, double alpha,
                                         double lambda, double m_max = 4.0,
                                         double tol = 1e-10, double half_width = 12.0) {
    if (!(m_max > 0.0)) throw std::invalid_argument("find_branches: m_max must be positive");
    if (!(tol > 0.0)) throw std::invalid_argument("find_branches: tol must be positive");
    const auto h = [&](double m) {
        return scalar_self_consistency(v, alpha, lambda, m, half_width) - m;
    };
    constexpr std::size_t kNodes = 2048;
    std::vector<double> node(kNodes), val(kNodes);
    for (std::size_t s = 0; s < kNodes; ++s) {
        node[s] = -m_max + 2.0 * m_max * static_cast<double>(s) / (kNodes - 1);
        val[s] = h(node[s]);
    }
    if (!(val.front() > 0.0) || !(val.back() < 0.0))
        throw std::runtime_error("find_branches: scan window [-m_max, m_max] does not bracket "
                                 "the root set; increase m_max");

    std::vector<double> roots;
    for (std::size_t s = 0; s + 1 < kNodes; ++s) {
        if (val[s] == 0.0) roots.push_back(node[s]);
        if (!(val[s] > 0.0 && val[s + 1] < 0.0) && !(val[s] < 0.0 && val[s + 1] > 0.0))
            continue;
        double lo = node[s], hi = node[s + 1], flo = val[s];
        for (int it = 0; it < 200 && hi - lo > tol; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fmid = h(mid);
            if (fmid == 0.0) {
                lo = hi = mid;
                break;
            }
            if ((flo > 0.0) == (fmid > 0.0)) {
                lo = mid;
                flo = fmid;
            } else {
                hi = mid;
            }
        }
        roots.push_back(0.5 * (lo + hi));
    }
    if (val.back() == 0.0) roots.push_back(node.back());

    std::sort(roots.begin(), roots.end());
    std::vector<double> dedup;
    for (double r : roots)
        if (dedup.empty() || r - dedup.back() > 100.0 * tol) dedup.push_back(r);

    bool v_even = true;
    for (std::size_t k = 1; k < v.poly().coeffs().size(); k += 2)
        if (v.poly().coeff(k) != 0.0) v_even = false;
    if (v_even) {
        // pair +-m and pin the middle root to exactly zero
        std::vector<double> sym;
        for (double r : dedup) {
            if (std::abs(r) <= 100.0 * tol) {
                sym.push_back(0.0);
            } else if (r > 0.0) {
                sym.push_back(r);
                sym.push_back(-r);
            }
        }
        std::sort(sym.begin(), sym.end());
        dedup = std::move(sym);
    }
    return dedup;
}

struct PhaseScanPoint {
    double lambda = 0.0;
    std::vector<double> roots;
};

struct PhaseScanResult {
    std::vector<PhaseScanPoint> points;  // every lambda evaluated, ascending
    std::size_t count_low = 0;           // branch count at the lower endpoint
    std::size_t count_high = 0;          // branch count at the upper endpoint
    double bracket_lo = 0.0;             // transition bracket after bisection
    double bracket_hi = 0.0;
    double lambda_variance_match = 0.0;  // root of alpha * Var(nu_0) = lambda
};

/// Bisect the temperature interval on the branch count and cross-check the
/// bracket against the linearized criterion alpha * Var_{nu_0}(q) = lambda.
inline PhaseScanResult phase_scan(const ConfiningPotential& v, double alpha, double lambda_lo,
                                  double lambda_hi, double width_tol = 1e-3,
                                  double m_max = 4.0, double root_tol = 1e-10,
                                  double half_width = 12.0) {
    if (!(lambda_lo > 0.0 && lambda_hi > lambda_lo))
        throw std::invalid_argument("phase_scan: need 0 < lambda_lo < lambda_hi");
    if (!(width_tol > 0.0)) throw std::invalid_argument("phase_scan: width_tol must be positive");

    PhaseScanResult out;
    const auto probe = [&](double lam) {
        auto roots = find_branches(v, alpha, lam, m_max, root_tol, half_width);
        out.points.push_back({lam, roots});
        return roots.size();
    };
    out.count_low = probe(lambda_lo);
    out.count_high = probe(lambda_hi);
    if (out.count_low == out.count_high)
        throw std::invalid_argument("phase_scan: branch count is " +
                                    std::to_string(out.count_low) +
                                    " at both endpoints; nothing to bracket");

    double lo = lambda_lo, hi = lambda_hi;
    while (hi - lo > width_tol) {
        const double mid = 0.5 * (lo + hi);
        if (probe(mid) == out.count_low)
            lo = mid;
        else
            hi = mid;
    }
    out.bracket_lo = lo;
    out.bracket_hi = hi;

    // linearized transition: alpha * Var_{nu_0}(q) - lambda changes sign
    const auto u = [&](double lam) {
        const auto t = detail::tilted_moments(v, alpha, lam, 0.0, half_width);
        return alpha * (t.second - t.mean * t.mean) - lam;
    };
    double a = lambda_lo, b = lambda_hi, ua = u(a);
    if (ua * u(b) > 0.0) {
        out.lambda_variance_match = std::numeric_limits<double>::quiet_NaN();
    } else {
        for (int it = 0; it < 100 && b - a > 1e-12; ++it) {
            const double mid = 0.5 * (a + b);
            const double um = u(mid);
            if ((ua > 0.0) == (um > 0.0)) {
                a = mid;
                ua = um;
            } else {
                b = mid;
            }
        }
        out.lambda_variance_match = 0.5 * (a + b);
    }

    std::sort(out.points.begin(), out.points.end(),
              [](const PhaseScanPoint& x, const PhaseScanPoint& y) { return x.lambda < y.lambda; });
    return out;
}

}  // namespace vfp
