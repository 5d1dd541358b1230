#pragma once
// Model data for the kinetic equation: a polynomial confining potential
// V(q), an even polynomial interaction kernel G (the pair potential is
// F(q) = G(|q|), and evenness makes F(q) = G(q)), and a structural
// self-check that reports which standing hypotheses a given (V, G, rho0)
// satisfies instead of silently assuming them.

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "vfp/grid.hpp"
#include "vfp/numeric.hpp"
#include "vfp/polynomial.hpp"

namespace vfp {

/// Confining potential V.  Constructing one enforces the shape every solver
/// relies on: even degree >= 2 with positive leading coefficient (so V
/// confines in both directions).
class ConfiningPotential {
public:
    explicit ConfiningPotential(std::vector<double> coeffs) : poly_(std::move(coeffs)) {
        if (poly_.degree() < 2)
            throw std::invalid_argument("confining potential needs degree >= 2");
        if (poly_.degree() % 2 != 0)
            throw std::invalid_argument("confining potential needs even degree");
        if (!(poly_.leading() > 0.0))
            throw std::invalid_argument("confining potential needs a positive leading coefficient");
        grad_ = poly_.derivative();
    }

    double value(double q) const { return poly_(q); }
    double gradient(double q) const { return grad_(q); }
    const Polynomial& poly() const { return poly_; }
    const Polynomial& grad_poly() const { return grad_; }
    std::size_t degree() const { return poly_.degree(); }

private:
    Polynomial poly_;
    Polynomial grad_;
};

/// Interaction kernel G.  Deliberately permissive at construction -- only
/// finiteness is enforced -- so that defective kernels can still be run
/// through check_assumptions and diagnosed rather than rejected opaquely.
/// G identically zero means "no interaction" and is accepted everywhere.
class InteractionPotential {
public:
    InteractionPotential() : g_(), g_grad_() {}
    explicit InteractionPotential(std::vector<double> coeffs) : g_(std::move(coeffs)) {
        g_grad_ = g_.derivative();
    }

    bool is_zero() const { return g_.is_zero(); }
    double value(double q) const { return g_(q); }
    double gradient(double q) const { return g_grad_(q); }
    const Polynomial& poly() const { return g_; }
    const Polynomial& grad_poly() const { return g_grad_; }
    std::size_t degree() const { return g_.degree(); }

private:
    Polynomial g_;
    Polynomial g_grad_;
};

/// Coefficients of q -> integral of F(q - x) dmu(x), given the raw moments
/// M_0..M_deg(G) of mu.  Exact binomial expansion, no quadrature.
inline Polynomial convolve_interaction(const InteractionPotential& f,
                                       const std::vector<double>& q_moments) {
    return average_shifted(f.poly(), q_moments);
}

enum class Verdict { holds, fails, not_checkable };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::holds: return "holds";
        case Verdict::fails: return "fails";
        default: return "not checkable";
    }
}

struct AssumptionCheck {
    std::string id;       // stable identifier, "A1".."A7"
    Verdict verdict;
    std::string witness;  // human-readable witness or counterexample
};

struct AssumptionReport {
    std::vector<AssumptionCheck> checks;

    const AssumptionCheck& find(const std::string& id) const {
        for (const auto& c : checks)
            if (c.id == id) return c;
        throw std::invalid_argument("no assumption check with id " + id);
    }

    /// True when every structural hypothesis on (V, G) holds (A1-A5);
    /// the data-dependent checks (A6, A7) may still be "not checkable".
    bool model_ok() const {
        for (const auto& c : checks)
            if (c.id <= "A5" && c.verdict != Verdict::holds) return false;
        return true;
    }

    std::string to_text() const {
        std::string out;
        for (const auto& c : checks) {
            out += c.id;
            out += ": ";
            out += to_string(c.verdict);
            if (!c.witness.empty()) {
                out += " -- ";
                out += c.witness;
            }
            out += '\n';
        }
        return out;
    }
};

namespace detail {

inline std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

// Smoothness: polynomials are smooth by construction.
inline AssumptionCheck check_smoothness(const ConfiningPotential& v,
                                        const InteractionPotential& g) {
    return {"A1", Verdict::holds,
            "V and G are polynomials (degrees " + std::to_string(v.degree()) + ", " +
                std::to_string(g.degree()) + "), hence smooth"};
}

// Polynomial gradient growth: |V'(q)| <= K max(1,|q|)^(2m) with 2m = deg V.
// K is derived by sampling and recorded, never tested against a bound.
inline AssumptionCheck check_growth(const ConfiningPotential& v) {
    const std::size_t deg = v.degree();
    if (deg % 2 != 0 || !(v.poly().leading() > 0.0))
        return {"A2", Verdict::fails, "degree " + std::to_string(deg) + ", leading " +
                                          fmt(v.poly().leading())};
    const unsigned two_m = static_cast<unsigned>(deg);
    double k_bound = 0.0;
    for (int s = -4000; s <= 4000; ++s) {
        const double q = 10.0 * static_cast<double>(s) / 4000.0;
        const double denom = pow_int(std::max(1.0, std::abs(q)), two_m);
        k_bound = std::max(k_bound, std::abs(v.gradient(q)) / denom);
    }
    return {"A2", Verdict::holds,
            "even degree " + std::to_string(deg) + ", leading " + fmt(v.poly().leading()) +
                " > 0; derived m = " + std::to_string(deg / 2) + ", K ~= " + fmt(k_bound)};
}

// Quartic minorization: V(q) >= C4 q^4 - C2 q^2 for some C4, C2 > 0.
// Decidable from the coefficients: it needs degree >= 4 and V(0) > 0, or
// V(0) = 0 together with V'(0) = 0 (otherwise V dips below every such
// minorant near the origin).  Constants are then fitted by sampling.
inline AssumptionCheck check_quartic_floor(const ConfiningPotential& v) {
    const auto& c = v.poly().coeffs();
    const double c0 = v.poly().coeff(0), c1 = v.poly().coeff(1);
    if (v.degree() < 4)
        return {"A3", Verdict::fails, "degree " + std::to_string(v.degree()) +
                                          " < 4: no quartic lower bound"};
    if (!(c0 > 0.0 || (c0 == 0.0 && c1 == 0.0)))
        return {"A3", Verdict::fails,
                "V(0) = " + fmt(c0) + ", V'(0) = " + fmt(c1) +
                    ": V is negative arbitrarily close to the origin relative to q^2"};
    const double c4 = v.degree() == 4 ? 0.5 * v.poly().leading() : 1.0;
    double coeff_sum = 0.0;
    for (double ck : c) coeff_sum += std::abs(ck);
    const double r = std::max(10.0, 2.0 * (coeff_sum + c4 + 1.0) / v.poly().leading() + 1.0);
    double c2 = 1.0;
    for (int s = -8000; s <= 8000; ++s) {
        const double q = r * static_cast<double>(s) / 8000.0;
        if (std::abs(q) < 1e-9) continue;
        const double need = (c4 * pow_int(q, 4) - v.value(q)) / (q * q);
        if (need > c2) c2 = need;
    }
    c2 *= 1.0 + 1e-9;
    // verify the fitted minorant on a denser sweep before reporting it
    for (int s = -20000; s <= 20000; ++s) {
        const double q = r * static_cast<double>(s) / 20000.0;
        if (v.value(q) < c4 * pow_int(q, 4) - c2 * q * q - 1e-12)
            return {"A3", Verdict::fails, "fitted minorant violated at q = " + fmt(q)};
    }
    return {"A3", Verdict::holds,
            "V(q) >= " + fmt(c4) + " q^4 - " + fmt(c2) + " q^2 (fitted on [-" + fmt(r) +
                ", " + fmt(r) + "])"};
}

// Interaction shape: G even, G >= 0, polynomial growth (automatic), and a
// genuine pair potential (degree >= 2).
inline AssumptionCheck check_interaction_shape(const InteractionPotential& g) {
    const auto& c = g.poly().coeffs();
    for (std::size_t k = 1; k < c.size(); k += 2)
        if (c[k] != 0.0)
            return {"A4", Verdict::fails,
                    "odd coefficient at index " + std::to_string(k) + " (" + fmt(c[k]) +
                        "): G(|q|) is not smooth / F is not even"};
    if (g.degree() < 2)
        return {"A4", Verdict::fails, "degree " + std::to_string(g.degree()) +
                                          " < 2: no interaction strength"};
    if (!(g.poly().leading() > 0.0))
        return {"A4", Verdict::fails, "leading coefficient " + fmt(g.poly().leading()) +
                                          " <= 0: G is unbounded below"};
    for (int s = -1000; s <= 1000; ++s) {
        const double q = 10.0 * static_cast<double>(s) / 1000.0;
        if (g.value(q) < 0.0)
            return {"A4", Verdict::fails,
                    "G(" + fmt(q) + ") = " + fmt(g.value(q)) + " < 0"};
    }
    return {"A4", Verdict::holds, "even, nonnegative on [-10,10], degree " +
                                      std::to_string(g.degree()) + " with positive leading"};
}

// Convexity of the kernel on the sampled range.
inline AssumptionCheck check_interaction_convexity(const InteractionPotential& g) {
    const Polynomial g2 = g.grad_poly().derivative();
    for (int s = -1000; s <= 1000; ++s) {
        const double q = 10.0 * static_cast<double>(s) / 1000.0;
        if (g2(q) < 0.0)
            return {"A5", Verdict::fails,
                    "G''(" + fmt(q) + ") = " + fmt(g2(q)) + " < 0"};
    }
    return {"A5", Verdict::holds, "G'' >= 0 at 2001 sample points on [-10,10]"};
}

// Data-dependent checks on the initial density: moment integrability of
// order 8r^2 (r from the degrees of V and G) and finite entropy.
inline AssumptionCheck check_initial_moments(const ConfiningPotential& v,
                                             const InteractionPotential& g,
                                             const PhaseDensity* rho0) {
    if (rho0 == nullptr)
        return {"A6", Verdict::not_checkable, "no initial density supplied"};
    const std::size_t m = v.degree() / 2;
    const std::size_t n = g.degree() >= 2 ? g.degree() / 2 : 1;
    const std::size_t r = std::max(m, n);
    const std::size_t order = 8 * r * r;
    const double mq = rho0->q_moments(order).back();
    const double mp = rho0->p_moments(order).back();
    if (!std::isfinite(mq) || !std::isfinite(mp))
        return {"A6", Verdict::fails, "moment of order " + std::to_string(order) +
                                          " is not finite"};
    return {"A6", Verdict::holds, "q,p moments of order " + std::to_string(order) +
                                      " = " + fmt(mq) + ", " + fmt(mp)};
}

inline AssumptionCheck check_initial_entropy(const PhaseDensity* rho0) {
    if (rho0 == nullptr)
        return {"A7", Verdict::not_checkable, "no initial density supplied"};
    KahanSum s;
    for (double v : rho0->values())
        if (v > 0.0) s.add(v * std::log(v));
    const double h = s.value() * rho0->grid().cell_area();
    if (!std::isfinite(h))
        return {"A7", Verdict::fails, "discrete entropy integral is not finite"};
    return {"A7", Verdict::holds, "discrete integral of rho log rho = " + fmt(h)};
}

}  // namespace detail

/// Run every structural hypothesis check and report verdicts with
/// witnesses.  rho0 is optional; without it the data-dependent checks
/// come back not_checkable.
inline AssumptionReport check_assumptions(const ConfiningPotential& v,
                                          const InteractionPotential& g,
                                          const PhaseDensity* rho0 = nullptr) {
    AssumptionReport r;
    r.checks.push_back(detail::check_smoothness(v, g));
    r.checks.push_back(detail::check_growth(v));
    r.checks.push_back(detail::check_quartic_floor(v));
    r.checks.push_back(detail::check_interaction_shape(g));
    r.checks.push_back(detail::check_interaction_convexity(g));
    r.checks.push_back(detail::check_initial_moments(v, g, rho0));
    r.checks.push_back(detail::check_initial_entropy(rho0));
    return r;
}

}  // namespace vfp
