#pragma once
// Scalar functionals of a phase-space density: the free-energy ledger that
// the dynamics must drain, its dissipation rate, an entropy split used by
// the a-priori floor, and the floor itself.  The floor is evaluated with
// grid sums so that it holds cell by cell for any density on that grid --
// not merely up to discretization error.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "vfp/grid.hpp"
#include "vfp/model.hpp"
#include "vfp/numeric.hpp"
#include "vfp/polynomial.hpp"

namespace vfp {

struct FreeEnergyReport {
    double lambda = 0.0;
    double kinetic = 0.0;      // integral of (p^2/2) rho
    double confinement = 0.0;  // integral of V rho
    double interaction = 0.0;  // 1/2 integral of (F * rho) rho
    double entropy = 0.0;      // integral of rho log rho (unweighted)
    double free_energy = 0.0;  // kinetic + confinement + interaction + lambda * entropy
};

inline FreeEnergyReport free_energy(const PhaseDensity& rho, const ConfiningPotential& v,
                                    const InteractionPotential& g, double lambda) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("free_energy: lambda must be positive");
    const PhaseGrid& grid = rho.grid();
    const std::size_t nq = grid.n_q(), np = grid.n_p();
    const double area = grid.cell_area();

    std::vector<double> row_mass(nq);
    KahanSum kin, ent;
    for (std::size_t i = 0; i < nq; ++i) {
        KahanSum rm;
        const double* row = rho.values().data() + i * np;
        for (std::size_t j = 0; j < np; ++j) {
            const double val = row[j];
            rm.add(val);
            const double p = grid.p_center(j);
            kin.add(0.5 * p * p * val);
            if (val > 0.0) ent.add(val * std::log(val));
        }
        row_mass[i] = rm.value();
    }

    KahanSum conf;
    for (std::size_t i = 0; i < nq; ++i) conf.add(v.value(grid.q_center(i)) * row_mass[i]);

    double inter = 0.0;
    if (!g.is_zero()) {
        const Polynomial field = convolve_interaction(g, rho.q_moments(g.degree()));
        KahanSum s;
        for (std::size_t i = 0; i < nq; ++i) s.add(field(grid.q_center(i)) * row_mass[i]);
        inter = 0.5 * s.value() * area;
    }

    FreeEnergyReport r;
    r.lambda = lambda;
    r.kinetic = kin.value() * area;
    r.confinement = conf.value() * area;
    r.interaction = inter;
    r.entropy = ent.value() * area;
    r.free_energy = r.kinetic + r.confinement + r.interaction + lambda * r.entropy;
    return r;
}

/// Relative-entropy production rate: integral of (1/rho) (p rho + lambda
/// d_p rho)^2, with central momentum differences (one-sided at the edges).
/// Cells below 1e-13 of the peak count as vacuum: for any resolved profile
/// their true contribution scales with rho itself and is negligible, while
/// the discrete quotient across an underresolved tail cliff (neighbors many
/// orders of magnitude apart) is unbounded noise.
inline double dissipation(const PhaseDensity& rho, double lambda) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("dissipation: lambda must be positive");
    const PhaseGrid& grid = rho.grid();
    const std::size_t nq = grid.n_q(), np = grid.n_p();
    const double dp = grid.dp();
    double peak = 0.0;
    for (double v : rho.values()) peak = std::max(peak, v);
    const double vacuum = 1e-13 * peak;
    KahanSum s;
    for (std::size_t i = 0; i < nq; ++i) {
        const double* col = rho.values().data() + i * np;
        for (std::size_t j = 0; j < np; ++j) {
            const double val = col[j];
            if (!(val > vacuum)) continue;
            double grad;
            if (j == 0)
                grad = (col[1] - col[0]) / dp;
            else if (j == np - 1)
                grad = (col[np - 1] - col[np - 2]) / dp;
            else
                grad = (col[j + 1] - col[j - 1]) / (2.0 * dp);
            const double flux = grid.p_center(j) * val + lambda * grad;
            s.add(flux * flux / val);
        }
    }
    return s.value() * grid.cell_area();
}

struct EntropySplit {
    double i_plus = 0.0;   // cells with rho >= exp(-|(q,p)|)
    double i_minus = 0.0;  // cells with rho < exp(-|(q,p)|)
    double total() const { return i_plus + i_minus; }
};

/// Split the entropy integral by comparing rho against exp(-|(q,p)|).
/// The low-density part is the only one that can diverge downward, and it
/// is bounded below by the exponential-kernel sum used in lower_bound.
inline EntropySplit entropy_split(const PhaseDensity& rho) {
    const PhaseGrid& grid = rho.grid();
    const std::size_t nq = grid.n_q(), np = grid.n_p();
    KahanSum plus, minus;
    for (std::size_t i = 0; i < nq; ++i) {
        const double q = grid.q_center(i);
        for (std::size_t j = 0; j < np; ++j) {
            const double val = rho.at(i, j);
            if (!(val > 0.0)) continue;
            const double s = val * std::log(val);
            if (val >= std::exp(-std::hypot(q, grid.p_center(j))))
                plus.add(s);
            else
                minus.add(s);
        }
    }
    return {plus.value() * grid.cell_area(), minus.value() * grid.cell_area()};
}

struct LowerBoundReport {
    double lambda = 0.0;
    double kernel_mass = 0.0;     // grid sum of exp(-|(q,p)|/2)
    double entropy_floor = 0.0;   // -(2/e) * kernel_mass
    double entropy_floor_r2 = 0.0;  // full-plane analogue, -16 pi / e
    double v_min = 0.0;           // min over grid of V(q) - q^2/2
    double bound = 0.0;           // -lambda^2/2 + lambda*entropy_floor + v_min
};

/// A-priori floor for the free energy of *any* unit-mass density on this
/// grid.  Derivation is cellwise: on high-density cells rho log rho >=
/// -|x| rho and |x| <= lambda/2 + |x|^2/(2 lambda) absorbs the kinetic and
/// harmonic part of V; on low-density cells rho log rho >= -(2/e)
/// exp(-|x|/2).  Both steps use grid sums, so the floor is exact for the
/// discrete functional, independent of resolution.
inline LowerBoundReport lower_bound(const ConfiningPotential& v, double lambda,
                                    const PhaseGrid& grid) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("lower_bound: lambda must be positive");
    KahanSum kernel;
    for (std::size_t i = 0; i < grid.n_q(); ++i) {
        const double q = grid.q_center(i);
        for (std::size_t j = 0; j < grid.n_p(); ++j)
            kernel.add(std::exp(-0.5 * std::hypot(q, grid.p_center(j))));
    }
    double vmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.n_q(); ++i) {
        const double q = grid.q_center(i);
        vmin = std::min(vmin, v.value(q) - 0.5 * q * q);
    }
    LowerBoundReport r;
    r.lambda = lambda;
    r.kernel_mass = kernel.value() * grid.cell_area();
    r.entropy_floor = -(2.0 / std::exp(1.0)) * r.kernel_mass;
    r.entropy_floor_r2 = -16.0 * std::acos(-1.0) / std::exp(1.0);
    r.v_min = vmin;
    r.bound = -0.5 * lambda * lambda + lambda * r.entropy_floor + r.v_min;
    return r;
}

struct MomentReport {
    double mass = 0.0;
    double m1_q = 0.0, m2_q = 0.0;
    double m1_p = 0.0, m2_p = 0.0;
    double boundary_mass = 0.0;
};

inline MomentReport moment_report(const PhaseDensity& rho) {
    const auto mq = rho.q_moments(2);
    const auto mp = rho.p_moments(2);
    return {mq[0], mq[1], mq[2], mp[1], mp[2], rho.boundary_mass()};
}

}  // namespace vfp
