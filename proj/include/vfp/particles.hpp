#pragma once
// Interacting-particle counterpart of the grid solver: N coupled Langevin
// equations
//
//   dQ_i = P_i dt,
//   dP_i = -V'(Q_i) dt - (1/N) sum_j G'(Q_i - Q_j) dt - P_i dt
//          + sqrt(2 lambda) dW_i,
//
// integrated with BAOAB (exact Ornstein-Uhlenbeck middle segment).  The
// mean-field sum collapses, for polynomial G, to a polynomial in Q_i whose
// coefficients come from the empirical moments, so the force costs O(N)
// and agrees with the naive pairwise double sum up to reassociation only.
//
// All randomness is counter-based (see random.hpp): a run is a pure
// function of (seed, N, dt, step count), bit-identical at any worker count.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "vfp/errors.hpp"
#include "vfp/grid.hpp"
#include "vfp/model.hpp"
#include "vfp/numeric.hpp"
#include "vfp/parallel.hpp"
#include "vfp/polynomial.hpp"
#include "vfp/random.hpp"

namespace vfp {

struct ParticleEnsemble {
    std::vector<double> q;
    std::vector<double> p;
    double t = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t steps = 0;  // completed integrator steps (noise counter)

    std::size_t size() const { return q.size(); }

    // cached force from the end of the previous step (BAOAB reuses it)
    std::vector<double> force_cache;
    bool force_cache_valid = false;
};

/// Product of two Gaussians in (q, p).
struct GaussianLaw {
    double mean_q = 0.0, sd_q = 1.0;
    double mean_p = 0.0, sd_p = 1.0;
};

/// Mixture of two point masses in q at fixed momentum.
struct TwoPointLaw {
    double q_a = -1.0, q_b = 1.0;
    double p0 = 0.0;
    double weight_a = 0.5;
};

/// Draw from a grid density: cells by mass, uniform jitter inside a cell.
struct DensityLaw {
    const PhaseDensity* density = nullptr;
};

using InitialLaw = std::variant<GaussianLaw, TwoPointLaw, DensityLaw>;

namespace detail {

constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kDynamicsStream = 1;

inline void init_gaussian(ParticleEnsemble& e, const GaussianLaw& law, const CounterRng& rng) {
    if (!(law.sd_q > 0.0 && law.sd_p > 0.0))
        throw std::invalid_argument("gaussian law: standard deviations must be positive");
    const std::size_t n = e.size();
    for (std::size_t i = 0; i < n; ++i) {
        e.q[i] = law.mean_q + law.sd_q * rng.normal(kInitStream, 2 * i);
        e.p[i] = law.mean_p + law.sd_p * rng.normal(kInitStream, 2 * i + 1);
    }
}

inline void init_two_point(ParticleEnsemble& e, const TwoPointLaw& law, const CounterRng& rng) {
    if (!(law.weight_a >= 0.0 && law.weight_a <= 1.0))
        throw std::invalid_argument("two-point law: weight must be in [0, 1]");
    const std::size_t n = e.size();
    for (std::size_t i = 0; i < n; ++i) {
        e.q[i] = rng.uniform(kInitStream, i) <= law.weight_a ? law.q_a : law.q_b;
        e.p[i] = law.p0;
    }
}

inline void init_from_density(ParticleEnsemble& e, const DensityLaw& law, const CounterRng& rng) {
    if (law.density == nullptr)
        throw std::invalid_argument("density law: no density supplied");
    const PhaseDensity& rho = *law.density;
    const PhaseGrid& grid = rho.grid();
    std::vector<double> cdf(rho.values().size());
    KahanSum acc;
    for (std::size_t n = 0; n < cdf.size(); ++n) {
        const double v = rho.values()[n];
        if (v < 0.0) throw std::invalid_argument("density law: negative cell value");
        acc.add(v);
        cdf[n] = acc.value();
    }
    const double total = cdf.back();
    if (!(total > 0.0)) throw std::invalid_argument("density law: density has no mass");
    for (double& c : cdf) c /= total;
    const std::size_t np = grid.n_p();
    for (std::size_t i = 0; i < e.size(); ++i) {
        const double u = rng.uniform(kInitStream, 3 * i);
        const std::size_t cell =
            std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
        const std::size_t iq = cell / np, jp = cell % np;
        const double jq = rng.uniform(kInitStream, 3 * i + 1);
        const double jp_frac = rng.uniform(kInitStream, 3 * i + 2);
        e.q[i] = grid.q_center(iq) + (jq - 0.5) * grid.dq();
        e.p[i] = grid.p_center(jp) + (jp_frac - 0.5) * grid.dp();
    }
}

}  // namespace detail

/// Create and populate an ensemble of n >= 2 particles from a named law.
inline ParticleEnsemble init_ensemble(std::size_t n, std::uint64_t seed, const InitialLaw& law) {
    if (n < 2) throw std::invalid_argument("ensemble needs at least 2 particles");
    ParticleEnsemble e;
    e.q.resize(n);
    e.p.resize(n);
    e.seed = seed;
    const CounterRng rng(seed);
    std::visit(
        [&](const auto& l) {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, GaussianLaw>)
                detail::init_gaussian(e, l, rng);
            else if constexpr (std::is_same_v<T, TwoPointLaw>)
                detail::init_two_point(e, l, rng);
            else
                detail::init_from_density(e, l, rng);
        },
        law);
    return e;
}

/// Mean-field force on every particle: -(1/N) sum_j G'(q_i - q_j),
/// evaluated in O(N) through the empirical q-moments.  Returns zeros for
/// the zero kernel.
inline std::vector<double> mean_field_force(const ParticleEnsemble& e,
                                            const InteractionPotential& g,
                                            const ThreadPool* pool = nullptr) {
    const std::size_t n = e.size();
    std::vector<double> force(n, 0.0);
    if (g.is_zero()) return force;
    const std::size_t deg = g.degree();
    // empirical raw moments M_0..M_{deg-1} (enough for G', degree deg-1)
    std::vector<double> mom(deg, 0.0);
    mom[0] = 1.0;
    for (std::size_t k = 1; k < deg; ++k) {
        KahanSum s;
        for (std::size_t i = 0; i < n; ++i) s.add(pow_int(e.q[i], static_cast<unsigned>(k)));
        mom[k] = s.value() / static_cast<double>(n);
    }
    const Polynomial kernel = average_shifted(g.grad_poly(), mom);
    const auto body = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) force[i] = -kernel(e.q[i]);
    };
    if (pool)
        pool->parallel_for(n, body);
    else
        body(0, n);
    return force;
}

namespace detail {

inline std::vector<double> total_force(const ParticleEnsemble& e, const ConfiningPotential& v,
                                       const InteractionPotential& g, const ThreadPool* pool) {
    std::vector<double> f = mean_field_force(e, g, pool);
    const auto body = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) f[i] -= v.gradient(e.q[i]);
    };
    if (pool)
        pool->parallel_for(e.size(), body);
    else
        body(0, e.size());
    return f;
}

}  // namespace detail

/// One BAOAB step of size dt at temperature lambda (unit friction):
/// half kick, half drift, exact Ornstein-Uhlenbeck segment, half drift,
/// half kick.  The closing kick's force is cached for the next step, so
/// each step performs exactly one force evaluation and consumes exactly
/// one normal variate per particle.
inline void step_particles(ParticleEnsemble& e, const ConfiningPotential& v,
                           const InteractionPotential& g, double lambda, double dt,
                           const ThreadPool* pool = nullptr) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_particles: dt must be positive");
    if (!(lambda >= 0.0)) throw std::invalid_argument("step_particles: lambda must be >= 0");
    const std::size_t n = e.size();
    if (n < 2) throw std::invalid_argument("step_particles: ensemble needs >= 2 particles");

    if (!e.force_cache_valid) e.force_cache = detail::total_force(e, v, g, pool);
    const std::vector<double>& f_old = e.force_cache;

    const double half = 0.5 * dt;
    const double decay = std::exp(-dt);
    const double kick = std::sqrt(lambda * (-std::expm1(-2.0 * dt)));  // sqrt(lambda(1-e^-2dt))
    const CounterRng rng(e.seed);
    const std::uint64_t base = e.steps * static_cast<std::uint64_t>(n);

    const auto move = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            double pi = e.p[i] + half * f_old[i];
            double qi = e.q[i] + half * pi;
            pi = decay * pi + kick * rng.normal(detail::kDynamicsStream, base + i);
            qi += half * pi;
            e.q[i] = qi;
            e.p[i] = pi;
        }
    };
    if (pool)
        pool->parallel_for(n, move);
    else
        move(0, n);

    e.force_cache = detail::total_force(e, v, g, pool);
    const auto close = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) e.p[i] += half * e.force_cache[i];
    };
    if (pool)
        pool->parallel_for(n, close);
    else
        close(0, n);
    e.force_cache_valid = true;

    e.steps += 1;
    e.t += dt;
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(e.q[i]) || !std::isfinite(e.p[i])) throw BlowupError(e.t);
}

struct ParticleStats {
    double m1_q = 0.0, m2_q = 0.0;
    double m1_p = 0.0, m2_p = 0.0;
};

inline ParticleStats ensemble_stats(const ParticleEnsemble& e) {
    KahanSum q1, q2, p1, p2;
    for (double x : e.q) {
        q1.add(x);
        q2.add(x * x);
    }
    for (double x : e.p) {
        p1.add(x);
        p2.add(x * x);
    }
    const double n = static_cast<double>(e.size());
    return {q1.value() / n, q2.value() / n, p1.value() / n, p2.value() / n};
}

struct KdePolicy {
    enum class Bandwidth { silverman, fixed };
    Bandwidth bandwidth = Bandwidth::silverman;
    double h_q = 0.0, h_p = 0.0;  // only read when bandwidth == fixed
    double cutoff = 6.0;          // kernel truncation radius in units of h
    double cells_per_h = 5.0;     // evaluation grid resolution
};

/// Differential entropy estimate -mean_i log f_loo(x_i), where f is the
/// Gaussian-product kernel density estimate with per-coordinate Silverman
/// bandwidth sd * N^{-1/6} and f_loo removes the self-kernel (leave one
/// out).  Evaluated on an auxiliary grid (cloud-in-cell binning, separable
/// truncated-kernel convolution, bilinear read-back), which biases f by
/// O((grid step / h)^2) ~ 0.1%; this is a reporting diagnostic, not an
/// invariant of the dynamics.
inline double kde_entropy(const ParticleEnsemble& e, const KdePolicy& policy = {}) {
    const std::size_t n = e.size();
    if (n < 100) throw std::invalid_argument("kde_entropy: need at least 100 particles");

    double h_q = policy.h_q, h_p = policy.h_p;
    if (policy.bandwidth == KdePolicy::Bandwidth::silverman) {
        KahanSum sq, sqq, sp, spp;
        for (double x : e.q) {
            sq.add(x);
            sqq.add(x * x);
        }
        for (double x : e.p) {
            sp.add(x);
            spp.add(x * x);
        }
        const double nn = static_cast<double>(n);
        const double var_q = (sqq.value() - sq.value() * sq.value() / nn) / (nn - 1.0);
        const double var_p = (spp.value() - sp.value() * sp.value() / nn) / (nn - 1.0);
        const double scale = std::pow(nn, -1.0 / 6.0);
        h_q = std::sqrt(var_q) * scale;
        h_p = std::sqrt(var_p) * scale;
    }
    if (!(h_q > 0.0 && h_p > 0.0))
        throw std::invalid_argument("kde_entropy: degenerate bandwidth (data has no spread?)");

    const auto [q_lo_it, q_hi_it] = std::minmax_element(e.q.begin(), e.q.end());
    const auto [p_lo_it, p_hi_it] = std::minmax_element(e.p.begin(), e.p.end());
    double dq = h_q / policy.cells_per_h;
    double dp = h_p / policy.cells_per_h;
    const double pad_q = policy.cutoff * h_q + 2.0 * dq;
    const double pad_p = policy.cutoff * h_p + 2.0 * dp;
    const double q_lo = *q_lo_it - pad_q, q_hi = *q_hi_it + pad_q;
    const double p_lo = *p_lo_it - pad_p, p_hi = *p_hi_it + pad_p;
    // cap the auxiliary grid; widening the cells only costs accuracy O(dq^2)
    const double max_cells = 8.0e6;
    const double want = ((q_hi - q_lo) / dq) * ((p_hi - p_lo) / dp);
    if (want > max_cells) {
        const double inflate = std::sqrt(want / max_cells);
        dq *= inflate;
        dp *= inflate;
    }
    const std::size_t nq = static_cast<std::size_t>((q_hi - q_lo) / dq) + 2;
    const std::size_t np = static_cast<std::size_t>((p_hi - p_lo) / dp) + 2;

    // cloud-in-cell deposit onto cell centers
    std::vector<double> w(nq * np, 0.0);
    const auto deposit_index = [](double x, double lo, double d, std::size_t count) {
        double fx = (x - lo) / d - 0.5;
        if (fx < 0.0) fx = 0.0;
        std::size_t i0 = static_cast<std::size_t>(fx);
        if (i0 + 1 >= count) i0 = count - 2;
        return std::pair<std::size_t, double>(i0, fx - static_cast<double>(i0));
    };
    for (std::size_t i = 0; i < n; ++i) {
        const auto [iq, fq] = deposit_index(e.q[i], q_lo, dq, nq);
        const auto [jp, fp] = deposit_index(e.p[i], p_lo, dp, np);
        w[iq * np + jp] += (1.0 - fq) * (1.0 - fp);
        w[iq * np + jp + 1] += (1.0 - fq) * fp;
        w[(iq + 1) * np + jp] += fq * (1.0 - fp);
        w[(iq + 1) * np + jp + 1] += fq * fp;
    }

    // separable truncated Gaussian kernels, each normalized to unit integral
    const auto kernel_1d = [](double h, double d, double cutoff) {
        const int m = static_cast<int>(std::ceil(cutoff * h / d));
        std::vector<double> k(2 * m + 1);
        KahanSum s;
        for (int a = -m; a <= m; ++a) {
            const double x = static_cast<double>(a) * d;
            k[a + m] = std::exp(-0.5 * x * x / (h * h));
            s.add(k[a + m]);
        }
        const double norm = 1.0 / (s.value() * d);
        for (double& x : k) x *= norm;
        return k;
    };
    const std::vector<double> kq = kernel_1d(h_q, dq, policy.cutoff);
    const std::vector<double> kp = kernel_1d(h_p, dp, policy.cutoff);
    const int mq = (static_cast<int>(kq.size()) - 1) / 2;
    const int mp = (static_cast<int>(kp.size()) - 1) / 2;

    // convolve along p, then along q
    std::vector<double> tmp(nq * np, 0.0);
    for (std::size_t i = 0; i < nq; ++i) {
        const double* src = w.data() + i * np;
        double* dst = tmp.data() + i * np;
        for (std::size_t j = 0; j < np; ++j) {
            if (src[j] == 0.0) continue;
            const double val = src[j];
            const int j0 = std::max<int>(0, static_cast<int>(j) - mp);
            const int j1 = std::min<int>(static_cast<int>(np) - 1, static_cast<int>(j) + mp);
            for (int jj = j0; jj <= j1; ++jj)
                dst[jj] += val * kp[jj - static_cast<int>(j) + mp];
        }
    }
    std::vector<double> f(nq * np, 0.0);
    for (std::size_t j = 0; j < np; ++j) {
        for (std::size_t i = 0; i < nq; ++i) {
            const double val = tmp[i * np + j];
            if (val == 0.0) continue;
            const int i0 = std::max<int>(0, static_cast<int>(i) - mq);
            const int i1 = std::min<int>(static_cast<int>(nq) - 1, static_cast<int>(i) + mq);
            for (int ii = i0; ii <= i1; ++ii)
                f[static_cast<std::size_t>(ii) * np + j] += val * kq[ii - static_cast<int>(i) + mq];
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (double& x : f) x *= inv_n;

    // leave-one-out read-back
    const double k0 = kq[mq] * kp[mp];
    KahanSum log_sum;
    for (std::size_t i = 0; i < n; ++i) {
        const auto [iq, fq] = deposit_index(e.q[i], q_lo, dq, nq);
        const auto [jp, fp] = deposit_index(e.p[i], p_lo, dp, np);
        const double fi = (1.0 - fq) * (1.0 - fp) * f[iq * np + jp] +
                          (1.0 - fq) * fp * f[iq * np + jp + 1] +
                          fq * (1.0 - fp) * f[(iq + 1) * np + jp] +
                          fq * fp * f[(iq + 1) * np + jp + 1];
        double loo = (static_cast<double>(n) * fi - k0) / (static_cast<double>(n) - 1.0);
        if (!(loo > 1e-300)) loo = 1e-300;
        log_sum.add(std::log(loo));
    }
    return -log_sum.value() * inv_n;
}

}  // namespace vfp
