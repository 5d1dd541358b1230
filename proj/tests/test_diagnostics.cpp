#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "vfp/diagnostics.hpp"
#include "vfp/grid.hpp"
#include "vfp/model.hpp"

namespace {

const vfp::ConfiningPotential kBenchmarkV({0.0, 0.0, -0.5, 0.0, 0.25});  // q^4/4 - q^2/2
const vfp::InteractionPotential kNoG;

}  // namespace

TEST_CASE("free energy of a sampled Gibbs state matches its closed form") {
    // For rho_ij = exp(-H_ij/lambda) / Z_A with Z_A = sum exp(-H/lambda) A
    // and no interaction, every cell contributes (H + lambda log rho) rho A
    // = -lambda log(Z_A) rho A, so the discrete functional collapses to
    // -lambda log Z_A exactly -- an oracle with no quadrature error at all.
    const double lambda = 0.5;
    const vfp::PhaseGrid g(-4.0, 4.0, -4.0, 4.0, 64, 64);
    vfp::PhaseDensity rho(g);
    long double z = 0.0L;
    for (std::size_t i = 0; i < 64; ++i)
        for (std::size_t j = 0; j < 64; ++j) {
            const double q = g.q_center(i), p = g.p_center(j);
            const double h = 0.5 * p * p + kBenchmarkV.value(q);
            rho.at(i, j) = std::exp(-h / lambda);
            z += static_cast<long double>(rho.at(i, j));
        }
    z *= static_cast<long double>(g.cell_area());
    rho.renormalize();
    const auto r = vfp::free_energy(rho, kBenchmarkV, kNoG, lambda);
    const double expect = -lambda * static_cast<double>(std::log(z));
    REQUIRE(r.free_energy == Catch::Approx(expect).margin(1e-10));
    REQUIRE(r.free_energy ==
            Catch::Approx(r.kinetic + r.confinement + r.interaction + lambda * r.entropy));
    REQUIRE(r.interaction == 0.0);
}

TEST_CASE("free energy pieces of a product gaussian match closed forms") {
    const vfp::ConfiningPotential harmonic({0.0, 0.0, 0.5});
    const vfp::PhaseGrid g(-8.0, 8.0, -8.0, 8.0, 128, 128);
    const auto rho = vfp::density_from_function(
        g, [](double q, double p) { return std::exp(-0.5 * (q * q + p * p)); });
    const auto r = vfp::free_energy(rho, harmonic, kNoG, 1.0);
    REQUIRE(r.kinetic == Catch::Approx(0.5).margin(1e-9));
    REQUIRE(r.confinement == Catch::Approx(0.5).margin(1e-9));
    // integral of rho log rho for a standard gaussian pair is -log(2 pi e)
    REQUIRE(r.entropy == Catch::Approx(-oracle::ref::entropy_gauss_2d).margin(1e-9));
}

TEST_CASE("interaction term uses the mean field at half weight") {
    // G = q^2/2 against a density with q-mean m and second moment s gives
    // (1/2) E[G * rho] = (1/2) E[(q - X)^2]/2 averaged = (s - m^2 + ...)/2;
    // closed form: 1/2 * (E[q^2] - 2 m E[q] + s)/2 evaluated under rho.
    const vfp::InteractionPotential quad({0.0, 0.0, 0.5});
    const vfp::PhaseGrid g(-8.0, 8.0, -8.0, 8.0, 128, 64);
    const double m = 0.7;
    const auto rho = vfp::density_from_function(g, [=](double q, double p) {
        return std::exp(-0.5 * ((q - m) * (q - m) + p * p));
    });
    const auto r = vfp::free_energy(rho, kBenchmarkV, quad, 0.3);
    // E[q] = m, E[q^2] = 1 + m^2; 1/2 * E[(q-X)^2/2] = (2(1+m^2) - 2m^2)/4
    REQUIRE(r.interaction == Catch::Approx(0.5).margin(1e-6));
}

TEST_CASE("dissipation vanishes on a momentum gibbs profile") {
    const double lambda = 0.3;
    const vfp::PhaseGrid g(-6.0, 6.0, -6.0, 6.0, 64, 256);
    const auto rho = vfp::density_from_function(g, [=](double q, double p) {
        return std::exp(-q * q - 0.5 * p * p / lambda);
    });
    REQUIRE(vfp::dissipation(rho, lambda) < 1e-3);
}

TEST_CASE("dissipation of a shifted momentum gaussian is the mass") {
    // With p-marginal N(1, lambda): p rho + lambda d_p rho = rho, so the
    // integrand is rho itself and the rate equals the total mass.
    const double lambda = 0.3;
    const vfp::PhaseGrid g(-6.0, 6.0, -6.0, 6.0, 64, 256);
    const auto rho = vfp::density_from_function(g, [=](double q, double p) {
        return std::exp(-q * q - 0.5 * (p - 1.0) * (p - 1.0) / lambda);
    });
    REQUIRE(vfp::dissipation(rho, lambda) == Catch::Approx(1.0).epsilon(0.02));
}

TEST_CASE("dissipation skips empty cells instead of dividing by zero") {
    const vfp::PhaseGrid g(-6.0, 6.0, -6.0, 6.0, 32, 32);
    const auto disk = vfp::density_from_function(
        g, [](double q, double p) { return q * q + p * p < 4.0 ? 1.0 : 0.0; });
    const double d = vfp::dissipation(disk, 0.5);
    REQUIRE(std::isfinite(d));
    REQUIRE(d >= 0.0);
}

TEST_CASE("entropy split partitions the entropy and bounds its low side") {
    const vfp::PhaseGrid g(-6.0, 6.0, -6.0, 6.0, 96, 96);
    const auto rho = vfp::density_from_function(g, [](double q, double p) {
        return std::exp(-0.7 * q * q - 1.3 * p * p) + 0.001;
    });
    const auto split = vfp::entropy_split(rho);
    const auto full = vfp::free_energy(rho, kBenchmarkV, kNoG, 1.0);
    REQUIRE(split.total() == Catch::Approx(full.entropy).margin(1e-12));
    REQUIRE(split.i_minus <= 0.0);
    // the low-density side obeys the kernel-sum floor used by lower_bound
    const auto lb = vfp::lower_bound(kBenchmarkV, 1.0, g);
    REQUIRE(split.i_minus >= lb.entropy_floor);
}

TEST_CASE("lower bound report carries the advertised pieces") {
    const vfp::PhaseGrid g(-6.0, 6.0, -6.0, 6.0, 256, 256);
    const double lambda = 0.3;
    const auto lb = vfp::lower_bound(kBenchmarkV, lambda, g);
    REQUIRE(lb.lambda == lambda);
    // min of V - q^2/2 = q^4/4 - q^2 is -1 at q = sqrt(2); cell centers
    // only miss it by O(dq^2)
    REQUIRE(lb.v_min >= -1.0);
    REQUIRE(lb.v_min <= -1.0 + 5e-3);
    REQUIRE(lb.entropy_floor == Catch::Approx(-(2.0 / std::exp(1.0)) * lb.kernel_mass));
    REQUIRE(lb.entropy_floor_r2 == Catch::Approx(oracle::ref::entropy_floor_r2).margin(1e-12));
    REQUIRE(lb.bound ==
            Catch::Approx(-0.5 * lambda * lambda + lambda * lb.entropy_floor + lb.v_min));
    // the truncated kernel mass sits below the full-plane value 8 pi
    REQUIRE(lb.kernel_mass > 0.0);
    REQUIRE(lb.kernel_mass < 8.0 * std::acos(-1.0));
}

TEST_CASE("free energy dominates the a-priori floor for assorted states") {
    const double lambda = 0.3;
    const vfp::PhaseGrid g(-6.0, 6.0, -6.0, 6.0, 96, 96);
    const auto lb = vfp::lower_bound(kBenchmarkV, lambda, g);
    const vfp::InteractionPotential quad({0.0, 0.0, 0.5});
    const auto states = {
        vfp::density_from_function(g, [](double q, double p) { return std::exp(-q * q - p * p); }),
        vfp::density_from_function(g, [](double, double) { return 1.0; }),
        vfp::density_from_function(g, [](double q, double p) {
            return std::exp(-40.0 * ((q - 1.3) * (q - 1.3) + (p + 2.0) * (p + 2.0)));
        }),
    };
    for (const auto& rho : states) {
        REQUIRE(vfp::free_energy(rho, kBenchmarkV, kNoG, lambda).free_energy >= lb.bound);
        // nonnegative kernels only add energy, so the same floor holds
        REQUIRE(vfp::free_energy(rho, kBenchmarkV, quad, lambda).free_energy >= lb.bound);
    }
}

TEST_CASE("moment report mirrors the density moments") {
    const vfp::PhaseGrid g(-8.0, 8.0, -8.0, 8.0, 64, 64);
    const auto rho = vfp::density_from_function(g, [](double q, double p) {
        return std::exp(-0.5 * ((q - 0.5) * (q - 0.5) + (p + 0.25) * (p + 0.25)));
    });
    const auto mr = vfp::moment_report(rho);
    REQUIRE(mr.mass == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(mr.m1_q == Catch::Approx(0.5).margin(1e-6));
    REQUIRE(mr.m2_q == Catch::Approx(1.25).margin(1e-5));
    REQUIRE(mr.m1_p == Catch::Approx(-0.25).margin(1e-6));
    REQUIRE(mr.boundary_mass == rho.boundary_mass());
}
