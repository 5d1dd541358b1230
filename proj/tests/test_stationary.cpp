#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "vfp/stationary.hpp"

namespace {

const vfp::ConfiningPotential kBenchmarkV({0.0, 0.0, -0.5, 0.0, 0.25});  // q^4/4 - q^2/2
const vfp::InteractionPotential kNoG;
const vfp::InteractionPotential kQuadG({0.0, 0.0, 0.5});  // G = q^2/2, alpha = 1

vfp::PhaseDensity gaussian_blob(const vfp::PhaseGrid& g, double mq) {
    return vfp::density_from_function(g, [=](double q, double p) {
        return std::exp(-0.5 * ((q - mq) * (q - mq) + p * p));
    });
}

}  // namespace

TEST_CASE("gibbs map produces the sampled product state") {
    const double lambda = 0.5;
    const vfp::PhaseGrid g(-6.0, 6.0, -6.0, 6.0, 64, 64);
    const auto out = vfp::gibbs_map(gaussian_blob(g, 1.0), kBenchmarkV, kNoG, lambda);
    // without interaction the image is the plain Gibbs state of V
    const auto expect = oracle::gibbs_density(g, [&](double q) { return kBenchmarkV.value(q); },
                                              lambda);
    REQUIRE(vfp::l1_distance(out, expect) < 1e-13);
    // and the map is then constant: applying it again changes nothing
    const auto out2 = vfp::gibbs_map(out, kBenchmarkV, kNoG, lambda);
    REQUIRE(vfp::l1_distance(out, out2) < 1e-15);
}

TEST_CASE("gibbs map of a symmetric state is exactly mirror symmetric") {
    const vfp::PhaseGrid g(-6.0, 6.0, -6.0, 6.0, 64, 64);
    const auto sym = vfp::density_from_function(
        g, [](double q, double p) { return std::exp(-q * q - 0.8 * p * p); });
    REQUIRE(oracle::mirror_defect(sym) == 0.0);
    const auto out = vfp::gibbs_map(sym, kBenchmarkV, kQuadG, 0.3);
    REQUIRE(oracle::mirror_defect(out) == 0.0);
    REQUIRE(out.q_moments(1)[1] == 0.0);
}

TEST_CASE("grid gibbs map agrees with the scalar reduction") {
    // the q-marginal of the image of rho depends on rho only through its
    // mean (quadratic kernel), and its mean is Phi(mean): two independent
    // code paths, grid sums versus adaptive quadrature
    const double lambda = 0.3, m = 0.4;
    const vfp::PhaseGrid g(-6.0, 6.0, -6.0, 6.0, 256, 64);
    const auto img = vfp::gibbs_map(gaussian_blob(g, m), kBenchmarkV, kQuadG, lambda);
    const double grid_mean = img.q_moments(1)[1];
    const double phi = vfp::scalar_self_consistency(kBenchmarkV, 1.0, lambda, m);
    REQUIRE(grid_mean == Catch::Approx(phi).margin(1e-6));
}

TEST_CASE("fixed point without interaction converges immediately") {
    const vfp::PhaseGrid g(-6.0, 6.0, -6.0, 6.0, 64, 64);
    const auto r = vfp::fixed_point(gaussian_blob(g, 0.5), kBenchmarkV, kNoG, 0.5,
                                    /*theta=*/1.0, /*tol=*/1e-13);
    REQUIRE(r.converged);
    REQUIRE(r.iterations <= 2);
    REQUIRE(r.residual <= 1e-13);
}

TEST_CASE("fixed point finds the biased branch below the transition") {
    const double lambda = 0.3;
    const vfp::PhaseGrid g(-5.0, 5.0, -5.0, 5.0, 128, 64);
    const auto r = vfp::fixed_point(gaussian_blob(g, 1.0), kBenchmarkV, kQuadG, lambda,
                                    /*theta=*/0.8, /*tol=*/1e-12, /*max_iter=*/2000);
    REQUIRE(r.converged);
    const double mean = r.density.q_moments(1)[1];
    REQUIRE(mean == Catch::Approx(oracle::ref::m_plus_lambda_030).margin(1e-6));
    // the converged state is (numerically) invariant under the map
    REQUIRE(vfp::l1_distance(r.density, vfp::gibbs_map(r.density, kBenchmarkV, kQuadG, lambda)) <=
            1e-11);
}

TEST_CASE("fixed point validates damping and tolerance") {
    const vfp::PhaseGrid g(-5.0, 5.0, -5.0, 5.0, 16, 16);
    REQUIRE_THROWS_AS(vfp::fixed_point(gaussian_blob(g, 0.0), kBenchmarkV, kNoG, 0.5, 0.0),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(vfp::fixed_point(gaussian_blob(g, 0.0), kBenchmarkV, kNoG, 0.5, 0.5, -1.0),
                      std::invalid_argument);
}

TEST_CASE("scalar map is odd and pinned at the origin for even potentials") {
    REQUIRE(std::abs(vfp::scalar_self_consistency(kBenchmarkV, 1.0, 0.3, 0.0)) <= 1e-10);
    const double plus = vfp::scalar_self_consistency(kBenchmarkV, 1.0, 0.3, 0.6);
    const double minus = vfp::scalar_self_consistency(kBenchmarkV, 1.0, 0.3, -0.6);
    REQUIRE(plus == Catch::Approx(-minus).margin(1e-9));
}

TEST_CASE("tilted moments at the origin match the frozen quartic values") {
    // nu_0 for the benchmark potential with alpha = 1 is proportional to
    // exp(-q^4 / (4 lambda)); its second moment at lambda = 0.3 and the
    // map's slope at lambda = 1 were computed with independent quadrature
    const auto t = vfp::detail::tilted_moments(kBenchmarkV, 1.0, 0.3, 0.0, 12.0);
    REQUIRE(std::abs(t.mean) <= 1e-10);
    REQUIRE(t.second == Catch::Approx(oracle::ref::m2_nu0_lambda_030).margin(1e-9));
    const double eps = 1e-3;
    const double slope = (vfp::scalar_self_consistency(kBenchmarkV, 1.0, 1.0, eps) -
                          vfp::scalar_self_consistency(kBenchmarkV, 1.0, 1.0, -eps)) /
                         (2.0 * eps);
    REQUIRE(slope == Catch::Approx(oracle::ref::phi_slope_zero_lambda_1).margin(1e-5));
}

TEST_CASE("scalar map refuses an interval with visible tails") {
    REQUIRE_THROWS_WITH(vfp::scalar_self_consistency(kBenchmarkV, 1.0, 1.0, 0.0, 3.0),
                        Catch::Matchers::ContainsSubstring("widen the interval"));
}

TEST_CASE("branch finder sees one branch above and three below the transition") {
    const auto above = vfp::find_branches(kBenchmarkV, 1.0, 1.0);
    REQUIRE(above.size() == 1);
    REQUIRE(above[0] == 0.0);  // pinned exactly for even potentials

    const auto below = vfp::find_branches(kBenchmarkV, 1.0, 0.1);
    REQUIRE(below.size() == 3);
    REQUIRE(below[1] == 0.0);
    REQUIRE(below[2] == Catch::Approx(oracle::ref::m_plus_lambda_010).margin(1e-8));
    REQUIRE(below[0] == -below[2]);  // exact symmetrization

    const auto deep = vfp::find_branches(kBenchmarkV, 1.0, 0.05);
    REQUIRE(deep.size() == 3);
    REQUIRE(deep[2] == Catch::Approx(oracle::ref::m_plus_lambda_005).margin(1e-8));
}

TEST_CASE("branch finder rejects a window that cannot bracket the roots") {
    REQUIRE_THROWS_WITH(vfp::find_branches(kBenchmarkV, 1.0, 0.05, /*m_max=*/0.5),
                        Catch::Matchers::ContainsSubstring("increase m_max"));
}

TEST_CASE("phase scan brackets the transition and cross-checks the variance rule") {
    const auto scan = vfp::phase_scan(kBenchmarkV, 1.0, 0.43, 0.48, /*width_tol=*/5e-3);
    REQUIRE(scan.count_low == 3);
    REQUIRE(scan.count_high == 1);
    REQUIRE(scan.bracket_hi - scan.bracket_lo <= 5e-3);
    REQUIRE(scan.bracket_lo <= oracle::ref::lambda_critical);
    REQUIRE(scan.bracket_hi >= oracle::ref::lambda_critical);
    // linearized criterion alpha Var(nu_0) = lambda locates the same point
    REQUIRE(scan.lambda_variance_match ==
            Catch::Approx(oracle::ref::lambda_critical).margin(1e-9));
    for (std::size_t k = 1; k < scan.points.size(); ++k)
        REQUIRE(scan.points[k - 1].lambda < scan.points[k].lambda);
}

TEST_CASE("phase scan rejects endpoints with equal branch counts") {
    REQUIRE_THROWS_AS(vfp::phase_scan(kBenchmarkV, 1.0, 0.6, 1.0, 1e-2), std::invalid_argument);
}
