#pragma once
// Uniform tensor grid on a phase-space rectangle [q_min,q_max] x [p_min,p_max]
// and cell-averaged densities on it.  Values are stored row-major in q:
// value(i, j) = values[i * n_p + j], so a fixed q-column is contiguous in p
// (the implicit momentum solve walks columns).
//
// Cell centers are precomputed.  When a coordinate interval is symmetric
// about 0 the centers are built by reflection, so q_center(n-1-i) is the
// exact IEEE negation of q_center(i); the mirror-symmetry guarantees of the
// solver rest on this.

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vfp/numeric.hpp"

namespace vfp {

class PhaseGrid {
public:
    PhaseGrid(double q_min, double q_max, double p_min, double p_max,
              std::size_t n_q, std::size_t n_p)
        : q_min_(q_min), q_max_(q_max), p_min_(p_min), p_max_(p_max), n_q_(n_q), n_p_(n_p) {
        if (!(std::isfinite(q_min) && std::isfinite(q_max) &&
              std::isfinite(p_min) && std::isfinite(p_max)))
            throw std::invalid_argument("grid bounds must be finite");
        if (!(q_min < q_max && p_min < p_max))
            throw std::invalid_argument("grid bounds must be ordered");
        if (n_q < 8 || n_p < 8)
            throw std::invalid_argument("grid needs at least 8 cells per axis");
        dq_ = (q_max_ - q_min_) / static_cast<double>(n_q_);
        dp_ = (p_max_ - p_min_) / static_cast<double>(n_p_);
        q_centers_ = centers(q_min_, q_max_, n_q_, dq_);
        p_centers_ = centers(p_min_, p_max_, n_p_, dp_);
    }

    double q_min() const { return q_min_; }
    double q_max() const { return q_max_; }
    double p_min() const { return p_min_; }
    double p_max() const { return p_max_; }
    std::size_t n_q() const { return n_q_; }
    std::size_t n_p() const { return n_p_; }
    double dq() const { return dq_; }
    double dp() const { return dp_; }
    double cell_area() const { return dq_ * dp_; }
    std::size_t size() const { return n_q_ * n_p_; }

    double q_center(std::size_t i) const { return q_centers_[i]; }
    double p_center(std::size_t j) const { return p_centers_[j]; }
    const std::vector<double>& q_centers() const { return q_centers_; }
    const std::vector<double>& p_centers() const { return p_centers_; }

    /// Largest |p| over momentum cell centers (transport CFL uses it).
    double p_max_abs() const {
        return std::max(std::abs(p_centers_.front()), std::abs(p_centers_.back()));
    }

    bool operator==(const PhaseGrid& o) const {
        return q_min_ == o.q_min_ && q_max_ == o.q_max_ && p_min_ == o.p_min_ &&
               p_max_ == o.p_max_ && n_q_ == o.n_q_ && n_p_ == o.n_p_;
    }

private:
    static std::vector<double> centers(double lo, double hi, std::size_t n, double d) {
        std::vector<double> c(n);
        for (std::size_t i = 0; i < n; ++i)
            c[i] = lo + (static_cast<double>(i) + 0.5) * d;
        if (lo == -hi) {  // reflect the lower half so symmetry is exact
            for (std::size_t i = 0; i < n / 2; ++i) c[n - 1 - i] = -c[i];
            if (n % 2 == 1) c[n / 2] = 0.0;
        }
        return c;
    }

    double q_min_, q_max_, p_min_, p_max_;
    std::size_t n_q_, n_p_;
    double dq_, dp_;
    std::vector<double> q_centers_, p_centers_;
};

/// Nonnegative cell-center density with unit discrete mass
/// (sum of values * cell_area == 1 up to roundoff).
class PhaseDensity {
public:
    explicit PhaseDensity(PhaseGrid grid)
        : grid_(std::move(grid)), values_(grid_.size(), 0.0) {}

    PhaseDensity(PhaseGrid grid, std::vector<double> values)
        : grid_(std::move(grid)), values_(std::move(values)) {
        if (values_.size() != grid_.size())
            throw std::invalid_argument("density value count does not match grid");
    }

    const PhaseGrid& grid() const { return grid_; }
    double& at(std::size_t i, std::size_t j) { return values_[i * grid_.n_p() + j]; }
    double at(std::size_t i, std::size_t j) const { return values_[i * grid_.n_p() + j]; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    double mass() const {
        KahanSum s;
        for (double v : values_) s.add(v);
        return s.value() * grid_.cell_area();
    }

    /// Scale so the discrete mass is exactly 1.  Rejects non-positive mass.
    void renormalize() {
        const double m = mass();
        if (!(m > 0.0) || !std::isfinite(m))
            throw std::runtime_error("cannot renormalize: total mass is " + std::to_string(m));
        const double inv = 1.0 / m;
        for (double& v : values_) v *= inv;
    }

    /// Raw q-marginal moments M_0..M_k_max (M_0 is the mass).  Mirror cell
    /// pairs are summed first, so odd moments of an exactly symmetric
    /// density come out exactly zero (the effective field of a symmetric
    /// state then has exactly odd gradient, which keeps the solver's
    /// mirror equivariance bitwise).
    std::vector<double> q_moments(std::size_t k_max) const {
        const std::size_t nq = grid_.n_q(), np = grid_.n_p();
        std::vector<double> row_mass(nq);
        for (std::size_t i = 0; i < nq; ++i) {
            // pair the p-mirror cells before accumulating: the row mass of a
            // reflected state is then bitwise the mass of the partner row
            // (pair sums commute; a reversed Kahan sweep would not)
            KahanSum s;
            const double* row = values_.data() + i * np;
            for (std::size_t j = 0; j < np / 2; ++j) s.add(row[j] + row[np - 1 - j]);
            if (np % 2 == 1) s.add(row[np / 2]);
            row_mass[i] = s.value();
        }
        return marginal_moments(row_mass, grid_.q_centers(), k_max, grid_.cell_area());
    }

    /// Raw p-marginal moments M_0..M_k_max.
    std::vector<double> p_moments(std::size_t k_max) const {
        const std::size_t nq = grid_.n_q(), np = grid_.n_p();
        std::vector<double> col_mass(np, 0.0);
        for (std::size_t j = 0; j < np; ++j) {
            KahanSum s;
            for (std::size_t i = 0; i < nq; ++i) s.add(values_[i * np + j]);
            col_mass[j] = s.value();
        }
        return marginal_moments(col_mass, grid_.p_centers(), k_max, grid_.cell_area());
    }

    /// Mass in the two outermost cell layers; a cheap truncation monitor.
    double boundary_mass() const {
        const std::size_t nq = grid_.n_q(), np = grid_.n_p();
        KahanSum s;
        for (std::size_t i = 0; i < nq; ++i)
            for (std::size_t j = 0; j < np; ++j)
                if (i < 2 || i >= nq - 2 || j < 2 || j >= np - 2)
                    s.add(values_[i * np + j]);
        return s.value() * grid_.cell_area();
    }

private:
    static std::vector<double> marginal_moments(const std::vector<double>& mass,
                                                const std::vector<double>& centers,
                                                std::size_t k_max, double area) {
        const std::size_t n = mass.size();
        std::vector<double> mom(k_max + 1);
        for (std::size_t k = 0; k <= k_max; ++k) {
            KahanSum s;
            for (std::size_t i = 0; i < n / 2; ++i)
                s.add(mass[i] * pow_int(centers[i], static_cast<unsigned>(k)) +
                      mass[n - 1 - i] * pow_int(centers[n - 1 - i], static_cast<unsigned>(k)));
            if (n % 2 == 1)
                s.add(mass[n / 2] * pow_int(centers[n / 2], static_cast<unsigned>(k)));
            mom[k] = s.value() * area;
        }
        return mom;
    }

    PhaseGrid grid_;
    std::vector<double> values_;
};

/// Sample f at cell centers, clip negatives to zero, and normalize to unit
/// mass.  Rejects samples that are non-finite or identically zero.
inline PhaseDensity density_from_function(const PhaseGrid& grid,
                                          const std::function<double(double, double)>& f) {
    PhaseDensity rho(grid);
    for (std::size_t i = 0; i < grid.n_q(); ++i) {
        const double q = grid.q_center(i);
        for (std::size_t j = 0; j < grid.n_p(); ++j) {
            double v = f(q, grid.p_center(j));
            if (!std::isfinite(v))
                throw std::invalid_argument("density sample is not finite at (q=" +
                                            std::to_string(q) + ", p=" +
                                            std::to_string(grid.p_center(j)) + ")");
            rho.at(i, j) = v > 0.0 ? v : 0.0;
        }
    }
    rho.renormalize();
    return rho;
}

/// L1 distance between two densities on the same grid.
inline double l1_distance(const PhaseDensity& a, const PhaseDensity& b) {
    if (!(a.grid() == b.grid()))
        throw std::invalid_argument("l1_distance: densities live on different grids");
    KahanSum s;
    const auto& va = a.values();
    const auto& vb = b.values();
    for (std::size_t n = 0; n < va.size(); ++n) s.add(std::abs(va[n] - vb[n]));
    return s.value() * a.grid().cell_area();
}

}  // namespace vfp
