#pragma once
// Dense univariate real polynomials in ascending coefficient order:
// coeffs()[k] multiplies q^k.  These carry the confining and interaction
// potentials, so evaluation is Horner (exactly odd/even under q -> -q for
// odd/even coefficient patterns) and differentiation is exact.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace vfp {

class Polynomial {
public:
    Polynomial() : coeffs_{0.0} {}

    explicit Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
        if (coeffs_.empty()) coeffs_ = {0.0};
        for (double c : coeffs_)
            if (!std::isfinite(c))
                throw std::invalid_argument("polynomial coefficient must be finite");
        trim();
    }

    /// Index of the highest nonzero coefficient; the zero polynomial reports 0.
    std::size_t degree() const { return coeffs_.size() - 1; }
    const std::vector<double>& coeffs() const { return coeffs_; }
    double coeff(std::size_t k) const { return k < coeffs_.size() ? coeffs_[k] : 0.0; }
    double leading() const { return coeffs_.back(); }
    bool is_zero() const { return coeffs_.size() == 1 && coeffs_[0] == 0.0; }

    double operator()(double q) const {
        double r = coeffs_.back();
        for (std::size_t k = coeffs_.size() - 1; k-- > 0;) r = r * q + coeffs_[k];
        return r;
    }

    Polynomial derivative() const {
        if (coeffs_.size() == 1) return Polynomial{};
        std::vector<double> d(coeffs_.size() - 1);
        for (std::size_t k = 1; k < coeffs_.size(); ++k)
            d[k - 1] = static_cast<double>(k) * coeffs_[k];
        return Polynomial(std::move(d));
    }

    bool operator==(const Polynomial& o) const { return coeffs_ == o.coeffs_; }

private:
    void trim() {
        while (coeffs_.size() > 1 && coeffs_.back() == 0.0) coeffs_.pop_back();
    }
    std::vector<double> coeffs_;
};

/// Binomial coefficient as an exact double (every intermediate product of i
/// consecutive integers is divisible by i!, so the loop stays integral).
inline double binomial(unsigned n, unsigned k) {
    if (k > n) return 0.0;
    if (k > n - k) k = n - k;
    double r = 1.0;
    for (unsigned i = 1; i <= k; ++i) {
        r *= static_cast<double>(n - k + i);
        r /= static_cast<double>(i);
    }
    return r;
}

/// Coefficients of m -> E[P(m - X)] where X has raw moments M_0..M_deg(P):
/// the j-th output is sum_{k>=j} p_k * C(k,j) * (-1)^{k-j} * M_{k-j}.
/// Requires moments[0..deg(P)] with moments[0] = total mass.
inline Polynomial average_shifted(const Polynomial& p, const std::vector<double>& moments) {
    if (moments.size() < p.degree() + 1)
        throw std::invalid_argument(
            "average_shifted: need moments up to order " + std::to_string(p.degree()) +
            " (got " + std::to_string(moments.empty() ? 0 : moments.size() - 1) + ")");
    std::vector<double> out(p.degree() + 1, 0.0);
    for (std::size_t k = 0; k <= p.degree(); ++k) {
        const double pk = p.coeff(k);
        if (pk == 0.0) continue;
        for (std::size_t j = 0; j <= k; ++j) {
            const double sign = ((k - j) % 2 == 0) ? 1.0 : -1.0;
            out[j] += pk * binomial(static_cast<unsigned>(k), static_cast<unsigned>(j)) *
                      sign * moments[k - j];
        }
    }
    return Polynomial(std::move(out));
}

}  // namespace vfp
