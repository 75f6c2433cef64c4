#pragma once

#include <Eigen/Core>
#include <cmath>

#include "thinspec/monomial.hpp"
#include "thinspec/multi_index.hpp"

namespace thinspec {

/// Eigenfunction of the tensor harmonic oscillator -Delta + sum_j theta_j^2 xi_j^2,
/// stored as  Psi_m(xi) = normalization * polynomial_part(xi) * exp(-sum theta_j xi_j^2 / 2)
/// where polynomial_part expands prod_j Hh_{m_j}(sqrt(theta_j) xi_j) (physicists'
/// Hermite polynomials) into monomials.
struct HermiteEigenfunction {
    MultiIndex multi_index;
    Eigen::VectorXd theta;
    MonomialPolynomial polynomial_part;
    double normalization = 0.0;

    /// Factor multiplying the shared ground-state Gaussian Psi_0, i.e.
    /// Psi_m = ratio_to_ground() * Psi_0 with the polynomial included.
    MonomialPolynomial ratio_to_ground() const {
        double ground_norm = 1.0;
        for (int j = 0; j < theta.size(); ++j)
            ground_norm *= std::pow(theta[j] / M_PI, 0.25);
        return polynomial_part.scaled(normalization / ground_norm);
    }
};

namespace detail {

/// Monomial expansion of Hh_m(sqrt(theta) x) along one axis via the
/// recurrence Hh_{n+1}(z) = 2 z Hh_n(z) - 2 n Hh_{n-1}(z).
inline MonomialPolynomial hermite_axis_poly(int dim, int axis, int m, double theta) {
    MonomialPolynomial prev = MonomialPolynomial::constant(dim, 1.0);
    if (m == 0) return prev;
    const double s = std::sqrt(theta);
    MonomialPolynomial x = MonomialPolynomial::variable(dim, axis);
    MonomialPolynomial cur = x.scaled(2.0 * s);
    for (int n = 1; n < m; ++n) {
        MonomialPolynomial next = (x * cur).scaled(2.0 * s) - prev.scaled(2.0 * n);
        prev = std::move(cur);
        cur = std::move(next);
    }
    return cur;
}

}  // namespace detail

/// Build the normalized oscillator eigenfunction with the given multi-index.
inline HermiteEigenfunction make_hermite_eigenfunction(const Eigen::VectorXd& theta,
                                                       const MultiIndex& m) {
    const int dim = static_cast<int>(theta.size());
    require(static_cast<int>(m.size()) == dim, errc::dimension_mismatch,
            "multi-index dimension != theta dimension");
    for (int v : m)
        require(v >= 0, errc::invalid_input, "multi-index must be componentwise >= 0");

    HermiteEigenfunction f;
    f.multi_index = m;
    f.theta = theta;
    MonomialPolynomial poly = MonomialPolynomial::constant(dim, 1.0);
    double norm = 1.0;
    for (int j = 0; j < dim; ++j) {
        poly = poly * detail::hermite_axis_poly(dim, j, m[j], theta[j]);
        double fact = 1.0;
        for (int k = 2; k <= m[j]; ++k) fact *= k;
        norm *= std::pow(theta[j] / M_PI, 0.25) / std::sqrt(std::pow(2.0, m[j]) * fact);
    }
    f.polynomial_part = std::move(poly);
    f.normalization = norm;
    return f;
}

}  // namespace thinspec
