#pragma once

#include <Eigen/Core>
#include <cmath>
#include <span>

#include "thinspec/hermite.hpp"
#include "thinspec/monomial.hpp"

namespace thinspec {

/// Moment of a monomial against the squared oscillator ground state,
///   integral xi^alpha Psi_0^2(xi) d xi = prod_j M(alpha_j, theta_j),
/// with M(2r, theta) = (2r-1)!! / (2 theta)^r and M(odd, theta) = 0.
/// Exact in closed form; the quadrature route exists only as a test oracle.
inline double gaussian_moment(std::span<const double> theta, const MultiIndex& alpha) {
    require(theta.size() == alpha.size(), errc::dimension_mismatch,
            "theta/alpha dimension mismatch");
    double prod = 1.0;
    for (size_t j = 0; j < alpha.size(); ++j) {
        require(theta[j] > 0.0, errc::invalid_input, "theta must be positive");
        const int a = alpha[j];
        if (a % 2 != 0) return 0.0;
        const int r = a / 2;
        double m = 1.0;
        for (int k = 1; k <= r; ++k) m *= (2.0 * k - 1.0) / (2.0 * theta[j]);
        prod *= m;
    }
    return prod;
}

inline double gaussian_moment(const Eigen::VectorXd& theta, const MultiIndex& alpha) {
    return gaussian_moment(std::span<const double>(theta.data(), theta.size()), alpha);
}

/// <A Psi_0, B Psi_0>_{L2} expanded over term pairs.
inline double polynomial_inner(const Eigen::VectorXd& theta, const MonomialPolynomial& A,
                               const MonomialPolynomial& B) {
    require(A.dim() == static_cast<int>(theta.size()) && B.dim() == A.dim(),
            errc::dimension_mismatch, "polynomial dimensions must match theta");
    double sum = 0.0;
    for (const auto& [ma, ca] : A.terms())
        for (const auto& [mb, cb] : B.terms())
            sum += ca * cb * gaussian_moment(theta, add(ma, mb));
    return sum;
}

/// <A f, g>_{L2} for oscillator eigenfunctions f, g sharing theta; the Hermite
/// polynomial parts are expanded into monomials and everything reduces to
/// gaussian_moment.
inline double hermite_inner(const Eigen::VectorXd& theta, const MonomialPolynomial& A,
                            const HermiteEigenfunction& f, const HermiteEigenfunction& g) {
    require(f.theta.size() == theta.size() && g.theta.size() == theta.size(),
            errc::dimension_mismatch, "eigenfunction dimension mismatch");
    require((f.theta - theta).lpNorm<Eigen::Infinity>() == 0.0 &&
                (g.theta - theta).lpNorm<Eigen::Infinity>() == 0.0,
            errc::invalid_input, "eigenfunctions must share theta with the weight");
    // f g = nf ng polyf polyg exp(-sum theta xi^2) = (nf ng / prod sqrt(theta/pi)) polyf polyg Psi_0^2
    double scale = f.normalization * g.normalization;
    for (int j = 0; j < theta.size(); ++j) scale *= std::sqrt(M_PI / theta[j]);
    const MonomialPolynomial prod = A * f.polynomial_part * g.polynomial_part;
    double sum = 0.0;
    for (const auto& [m, c] : prod.terms()) sum += c * gaussian_moment(theta, m);
    return scale * sum;
}

}  // namespace thinspec
