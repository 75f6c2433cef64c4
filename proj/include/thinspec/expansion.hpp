#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <string>

#include "thinspec/moments.hpp"
#include "thinspec/oscillator.hpp"
#include "thinspec/taylor_data.hpp"

namespace thinspec {

/// First-order eigenfunction corrector PsiTilde_1 = R Psi_0 with
/// R = sum C_pqj xi_p xi_q xi_j + sum C_j xi_j. Solving
/// (G_1 - Lambda)(R Psi_0) = (2 pi^2/H0^3) H_3 Psi_0 termwise gives
///   C_pqj =  pi^2 beta_pqj / (H0^3 (theta_p + theta_q + theta_j)),
///   C_j   =  3 sum_p pi^2 beta_ppj / (H0^3 theta_j (2 theta_p + theta_j)).
struct Psi1Corrector {
    MonomialPolynomial R;
    Eigen::VectorXd theta;
    double H0 = 0.0;
};

namespace detail {

/// (G_1 - Lambda)(R Psi_0) = [-Delta R + 2 sum theta_j xi_j d_j R] Psi_0:
/// the polynomial factor of the image, used for residual verification.
inline MonomialPolynomial oscillator_image(const MonomialPolynomial& R,
                                           const Eigen::VectorXd& theta) {
    MonomialPolynomial img = R.laplacian().scaled(-1.0);
    for (int j = 0; j < theta.size(); ++j) {
        MonomialPolynomial t = MonomialPolynomial::variable(R.dim(), j) * R.derivative(j);
        img += t.scaled(2.0 * theta[j]);
    }
    return img;
}

}  // namespace detail

/// Weak-form residual of the corrector equation against xi^phi Psi_0 for all
/// monomials phi up to degree `max_degree`.
inline double psi1_weak_residual(const TaylorWidthData& jet, const Psi1Corrector& corr,
                                 int max_degree = 5) {
    const int dim = jet.base_dim();
    const Eigen::VectorXd& th = corr.theta;
    MonomialPolynomial defect = detail::oscillator_image(corr.R, th) -
                                jet.h3_polynomial().scaled(2.0 * M_PI * M_PI /
                                                           std::pow(jet.H0, 3.0));
    double worst = 0.0;
    MultiIndex phi(dim, 0);
    std::function<void(int, int)> rec = [&](int axis, int left) {
        if (axis == dim) {
            MonomialPolynomial p(dim);
            p.add_term(phi, 1.0);
            worst = std::max(worst, std::abs(polynomial_inner(th, defect, p)));
            return;
        }
        for (int v = 0; v <= left; ++v) {
            phi[axis] = v;
            rec(axis + 1, left - v);
        }
        phi[axis] = 0;
    };
    rec(0, max_degree);
    return worst;
}

inline Psi1Corrector build_psi1(const TaylorWidthData& jet, const OscillatorSpectrum& spec) {
    require(jet.k == 1, errc::use_numeric_path, "corrector requires the quadratic well (k = 1)");
    require(spec.n == 1, errc::invalid_input, "corrector is defined for the n = 1 spectrum");
    const int dim = jet.base_dim();
    require(static_cast<int>(spec.theta.size()) == dim, errc::dimension_mismatch,
            "spectrum dimension does not match the jet");

    const Eigen::VectorXd& th = spec.theta;
    const double H03 = std::pow(jet.H0, 3.0);
    const double pi2 = M_PI * M_PI;

    Psi1Corrector corr;
    corr.theta = th;
    corr.H0 = jet.H0;
    corr.R = MonomialPolynomial(dim);
    if (jet.beta.zero()) return corr;  // no cubic term: the corrector vanishes

    // cubic part: iterate sorted triples once, multiplicity carried explicitly
    for (int p = 0; p < dim; ++p)
        for (int q = p; q < dim; ++q)
            for (int r = q; r < dim; ++r) {
                const double b = jet.beta(p, q, r);
                if (b == 0.0) continue;
                const double C = pi2 * b / (H03 * (th[p] + th[q] + th[r]));
                int mult = 6;
                if (p == q && q == r)
                    mult = 1;
                else if (p == q || q == r)
                    mult = 3;
                MultiIndex m(dim, 0);
                m[p]++;
                m[q]++;
                m[r]++;
                corr.R.add_term(m, mult * C);
            }
    // linear part
    for (int j = 0; j < dim; ++j) {
        double cj = 0.0;
        for (int p = 0; p < dim; ++p)
            cj += 3.0 * pi2 * jet.beta(p, p, j) / (H03 * th[j] * (2.0 * th[p] + th[j]));
        if (cj != 0.0) {
            MultiIndex m(dim, 0);
            m[j] = 1;
            corr.R.add_term(m, cj);
        }
    }

    // construction invariants: orthogonality to the ground state and the
    // weak-form residual of the defining equation
    MonomialPolynomial one = MonomialPolynomial::constant(dim, 1.0);
    require(std::abs(polynomial_inner(th, corr.R, one)) <= 1e-12, errc::accuracy,
            "corrector must be L2-orthogonal to the ground state");
    require(psi1_weak_residual(jet, corr) <= 1e-9, errc::accuracy,
            "corrector weak-form residual above tolerance");
    return corr;
}

/// Truncated expansion data for one eigenvalue branch.
struct ExpansionResult {
    int n = 1, m = 1;
    int k = 1;
    double c0 = 0.0;
    double c2k = 0.0;
    double c2k1 = 0.0;
    double c2k2 = 0.0;
    bool has_c2k2 = true;
    double eta_exponent = 0.5;     // alpha = 1/(k+1)
    double remainder_order = 0.5;  // O(eps^{1/2}) after the constant term
    double H0 = 0.0;
    std::map<std::string, std::string> provenance;
};

/// Three-coefficient expansion of the lowest eigenvalue (plus the vanishing
/// eps^{-1/2} term):
///   c0 = pi^2/H0^2, c2 = sum theta_j, c3 = 0,
///   c4 = (pi^2/H0^4) <(3 H2^2 - 2 H0 H4) Psi_0, Psi_0>
///      + (pi^2/H0^2) |grad h1|^2 - (2 pi^2/H0^3) <H3 PsiTilde_1, Psi_0>.
inline ExpansionResult first_eigenvalue_coeffs(const TaylorWidthData& jet) {
    require(jet.k == 1, errc::use_numeric_path, "closed-form coefficients require k = 1");
    const int dim = jet.base_dim();
    require(jet.alpha.minCoeff() > 0.0, errc::degenerate_maximum, "alpha must be positive");

    OscillatorSpectrum spec = oscillator_spectrum(jet, 1, 1);
    const Eigen::VectorXd th = spec.theta;

    ExpansionResult res;
    res.n = 1;
    res.m = 1;
    res.k = 1;
    res.H0 = jet.H0;
    res.eta_exponent = 0.5;
    res.remainder_order = 0.5;

    const double pi2 = M_PI * M_PI;
    res.c0 = pi2 / (jet.H0 * jet.H0);
    res.c2k = th.sum();
    res.c2k1 = 0.0;  // parity: <H3 Psi_0, Psi_0> = 0 for the simple ground state

    const MonomialPolynomial h2 = jet.h2_polynomial();
    const MonomialPolynomial h3 = jet.h3_polynomial();
    const MonomialPolynomial one = MonomialPolynomial::constant(dim, 1.0);
    const MonomialPolynomial quartic =
        (h2 * h2).scaled(3.0) - jet.h4_polynomial().scaled(2.0 * jet.H0);

    double c4 = pi2 / std::pow(jet.H0, 4.0) * polynomial_inner(th, quartic, one);
    c4 += pi2 / (jet.H0 * jet.H0) * jet.grad_h1.squaredNorm();
    Psi1Corrector corr = build_psi1(jet, spec);
    if (!corr.R.empty())
        c4 -= 2.0 * pi2 / std::pow(jet.H0, 3.0) * polynomial_inner(th, h3 * corr.R, one);

    res.c2k2 = c4;
    res.has_c2k2 = true;
    res.provenance = {{"c0", "closed-form"},
                      {"c2", "oscillator-ground"},
                      {"c3", "ground-simple-parity"},
                      {"c4", corr.R.empty() ? "moments" : "moments+psi1"}};
    return res;
}

/// Degeneracy-splitting matrix for the eps^{2k+1}-order coefficients:
/// T_ml = 2 pi^2 n^2 H0^{-3} <H_3 Psi_m, Psi_l>; the candidates for c_{2k+1}
/// are -tau_m, tau_m the eigenvalues of T.
struct SplittingMatrix {
    int level_group = 0;
    Eigen::MatrixXd T;
    Eigen::VectorXd tau;             // ascending
    Eigen::VectorXd c3_candidates;   // -tau, sorted ascending
    Eigen::MatrixXd basis_rotation;  // columns rotate the level's eigenfunctions
    bool repeated_tau = false;       // the next-order branch is out of scope
};

inline SplittingMatrix degenerate_c3_matrix(const TaylorWidthData& jet,
                                            const OscillatorSpectrum& spec,
                                            const std::vector<MultiIndex>& level_group, int n) {
    require(jet.k == 1, errc::use_numeric_path, "splitting matrix requires k = 1");
    require(spec.n == n, errc::invalid_input, "spectrum was built for a different mode n");
    require(!level_group.empty(), errc::invalid_input, "empty level group");

    const Eigen::VectorXd& th = spec.theta;
    const int N = static_cast<int>(level_group.size());

    // all members must share one Lambda group
    double lam0 = 0.0;
    int group_id = -1;
    for (int i = 0; i < N; ++i) {
        double lam = 0.0;
        for (int j = 0; j < th.size(); ++j) lam += (2.0 * level_group[i][j] + 1.0) * th[j];
        if (i == 0) lam0 = lam;
        require(std::abs(lam - lam0) <= 1e-9 * (1.0 + std::abs(lam0)), errc::invalid_level,
                "multi-indices span different oscillator levels");
        for (const auto& lvl : spec.levels)
            if (lvl.m == level_group[i]) group_id = lvl.group;
    }

    const MonomialPolynomial h3 = jet.h3_polynomial();
    const double scale = 2.0 * M_PI * M_PI * n * n / std::pow(jet.H0, 3.0);

    std::vector<HermiteEigenfunction> psi;
    psi.reserve(N);
    for (const auto& m : level_group) psi.push_back(make_hermite_eigenfunction(th, m));

    SplittingMatrix out;
    out.level_group = group_id;
    out.T.resize(N, N);
    for (int a = 0; a < N; ++a)
        for (int b = a; b < N; ++b) {
            const double v = scale * hermite_inner(th, h3, psi[a], psi[b]);
            out.T(a, b) = v;
            out.T(b, a) = v;  // mirrored entry keeps the matrix bit-exactly symmetric
        }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.T);
    out.tau = es.eigenvalues();
    out.basis_rotation = es.eigenvectors();
    out.c3_candidates = (-out.tau).reverse();
    for (int i = 0; i + 1 < N; ++i)
        if (std::abs(out.tau[i + 1] - out.tau[i]) <= 1e-9 * (1.0 + std::abs(out.tau[i])))
            out.repeated_tau = true;
    return out;
}

/// eps^{-2} (c0 + c_{2k} eta^{2k} + c_{2k+1} eta^{2k+1} + c_{2k+2} eta^{2k+2}),
/// eta = eps^{1/(k+1)}. For k = 1: c0/eps^2 + c2/eps + c3/sqrt(eps) + c4.
inline double evaluate_expansion(const ExpansionResult& res, double eps) {
    require(eps > 0.0, errc::invalid_input, "eps must be positive");
    const double eta = std::pow(eps, 1.0 / (res.k + 1.0));
    double v = res.c0 + res.c2k * std::pow(eta, 2.0 * res.k) +
               res.c2k1 * std::pow(eta, 2.0 * res.k + 1.0);
    if (res.has_c2k2) v += res.c2k2 * std::pow(eta, 2.0 * res.k + 2.0);
    return v / (eps * eps);
}

/// Closed-form ellipsoid expansion (projection along the last axis):
///   c0 = pi^2/(4 a_d^2), c2 = (pi/(2 a_d)) sum 1/a_i, c3 = 0,
///   c4 = (1/4) (3 sum 1/a_i^2 + 2 sum_{j>i} 1/(a_i a_j)).
inline ExpansionResult ellipsoid_expansion(const Eigen::VectorXd& a) {
    const int d = static_cast<int>(a.size());
    require(d >= 2, errc::invalid_input, "ellipsoid needs at least 2 semi-axes");
    for (int i = 0; i < d; ++i)
        require(a[i] > 0.0 && std::isfinite(a[i]), errc::invalid_input,
                "semi-axes must be positive");
    const double ad = a[d - 1];
    ExpansionResult res;
    res.k = 1;
    res.H0 = 2.0 * ad;
    res.c0 = M_PI * M_PI / (4.0 * ad * ad);
    double s1 = 0.0, s2 = 0.0, sx = 0.0;
    for (int i = 0; i < d - 1; ++i) {
        s1 += 1.0 / a[i];
        s2 += 1.0 / (a[i] * a[i]);
        for (int j = i + 1; j < d - 1; ++j) sx += 1.0 / (a[i] * a[j]);
    }
    res.c2k = M_PI / (2.0 * ad) * s1;
    res.c2k1 = 0.0;
    res.c2k2 = 0.25 * (3.0 * s2 + 2.0 * sx);
    res.provenance = {{"c0", "closed-form"},
                      {"c2", "closed-form"},
                      {"c3", "closed-form"},
                      {"c4", "closed-form"}};
    return res;
}

/// Eccentricity expansion of the first ellipse eigenvalue around the disk:
/// lambda_1 (1 - e^2/2 - (e^4/16)(3 - lambda_1/2) - (e^6/32)(3 - lambda_1/2)).
inline double joseph_ellipse_eccentricity(double lambda_disk, double e) {
    require(e >= 0.0 && e < 1.0, errc::invalid_input, "eccentricity must lie in [0, 1)");
    const double e2 = e * e, e4 = e2 * e2, e6 = e4 * e2;
    const double bracket = 3.0 - lambda_disk / 2.0;
    return lambda_disk * (1.0 - e2 / 2.0 - e4 / 16.0 * bracket - e6 / 32.0 * bracket);
}

}  // namespace thinspec
