#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "thinspec/taylor_data.hpp"
#include "thinspec/width_model.hpp"

namespace thinspec {

namespace detail {

using ScalarField = std::function<double(const Eigen::VectorXd&)>;

/// Mixed partial derivative of order |m| by nested second-order central
/// differences: each index in `axes` peels one differentiation.
inline double nested_central(const ScalarField& f, const Eigen::VectorXd& x,
                             const std::vector<int>& axes, size_t pos, double h) {
    if (pos == axes.size()) return f(x);
    Eigen::VectorXd xp = x, xm = x;
    xp[axes[pos]] += h;
    xm[axes[pos]] -= h;
    return (nested_central(f, xp, axes, pos + 1, h) - nested_central(f, xm, axes, pos + 1, h)) /
           (2.0 * h);
}

/// Two-level Richardson refinement of the order-2 stencil: eliminates the h^2
/// truncation term.
inline double fd_derivative(const ScalarField& f, const Eigen::VectorXd& x,
                            const std::vector<int>& axes, double h) {
    const double d1 = nested_central(f, x, axes, 0, h);
    const double d2 = nested_central(f, x, axes, 0, h / 2.0);
    return (4.0 * d2 - d1) / 3.0;
}

inline Eigen::VectorXd fd_gradient(const ScalarField& f, const Eigen::VectorXd& x, double h) {
    Eigen::VectorXd g(x.size());
    for (int i = 0; i < x.size(); ++i) g[i] = fd_derivative(f, x, {i}, h);
    return g;
}

inline Eigen::MatrixXd fd_hessian(const ScalarField& f, const Eigen::VectorXd& x, double h) {
    const int n = static_cast<int>(x.size());
    Eigen::MatrixXd H(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) H(i, j) = H(j, i) = fd_derivative(f, x, {i, j}, h);
    return H;
}

}  // namespace detail

/// Locate the interior maximum of H by safeguarded Newton ascent with
/// finite-difference derivatives. Fails explicitly for maxima on the boundary
/// of omega and for geometries without an isolated maximum.
inline Eigen::VectorXd locate_max(const WidthModel& model, const Eigen::VectorXd& seed,
                                  double tol = 1e-10) {
    require(model.inside(seed), errc::invalid_input, "seed must lie inside omega");
    require(tol > 0.0, errc::invalid_input, "tolerance must be positive");

    detail::ScalarField H = [&](const Eigen::VectorXd& x) {
        WidthSample s = model.eval(x);
        return s.inside ? s.H : -std::numeric_limits<double>::infinity();
    };
    auto finite_at = [&](const Eigen::VectorXd& x) { return model.inside(x); };

    const double grad_step = 1e-5;
    const double hess_step = 1e-3;
    const int max_iter = 200;

    Eigen::VectorXd x = seed;
    double grad_norm = std::numeric_limits<double>::infinity();
    bool boundary_blocked = false;
    for (int iter = 0; iter < max_iter; ++iter) {
        Eigen::VectorXd g = detail::fd_gradient(H, x, grad_step);
        grad_norm = g.norm();
        if (!std::isfinite(grad_norm))
            raise(errc::unsupported_geometry, "width gradient undefined near the boundary");
        if (grad_norm <= tol) break;

        Eigen::MatrixXd Hs = detail::fd_hessian(H, x, hess_step);
        Eigen::VectorXd dir;
        Eigen::LLT<Eigen::MatrixXd> llt(-Hs);
        if (llt.info() == Eigen::Success) {
            dir = llt.solve(g);  // Newton ascent step for a negative-definite Hessian
        } else {
            dir = g;  // plain ascent fallback
        }
        double step = 1.0;
        const double H0v = H(x);
        bool moved = false;
        for (int ls = 0; ls < 50; ++ls) {
            Eigen::VectorXd cand = x + step * dir;
            if (finite_at(cand) && H(cand) > H0v) {
                x = cand;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) {
            boundary_blocked = !finite_at(x + 1e-12 * dir.normalized());
            break;
        }
    }

    if (grad_norm > tol) {
        Eigen::VectorXd g = detail::fd_gradient(H, x, grad_step);
        if (boundary_blocked || !finite_at(x + 1e-7 * g.normalized()))
            raise(errc::unsupported_geometry, "width maximum lies on the boundary of omega");
        std::ostringstream os;
        os << "ascent stalled at |grad H| = " << g.norm() << ", best iterate (";
        for (int i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
        os << ")";
        raise(errc::search_failure, os.str());
    }

    // Isolation probe: a genuine (possibly degenerate) maximum must strictly
    // dominate nearby samples; a constant width does not.
    const double probe = 1e-2;
    const double Hc = H(x);
    bool isolated = false;
    for (int i = 0; i < x.size() && !isolated; ++i) {
        for (double s : {probe, -probe}) {
            Eigen::VectorXd p = x;
            p[i] += s;
            if (!finite_at(p)) continue;
            if (Hc - H(p) > 1e-13 * (1.0 + std::abs(Hc))) {
                isolated = true;
                break;
            }
        }
    }
    if (!isolated)
        raise(errc::unsupported_geometry, "no isolated width maximum (constant width?)");
    return x;
}

/// Extract the order-4 Taylor jet of H (and the gradient of h_minus) at x_bar,
/// rotated into the Hessian eigenframe. Central differences with two-level
/// Richardson refinement; step balances truncation against roundoff for
/// C^infinity widths at double precision.
inline TaylorWidthData extract_taylor(const WidthModel& model, const Eigen::VectorXd& x_bar,
                                      int order = 4, double step = 1e-2,
                                      double residual_tol = 1e-6) {
    require(order == 4, errc::invalid_input, "only the order-4 jet is supported");
    require(model.inside(x_bar), errc::invalid_input, "x_bar must lie inside omega");
    const int n = model.base_dim();

    detail::ScalarField H = [&](const Eigen::VectorXd& x) {
        WidthSample s = model.eval(x);
        require(s.inside, errc::accuracy, "finite-difference stencil leaves omega");
        return s.H;
    };
    detail::ScalarField hminus = [&](const Eigen::VectorXd& x) {
        WidthSample s = model.eval(x);
        require(s.inside, errc::accuracy, "finite-difference stencil leaves omega");
        return s.h_minus;
    };

    const double H0 = H(x_bar);
    require(H0 > 0.0, errc::invalid_input, "H(x_bar) must be positive");

    // Hessian of H (rotated below); negative definiteness is the k = 1 gate.
    Eigen::MatrixXd hess(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            hess(i, j) = hess(j, i) = detail::fd_derivative(H, x_bar, {i, j}, step);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess);
    const Eigen::VectorXd evals = es.eigenvalues();  // ascending: most negative first
    const double scale = std::max(1.0, hess.cwiseAbs().maxCoeff());
    require(evals.maxCoeff() < -1e-7 * scale, errc::degenerate_maximum,
            "Hessian of H at x_bar is not negative definite (k > 1 is only "
            "supported through the numeric oscillator path)");

    Eigen::MatrixXd basis = es.eigenvectors();
    // Deterministic signs: first non-negligible component of each column positive.
    for (int c = 0; c < n; ++c) {
        for (int r = 0; r < n; ++r) {
            if (std::abs(basis(r, c)) > 1e-12) {
                if (basis(r, c) < 0) basis.col(c) *= -1.0;
                break;
            }
        }
    }
    Eigen::VectorXd alpha(n);
    for (int i = 0; i < n; ++i) alpha[i] = std::sqrt(-evals[i]);  // descending

    // Third- and fourth-order derivative tensors on sorted index combos.
    std::map<std::array<int, 3>, double> d3;
    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b)
            for (int c = b; c < n; ++c)
                d3[{a, b, c}] = detail::fd_derivative(H, x_bar, {a, b, c}, step);
    std::map<std::array<int, 4>, double> d4;
    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b)
            for (int c = b; c < n; ++c)
                for (int e = c; e < n; ++e)
                    d4[{a, b, c, e}] = detail::fd_derivative(H, x_bar, {a, b, c, e}, step);
    auto D3 = [&](int a, int b, int c) {
        std::array<int, 3> k{a, b, c};
        std::sort(k.begin(), k.end());
        return d3.at(k);
    };
    auto D4 = [&](int a, int b, int c, int e) {
        std::array<int, 4> k{a, b, c, e};
        std::sort(k.begin(), k.end());
        return d4.at(k);
    };

    // Rotate into the eigenframe.
    SymmetricTensor3 beta(n);
    for (int p = 0; p < n; ++p)
        for (int q = p; q < n; ++q)
            for (int r = q; r < n; ++r) {
                double v = 0.0;
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b)
                        for (int c = 0; c < n; ++c)
                            v += basis(a, p) * basis(b, q) * basis(c, r) * D3(a, b, c);
                beta.set(p, q, r, v / 6.0);
            }

    MonomialPolynomial H4(n);
    {
        // enumerate sorted 4-tuples (p<=q<=r<=s) once per distinct monomial
        for (int p = 0; p < n; ++p)
            for (int q = p; q < n; ++q)
                for (int r = q; r < n; ++r)
                    for (int s = r; s < n; ++s) {
                        double v = 0.0;
                        for (int a = 0; a < n; ++a)
                            for (int b = 0; b < n; ++b)
                                for (int c = 0; c < n; ++c)
                                    for (int e = 0; e < n; ++e)
                                        v += basis(a, p) * basis(b, q) * basis(c, r) *
                                             basis(e, s) * D4(a, b, c, e);
                        if (v == 0.0) continue;
                        MultiIndex m(n, 0);
                        m[p]++;
                        m[q]++;
                        m[r]++;
                        m[s]++;
                        double fact = 1.0;
                        for (int i = 0; i < n; ++i)
                            for (int k = 2; k <= m[i]; ++k) fact *= k;
                        H4.add_term(m, v / fact);
                    }
    }

    Eigen::VectorXd grad_hm(n);
    for (int i = 0; i < n; ++i) grad_hm[i] = detail::fd_derivative(hminus, x_bar, {i}, step);

    TaylorWidthData jet;
    jet.d = model.dimension();
    jet.x_bar = x_bar;
    jet.H0 = H0;
    jet.k = 1;
    jet.alpha = alpha;
    jet.basis = basis;
    jet.beta = beta;
    jet.H4 = H4;
    jet.grad_h1 = basis.transpose() * grad_hm;

    // Residual of the degree-4 jet on a probe stencil of radius `step`.
    const MonomialPolynomial h2 = jet.h2_polynomial();
    const MonomialPolynomial h3 = jet.h3_polynomial();
    double res = 0.0;
    std::vector<Eigen::VectorXd> dirs;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e[i] = 1.0;
        dirs.push_back(e);
        for (int j = i + 1; j < n; ++j) {
            Eigen::VectorXd f = e;
            f[j] = 1.0;
            dirs.push_back(f / std::sqrt(2.0));
        }
    }
    for (const auto& dir : dirs)
        for (double s : {step, -step}) {
            Eigen::VectorXd v = s * dir;
            Eigen::VectorXd xi = basis.transpose() * v;
            std::span<const double> xis(xi.data(), xi.size());
            const double jet_val =
                H0 + h2.evaluate(xis) + h3.evaluate(xis) + H4.evaluate(xis);
            res = std::max(res, std::abs(H(x_bar + v) - jet_val));
        }
    jet.fit_residual = res;
    require(res <= residual_tol, errc::accuracy,
            "jet fit residual " + std::to_string(res) + " exceeds tolerance");
    return jet;
}

/// Closed-form jet of the ellipsoid: H0 = 2 a_d, alpha_i = sqrt(2 a_d)/a_i,
/// beta = 0, H4 = -(a_d/4) sum_{ij} (xi_i xi_j / (a_i a_j))^2, grad h1 = 0.
/// Axes are reordered so alpha comes out descending, matching the numeric
/// extractor's convention.
inline TaylorWidthData ellipsoid_taylor(const Eigen::VectorXd& a) {
    const int d = static_cast<int>(a.size());
    require(d >= 2, errc::invalid_input, "ellipsoid needs at least 2 semi-axes");
    for (int i = 0; i < d; ++i)
        require(a[i] > 0.0 && std::isfinite(a[i]), errc::invalid_input,
                "semi-axes must be positive");
    const int n = d - 1;
    const double ad = a[d - 1];

    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::stable_sort(perm.begin(), perm.end(), [&](int i, int j) { return a[i] < a[j]; });

    TaylorWidthData jet;
    jet.d = d;
    jet.x_bar = Eigen::VectorXd::Zero(n);
    jet.H0 = 2.0 * ad;
    jet.k = 1;
    jet.alpha.resize(n);
    jet.basis = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd as(n);
    for (int p = 0; p < n; ++p) {
        as[p] = a[perm[p]];
        jet.alpha[p] = std::sqrt(2.0 * ad) / as[p];
        jet.basis(perm[p], p) = 1.0;
    }
    jet.beta = SymmetricTensor3(n);
    jet.H4 = MonomialPolynomial(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            MultiIndex m(n, 0);
            m[i] += 2;
            m[j] += 2;
            const double c = -(ad / 4.0) * (i == j ? 1.0 : 2.0) / (as[i] * as[i] * as[j] * as[j]);
            jet.H4.add_term(m, c);
        }
    jet.grad_h1 = Eigen::VectorXd::Zero(n);
    jet.fit_residual = 0.0;
    return jet;
}

}  // namespace thinspec
