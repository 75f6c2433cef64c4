#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <map>

#include "thinspec/errors.hpp"
#include "thinspec/monomial.hpp"

namespace thinspec {

/// Fully symmetric 3-tensor, stored packed by sorted index triple.
class SymmetricTensor3 {
public:
    explicit SymmetricTensor3(int n = 0) : n_(n) {}

    int dim() const { return n_; }

    double operator()(int p, int q, int r) const {
        auto it = vals_.find(key(p, q, r));
        return it == vals_.end() ? 0.0 : it->second;
    }

    void set(int p, int q, int r, double v) {
        if (v == 0.0)
            vals_.erase(key(p, q, r));
        else
            vals_[key(p, q, r)] = v;
    }

    bool zero() const { return vals_.empty(); }

    double max_abs() const {
        double m = 0.0;
        for (const auto& [k, v] : vals_) m = std::max(m, std::abs(v));
        return m;
    }

    /// H_3(xi) = sum over all ordered triples beta_{pqr} xi_p xi_q xi_r as a
    /// monomial polynomial (multiplicity of each sorted triple included).
    MonomialPolynomial to_polynomial() const {
        MonomialPolynomial poly(n_);
        for (const auto& [k, v] : vals_) {
            auto [p, q, r] = k;
            int mult = 6;  // 3! permutations of distinct indices
            if (p == q && q == r)
                mult = 1;
            else if (p == q || q == r)
                mult = 3;
            MultiIndex m(n_, 0);
            m[p]++;
            m[q]++;
            m[r]++;
            poly.add_term(m, mult * v);
        }
        return poly;
    }

private:
    using Key = std::array<int, 3>;
    Key key(int p, int q, int r) const {
        require(p >= 0 && q >= 0 && r >= 0 && p < n_ && q < n_ && r < n_, errc::invalid_input,
                "tensor index out of range");
        Key k{p, q, r};
        std::sort(k.begin(), k.end());
        return k;
    }
    int n_;
    std::map<Key, double> vals_;
};

/// Local jet of the width function at its maximum, expressed in the rotated
/// frame that diagonalizes the Hessian: H = H0 + H2 + H3 + H4 + O(|v|^5) with
/// H2 = -1/2 sum alpha_i^2 xi_i^2.
struct TaylorWidthData {
    int d = 0;                  // ambient dimension; the jet lives in R^{d-1}
    Eigen::VectorXd x_bar;      // maximum location (original frame)
    double H0 = 0.0;
    int k = 1;                  // leading-order index; this extractor produces k = 1
    Eigen::VectorXd alpha;      // sorted descending
    Eigen::MatrixXd basis;      // orthogonal, columns = principal directions
    SymmetricTensor3 beta;      // H3 coefficients, rotated frame, Eq.-style convention
    MonomialPolynomial H4;      // degree-4 part, rotated frame
    Eigen::VectorXd grad_h1;    // gradient of h_minus at x_bar, rotated frame
    double fit_residual = 0.0;

    int base_dim() const { return d - 1; }

    /// Oscillator frequencies theta_j = pi n alpha_j / H0^{3/2}.
    Eigen::VectorXd theta(int n = 1) const {
        return (M_PI * n / std::pow(H0, 1.5)) * alpha;
    }

    MonomialPolynomial h2_polynomial() const {
        MonomialPolynomial p(base_dim());
        for (int i = 0; i < base_dim(); ++i) {
            MultiIndex m(base_dim(), 0);
            m[i] = 2;
            p.add_term(m, -0.5 * alpha[i] * alpha[i]);
        }
        return p;
    }

    MonomialPolynomial h3_polynomial() const { return beta.to_polynomial(); }
    const MonomialPolynomial& h4_polynomial() const { return H4; }
};

}  // namespace thinspec
