#pragma once

#include <cmath>
#include <map>
#include <span>

#include "thinspec/errors.hpp"
#include "thinspec/multi_index.hpp"

namespace thinspec {

/// Polynomial in monomial form: multi-index -> coefficient. The ordered map
/// keeps term iteration deterministic, which makes symmetric operations
/// (inner products, addition) bit-reproducible.
class MonomialPolynomial {
public:
    using TermMap = std::map<MultiIndex, double>;

    explicit MonomialPolynomial(int dim = 0) : dim_(dim) {}

    static MonomialPolynomial constant(int dim, double c) {
        MonomialPolynomial p(dim);
        p.add_term(MultiIndex(dim, 0), c);
        return p;
    }

    /// The coordinate monomial xi_axis.
    static MonomialPolynomial variable(int dim, int axis) {
        MonomialPolynomial p(dim);
        MultiIndex m(dim, 0);
        m[axis] = 1;
        p.add_term(m, 1.0);
        return p;
    }

    int dim() const { return dim_; }
    const TermMap& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    int max_degree() const {
        int d = 0;
        for (const auto& [m, c] : terms_) d = std::max(d, thinspec::degree(m));
        return d;
    }

    double coeff(const MultiIndex& m) const {
        auto it = terms_.find(m);
        return it == terms_.end() ? 0.0 : it->second;
    }

    void add_term(const MultiIndex& m, double c) {
        require(static_cast<int>(m.size()) == dim_, errc::dimension_mismatch,
                "monomial term dimension " + std::to_string(m.size()) +
                    " != polynomial dimension " + std::to_string(dim_));
        auto [it, inserted] = terms_.try_emplace(m, c);
        if (!inserted) it->second += c;
        if (it->second == 0.0) terms_.erase(it);
    }

    MonomialPolynomial& operator+=(const MonomialPolynomial& o) {
        require(o.dim_ == dim_, errc::dimension_mismatch, "polynomial dimensions differ");
        for (const auto& [m, c] : o.terms_) add_term(m, c);
        return *this;
    }

    MonomialPolynomial& operator-=(const MonomialPolynomial& o) {
        require(o.dim_ == dim_, errc::dimension_mismatch, "polynomial dimensions differ");
        for (const auto& [m, c] : o.terms_) add_term(m, -c);
        return *this;
    }

    friend MonomialPolynomial operator+(MonomialPolynomial a, const MonomialPolynomial& b) {
        a += b;
        return a;
    }

    friend MonomialPolynomial operator-(MonomialPolynomial a, const MonomialPolynomial& b) {
        a -= b;
        return a;
    }

    MonomialPolynomial scaled(double s) const {
        MonomialPolynomial r(dim_);
        if (s == 0.0) return r;
        for (const auto& [m, c] : terms_) r.terms_.emplace(m, c * s);
        return r;
    }

    friend MonomialPolynomial operator*(const MonomialPolynomial& a, const MonomialPolynomial& b) {
        require(a.dim_ == b.dim_, errc::dimension_mismatch, "polynomial dimensions differ");
        MonomialPolynomial r(a.dim_);
        for (const auto& [ma, ca] : a.terms_)
            for (const auto& [mb, cb] : b.terms_) r.add_term(add(ma, mb), ca * cb);
        return r;
    }

    double evaluate(std::span<const double> x) const {
        require(static_cast<int>(x.size()) == dim_, errc::dimension_mismatch,
                "evaluation point dimension mismatch");
        double sum = 0.0;
        for (const auto& [m, c] : terms_) {
            double t = c;
            for (int i = 0; i < dim_; ++i)
                for (int k = 0; k < m[i]; ++k) t *= x[i];
            sum += t;
        }
        return sum;
    }

    MonomialPolynomial derivative(int axis) const {
        MonomialPolynomial r(dim_);
        for (const auto& [m, c] : terms_) {
            if (m[axis] == 0) continue;
            MultiIndex mm(m);
            mm[axis] -= 1;
            r.add_term(mm, c * m[axis]);
        }
        return r;
    }

    MonomialPolynomial laplacian() const {
        MonomialPolynomial r(dim_);
        for (int i = 0; i < dim_; ++i) r += derivative(i).derivative(i);
        return r;
    }
};

}  // namespace thinspec
