#pragma once

#include <Eigen/Core>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <vector>

#include "thinspec/hermite.hpp"
#include "thinspec/monomial.hpp"
#include "thinspec/sparse_eigs.hpp"
#include "thinspec/taylor_data.hpp"

namespace thinspec {

struct OscillatorLevel {
    double lambda = 0.0;
    MultiIndex m;
    int group = 0;  // multiplicity-group id, shared by (numerically) tied levels
};

/// Spectrum of the effective operator G_n = -Delta - 2 pi^2 n^2 H_2(xi)/H0^3 in
/// the quadratic-well case: the tensor harmonic oscillator ladder
/// Lambda(m) = sum_j (2 m_j + 1) theta_j with theta_j = pi n alpha_j / H0^{3/2}.
struct OscillatorSpectrum {
    int n = 1;
    Eigen::VectorXd theta;
    std::vector<OscillatorLevel> levels;

    double ground() const { return theta.sum(); }

    /// Multi-indices forming the multiplicity group `g`.
    std::vector<MultiIndex> group_members(int g) const {
        std::vector<MultiIndex> out;
        for (const auto& l : levels)
            if (l.group == g) out.push_back(l.m);
        return out;
    }
};

/// Enumerate the lowest `count` oscillator levels. The enumeration cap is
/// grown until the prefix is certified complete: every multi-index outside
/// degree <= cap has Lambda >= sum theta + 2 (cap+1) theta_min.
inline OscillatorSpectrum oscillator_spectrum(const TaylorWidthData& jet, int n, int count) {
    require(jet.k == 1, errc::use_numeric_path,
            "analytic ladder exists only for k = 1; use schrodinger_solve_numeric");
    require(n >= 1, errc::invalid_input, "transverse mode n must be >= 1");
    require(count >= 1, errc::invalid_input, "count must be >= 1");

    OscillatorSpectrum spec;
    spec.n = n;
    spec.theta = jet.theta(n);
    const Eigen::VectorXd& th = spec.theta;
    const int dim = static_cast<int>(th.size());
    const double th_min = th.minCoeff(), th_sum = th.sum();

    std::vector<std::pair<double, MultiIndex>> found;
    const int cap_limit = 120;
    for (int cap = 0; cap <= cap_limit; ++cap) {
        found.clear();
        // enumerate all m with degree <= cap
        MultiIndex m(dim, 0);
        std::function<void(int, int)> rec = [&](int axis, int left) {
            if (axis == dim) {
                double lam = th_sum;
                for (int j = 0; j < dim; ++j) lam += 2.0 * m[j] * th[j];
                found.emplace_back(lam, m);
                return;
            }
            for (int v = 0; v <= left; ++v) {
                m[axis] = v;
                rec(axis + 1, left - v);
            }
            m[axis] = 0;
        };
        rec(0, cap);
        if (static_cast<int>(found.size()) < count) continue;
        std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first < b.first;
            return a.second < b.second;  // deterministic tie order: lexicographic
        });
        const double outside_min = th_sum + 2.0 * (cap + 1) * th_min;
        if (found[count - 1].first < outside_min) {
            found.resize(count);
            int group = -1;
            double head = -std::numeric_limits<double>::infinity();
            for (const auto& [lam, mi] : found) {
                if (lam - head > 1e-9 * (1.0 + std::abs(lam))) {
                    ++group;
                    head = lam;
                }
                spec.levels.push_back({lam, mi, group});
            }
            return spec;
        }
    }
    raise(errc::cap_exceeded, "level enumeration cap exceeded for count " + std::to_string(count));
}

/// Normalized eigenfunction descriptor for the level with multi-index m.
/// The ground state reproduces prod_j (theta_j/pi)^{1/4} exp(-theta_j xi_j^2/2).
inline HermiteEigenfunction hermite_eigenfunction(const OscillatorSpectrum& spec,
                                                  const MultiIndex& m) {
    return make_hermite_eigenfunction(spec.theta, m);
}

struct SchrodingerResult {
    Eigen::VectorXd values;
    Eigen::VectorXd box_delta;  // |Lambda(L) - Lambda(1.25 L)| per level
};

/// Lowest `count` eigenvalues of G_n = -Delta + V with V = -2 pi^2 n^2 well/H0^3
/// on [-L, L]^dim (Dirichlet), by second-order finite differences and sparse
/// shift-invert iteration. Supports general polynomial wells, including k > 1.
inline SchrodingerResult schrodinger_solve_numeric(const MonomialPolynomial& well, double H0,
                                                   int n, double box_halfwidth, int grid_points,
                                                   int count, double box_tol = 1e-6) {
    const int dim = well.dim();
    require(dim >= 1 && dim <= 2, errc::invalid_input,
            "numeric oscillator grids support 1 or 2 transverse dimensions");
    require(H0 > 0.0 && n >= 1 && count >= 1, errc::invalid_input, "invalid parameters");
    require(box_halfwidth > 0.0 && grid_points >= 16, errc::invalid_input,
            "box and grid must be usable");

    const double vscale = 2.0 * M_PI * M_PI * n * n / (H0 * H0 * H0);

    auto solve_on_box = [&](double L) {
        const int g = grid_points;
        const double h = 2.0 * L / (g + 1);
        std::vector<double> xs(g);
        for (int i = 0; i < g; ++i) xs[i] = -L + h * (i + 1);

        const Eigen::Index N = dim == 1 ? g : static_cast<Eigen::Index>(g) * g;
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(N * (2 * dim + 1));
        double vmax_off_origin = -std::numeric_limits<double>::infinity();
        Eigen::VectorXd pt(dim);
        for (Eigen::Index a = 0; a < N; ++a) {
            if (dim == 1) {
                pt[0] = xs[a];
            } else {
                pt[0] = xs[a / g];
                pt[1] = xs[a % g];
            }
            const double w = well.evaluate(std::span<const double>(pt.data(), dim));
            const double V = -vscale * w;
            if (pt.norm() > 0.05 * L) vmax_off_origin = std::max(vmax_off_origin, w);
            trip.emplace_back(a, a, 2.0 * dim / (h * h) + V);
            if (dim == 1) {
                if (a > 0) trip.emplace_back(a, a - 1, -1.0 / (h * h));
                if (a + 1 < N) trip.emplace_back(a, a + 1, -1.0 / (h * h));
            } else {
                const int i = static_cast<int>(a / g), j = static_cast<int>(a % g);
                if (i > 0) trip.emplace_back(a, a - g, -1.0 / (h * h));
                if (i + 1 < g) trip.emplace_back(a, a + g, -1.0 / (h * h));
                if (j > 0) trip.emplace_back(a, a - 1, -1.0 / (h * h));
                if (j + 1 < g) trip.emplace_back(a, a + 1, -1.0 / (h * h));
            }
        }
        require(vmax_off_origin < 1e-12, errc::invalid_potential,
                "well must be negative away from the origin (confining potential)");
        SparseSym A(N, N);
        A.setFromTriplets(trip.begin(), trip.end());
        EigsOptions opts;
        opts.count = count;
        opts.shift = 0.0;  // operator is positive: -Delta Dirichlet plus V >= 0
        opts.tol = 1e-9;
        return smallest_eigenvalues(A, opts);
    };

    EigsResult base = solve_on_box(box_halfwidth);
    EigsResult wide = solve_on_box(1.25 * box_halfwidth);
    SchrodingerResult out;
    out.values = base.values;
    out.box_delta = (base.values - wide.values).cwiseAbs();
    for (int i = 0; i < count; ++i)
        require(out.box_delta[i] <= box_tol * (1.0 + std::abs(out.values[i])),
                errc::box_too_small,
                "eigenvalue " + std::to_string(i) + " moves by " +
                    std::to_string(out.box_delta[i]) + " when the box grows 1.25x");
    return out;
}

/// Default numeric box per the catalog convention: halfwidth 8/sqrt(theta_min).
inline double default_box_halfwidth(const Eigen::VectorXd& theta) {
    return 8.0 / std::sqrt(theta.minCoeff());
}

}  // namespace thinspec
