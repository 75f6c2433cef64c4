#pragma once

#include <Eigen/Sparse>
#include <cmath>
#include <vector>

#include "thinspec/sparse_eigs.hpp"
#include "thinspec/width_model.hpp"

namespace thinspec {

/// Tensor-grid resolution: cells per axis across the bounding box of omega and
/// across (0,1) in the mapped direction, so doubling the resolution halves
/// every spacing exactly (clean Richardson pairs).
struct GridSpec {
    int resolution = 64;
    double floor_scale = 2.0;  // active nodes require H >= floor_scale * h * |grad H|
};

/// Coefficient fields of the cylinder-mapped operator, sampled on the x'-grid.
/// K_i is linear in t, so the gradients of H and h_minus determine it:
///   Kd = 1/H^2,  K_i(x',t) = (d_i h_minus - t d_i H)/H,
///   K0 = (3/4)|grad H|^2/H^2 - (1/2) (Laplacian H)/H.
struct MappedOperatorCoefficients {
    double eps = 0.0;
    int resolution = 0;
    Eigen::VectorXd box_lo, box_hi;
    std::vector<double> spacing;  // per x'-axis
    double t_spacing = 0.0;
    double h_floor_scale = 2.0;

    // per x'-node fields (flattened over the full x'-grid, inactive entries 0)
    std::vector<double> H, K0;
    std::vector<Eigen::VectorXd> grad_H, grad_hm;
    std::vector<char> active;
    std::vector<long> base_index;  // first unknown of the node's t-column, -1 if masked
    long active_nodes = 0;
    long unknowns = 0;

    double Kd(long node) const { return 1.0 / (H[node] * H[node]); }
    double Ki(long node, int axis, double t) const {
        return (grad_hm[node][axis] - t * grad_H[node][axis]) / H[node];
    }
};

struct MappedOperator {
    SparseSym matrix;
    MappedOperatorCoefficients coeffs;
    double max_width = 0.0;      // max H over active nodes
    double max_thickness = 0.0;  // max h_plus + max h_minus (spectrum lower-bound input)
};

/// Assemble the symmetric flux-form finite-difference discretization of
///   -Delta_x' - eps^-2 Kd d_t^2 - sum_i (d_i K_i d_t + d_t K_i d_i)
///   - d_t (sum_i K_i^2) d_t - K0
/// on the active nodes of omega x (0,1) with Dirichlet rows eliminated.
/// Mixed derivatives use node-centered central differences assembled in
/// transpose pairs, so the matrix is symmetric to the last bit.
inline MappedOperator assemble_mapped_operator(const WidthModel& model, double eps,
                                               const GridSpec& grid) {
    require(eps > 0.0, errc::invalid_input, "eps must be positive");
    require(grid.resolution >= 8, errc::invalid_input, "resolution too small");
    const int nx = model.base_dim();
    require(nx >= 1 && nx <= 2, errc::invalid_input,
            "direct solves support d in {2, 3} (memory)");

    const int N = grid.resolution;
    const int M = N - 1;  // interior nodes per axis

    MappedOperatorCoefficients co;
    co.eps = eps;
    co.resolution = N;
    co.box_lo = model.box_lo();
    co.box_hi = model.box_hi();
    co.h_floor_scale = grid.floor_scale;
    co.t_spacing = 1.0 / N;
    co.spacing.resize(nx);
    for (int i = 0; i < nx; ++i) co.spacing[i] = (co.box_hi[i] - co.box_lo[i]) / N;
    const double max_spacing = *std::max_element(co.spacing.begin(), co.spacing.end());

    const long nodes = nx == 1 ? M : static_cast<long>(M) * M;
    co.H.assign(nodes, 0.0);
    co.K0.assign(nodes, 0.0);
    co.grad_H.assign(nodes, Eigen::VectorXd::Zero(nx));
    co.grad_hm.assign(nodes, Eigen::VectorXd::Zero(nx));
    co.active.assign(nodes, 0);
    co.base_index.assign(nodes, -1);

    auto coord = [&](long node, int axis) {
        const int k = nx == 1 ? static_cast<int>(node) : (axis == 0 ? node / M : node % M);
        return co.box_lo[axis] + co.spacing[axis] * (k + 1);
    };

    // FD steps for the coefficient fields: first derivatives tighter than
    // second (roundoff in H'' scales like eps_mach / step^2)
    const double d1 = 1e-6 * std::max(1.0, max_spacing * N);
    const double d2 = 1e-5 * std::max(1.0, max_spacing * N);

    double max_hp = 0.0, max_hm = 0.0;
    Eigen::VectorXd x(nx);
    for (long node = 0; node < nodes; ++node) {
        for (int i = 0; i < nx; ++i) x[i] = coord(node, i);
        WidthSample s = model.eval(x);
        if (!s.inside || s.H <= 0.0) continue;
        Eigen::VectorXd gH(nx), ghm(nx);
        double lap = 0.0;
        bool stencil_ok = true;
        for (int i = 0; i < nx; ++i) {
            Eigen::VectorXd xp = x, xm = x, xp2 = x, xm2 = x;
            xp[i] += d1;
            xm[i] -= d1;
            xp2[i] += d2;
            xm2[i] -= d2;
            WidthSample sp = model.inside(xp) ? model.eval(xp) : WidthSample{};
            WidthSample sm = model.inside(xm) ? model.eval(xm) : WidthSample{};
            WidthSample sp2 = model.inside(xp2) ? model.eval(xp2) : WidthSample{};
            WidthSample sm2 = model.inside(xm2) ? model.eval(xm2) : WidthSample{};
            if (!sp.inside || !sm.inside || !sp2.inside || !sm2.inside) {
                stencil_ok = false;
                break;
            }
            gH[i] = (sp.H - sm.H) / (2.0 * d1);
            ghm[i] = (sp.h_minus - sm.h_minus) / (2.0 * d1);
            lap += (sp2.H - 2.0 * s.H + sm2.H) / (d2 * d2);
        }
        if (!stencil_ok) continue;  // hugging the boundary of omega: masked anyway
        co.H[node] = s.H;
        co.grad_H[node] = gH;
        co.grad_hm[node] = ghm;
        co.K0[node] = 0.75 * gH.squaredNorm() / (s.H * s.H) - 0.5 * lap / s.H;
        if (s.H >= grid.floor_scale * max_spacing * gH.norm()) co.active[node] = 1;
        max_hp = std::max(max_hp, s.h_plus);
        max_hm = std::max(max_hm, s.h_minus);
    }

    long base = 0;
    double max_width = 0.0;
    for (long node = 0; node < nodes; ++node) {
        if (!co.active[node]) continue;
        require(std::isfinite(co.K0[node]) && std::isfinite(co.H[node]) && co.H[node] > 0.0,
                errc::floor_violation, "coefficient blow-up inside the active set");
        co.base_index[node] = base;
        base += M;  // one t-column of interior nodes per active x'-node
        ++co.active_nodes;
        max_width = std::max(max_width, co.H[node]);
    }
    require(co.active_nodes > 0, errc::degenerate_domain, "active region is empty");
    co.unknowns = base;

    const double ht = co.t_spacing;
    auto neighbor = [&](long node, int axis, int dir) -> long {
        if (nx == 1) {
            const long k = node + dir;
            return (k < 0 || k >= M) ? -1 : k;
        }
        long i = node / M, j = node % M;
        if (axis == 0)
            i += dir;
        else
            j += dir;
        if (i < 0 || i >= M || j < 0 || j >= M) return -1;
        return i * M + j;
    };

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(co.unknowns * (5 + 4 * nx));
    for (long node = 0; node < nodes; ++node) {
        const long a0 = co.base_index[node];
        if (a0 < 0) continue;
        const double Kd = co.Kd(node);
        const double K0v = co.K0[node];

        // x'-Laplacian: both edges contribute 1/h^2 to the diagonal; the
        // off-diagonal entry survives only toward active neighbors.
        for (int ax = 0; ax < nx; ++ax) {
            const double ih2 = 1.0 / (co.spacing[ax] * co.spacing[ax]);
            for (int dir : {+1, -1}) {
                const long nb = neighbor(node, ax, dir);
                const long b0 = nb >= 0 ? co.base_index[nb] : -1;
                for (int k = 0; k < M; ++k) {
                    trip.emplace_back(a0 + k, a0 + k, ih2);
                    if (b0 >= 0) trip.emplace_back(a0 + k, b0 + k, -ih2);
                }
            }
        }

        // t-direction: flux edges carry eps^-2 Kd + S(t_mid), S = sum K_i^2
        auto S_mid = [&](double tm) {
            double s = 0.0;
            for (int i = 0; i < nx; ++i) {
                const double Ki = co.Ki(node, i, tm);
                s += Ki * Ki;
            }
            return s;
        };
        for (int k = 0; k < M; ++k) {
            const double t = ht * (k + 1);
            const double wlo = (Kd / (eps * eps) + S_mid(t - 0.5 * ht)) / (ht * ht);
            const double whi = (Kd / (eps * eps) + S_mid(t + 0.5 * ht)) / (ht * ht);
            trip.emplace_back(a0 + k, a0 + k, wlo + whi - K0v);
            if (k > 0) trip.emplace_back(a0 + k, a0 + k - 1, -wlo);
            if (k + 1 < M) trip.emplace_back(a0 + k, a0 + k + 1, -whi);
        }

        // Mixed terms Cx^T K Ct + Ct^T K Cx: node `node` is the quadrature
        // point carrying K; each (row, col) entry is pushed together with its
        // transpose, which keeps the assembled matrix exactly symmetric.
        for (int ax = 0; ax < nx; ++ax) {
            const double cx = 1.0 / (2.0 * co.spacing[ax]);
            const double ct = 1.0 / (2.0 * ht);
            for (int k = 0; k < M; ++k) {
                const double Kb = co.Ki(node, ax, ht * (k + 1));
                if (Kb == 0.0) continue;
                for (int sx : {+1, -1}) {
                    const long nb = neighbor(node, ax, sx);
                    const long b0 = nb >= 0 ? co.base_index[nb] : -1;
                    if (b0 < 0) continue;
                    for (int st : {+1, -1}) {
                        const int kt = k + st;
                        if (kt < 0 || kt >= M) continue;
                        const double v = (sx * cx) * Kb * (st * ct);
                        trip.emplace_back(b0 + k, a0 + kt, v);
                        trip.emplace_back(a0 + kt, b0 + k, v);
                    }
                }
            }
        }
    }

    MappedOperator op;
    op.matrix.resize(co.unknowns, co.unknowns);
    op.matrix.setFromTriplets(trip.begin(), trip.end());
    op.matrix.makeCompressed();
    op.max_width = max_width;
    op.max_thickness = max_hp + max_hm;
    op.coeffs = std::move(co);
    return op;
}

}  // namespace thinspec
