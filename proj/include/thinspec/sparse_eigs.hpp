#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cholmod.h>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <sstream>
#include <vector>

#include "thinspec/errors.hpp"

namespace thinspec {

using SparseSym = Eigen::SparseMatrix<double>;

/// Pin a widely validated OpenBLAS kernel and single-threaded BLAS when the
/// user has not chosen otherwise. Kernel autodetection miscomputes on some
/// very new CPUs under virtualization, which silently corrupts supernodal
/// factorizations; call this from executables before any factorization.
inline void pin_blas_runtime() {
#if defined(__linux__)
    setenv("OPENBLAS_CORETYPE", "HASWELL", /*overwrite=*/0);
    setenv("OPENBLAS_NUM_THREADS", "1", /*overwrite=*/0);
#endif
}

/// RAII sparse Cholesky (CHOLMOD supernodal LLT with nested-dissection
/// ordering). Requires a symmetric positive definite matrix; only the lower
/// triangle of the input is read.
class SparseCholesky {
public:
    explicit SparseCholesky(const SparseSym& B) {
        cholmod_start(&common_);
        common_.nmethods = 1;
        common_.method[0].ordering = CHOLMOD_NESDIS;
        common_.supernodal = CHOLMOD_SUPERNODAL;
        common_.print = 0;

        lower_ = B.triangularView<Eigen::Lower>();
        lower_.makeCompressed();
        n_ = lower_.rows();

        cholmod_sparse S;
        S.nrow = static_cast<size_t>(n_);
        S.ncol = static_cast<size_t>(n_);
        S.nzmax = static_cast<size_t>(lower_.nonZeros());
        S.p = lower_.outerIndexPtr();
        S.i = lower_.innerIndexPtr();
        S.x = lower_.valuePtr();
        S.nz = nullptr;
        S.z = nullptr;
        S.stype = -1;
        S.itype = CHOLMOD_INT;
        S.xtype = CHOLMOD_REAL;
        S.dtype = CHOLMOD_DOUBLE;
        S.sorted = 1;
        S.packed = 1;

        factor_ = cholmod_analyze(&S, &common_);
        if (factor_ && common_.status == CHOLMOD_OK) cholmod_factorize(&S, factor_, &common_);
        positive_definite_ = factor_ && common_.status == CHOLMOD_OK;
        lower_.resize(0, 0);  // CHOLMOD owns the factor; the copy is no longer needed
    }

    SparseCholesky(const SparseCholesky&) = delete;
    SparseCholesky& operator=(const SparseCholesky&) = delete;

    ~SparseCholesky() {
        if (factor_) cholmod_free_factor(&factor_, &common_);
        cholmod_finish(&common_);
    }

    bool positive_definite() const { return positive_definite_; }
    Eigen::Index rows() const { return n_; }

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
        require(positive_definite_, errc::convergence_failure,
                "factorization unavailable (matrix not positive definite)");
        cholmod_dense b;
        b.nrow = static_cast<size_t>(n_);
        b.ncol = 1;
        b.d = static_cast<size_t>(n_);
        b.nzmax = static_cast<size_t>(n_);
        b.x = const_cast<double*>(rhs.data());
        b.z = nullptr;
        b.xtype = CHOLMOD_REAL;
        b.dtype = CHOLMOD_DOUBLE;
        cholmod_dense* sol =
            cholmod_solve(CHOLMOD_A, factor_, &b, const_cast<cholmod_common*>(&common_));
        require(sol != nullptr, errc::convergence_failure, "sparse triangular solve failed");
        Eigen::VectorXd out = Eigen::Map<Eigen::VectorXd>(static_cast<double*>(sol->x), n_);
        cholmod_free_dense(&sol, const_cast<cholmod_common*>(&common_));
        return out;
    }

private:
    cholmod_common common_{};
    cholmod_factor* factor_ = nullptr;
    SparseSym lower_;
    Eigen::Index n_ = 0;
    bool positive_definite_ = false;
};

struct EigsOptions {
    int count = 1;
    double shift = 0.0;       // must sit below the smallest eigenvalue
    double tol = 1e-8;        // accept when ||Av - lambda v|| <= tol * max(1, |lambda|)
    int max_basis = 140;      // Lanczos basis cap per deflation round
    int max_rounds = 4;       // deflated restarts (needed for multiple eigenvalues)
    std::uint64_t seed = 0x517e0cull;
};

struct EigsResult {
    Eigen::VectorXd values;     // ascending
    Eigen::MatrixXd vectors;    // columns match values
    Eigen::VectorXd residuals;  // ||A v - lambda v||_2 with ||v|| = 1
    int iterations = 0;         // total shifted solves
    double shift_used = 0.0;
};

/// Shift-invert Lanczos with full reorthogonalization and deflated restarts.
/// The shifted matrix is factored once per shift; multiple eigenvalues are
/// recovered by restarting against the converged invariant subspace.
inline EigsResult smallest_eigenvalues(const SparseSym& A, const EigsOptions& opts) {
    const Eigen::Index n = A.rows();
    require(A.cols() == n, errc::invalid_input, "operator must be square");
    require(opts.count >= 1, errc::invalid_input, "count must be >= 1");
    require(opts.count < n, errc::invalid_input,
            "count exceeds the number of active unknowns");

    double sigma = opts.shift;
    std::unique_ptr<SparseCholesky> chol;
    for (int attempt = 0; attempt < 4; ++attempt) {
        SparseSym B = A;
        for (Eigen::Index i = 0; i < n; ++i) B.coeffRef(i, i) -= sigma;
        B.makeCompressed();
        chol = std::make_unique<SparseCholesky>(B);
        if (chol->positive_definite()) break;
        // shift not below the spectrum: back it off and retry
        sigma = sigma - std::max(1.0, 0.5 * std::abs(sigma));
        chol.reset();
    }
    require(chol != nullptr, errc::convergence_failure,
            "could not find a shift below the spectrum bottom");

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss;

    std::vector<std::pair<double, Eigen::VectorXd>> converged;
    int total_solves = 0;

    auto deflate = [&](Eigen::VectorXd& w) {
        for (const auto& [lam, v] : converged) w -= v.dot(w) * v;
    };

    for (int round = 0; round < opts.max_rounds && static_cast<int>(converged.size()) < opts.count;
         ++round) {
        Eigen::VectorXd v0(n);
        for (Eigen::Index i = 0; i < n; ++i) v0[i] = gauss(rng);
        deflate(v0);
        double v0n = v0.norm();
        if (v0n == 0.0) continue;
        v0 /= v0n;

        const int m_cap = std::min<Eigen::Index>(opts.max_basis, n - 1);
        Eigen::MatrixXd V(n, m_cap + 1);
        Eigen::VectorXd alpha(m_cap), beta(m_cap);
        V.col(0) = v0;
        int m = 0;
        bool round_done = false;
        const int check_every = 10;

        while (m < m_cap && !round_done) {
            Eigen::VectorXd w = chol->solve(V.col(m));
            ++total_solves;
            deflate(w);
            alpha[m] = V.col(m).dot(w);
            w -= alpha[m] * V.col(m);
            if (m > 0) w -= beta[m - 1] * V.col(m - 1);
            // full reorthogonalization keeps the basis clean at double precision
            w -= V.leftCols(m + 1) * (V.leftCols(m + 1).transpose() * w);
            beta[m] = w.norm();
            ++m;
            if (beta[m - 1] <= 1e-14) {
                round_done = true;  // invariant subspace exhausted
            } else {
                V.col(m) = w / beta[m - 1];
            }

            if (m % check_every != 0 && m < m_cap && !round_done) continue;

            // Ritz extraction from the tridiagonal section
            Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
            for (int i = 0; i < m; ++i) {
                T(i, i) = alpha[i];
                if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
            const int missing = opts.count - static_cast<int>(converged.size());
            int found = 0;
            std::vector<std::pair<double, Eigen::VectorXd>> fresh;
            for (int e = m - 1; e >= 0 && found < missing; --e) {  // largest nu first
                const double nu = es.eigenvalues()[e];
                if (nu <= 0.0) break;
                const double lam = sigma + 1.0 / nu;
                Eigen::VectorXd y = V.leftCols(m) * es.eigenvectors().col(e);
                deflate(y);
                const double yn = y.norm();
                if (yn < 1e-8) continue;
                y /= yn;
                const double res = (A * y - lam * y).norm();
                if (res <= opts.tol * std::max(1.0, std::abs(lam))) {
                    fresh.emplace_back(lam, std::move(y));
                    ++found;
                } else {
                    break;  // Ritz values below this one are even less converged
                }
            }
            if (found == missing || m >= m_cap || round_done) {
                for (auto& p : fresh) {
                    // orthonormalize against previously converged vectors
                    deflate(p.second);
                    const double pn = p.second.norm();
                    if (pn < 1e-8) continue;
                    p.second /= pn;
                    converged.emplace_back(p.first, std::move(p.second));
                }
                round_done = found == missing || m >= m_cap;
            }
        }
    }

    if (static_cast<int>(converged.size()) < opts.count) {
        std::ostringstream os;
        os << "eigensolver stalled: " << converged.size() << "/" << opts.count
           << " eigenpairs after " << total_solves << " shifted solves (shift " << sigma << ")";
        raise(errc::convergence_failure, os.str());
    }

    std::sort(converged.begin(), converged.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    converged.resize(opts.count);

    EigsResult out;
    out.values.resize(opts.count);
    out.vectors.resize(n, opts.count);
    out.residuals.resize(opts.count);
    for (int i = 0; i < opts.count; ++i) {
        out.values[i] = converged[i].first;
        out.vectors.col(i) = converged[i].second;
        out.residuals[i] = (A * converged[i].second - converged[i].first * converged[i].second).norm();
    }
    out.iterations = total_solves;
    out.shift_used = sigma;
    return out;
}

}  // namespace thinspec
