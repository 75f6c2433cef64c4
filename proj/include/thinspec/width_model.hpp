#pragma once

#include <Eigen/Core>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "thinspec/errors.hpp"

namespace thinspec {

/// Result of evaluating the width functions at a point of the base domain.
/// `inside == false` is the sentinel for points outside omega.
struct WidthSample {
    double h_plus = 0.0;
    double h_minus = 0.0;
    double H = 0.0;
    bool inside = false;
};

/// Thin-domain geometry over a base domain omega in R^{d-1}: the domain is
/// bounded by the graphs -eps*h_minus and eps*h_plus. Evaluators are
/// deterministic pure functions; the model is immutable after construction.
class WidthModel {
public:
    using Indicator = std::function<bool(const Eigen::VectorXd&)>;
    using Evaluator = std::function<double(const Eigen::VectorXd&)>;

    WidthModel(int dimension, Eigen::VectorXd box_lo, Eigen::VectorXd box_hi,
               Indicator inside, Evaluator h_plus, Evaluator h_minus, std::string catalog_tag,
               Eigen::VectorXd params = {})
        : dimension_(dimension),
          box_lo_(std::move(box_lo)),
          box_hi_(std::move(box_hi)),
          inside_(std::move(inside)),
          h_plus_(std::move(h_plus)),
          h_minus_(std::move(h_minus)),
          catalog_tag_(std::move(catalog_tag)),
          params_(std::move(params)) {
        require(dimension_ >= 2, errc::invalid_input, "dimension must be >= 2");
        require(box_lo_.size() == dimension_ - 1 && box_hi_.size() == dimension_ - 1,
                errc::dimension_mismatch, "bounding box must live in R^{d-1}");
    }

    int dimension() const { return dimension_; }
    int base_dim() const { return dimension_ - 1; }
    const Eigen::VectorXd& box_lo() const { return box_lo_; }
    const Eigen::VectorXd& box_hi() const { return box_hi_; }
    const std::string& catalog_tag() const { return catalog_tag_; }
    const Eigen::VectorXd& params() const { return params_; }

    bool inside(const Eigen::VectorXd& x) const {
        if (static_cast<int>(x.size()) != base_dim()) return false;
        for (int i = 0; i < base_dim(); ++i)
            if (x[i] < box_lo_[i] || x[i] > box_hi_[i]) return false;
        return inside_(x);
    }

    WidthSample eval(const Eigen::VectorXd& x) const {
        require(static_cast<int>(x.size()) == base_dim(), errc::dimension_mismatch,
                "evaluation point must live in R^{d-1}");
        for (int i = 0; i < base_dim(); ++i)
            require(std::isfinite(x[i]), errc::invalid_input,
                    "evaluation at non-finite coordinates");
        if (!inside(x)) return {};
        WidthSample s;
        s.h_plus = h_plus_(x);
        s.h_minus = h_minus_(x);
        s.H = s.h_plus + s.h_minus;
        s.inside = true;
        require(s.H >= -1e-12, errc::invalid_input, "width H must be nonnegative on omega");
        return s;
    }

    /// Total width H = h_plus + h_minus; 0 outside omega.
    double width(const Eigen::VectorXd& x) const {
        WidthSample s = eval(x);
        return s.inside ? s.H : 0.0;
    }

private:
    int dimension_;
    Eigen::VectorXd box_lo_, box_hi_;
    Indicator inside_;
    Evaluator h_plus_, h_minus_;
    std::string catalog_tag_;
    Eigen::VectorXd params_;
};

/// [OP] eval_width, as a free function over the model.
inline WidthSample eval_width(const WidthModel& model, const Eigen::VectorXd& x) {
    return model.eval(x);
}

/// Ellipsoid with semi-axes a_1..a_d, squashed along the last axis:
/// omega = { sum (x_i/a_i)^2 <= 1 }, h_plus = h_minus = a_d sqrt(1 - sum (x_i/a_i)^2).
inline WidthModel make_ellipsoid(const Eigen::VectorXd& a) {
    const int d = static_cast<int>(a.size());
    require(d >= 2, errc::invalid_input, "ellipsoid needs at least 2 semi-axes");
    for (int i = 0; i < d; ++i)
        require(a[i] > 0.0 && std::isfinite(a[i]), errc::invalid_input,
                "semi-axes must be positive");
    Eigen::VectorXd lo = -a.head(d - 1), hi = a.head(d - 1);
    auto s2 = [a, d](const Eigen::VectorXd& x) {
        double s = 0.0;
        for (int i = 0; i < d - 1; ++i) s += (x[i] / a[i]) * (x[i] / a[i]);
        return s;
    };
    auto inside = [s2](const Eigen::VectorXd& x) { return s2(x) <= 1.0; };
    auto h = [s2, ad = a[d - 1]](const Eigen::VectorXd& x) {
        return ad * std::sqrt(std::max(0.0, 1.0 - s2(x)));
    };
    return WidthModel(d, lo, hi, inside, h, h, "ellipsoid", a);
}

/// One lobe of the lemniscate (x1^2 + x2^2)^2 = x1^2 - x2^2, scaled in x2:
/// omega = (0,1), h_plus = h_minus = y(x), where u = y^2 solves the quadratic
/// u^2 + (2x^2+1)u + (x^4 - x^2) = 0. The resolved upper branch, rationalized
/// to avoid cancellation near the pinch at x = 0:
///   u(x) = 2 x^2 (1 - x^2) / (sqrt(8 x^2 + 1) + 2 x^2 + 1).
inline WidthModel make_lemniscate() {
    Eigen::VectorXd lo(1), hi(1);
    lo << 0.0;
    hi << 1.0;
    auto inside = [](const Eigen::VectorXd& x) { return x[0] > 0.0 && x[0] < 1.0; };
    auto h = [](const Eigen::VectorXd& xv) {
        const double x = xv[0], x2 = x * x;
        const double u = 2.0 * x2 * (1.0 - x2) / (std::sqrt(8.0 * x2 + 1.0) + 2.0 * x2 + 1.0);
        return std::sqrt(std::max(0.0, u));
    };
    return WidthModel(2, lo, hi, inside, h, h, "lemniscate");
}

/// Constant-width control: omega = (0,1)^{d-1}, h_plus = h_minus = 1/2, so
/// Omega_eps = (0,1)^{d-1} x (-eps/2, eps/2) with the exact separable spectrum.
inline WidthModel make_rectangle(int d = 2) {
    require(d >= 2, errc::invalid_input, "dimension must be >= 2");
    Eigen::VectorXd lo = Eigen::VectorXd::Zero(d - 1), hi = Eigen::VectorXd::Ones(d - 1);
    auto inside = [d](const Eigen::VectorXd& x) {
        for (int i = 0; i < d - 1; ++i)
            if (x[i] <= 0.0 || x[i] >= 1.0) return false;
        return true;
    };
    auto h = [](const Eigen::VectorXd&) { return 0.5; };
    return WidthModel(d, lo, hi, inside, h, h, "custom");
}

namespace detail {

/// Natural cubic spline through (x_i, y_i), strictly increasing x.
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        const int n = static_cast<int>(x_.size());
        require(n >= 3, errc::invalid_input, "spline needs at least 3 samples");
        for (int i = 1; i < n; ++i)
            require(x_[i] > x_[i - 1], errc::invalid_input, "spline abscissae must increase");
        // second derivatives m_i from the natural-spline tridiagonal system
        std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), r(n, 0.0);
        b[0] = b[n - 1] = 1.0;
        for (int i = 1; i + 1 < n; ++i) {
            const double hl = x_[i] - x_[i - 1], hr = x_[i + 1] - x_[i];
            a[i] = hl / 6.0;
            b[i] = (hl + hr) / 3.0;
            c[i] = hr / 6.0;
            r[i] = (y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl;
        }
        m_.assign(n, 0.0);
        // Thomas algorithm
        for (int i = 1; i < n; ++i) {
            const double w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            r[i] -= w * r[i - 1];
        }
        m_[n - 1] = r[n - 1] / b[n - 1];
        for (int i = n - 2; i >= 0; --i) m_[i] = (r[i] - c[i] * m_[i + 1]) / b[i];
    }

    double operator()(double x) const {
        const int n = static_cast<int>(x_.size());
        int lo = 0, hi = n - 1;
        while (hi - lo > 1) {
            const int mid = (lo + hi) / 2;
            (x_[mid] <= x ? lo : hi) = mid;
        }
        const double h = x_[hi] - x_[lo];
        const double A = (x_[hi] - x) / h, B = (x - x_[lo]) / h;
        return A * y_[lo] + B * y_[hi] +
               ((A * A * A - A) * m_[lo] + (B * B * B - B) * m_[hi]) * h * h / 6.0;
    }

private:
    std::vector<double> x_, y_;
    std::vector<double> m_;
};

}  // namespace detail

/// Sampled custom width (d = 2 only): CSV columns x, h_plus, h_minus, with
/// natural cubic spline evaluation. omega = (min x, max x).
inline WidthModel make_sampled_csv(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), errc::io_error, "cannot open width samples: " + path);
    std::vector<double> xs, hp, hm;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        for (char& ch : line)
            if (ch == ',' || ch == ';') ch = ' ';
        std::istringstream ls(line);
        double x, p, m;
        if (!(ls >> x >> p >> m)) {
            // header row is fine to skip once
            if (xs.empty()) continue;
            raise(errc::io_error, "malformed width sample line: " + line);
        }
        xs.push_back(x);
        hp.push_back(p);
        hm.push_back(m);
    }
    require(xs.size() >= 3, errc::invalid_input, "need at least 3 width samples");
    detail::CubicSpline sp(xs, hp), sm(xs, hm);
    Eigen::VectorXd lo(1), hi(1);
    lo << xs.front();
    hi << xs.back();
    auto inside = [a = xs.front(), b = xs.back()](const Eigen::VectorXd& x) {
        return x[0] > a && x[0] < b;
    };
    return WidthModel(
        2, lo, hi, inside, [sp](const Eigen::VectorXd& x) { return sp(x[0]); },
        [sm](const Eigen::VectorXd& x) { return sm(x[0]); }, "custom");
}

}  // namespace thinspec
