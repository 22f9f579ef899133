#pragma once

// Special functions, Gaussian tail moments and adaptive quadrature.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace ajscc {

inline double erf_eval(double x) { return std::erf(x); }

/// Standard normal density.
inline double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

/// Standard normal CDF, accurate in the far lower tail.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct QuadratureResult {
    double value;
    double error;
};

namespace detail {

struct Panel {
    double a;
    double b;
    double value;
    double error;
    double l1;
    bool refinable;

    friend bool operator<(const Panel& x, const Panel& y) { return x.error < y.error; }
};

// One 15-point Gauss-Kronrod panel. The rule reports its error on the
// reference interval [-1, 1]; it is rescaled by the half-width here.
template <class F>
Panel gk15(F& f, double a, double b) {
    double error = 0.0;
    double l1 = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &error, &l1);
    const double mid = 0.5 * (a + b);
    return {a, b, value, error * 0.5 * (b - a), l1, mid > a && mid < b};
}

}  // namespace detail

/// Globally adaptive 15-point Gauss-Kronrod integration on [lo, hi].
///
/// Bisects the panel with the largest error estimate until the summed
/// estimate is at most max(tol, 1e-12 * L1), where L1 approximates the
/// integral of |f|; the relative floor covers integrals too large for `tol`
/// to be reachable in double precision. Throws QuadratureError when 10^6
/// panels do not suffice.
template <class F>
QuadratureResult quadrature_checked(F&& f, double lo, double hi, double tol = 1e-10) {
    if (!(tol >= 1e-12)) throw std::invalid_argument("quadrature tolerance must be >= 1e-12");
    if (lo == hi) return {0.0, 0.0};
    if (!(lo < hi)) throw std::invalid_argument("quadrature bounds out of order");
    constexpr std::size_t kMaxPanels = 1000000;

    std::vector<detail::Panel> heap{detail::gk15(f, lo, hi)};
    double error = heap.front().error;
    double l1 = heap.front().l1;
    const auto resum = [&] {
        error = 0.0;
        l1 = 0.0;
        for (const auto& p : heap) {
            error += p.error;
            l1 += p.l1;
        }
    };
    for (;;) {
        if (!std::isfinite(error)) throw QuadratureError("quadrature produced a non-finite value");
        if (error <= std::max(tol, 1e-12 * l1)) {
            // Confirm against an exact re-sum; incremental updates can drift.
            resum();
            if (error <= std::max(tol, 1e-12 * l1)) break;
        }
        if (heap.size() >= kMaxPanels || !heap.front().refinable)
            throw QuadratureError("quadrature did not converge on [" + std::to_string(lo) + ", " +
                                  std::to_string(hi) + "], error estimate " + std::to_string(error));
        std::pop_heap(heap.begin(), heap.end());
        const detail::Panel worst = heap.back();
        heap.pop_back();
        error -= worst.error;
        l1 -= worst.l1;
        const double mid = 0.5 * (worst.a + worst.b);
        for (const auto& p : {detail::gk15(f, worst.a, mid), detail::gk15(f, mid, worst.b)}) {
            heap.push_back(p);
            std::push_heap(heap.begin(), heap.end());
            error += p.error;
            l1 += p.l1;
        }
    }
    double value = 0.0;
    std::sort(heap.begin(), heap.end(), [](const detail::Panel& x, const detail::Panel& y) { return x.a < y.a; });
    for (const auto& p : heap) value += p.value;
    return {value, error};
}

template <class F>
double quadrature(F&& f, double lo, double hi, double tol = 1e-10) {
    return quadrature_checked(std::forward<F>(f), lo, hi, tol).value;
}

/// Partial moments of n ~ N(0, sigma^2) over a half line:
/// p = P(n in H), m1 = E[n; H], m2 = E[n^2; H].
struct TailMoments {
    double p;
    double m1;
    double m2;
};

/// H = (-inf, upper].
inline TailMoments lower_tail(double upper, double sigma) {
    const double a = upper / sigma;
    const double p = normal_cdf(a);
    const double phi = normal_pdf(a);
    return {p, -sigma * phi, sigma * sigma * (p - a * phi)};
}

/// H = [lower, +inf).
inline TailMoments upper_tail(double lower, double sigma) {
    const double b = lower / sigma;
    const double p = normal_cdf(-b);
    const double phi = normal_pdf(b);
    return {p, sigma * phi, sigma * sigma * (p + b * phi)};
}

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double v) noexcept {
        const double t = sum_ + v;
        if (std::fabs(sum_) >= std::fabs(v)) comp_ += (sum_ - t) + v;
        else comp_ += (v - t) + sum_;
        sum_ = t;
    }
    void add(const CompensatedSum& other) noexcept {
        add(other.sum_);
        add(other.comp_);
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace ajscc
