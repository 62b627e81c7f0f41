#pragma once

#include "netsemi/errors.hpp"
#include "netsemi/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace netsemi {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

inline GaussLegendre build_gauss_legendre(int n)
{
    GaussLegendre rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Chebyshev-like initial guess, then Newton on P_n.
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0;
            double p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            dp = n * (z * p1 - p2) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) {
                break;
            }
        }
        // Recompute the derivative at the converged root.
        double p1 = 1.0;
        double p2 = 0.0;
        for (int j = 1; j <= n; ++j) {
            const double p3 = p2;
            p2 = p1;
            p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
        }
        dp = n * (z * p1 - p2) / (z * z - 1.0);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(n - 1 - i);
        rule.nodes[lo] = -z;
        rule.nodes[hi] = z;
        rule.weights[lo] = w;
        rule.weights[hi] = w;
    }
    return rule;
}

} // namespace detail

/// Cached rule of the given order; safe to call concurrently.
inline const GaussLegendre& gauss_legendre(int order)
{
    if (order < 1) {
        throw QuadratureError("Gauss-Legendre order must be positive");
    }
    static std::mutex mutex;
    static std::map<int, GaussLegendre> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(order);
    if (it == cache.end()) {
        it = cache.emplace(order, detail::build_gauss_legendre(order)).first;
    }
    return it->second;
}

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const Complex& v) { return std::abs(v); }
template <class Derived>
double magnitude(const Eigen::MatrixBase<Derived>& v)
{
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

struct QuadratureOptions {
    int order = 16;
    double panel_width = 0.5;
    /// Accept a panel when halving changes it by at most tol * max(1, |value|).
    double tol = 1e-12;
    int max_depth = 50;
    std::size_t max_panels = 1u << 22;
};

namespace detail {

template <class F>
auto gauss_panel(F& f, double a, double b, const GaussLegendre& rule)
{
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    using T = std::decay_t<decltype(f(a))>;
    T acc = f(mid + half * rule.nodes[0]) * (rule.weights[0] * half);
    for (std::size_t i = 1; i < rule.nodes.size(); ++i) {
        acc += f(mid + half * rule.nodes[i]) * (rule.weights[i] * half);
    }
    return acc;
}

template <class F, class T>
T refine(F& f, double a, double b, const T& whole, const GaussLegendre& rule,
         const QuadratureOptions& opts, int depth, std::size_t& panels)
{
    const double mid = 0.5 * (a + b);
    T left = gauss_panel(f, a, mid, rule);
    T right = gauss_panel(f, mid, b, rule);
    T fine = left + right;
    panels += 2;
    const T diff = fine - whole;
    if (magnitude(diff) <= opts.tol * std::max(1.0, magnitude(fine)) || mid <= a || mid >= b) {
        return fine;
    }
    if (depth >= opts.max_depth || panels > opts.max_panels) {
        throw QuadratureError("panel refinement exceeded near [" + std::to_string(a) + ", "
                              + std::to_string(b) + "]");
    }
    T l = refine(f, a, mid, left, rule, opts, depth + 1, panels);
    T r = refine(f, mid, b, right, rule, opts, depth + 1, panels);
    T sum = l + r;
    return sum;
}

} // namespace detail

/// Composite adaptive Gauss-Legendre quadrature of f over [a, b].
///
/// The interval is cut at every breakpoint inside (a, b) and then into panels
/// no wider than opts.panel_width; each panel is bisected until it agrees with
/// its two halves. f may return double, Complex or an Eigen vector.
template <class F>
auto integrate(F&& f, double a, double b, std::span<const double> breakpoints = {},
               const QuadratureOptions& opts = {})
{
    using T = std::decay_t<decltype(f(a))>;
    const GaussLegendre& rule = gauss_legendre(opts.order);

    std::vector<double> cuts{a};
    for (double p : breakpoints) {
        if (p > a && p < b) {
            cuts.push_back(p);
        }
    }
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::optional<T> total;
    std::size_t panels = 0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double lo = cuts[s];
        const double hi = cuts[s + 1];
        const auto count = static_cast<std::size_t>(std::max(1.0, std::ceil((hi - lo) / opts.panel_width)));
        for (std::size_t k = 0; k < count; ++k) {
            const double pa = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count);
            const double pb = (k + 1 == count) ? hi : lo + (hi - lo) * static_cast<double>(k + 1) / static_cast<double>(count);
            T whole = detail::gauss_panel(f, pa, pb, rule);
            T value = detail::refine(f, pa, pb, whole, rule, opts, 0, panels);
            if (total) {
                *total += value;
            } else {
                total = std::move(value);
            }
        }
    }
    if (!total) {
        // Degenerate interval: a zero of the right shape.
        T z = f(a) * 0.0;
        return z;
    }
    return *total;
}

// ---------------------------------------------------------------------------
// Closed form for exponential-polynomial integrands

/// coef * x^power * exp(rate * x)
struct ExpPolyTerm {
    double coef = 0.0;
    int power = 0;
    double rate = 0.0;
};

namespace detail {

/// exp(shift + alpha*s) * sum_k (-1)^k p!/(p-k)! s^(p-k) / alpha^(k+1): antiderivative of s^p e^{alpha s}, scaled by e^shift.
inline Complex exp_poly_antiderivative(int power, Complex alpha, Complex shift, double s)
{
    Complex poly = 0.0;
    Complex falling = 1.0; // p!/(p-k)!
    Complex alpha_pow = alpha;
    double sign = 1.0;
    for (int k = 0; k <= power; ++k) {
        poly += sign * falling * std::pow(s, power - k) / alpha_pow;
        falling *= static_cast<double>(power - k);
        alpha_pow *= alpha;
        sign = -sign;
    }
    return std::exp(shift + alpha * s) * poly;
}

} // namespace detail

/// Integral of exp(shift + kappa*s) * sum(terms)(s) over [a, b]; b may be +infinity.
///
/// Finite intervals where |alpha|*(b-a) is small fall back to Gauss-Legendre,
/// since the antiderivative cancels badly there.
inline Complex integrate_exp_poly(std::span<const ExpPolyTerm> terms, Complex shift, Complex kappa,
                                  double a, double b, const QuadratureOptions& opts = {})
{
    Complex total = 0.0;
    const bool infinite = std::isinf(b);
    for (const auto& t : terms) {
        if (t.coef == 0.0) {
            continue;
        }
        const Complex alpha = kappa + t.rate;
        if (infinite) {
            if (alpha.real() >= 0.0) {
                throw DivergenceError("integrand does not decay at infinity (exponent rate "
                                      + std::to_string(alpha.real()) + " >= 0)");
            }
            total -= t.coef * detail::exp_poly_antiderivative(t.power, alpha, shift, a);
        } else if (std::abs(alpha) * (b - a) >= 2.0) {
            total += t.coef * (detail::exp_poly_antiderivative(t.power, alpha, shift, b)
                               - detail::exp_poly_antiderivative(t.power, alpha, shift, a));
        } else {
            auto f = [&](double s) { return std::exp(shift + alpha * s) * std::pow(s, t.power); };
            total += t.coef * integrate(f, a, b, {}, opts);
        }
    }
    return total;
}

} // namespace netsemi
