#pragma once

#include "netsemi/errors.hpp"
#include "netsemi/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace netsemi {

enum class Domain {
    Bounded,  ///< [0, 1]
    HalfLine, ///< [0, inf)
};

inline const char* to_string(Domain d) { return d == Domain::Bounded ? "[0,1]" : "[0,inf)"; }

/// Arguments within this distance of the domain are clamped onto it.
inline constexpr double kDomainTolerance = 1e-12;

class EdgeFunction;

namespace body {

struct Constant {
    double value = 0.0;
};
/// sum_k coefficients[k] * x^k
struct Polynomial {
    std::vector<double> coefficients;
};
/// a * exp(b x)
struct Exponential {
    double a = 1.0;
    double b = 0.0;
};
/// a * exp(-((x - mu) / sigma)^2)
struct Gaussian {
    double a = 1.0;
    double mu = 0.0;
    double sigma = 1.0;
};
/// 1 on the closed interval [a, b], 0 elsewhere
struct Indicator {
    double a = 0.0;
    double b = 1.0;
};
/// Piecewise-linear interpolant through (x[i], y[i])
struct Grid {
    std::vector<double> x;
    std::vector<double> y;
};
/// sum_i coefficients[i] * parts[i]
struct Sum {
    std::vector<double> coefficients;
    std::vector<EdgeFunction> parts;
};
/// Arbitrary pointwise rule, e.g. a solution operator applied to other data.
struct Callable {
    std::function<double(double)> fn;
    double bound = std::numeric_limits<double>::infinity();
    std::vector<double> breaks;
    bool approximate = false;
};

} // namespace body

/// Scalar function on a bounded edge [0,1] or a half-line edge [0,inf).
///
/// Immutable and cheap to copy. Closed-form bodies evaluate exactly at any
/// argument; grids interpolate linearly and are flagged approximate.
class EdgeFunction {
  public:
    using Body = std::variant<body::Constant, body::Polynomial, body::Exponential, body::Gaussian,
                              body::Indicator, body::Grid, body::Sum, body::Callable>;

    EdgeFunction() : EdgeFunction(Domain::Bounded, body::Constant{0.0}) {}

    EdgeFunction(Domain domain, Body b) : domain_(domain), body_(std::make_shared<const Body>(std::move(b)))
    {
        validate();
    }

    static EdgeFunction constant(Domain d, double c) { return {d, body::Constant{c}}; }
    static EdgeFunction zero(Domain d) { return constant(d, 0.0); }
    static EdgeFunction polynomial(Domain d, std::vector<double> coeffs) { return {d, body::Polynomial{std::move(coeffs)}}; }
    static EdgeFunction exponential(Domain d, double a, double b) { return {d, body::Exponential{a, b}}; }
    static EdgeFunction gaussian(Domain d, double a, double mu, double sigma) { return {d, body::Gaussian{a, mu, sigma}}; }
    static EdgeFunction indicator(Domain d, double a, double b) { return {d, body::Indicator{a, b}}; }
    static EdgeFunction grid(Domain d, std::vector<double> x, std::vector<double> y)
    {
        return {d, body::Grid{std::move(x), std::move(y)}};
    }
    static EdgeFunction sum(Domain d, std::vector<double> coefficients, std::vector<EdgeFunction> parts)
    {
        return {d, body::Sum{std::move(coefficients), std::move(parts)}};
    }
    static EdgeFunction callable(Domain d, std::function<double(double)> fn, double bound,
                                 std::vector<double> breaks = {}, bool approximate = false)
    {
        return {d, body::Callable{std::move(fn), bound, std::move(breaks), approximate}};
    }

    Domain domain() const { return domain_; }
    const Body& body() const { return *body_; }

    /// Value at x. Arguments within kDomainTolerance of the domain are clamped;
    /// anything further out throws DomainError.
    double operator()(double x) const { return eval_clamped(clamp(x)); }

    /// Closed forms are exact; grids and approximate callables are not.
    bool approximate() const
    {
        return std::visit(
            [](const auto& b) -> bool {
                using B = std::decay_t<decltype(b)>;
                if constexpr (std::is_same_v<B, body::Grid>) {
                    return true;
                } else if constexpr (std::is_same_v<B, body::Callable>) {
                    return b.approximate;
                } else if constexpr (std::is_same_v<B, body::Sum>) {
                    return std::any_of(b.parts.begin(), b.parts.end(), [](const auto& p) { return p.approximate(); });
                } else {
                    return false;
                }
            },
            *body_);
    }

    /// True when the function is a finite sum of c * x^k * exp(b x).
    bool exp_poly() const
    {
        return std::visit(
            [](const auto& b) -> bool {
                using B = std::decay_t<decltype(b)>;
                if constexpr (std::is_same_v<B, body::Constant> || std::is_same_v<B, body::Polynomial>
                              || std::is_same_v<B, body::Exponential>) {
                    return true;
                } else if constexpr (std::is_same_v<B, body::Sum>) {
                    return std::all_of(b.parts.begin(), b.parts.end(), [](const auto& p) { return p.exp_poly(); });
                } else {
                    return false;
                }
            },
            *body_);
    }

    /// Flattened exp-polynomial terms; only meaningful when exp_poly() holds.
    std::vector<ExpPolyTerm> exp_poly_terms() const
    {
        std::vector<ExpPolyTerm> out;
        collect_terms(1.0, out);
        return out;
    }

    /// Points where the function or its derivative may jump.
    std::vector<double> breakpoints() const
    {
        std::vector<double> out;
        std::visit(
            [&](const auto& b) {
                using B = std::decay_t<decltype(b)>;
                if constexpr (std::is_same_v<B, body::Indicator>) {
                    out = {b.a, b.b};
                } else if constexpr (std::is_same_v<B, body::Grid>) {
                    out = b.x;
                } else if constexpr (std::is_same_v<B, body::Callable>) {
                    out = b.breaks;
                } else if constexpr (std::is_same_v<B, body::Sum>) {
                    for (const auto& p : b.parts) {
                        auto more = p.breakpoints();
                        out.insert(out.end(), more.begin(), more.end());
                    }
                }
            },
            *body_);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    /// Upper bound for |f| over the domain (infinity when none is known).
    double sup_bound() const
    {
        constexpr double inf = std::numeric_limits<double>::infinity();
        const bool bounded = domain_ == Domain::Bounded;
        return std::visit(
            [&](const auto& b) -> double {
                using B = std::decay_t<decltype(b)>;
                if constexpr (std::is_same_v<B, body::Constant>) {
                    return std::abs(b.value);
                } else if constexpr (std::is_same_v<B, body::Polynomial>) {
                    double s = 0.0;
                    for (std::size_t k = 0; k < b.coefficients.size(); ++k) {
                        if (!bounded && k > 0 && b.coefficients[k] != 0.0) {
                            return inf;
                        }
                        s += std::abs(b.coefficients[k]);
                    }
                    return s;
                } else if constexpr (std::is_same_v<B, body::Exponential>) {
                    if (b.a == 0.0) {
                        return 0.0;
                    }
                    if (b.b > 0.0) {
                        return bounded ? std::abs(b.a) * std::exp(b.b) : inf;
                    }
                    return std::abs(b.a);
                } else if constexpr (std::is_same_v<B, body::Gaussian>) {
                    return std::abs(b.a);
                } else if constexpr (std::is_same_v<B, body::Indicator>) {
                    return 1.0;
                } else if constexpr (std::is_same_v<B, body::Grid>) {
                    double s = 0.0;
                    for (double y : b.y) {
                        s = std::max(s, std::abs(y));
                    }
                    return s;
                } else if constexpr (std::is_same_v<B, body::Sum>) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < b.parts.size(); ++i) {
                        if (b.coefficients[i] != 0.0) {
                            s += std::abs(b.coefficients[i]) * b.parts[i].sup_bound();
                        }
                    }
                    return s;
                } else {
                    return b.bound;
                }
            },
            *body_);
    }

    /// Right end of the represented data; infinity unless the body is sampled.
    double coverage_end() const
    {
        return std::visit(
            [&](const auto& b) -> double {
                using B = std::decay_t<decltype(b)>;
                if constexpr (std::is_same_v<B, body::Grid>) {
                    return b.x.back();
                } else if constexpr (std::is_same_v<B, body::Sum>) {
                    double e = upper();
                    for (const auto& p : b.parts) {
                        e = std::min(e, p.coverage_end());
                    }
                    return e;
                } else {
                    return upper();
                }
            },
            *body_);
    }

    double lower() const { return 0.0; }
    double upper() const { return domain_ == Domain::Bounded ? 1.0 : std::numeric_limits<double>::infinity(); }

  private:
    double clamp(double x) const
    {
        if (!std::isfinite(x)) {
            throw DomainError("non-finite argument for edge function on " + std::string(to_string(domain_)));
        }
        const double lo = lower();
        const double hi = upper();
        if (x < lo - kDomainTolerance || x > hi + kDomainTolerance) {
            throw DomainError("argument " + std::to_string(x) + " outside " + to_string(domain_));
        }
        return std::clamp(x, lo, hi);
    }

    double eval_clamped(double x) const
    {
        return std::visit(
            [&](const auto& b) -> double {
                using B = std::decay_t<decltype(b)>;
                if constexpr (std::is_same_v<B, body::Constant>) {
                    return b.value;
                } else if constexpr (std::is_same_v<B, body::Polynomial>) {
                    double acc = 0.0;
                    for (auto it = b.coefficients.rbegin(); it != b.coefficients.rend(); ++it) {
                        acc = acc * x + *it;
                    }
                    return acc;
                } else if constexpr (std::is_same_v<B, body::Exponential>) {
                    return b.a * std::exp(b.b * x);
                } else if constexpr (std::is_same_v<B, body::Gaussian>) {
                    const double z = (x - b.mu) / b.sigma;
                    return b.a * std::exp(-z * z);
                } else if constexpr (std::is_same_v<B, body::Indicator>) {
                    return (x >= b.a && x <= b.b) ? 1.0 : 0.0;
                } else if constexpr (std::is_same_v<B, body::Grid>) {
                    return interpolate(b, x);
                } else if constexpr (std::is_same_v<B, body::Sum>) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < b.parts.size(); ++i) {
                        acc += b.coefficients[i] * b.parts[i](x);
                    }
                    return acc;
                } else {
                    return b.fn(x);
                }
            },
            *body_);
    }

    static double interpolate(const body::Grid& g, double x)
    {
        if (x < g.x.front() - kDomainTolerance || x > g.x.back() + kDomainTolerance) {
            throw DomainError("argument " + std::to_string(x) + " outside sampled range ["
                              + std::to_string(g.x.front()) + ", " + std::to_string(g.x.back()) + "]");
        }
        if (g.x.size() == 1 || x <= g.x.front()) {
            return g.y.front();
        }
        if (x >= g.x.back()) {
            return g.y.back();
        }
        const auto it = std::upper_bound(g.x.begin(), g.x.end(), x);
        const auto i = static_cast<std::size_t>(it - g.x.begin());
        const double x0 = g.x[i - 1];
        const double x1 = g.x[i];
        const double s = (x - x0) / (x1 - x0);
        return (1.0 - s) * g.y[i - 1] + s * g.y[i];
    }

    void collect_terms(double scale, std::vector<ExpPolyTerm>& out) const
    {
        std::visit(
            [&](const auto& b) {
                using B = std::decay_t<decltype(b)>;
                if constexpr (std::is_same_v<B, body::Constant>) {
                    out.push_back({scale * b.value, 0, 0.0});
                } else if constexpr (std::is_same_v<B, body::Polynomial>) {
                    for (std::size_t k = 0; k < b.coefficients.size(); ++k) {
                        out.push_back({scale * b.coefficients[k], static_cast<int>(k), 0.0});
                    }
                } else if constexpr (std::is_same_v<B, body::Exponential>) {
                    out.push_back({scale * b.a, 0, b.b});
                } else if constexpr (std::is_same_v<B, body::Sum>) {
                    for (std::size_t i = 0; i < b.parts.size(); ++i) {
                        b.parts[i].collect_terms(scale * b.coefficients[i], out);
                    }
                } else {
                    throw Error("edge function is not of exp-polynomial form");
                }
            },
            *body_);
    }

    void validate() const
    {
        const double hi = upper();
        std::visit(
            [&](const auto& b) {
                using B = std::decay_t<decltype(b)>;
                auto finite = [](double v) { return std::isfinite(v); };
                if constexpr (std::is_same_v<B, body::Constant>) {
                    if (!finite(b.value)) throw DomainError("constant is not finite");
                } else if constexpr (std::is_same_v<B, body::Polynomial>) {
                    if (!std::all_of(b.coefficients.begin(), b.coefficients.end(), finite)) {
                        throw DomainError("polynomial coefficients must be finite");
                    }
                } else if constexpr (std::is_same_v<B, body::Exponential>) {
                    if (!finite(b.a) || !finite(b.b)) throw DomainError("exponential parameters must be finite");
                } else if constexpr (std::is_same_v<B, body::Gaussian>) {
                    if (!finite(b.a) || !finite(b.mu) || !(b.sigma > 0.0) || !finite(b.sigma)) {
                        throw DomainError("gaussian needs finite a, mu and sigma > 0");
                    }
                } else if constexpr (std::is_same_v<B, body::Indicator>) {
                    if (!finite(b.a) || !finite(b.b) || !(b.a < b.b)) {
                        throw DomainError("indicator needs finite a < b");
                    }
                } else if constexpr (std::is_same_v<B, body::Grid>) {
                    if (b.x.empty() || b.x.size() != b.y.size()) {
                        throw DomainError("grid needs matching, nonempty abscissae and values");
                    }
                    for (std::size_t i = 0; i < b.x.size(); ++i) {
                        if (!finite(b.x[i]) || !finite(b.y[i])) throw DomainError("grid entries must be finite");
                        if (i > 0 && !(b.x[i] > b.x[i - 1])) throw DomainError("grid abscissae must be strictly increasing");
                    }
                    if (b.x.front() < -kDomainTolerance || b.x.back() > hi + kDomainTolerance) {
                        throw DomainError("grid abscissae outside " + std::string(to_string(domain_)));
                    }
                } else if constexpr (std::is_same_v<B, body::Sum>) {
                    if (b.coefficients.size() != b.parts.size()) {
                        throw DomainError("sum needs one coefficient per part");
                    }
                    for (std::size_t i = 0; i < b.parts.size(); ++i) {
                        if (!finite(b.coefficients[i])) throw DomainError("sum coefficients must be finite");
                        if (b.parts[i].domain() != domain_) throw DomainError("sum parts must share the domain");
                    }
                } else {
                    if (!b.fn) throw DomainError("callable body is empty");
                }
            },
            *body_);
    }

    Domain domain_;
    std::shared_ptr<const Body> body_;
};

/// Linear combination alpha*f + beta*g.
inline EdgeFunction combine(double alpha, const EdgeFunction& f, double beta, const EdgeFunction& g)
{
    return EdgeFunction::sum(f.domain(), {alpha, beta}, {f, g});
}

} // namespace netsemi
