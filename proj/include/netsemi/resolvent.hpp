#pragma once

#include "netsemi/edge_function.hpp"
#include "netsemi/errors.hpp"
#include "netsemi/matrix.hpp"
#include "netsemi/network.hpp"
#include "netsemi/quadrature.hpp"
#include "netsemi/semigroup.hpp"
#include "netsemi/state.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace netsemi {

/// E_l(x) = diag(e^x, ..., e^x), stored as its dimension and exponent only.
class ExpDiag {
  public:
    ExpDiag(std::size_t dim, Complex exponent) : dim_(dim), exponent_(exponent) {}

    std::size_t dim() const { return dim_; }
    Complex exponent() const { return exponent_; }
    Complex scalar() const { return std::exp(exponent_); }

    CMatrix dense() const
    {
        const auto n = static_cast<Eigen::Index>(dim_);
        return scalar() * CMatrix::Identity(n, n);
    }

    friend ExpDiag operator*(const ExpDiag& a, const ExpDiag& b)
    {
        if (a.dim_ != b.dim_) {
            throw SpecError("ExpDiag dimension mismatch");
        }
        return {a.dim_, a.exponent_ + b.exponent_};
    }

    /// E_l(x) C for C with l rows.
    template <class Derived>
    friend CMatrix operator*(const ExpDiag& e, const Eigen::MatrixBase<Derived>& c)
    {
        if (static_cast<std::size_t>(c.rows()) != e.dim_) {
            throw SpecError("ExpDiag dimension mismatch");
        }
        return e.scalar() * c.template cast<Complex>();
    }

    /// C E_l(x) for C with l columns.
    template <class Derived>
    friend CMatrix operator*(const Eigen::MatrixBase<Derived>& c, const ExpDiag& e)
    {
        if (static_cast<std::size_t>(c.cols()) != e.dim_) {
            throw SpecError("ExpDiag dimension mismatch");
        }
        return c.template cast<Complex>() * e.scalar();
    }

  private:
    std::size_t dim_;
    Complex exponent_;
};

struct ResolventParams {
    Complex lambda{1.0, 0.0};
    /// Target for the Neumann tail, quadrature panels and integral tail cuts.
    double tol = 1e-12;
    /// Number of Neumann terms beyond the first; chosen from the bound when empty.
    std::optional<std::size_t> neumann_depth;
    int quad_order = 16;
    double panel_width = 0.5;
    /// Fixed cut for half-line quadrature; derived from the decay bound when empty.
    std::optional<double> tail_cut;
    /// Give up on the Laplace integral when the tail bound is not met by this time.
    double laplace_horizon = 500.0;

    QuadratureOptions quadrature() const
    {
        QuadratureOptions q;
        q.order = quad_order;
        q.panel_width = panel_width;
        q.tol = tol;
        return q;
    }
};

/// ||B11||_inf * exp(-Re lambda); the Neumann series converges when this is below 1.
inline double neumann_ratio(const Matrix& b11, Complex lambda)
{
    return inf_norm(b11) * std::exp(-lambda.real());
}

/// Ratios above this are reported as close to the convergence threshold.
inline constexpr double kNearThresholdRatio = 0.9;

/// Smallest N with rho^(N+1) / (1 - rho) < tol, rho = ||B11||_inf e^{-Re lambda}.
inline std::size_t neumann_truncation(const Matrix& b11, Complex lambda, double tol)
{
    if (!(tol > 0.0)) {
        throw DomainError("Neumann tolerance must be positive");
    }
    const double norm = inf_norm(b11);
    const double rho = norm * std::exp(-lambda.real());
    if (!(rho < 1.0)) {
        throw DivergenceError("Neumann series diverges: ||B11||_inf e^{-Re lambda} = " + std::to_string(rho)
                              + " >= 1; need Re(lambda) > log||B11||_inf = " + std::to_string(std::log(norm)));
    }
    if (rho == 0.0) {
        return 0;
    }
    auto bound = [&](std::size_t n) { return std::pow(rho, static_cast<double>(n + 1)) / (1.0 - rho); };
    const double guess = std::log(tol * (1.0 - rho)) / std::log(rho) - 1.0;
    std::size_t n = guess > 0.0 ? static_cast<std::size_t>(std::ceil(guess)) : 0;
    while (n > 0 && bound(n - 1) < tol) --n;
    while (!(bound(n) < tol)) ++n;
    return n;
}

/// Integral of exp(shift + kappa*s) f(s) over [a, b]; b may be +infinity.
///
/// Exp-polynomial parts are integrated in closed form, everything else by
/// panelized Gauss-Legendre with the half-line cut where the decay bound
/// drops below the tolerance.
inline Complex weighted_integral(const EdgeFunction& f, Complex shift, Complex kappa, double a, double b,
                                 const ResolventParams& p)
{
    if (!(b > a)) {
        return 0.0;
    }
    const QuadratureOptions q = p.quadrature();
    if (const auto* s = std::get_if<body::Sum>(&f.body())) {
        Complex total = 0.0;
        for (std::size_t i = 0; i < s->parts.size(); ++i) {
            if (s->coefficients[i] != 0.0) {
                total += s->coefficients[i] * weighted_integral(s->parts[i], shift, kappa, a, b, p);
            }
        }
        return total;
    }
    if (f.exp_poly()) {
        const auto terms = f.exp_poly_terms();
        return integrate_exp_poly(terms, shift, kappa, a, b, q);
    }

    double end = b;
    if (std::isinf(b)) {
        if (const auto* ind = std::get_if<body::Indicator>(&f.body())) {
            end = ind->b;
        } else {
            if (!(kappa.real() < 0.0)) {
                throw DivergenceError("half-line integral needs a decaying weight (Re kappa < 0)");
            }
            const double bound = f.sup_bound();
            if (bound == 0.0) {
                return 0.0;
            }
            if (!std::isfinite(bound)) {
                throw QuadratureError("no sup bound for a half-line integrand; cannot place the tail cut");
            }
            if (p.tail_cut) {
                end = *p.tail_cut;
            } else {
                const double decay = -kappa.real();
                end = (shift.real() - std::log(p.tol * decay / bound)) / decay;
            }
        }
        if (!(end > a)) {
            return 0.0;
        }
        if (f.coverage_end() < end - kDomainTolerance) {
            throw DomainError("sampled data ends at " + std::to_string(f.coverage_end())
                              + " but the half-line integral needs values up to " + std::to_string(end));
        }
    }
    const auto breaks = f.breakpoints();
    return integrate([&](double s) { return std::exp(shift + kappa * s) * f(s); }, a, end, breaks, q);
}

/// Pointwise evaluator of R(lambda, A)(f, g, h).
///
/// Construction computes the boundary constants: the bounded-edge trace
/// integrals, the half-line Laplace integrals of h and the truncated Neumann
/// sum; each component value then costs a single integral.
class Resolvent {
  public:
    Resolvent(const BoundaryMatrix& b, StateVector rhs, ResolventParams params)
        : sig_(b.signature()), rhs_(std::move(rhs)), params_(params)
    {
        rhs_.check(sig_);
        const Complex lambda = params_.lambda;
        const BoundaryBlocks blocks = split_blocks(b);
        const std::size_t bound_depth = neumann_truncation(blocks.b11, lambda, params_.tol);
        depth_ = params_.neumann_depth.value_or(bound_depth);
        ratio_ = ::netsemi::neumann_ratio(blocks.b11, lambda);

        const auto m = static_cast<Eigen::Index>(sig_.m);
        const auto r = static_cast<Eigen::Index>(sig_.r);

        // int_0^1 E(-lambda(1-s)) f(s) ds and int_0^inf E(-lambda s) h(s) ds
        CVector trace(m);
        for (Eigen::Index j = 0; j < m; ++j) {
            trace(j) = weighted_integral(rhs_.u[static_cast<std::size_t>(j)], -lambda, lambda, 0.0, 1.0, params_);
        }
        CVector laplace_h(r);
        for (Eigen::Index j = 0; j < r; ++j) {
            laplace_h(j) = weighted_integral(rhs_.w[static_cast<std::size_t>(j)], 0.0, -lambda, 0.0,
                                             std::numeric_limits<double>::infinity(), params_);
        }

        // sum_{n<=N} (B11)^n E(-lambda n)
        const CMatrix b11 = blocks.b11.cast<Complex>();
        const CMatrix step = b11 * ExpDiag(sig_.m, -lambda);
        CMatrix neumann = CMatrix::Identity(m, m);
        CMatrix term = CMatrix::Identity(m, m);
        for (std::size_t n = 1; n <= depth_; ++n) {
            term = step * term;
            neumann += term;
        }

        const CMatrix b12 = blocks.b12.cast<Complex>();
        const CMatrix b21 = blocks.b21.cast<Complex>();
        const CMatrix b22 = blocks.b22.cast<Complex>();
        bounded_start_ = neumann * b11 * trace + neumann * b12 * laplace_h;
        outgoing_start_ = b21 * neumann * trace + b21 * (neumann * ExpDiag(sig_.m, -lambda)) * b12 * laplace_h
                          + b22 * laplace_h;
    }

    const NetworkSignature& signature() const { return sig_; }
    const ResolventParams& params() const { return params_; }
    const StateVector& rhs() const { return rhs_; }
    std::size_t neumann_depth() const { return depth_; }
    double neumann_ratio() const { return ratio_; }
    bool near_threshold() const { return ratio_ > kNearThresholdRatio; }
    /// u(0) and v(0) of the solution.
    const CVector& bounded_start() const { return bounded_start_; }
    const CVector& outgoing_start() const { return outgoing_start_; }

    Complex u(std::size_t j, double x) const { return component(EdgeKind::Bounded, j, x); }
    Complex v(std::size_t j, double x) const { return component(EdgeKind::Outgoing, j, x); }
    Complex w(std::size_t j, double x) const { return component(EdgeKind::Incoming, j, x); }

    /// Component j of u, v or w at x.
    Complex component(EdgeKind k, std::size_t j, double x) const
    {
        const Complex lambda = params_.lambda;
        switch (k) {
        case EdgeKind::Bounded: {
            const double xc = clamp_to(x, 1.0);
            return std::exp(-lambda * xc) * bounded_start_(static_cast<Eigen::Index>(j))
                   + weighted_integral(rhs_.u[j], -lambda * xc, lambda, 0.0, xc, params_);
        }
        case EdgeKind::Outgoing: {
            const double xc = clamp_to(x, std::numeric_limits<double>::infinity());
            return std::exp(-lambda * xc) * outgoing_start_(static_cast<Eigen::Index>(j))
                   + weighted_integral(rhs_.v[j], -lambda * xc, lambda, 0.0, xc, params_);
        }
        case EdgeKind::Incoming: {
            const double xc = clamp_to(x, std::numeric_limits<double>::infinity());
            return weighted_integral(rhs_.w[j], lambda * xc, -lambda, xc, std::numeric_limits<double>::infinity(),
                                     params_);
        }
        }
        return 0.0;
    }

    CVector eval(EdgeKind k, double x) const
    {
        const std::size_t count = rhs_.of(k).size();
        CVector out(static_cast<Eigen::Index>(count));
        for (std::size_t j = 0; j < count; ++j) {
            out(static_cast<Eigen::Index>(j)) = component(k, j, x);
        }
        return out;
    }

    CVector u(double x) const { return eval(EdgeKind::Bounded, x); }
    CVector v(double x) const { return eval(EdgeKind::Outgoing, x); }
    CVector w(double x) const { return eval(EdgeKind::Incoming, x); }

    SampledState<Complex> sample(const EdgeGrids& grids) const
    {
        SampledState<Complex> out;
        out.approximate = rhs_.approximate();
        for (auto k : kAllKinds) {
            const auto& gs = grids.of(k);
            if (gs.size() != rhs_.of(k).size()) {
                throw SpecError(std::string("grid count mismatch for ") + to_string(k) + " edges");
            }
            for (std::size_t j = 0; j < gs.size(); ++j) {
                SampledEdge<Complex> e;
                e.x = gs[j];
                e.values.reserve(e.x.size());
                for (double x : e.x) {
                    e.values.push_back(component(k, j, x));
                }
                out.of(k).push_back(std::move(e));
            }
        }
        return out;
    }

  private:
    static double clamp_to(double x, double hi)
    {
        if (!(x >= -kDomainTolerance && x <= hi + kDomainTolerance)) {
            throw DomainError("resolvent sample point " + std::to_string(x) + " outside the edge");
        }
        return std::clamp(x, 0.0, hi);
    }

    NetworkSignature sig_;
    StateVector rhs_;
    ResolventParams params_;
    std::size_t depth_ = 0;
    double ratio_ = 0.0;
    CVector bounded_start_;
    CVector outgoing_start_;
};

inline SampledState<Complex> resolvent_apply(const StateVector& rhs, const BoundaryMatrix& b,
                                             const ResolventParams& p, const EdgeGrids& grids)
{
    return Resolvent(b, rhs, p).sample(grids);
}

// ---------------------------------------------------------------------------
// Laplace transform of the semigroup

/// int_0^inf e^{-lambda t} T(t)s0 (x) dt for all edges of one kind, by adaptive quadrature.
///
/// Panels break at t = x + k where characteristics through x switch branches.
/// Integration stops once T >= x + 1 and e^{-Re lambda T} * 2 M / Re lambda is below
/// tol * max(|partial integral|, tol).
/// M is the running sup of |T(t)s0 (x)|, floored by (1 + ||B||_inf) * sup|s0| so
/// that data arriving late along a characteristic is not missed.
inline CVector laplace_at(const Semigroup& sg, const StateVector& s0, EdgeKind k, double x, const ResolventParams& p)
{
    const Complex lambda = p.lambda;
    const double re = lambda.real();
    if (!(re > 0.0)) {
        throw DivergenceError("Laplace transform needs Re(lambda) > 0");
    }
    double data_sup = 0.0;
    for (auto kind : kAllKinds) {
        for (const auto& f : s0.of(kind)) data_sup = std::max(data_sup, f.sup_bound());
    }
    double sup = (1.0 + inf_norm(sg.boundary().entries())) * data_sup;
    double lo = 0.0;
    // Weighted relative to the window start so the panel tolerance scales with the window.
    auto integrand = [&](double t) -> CVector {
        const Vector val = sg.eval(k, s0, x, t);
        sup = std::max(sup, magnitude(val));
        return std::exp(-lambda * (t - lo)) * val.cast<Complex>();
    };
    const QuadratureOptions q = p.quadrature();
    const double first = (k == EdgeKind::Incoming) ? 1.0 : x;

    // A data kink at b reaches x at t = b - x, or at t = x -+ b + j after j traversals.
    std::vector<double> data_breaks;
    for (auto kind : kAllKinds) {
        for (const auto& f : s0.of(kind)) {
            for (double b : f.breakpoints()) data_breaks.push_back(b);
        }
    }
    auto window_breaks = [&](double a, double b) {
        std::vector<double> out;
        for (double d : data_breaks) {
            out.push_back(d - x);
            for (double base : {x - d, x + d}) {
                for (double j = std::ceil(a - base); base + j < b; j += 1.0) {
                    if (j >= 0.0) out.push_back(base + j);
                }
            }
        }
        return out;
    };

    CVector total = CVector::Zero(static_cast<Eigen::Index>(s0.of(k).size()));
    double hi = first > 0.0 ? first : 1.0;
    while (true) {
        const std::vector<double> breaks = window_breaks(lo, hi);
        total += std::exp(-lambda * lo) * integrate(integrand, lo, hi, breaks, q);
        const double tail = std::exp(-re * hi) * 2.0 * sup / re;
        if (tail < p.tol * std::max(magnitude(total), p.tol) && hi >= x + 1.0) {
            break;
        }
        if (hi > p.laplace_horizon) {
            throw QuadratureError("Laplace tail bound not reached by t = " + std::to_string(hi)
                                  + "; the solution grows faster than e^{Re(lambda) t}");
        }
        lo = hi;
        hi += 1.0;
    }
    return total;
}

inline SampledState<Complex> laplace_of_semigroup(const StateVector& s0, const BoundaryMatrix& b,
                                                  const ResolventParams& p, const EdgeGrids& grids)
{
    s0.check(b.signature());
    // Same convergence guard as the resolvent side.
    (void)neumann_truncation(b.b11(), p.lambda, p.tol);
    const Semigroup sg(b);
    SampledState<Complex> out;
    out.approximate = s0.approximate();
    for (auto k : kAllKinds) {
        const auto& gs = grids.of(k);
        if (gs.size() != s0.of(k).size()) {
            throw SpecError(std::string("grid count mismatch for ") + to_string(k) + " edges");
        }
        std::map<double, CVector> memo;
        for (std::size_t j = 0; j < gs.size(); ++j) {
            SampledEdge<Complex> e;
            e.x = gs[j];
            for (double x : e.x) {
                auto it = memo.find(x);
                if (it == memo.end()) {
                    it = memo.emplace(x, laplace_at(sg, s0, k, x, p)).first;
                }
                e.values.push_back(it->second(static_cast<Eigen::Index>(j)));
            }
            out.of(k).push_back(std::move(e));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Checks

struct OdeResidual {
    double equation = 0.0; ///< max |lambda R + R' - f| (bounded, outgoing), |lambda R - R' - h| (incoming)
    double boundary = 0.0; ///< max |[u(0); v(0)] - B [u(1); w(0)]|
};

/// Residual of the resolvent equations with central differences on the sample grids.
///
/// Grids must be uniform, hold at least three points and include the vertex
/// ends (0 on every edge, 1 on bounded edges).
inline OdeResidual ode_residual(const SampledState<Complex>& r, const StateVector& rhs, const BoundaryMatrix& b,
                                Complex lambda)
{
    const auto& sig = b.signature();
    rhs.check(sig);
    OdeResidual res;
    for (auto k : kAllKinds) {
        const auto& edges = r.of(k);
        if (edges.size() != rhs.of(k).size()) {
            throw SpecError("resolvent samples do not match the right-hand side");
        }
        const double sign = k == EdgeKind::Incoming ? -1.0 : 1.0;
        for (std::size_t j = 0; j < edges.size(); ++j) {
            const auto& e = edges[j];
            if (e.x.size() < 3) {
                throw DomainError("ode_residual needs at least 3 grid points per edge");
            }
            const double h = e.x[1] - e.x[0];
            for (std::size_t i = 1; i + 1 < e.x.size(); ++i) {
                if (std::abs((e.x[i + 1] - e.x[i]) - h) > 1e-9 * std::max(1.0, h)) {
                    throw DomainError("ode_residual needs uniform grids");
                }
                const Complex deriv = (e.values[i + 1] - e.values[i - 1]) / (e.x[i + 1] - e.x[i - 1]);
                const Complex lhs = lambda * e.values[i] + sign * deriv;
                res.equation = std::max(res.equation, std::abs(lhs - rhs.of(k)[j](e.x[i])));
            }
        }
    }

    auto check_end = [](const SampledEdge<Complex>& e, bool front, double where) {
        const double x = front ? e.x.front() : e.x.back();
        if (std::abs(x - where) > kDomainTolerance) {
            throw DomainError("ode_residual needs samples at the edge ends");
        }
        return front ? e.values.front() : e.values.back();
    };
    const auto m = static_cast<Eigen::Index>(sig.m);
    CVector resolved(m + static_cast<Eigen::Index>(sig.q));
    CVector arriving(m + static_cast<Eigen::Index>(sig.r));
    for (std::size_t j = 0; j < sig.m; ++j) {
        resolved(static_cast<Eigen::Index>(j)) = check_end(r.u[j], true, 0.0);
        arriving(static_cast<Eigen::Index>(j)) = check_end(r.u[j], false, 1.0);
    }
    for (std::size_t j = 0; j < sig.q; ++j) resolved(m + static_cast<Eigen::Index>(j)) = check_end(r.v[j], true, 0.0);
    for (std::size_t j = 0; j < sig.r; ++j) arriving(m + static_cast<Eigen::Index>(j)) = check_end(r.w[j], true, 0.0);
    res.boundary = magnitude(CVector(resolved - b.entries().cast<Complex>() * arriving));
    return res;
}

/// Real and imaginary parts of R(lambda)rhs as exact pointwise edge functions.
inline std::pair<StateVector, StateVector> lift(std::shared_ptr<const Resolvent> res)
{
    const auto& rhs = res->rhs();
    const double re = res->params().lambda.real();
    const double h_bound = [&] {
        double s = 0.0;
        for (const auto& h : rhs.w) s = std::max(s, h.sup_bound());
        return s;
    }();
    StateVector real_part;
    StateVector imag_part;
    for (auto k : kAllKinds) {
        // |w(x)| <= sup|h| / Re(lambda); other kinds never reach a half-line tail.
        const double bound = k == EdgeKind::Incoming && re > 0.0 ? h_bound / re : std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < rhs.of(k).size(); ++j) {
            const auto& src = rhs.of(k)[j];
            real_part.of(k).push_back(EdgeFunction::callable(
                domain_of(k), [res, k, j](double x) { return res->component(k, j, x).real(); }, bound,
                src.breakpoints(), src.approximate()));
            imag_part.of(k).push_back(EdgeFunction::callable(
                domain_of(k), [res, k, j](double x) { return res->component(k, j, x).imag(); }, bound,
                src.breakpoints(), src.approximate()));
        }
    }
    return {std::move(real_part), std::move(imag_part)};
}

/// Sampled sup-norm of R(lambda) - R(mu) - (mu - lambda) R(lambda) R(mu) applied to rhs.
inline double resolvent_equation_check(const StateVector& rhs, const BoundaryMatrix& b, Complex lambda, Complex mu,
                                       const ResolventParams& p, const EdgeGrids& grids)
{
    ResolventParams pl = p;
    pl.lambda = lambda;
    ResolventParams pm = p;
    pm.lambda = mu;
    const Resolvent rl(b, rhs, pl);
    auto rm = std::make_shared<const Resolvent>(b, rhs, pm);

    const auto sl = rl.sample(grids);
    const auto sm = rm->sample(grids);

    const bool real_inner = mu.imag() == 0.0;
    const auto [inner_re, inner_im] = lift(rm);
    const auto nested_re = Resolvent(b, inner_re, pl).sample(grids);
    std::optional<SampledState<Complex>> nested_im;
    if (!real_inner) {
        nested_im = Resolvent(b, inner_im, pl).sample(grids);
    }

    double worst = 0.0;
    const Complex i(0.0, 1.0);
    for (auto k : kAllKinds) {
        for (std::size_t j = 0; j < sl.of(k).size(); ++j) {
            for (std::size_t n = 0; n < sl.of(k)[j].values.size(); ++n) {
                Complex nested = nested_re.of(k)[j].values[n];
                if (nested_im) {
                    nested += i * nested_im->of(k)[j].values[n];
                }
                const Complex d = sl.of(k)[j].values[n] - sm.of(k)[j].values[n] - (mu - lambda) * nested;
                worst = std::max(worst, std::abs(d));
            }
        }
    }
    return worst;
}

/// Componentwise comparison of two sampled states.
struct Deviation {
    double max_abs = 0.0;
    double mean_abs = 0.0;
    double max_rel = 0.0; ///< |a - b| / max(|b|, rel_floor)
    std::size_t count = 0;
};

inline Deviation deviation(const std::vector<SampledEdge<Complex>>& a, const std::vector<SampledEdge<Complex>>& b,
                           double rel_floor = 1e-8)
{
    Deviation d;
    double sum = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        for (std::size_t n = 0; n < a[j].values.size(); ++n) {
            const double err = std::abs(a[j].values[n] - b[j].values[n]);
            d.max_abs = std::max(d.max_abs, err);
            d.max_rel = std::max(d.max_rel, err / std::max(std::abs(b[j].values[n]), rel_floor));
            sum += err;
            ++d.count;
        }
    }
    d.mean_abs = d.count ? sum / static_cast<double>(d.count) : 0.0;
    return d;
}

} // namespace netsemi
