#pragma once

#include "netsemi/edge_function.hpp"
#include "netsemi/network.hpp"
#include "netsemi/quadrature.hpp"

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace netsemi {

enum class EdgeKind {
    Bounded,  ///< u, transport 0 -> 1 on [0,1]
    Outgoing, ///< v, transport away from the vertex on [0,inf)
    Incoming, ///< w, transport toward the vertex on [0,inf)
};

inline const char* to_string(EdgeKind k)
{
    switch (k) {
    case EdgeKind::Bounded: return "u";
    case EdgeKind::Outgoing: return "v";
    case EdgeKind::Incoming: return "w";
    }
    return "?";
}

inline Domain domain_of(EdgeKind k) { return k == EdgeKind::Bounded ? Domain::Bounded : Domain::HalfLine; }

inline constexpr EdgeKind kAllKinds[] = {EdgeKind::Bounded, EdgeKind::Outgoing, EdgeKind::Incoming};

/// Per-edge data (u, v, w): initial conditions, solution snapshots or resolvent inputs.
struct StateVector {
    std::vector<EdgeFunction> u;
    std::vector<EdgeFunction> v;
    std::vector<EdgeFunction> w;

    static StateVector zero(const NetworkSignature& sig)
    {
        return {std::vector<EdgeFunction>(sig.m, EdgeFunction::zero(Domain::Bounded)),
                std::vector<EdgeFunction>(sig.q, EdgeFunction::zero(Domain::HalfLine)),
                std::vector<EdgeFunction>(sig.r, EdgeFunction::zero(Domain::HalfLine))};
    }

    const std::vector<EdgeFunction>& of(EdgeKind k) const
    {
        return k == EdgeKind::Bounded ? u : (k == EdgeKind::Outgoing ? v : w);
    }
    std::vector<EdgeFunction>& of(EdgeKind k)
    {
        return k == EdgeKind::Bounded ? u : (k == EdgeKind::Outgoing ? v : w);
    }

    bool approximate() const
    {
        for (auto k : kAllKinds) {
            for (const auto& f : of(k)) {
                if (f.approximate()) {
                    return true;
                }
            }
        }
        return false;
    }

    /// Throws SpecError unless the component counts and domains fit the signature.
    void check(const NetworkSignature& sig) const
    {
        const std::size_t expected[] = {sig.m, sig.q, sig.r};
        for (std::size_t i = 0; i < 3; ++i) {
            const EdgeKind k = kAllKinds[i];
            if (of(k).size() != expected[i]) {
                throw SpecError(std::string("state has ") + std::to_string(of(k).size()) + " " + to_string(k)
                                + " components, signature requires " + std::to_string(expected[i]));
            }
            for (const auto& f : of(k)) {
                if (f.domain() != domain_of(k)) {
                    throw SpecError(std::string(to_string(k)) + " components must live on " + to_string(domain_of(k)));
                }
            }
        }
    }
};

inline StateVector scaled(const StateVector& s, double alpha)
{
    StateVector out;
    for (auto k : kAllKinds) {
        for (const auto& f : s.of(k)) {
            out.of(k).push_back(EdgeFunction::sum(f.domain(), {alpha}, {f}));
        }
    }
    return out;
}

/// Values of all components of one kind at the same argument.
inline Vector evaluate_all(const std::vector<EdgeFunction>& fs, double x)
{
    Vector out(static_cast<Eigen::Index>(fs.size()));
    for (std::size_t j = 0; j < fs.size(); ++j) {
        out(static_cast<Eigen::Index>(j)) = fs[j](x);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sampling

/// Abscissae per edge, grouped by kind.
struct EdgeGrids {
    std::vector<std::vector<double>> u;
    std::vector<std::vector<double>> v;
    std::vector<std::vector<double>> w;

    const std::vector<std::vector<double>>& of(EdgeKind k) const
    {
        return k == EdgeKind::Bounded ? u : (k == EdgeKind::Outgoing ? v : w);
    }
    std::vector<std::vector<double>>& of(EdgeKind k)
    {
        return k == EdgeKind::Bounded ? u : (k == EdgeKind::Outgoing ? v : w);
    }
};

/// 0, dx, 2dx, ... up to `length`, with `length` itself always included.
inline std::vector<double> uniform_points(double length, double dx)
{
    if (!(dx > 0.0) || !(length > 0.0)) {
        throw DomainError("grid spacing and length must be positive");
    }
    const double cells = length / dx;
    const auto n = static_cast<std::size_t>(std::floor(cells + 1e-9));
    std::vector<double> xs;
    xs.reserve(n + 2);
    for (std::size_t i = 0; i <= n; ++i) {
        xs.push_back(std::min(length, static_cast<double>(i) * dx));
    }
    if (length - xs.back() > 1e-9 * dx) {
        xs.push_back(length);
    } else {
        xs.back() = length;
    }
    return xs;
}

/// Same uniform grid on every edge: [0,1] for bounded edges, [0, truncation] otherwise.
inline EdgeGrids uniform_grids(const NetworkSignature& sig, double dx, double truncation)
{
    const auto bounded = uniform_points(1.0, dx);
    const auto half = uniform_points(truncation, dx);
    return {std::vector<std::vector<double>>(sig.m, bounded), std::vector<std::vector<double>>(sig.q, half),
            std::vector<std::vector<double>>(sig.r, half)};
}

/// Midpoints of `count` equal cells of [0, length]; avoids endpoints.
inline std::vector<double> midpoint_samples(double length, std::size_t count)
{
    std::vector<double> xs(count);
    for (std::size_t i = 0; i < count; ++i) {
        xs[i] = (static_cast<double>(i) + 0.5) * length / static_cast<double>(count);
    }
    return xs;
}

template <class T>
struct SampledEdge {
    std::vector<double> x;
    std::vector<T> values;
};

/// Pointwise samples of a state; T is double or Complex.
template <class T>
struct SampledState {
    std::vector<SampledEdge<T>> u;
    std::vector<SampledEdge<T>> v;
    std::vector<SampledEdge<T>> w;
    bool approximate = false;

    const std::vector<SampledEdge<T>>& of(EdgeKind k) const
    {
        return k == EdgeKind::Bounded ? u : (k == EdgeKind::Outgoing ? v : w);
    }
    std::vector<SampledEdge<T>>& of(EdgeKind k)
    {
        return k == EdgeKind::Bounded ? u : (k == EdgeKind::Outgoing ? v : w);
    }
};

inline SampledState<double> sample(const StateVector& s, const EdgeGrids& grids)
{
    SampledState<double> out;
    out.approximate = s.approximate();
    for (auto k : kAllKinds) {
        const auto& fs = s.of(k);
        const auto& gs = grids.of(k);
        if (gs.size() != fs.size()) {
            throw SpecError(std::string("grid count mismatch for ") + to_string(k) + " edges");
        }
        for (std::size_t j = 0; j < fs.size(); ++j) {
            SampledEdge<double> e;
            e.x = gs[j];
            e.values.reserve(e.x.size());
            for (double x : e.x) {
                e.values.push_back(fs[j](x));
            }
            out.of(k).push_back(std::move(e));
        }
    }
    return out;
}

/// Largest componentwise |a - b| over matching sample sets.
template <class T>
double max_abs_difference(const SampledState<T>& a, const SampledState<T>& b)
{
    double worst = 0.0;
    for (auto k : kAllKinds) {
        const auto& ea = a.of(k);
        const auto& eb = b.of(k);
        if (ea.size() != eb.size()) {
            throw SpecError("sampled states have different shapes");
        }
        for (std::size_t j = 0; j < ea.size(); ++j) {
            if (ea[j].values.size() != eb[j].values.size()) {
                throw SpecError("sampled states have different shapes");
            }
            for (std::size_t i = 0; i < ea[j].values.size(); ++i) {
                worst = std::max(worst, std::abs(ea[j].values[i] - eb[j].values[i]));
            }
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Norm diagnostic

/// (sum over edges of the integral of |f|^p)^(1/p), half-line edges cut at `truncation`.
inline double lp_norm(const StateVector& s, double p, double truncation, const QuadratureOptions& opts = {})
{
    if (!(p >= 1.0)) {
        throw DomainError("lp_norm needs p >= 1");
    }
    if (!(truncation > 0.0)) {
        throw DomainError("lp_norm needs a positive truncation length");
    }
    double total = 0.0;
    for (auto k : kAllKinds) {
        const double end = k == EdgeKind::Bounded ? 1.0 : truncation;
        for (const auto& f : s.of(k)) {
            const auto breaks = f.breakpoints();
            total += integrate([&](double x) { return std::pow(std::abs(f(x)), p); }, 0.0, end, breaks, opts);
        }
    }
    return std::pow(total, 1.0 / p);
}

} // namespace netsemi
