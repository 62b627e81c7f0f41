#pragma once

#include "netsemi/errors.hpp"
#include "netsemi/network.hpp"
#include "netsemi/semigroup.hpp"
#include "netsemi/state.hpp"

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace netsemi {

/// Upwind grid with dt = dx = 1/M.
///
/// Bounded edges hold M+1 nodes on [0,1], half-line edges N+1 nodes on [0,L].
/// Incoming (w) data leaves through the far end of the truncation one node per
/// step, so only indices <= w_valid() carry data.
struct GridState {
    std::size_t cells_per_unit = 0; ///< M
    std::size_t half_line_cells = 0; ///< N = floor(L/dx)
    std::size_t steps = 0;
    std::vector<std::vector<double>> u;
    std::vector<std::vector<double>> v;
    std::vector<std::vector<double>> w;

    double dx() const { return 1.0 / static_cast<double>(cells_per_unit); }
    double time() const { return static_cast<double>(steps) / static_cast<double>(cells_per_unit); }
    double node(std::size_t i) const { return static_cast<double>(i) / static_cast<double>(cells_per_unit); }
    std::size_t w_valid() const { return half_line_cells - steps; }
    double truncation() const { return node(half_line_cells); }

    const std::vector<std::vector<double>>& of(EdgeKind k) const
    {
        return k == EdgeKind::Bounded ? u : (k == EdgeKind::Outgoing ? v : w);
    }
    /// Last index holding data for an edge of this kind.
    std::size_t last_valid(EdgeKind k) const
    {
        return k == EdgeKind::Bounded ? cells_per_unit : (k == EdgeKind::Outgoing ? half_line_cells : w_valid());
    }
};

/// M with dx = 1/M; throws unless dx is the reciprocal of an integer.
inline std::size_t cells_for_spacing(double dx)
{
    if (!(dx > 0.0) || dx > 1.0) {
        throw DomainError("grid spacing must lie in (0, 1]");
    }
    const double inv = 1.0 / dx;
    const double m = std::round(inv);
    if (std::abs(m * dx - 1.0) > 1e-12) {
        throw DomainError("grid spacing " + std::to_string(dx) + " is not of the form 1/M");
    }
    return static_cast<std::size_t>(m);
}

/// Initial data sampled at the grid nodes.
inline GridState sample_grid(const StateVector& s0, const NetworkSignature& sig, double dx, double truncation)
{
    s0.check(sig);
    GridState g;
    g.cells_per_unit = cells_for_spacing(dx);
    if (!(truncation >= 1.0 / static_cast<double>(g.cells_per_unit))) {
        throw DomainError("truncation length must hold at least one cell");
    }
    g.half_line_cells = static_cast<std::size_t>(std::floor(truncation * static_cast<double>(g.cells_per_unit) + 1e-9));
    auto fill = [&](const std::vector<EdgeFunction>& fs, std::size_t cells) {
        std::vector<std::vector<double>> out(fs.size(), std::vector<double>(cells + 1));
        for (std::size_t j = 0; j < fs.size(); ++j) {
            for (std::size_t i = 0; i <= cells; ++i) {
                out[j][i] = fs[j](g.node(i));
            }
        }
        return out;
    };
    g.u = fill(s0.u, g.cells_per_unit);
    g.v = fill(s0.v, g.half_line_cells);
    g.w = fill(s0.w, g.half_line_cells);
    return g;
}

/// One exact shift: u and v move one cell right, w one cell left, then the
/// vertex condition [u(0); v(0)] = B [u(1); w(0)] is applied to the values
/// that arrive in this step.
inline void step(GridState& g, const BoundaryMatrix& b)
{
    const auto& sig = b.signature();
    if (g.u.size() != sig.m || g.v.size() != sig.q || g.w.size() != sig.r) {
        throw SpecError("grid state does not match the boundary matrix signature");
    }
    if (sig.r > 0 && g.w_valid() == 0) {
        throw DomainError("truncation too short: incoming-edge data exhausted after "
                          + std::to_string(g.steps) + " steps");
    }
    for (auto& a : g.u) {
        for (std::size_t i = a.size() - 1; i > 0; --i) a[i] = a[i - 1];
    }
    for (auto& a : g.v) {
        for (std::size_t i = a.size() - 1; i > 0; --i) a[i] = a[i - 1];
    }
    const std::size_t valid = g.w_valid();
    for (auto& a : g.w) {
        for (std::size_t i = 0; i + 1 <= valid; ++i) a[i] = a[i + 1];
        a[valid] = std::numeric_limits<double>::quiet_NaN();
    }
    ++g.steps;

    const auto m = static_cast<Eigen::Index>(sig.m);
    Vector arriving(m + static_cast<Eigen::Index>(sig.r));
    for (std::size_t j = 0; j < sig.m; ++j) arriving(static_cast<Eigen::Index>(j)) = g.u[j].back();
    for (std::size_t j = 0; j < sig.r; ++j) arriving(m + static_cast<Eigen::Index>(j)) = g.w[j].front();
    const Vector resolved = b.entries() * arriving;
    for (std::size_t j = 0; j < sig.m; ++j) g.u[j].front() = resolved(static_cast<Eigen::Index>(j));
    for (std::size_t j = 0; j < sig.q; ++j) g.v[j].front() = resolved(m + static_cast<Eigen::Index>(j));
}

/// Advance an existing grid by `steps` further steps.
inline GridState simulate(GridState g, const BoundaryMatrix& b, std::size_t steps)
{
    if (b.signature().r > 0 && g.steps + steps > g.half_line_cells) {
        throw DomainError("truncation too short: " + std::to_string(g.steps + steps) + " steps need L >= "
                          + std::to_string(static_cast<double>(g.steps + steps) * g.dx()));
    }
    for (std::size_t k = 0; k < steps; ++k) {
        step(g, b);
    }
    return g;
}

inline GridState simulate(const StateVector& s0, const BoundaryMatrix& b, double dx, std::size_t steps, double truncation)
{
    return simulate(sample_grid(s0, b.signature(), dx, truncation), b, steps);
}

/// Exact solution values of all edges of one kind at (x, t).
using ExactSampler = std::function<Vector(EdgeKind, double x, double t)>;

inline ExactSampler semigroup_sampler(const Semigroup& sg, const StateVector& s0)
{
    return [sg, s0](EdgeKind k, double x, double t) { return sg.eval(k, s0, x, t); };
}

/// Distance of (x, t) from the nearest characteristic line t - x in Z, measured along t.
inline double characteristic_distance(double x, double t)
{
    const double d = t - x;
    return std::abs(d - std::round(d));
}

struct Comparison {
    double max_abs_err = 0.0;
    EdgeKind kind = EdgeKind::Bounded;
    std::size_t edge = 0;
    double x = 0.0;
    double t = 0.0;
    std::size_t compared = 0;
    std::size_t excluded = 0;
};

/// Largest |exact - grid| over nodes farther than `exclusion_band` from any characteristic line.
inline Comparison compare(const ExactSampler& exact, const GridState& g, double exclusion_band)
{
    Comparison c;
    const double t = g.time();
    for (auto k : kAllKinds) {
        const auto& arrays = g.of(k);
        if (arrays.empty()) {
            continue;
        }
        const std::size_t last = g.last_valid(k);
        for (std::size_t i = 0; i <= last; ++i) {
            const double x = g.node(i);
            if (characteristic_distance(x, t) <= exclusion_band) {
                c.excluded += arrays.size();
                continue;
            }
            const Vector ref = exact(k, x, t);
            for (std::size_t j = 0; j < arrays.size(); ++j) {
                const double err = std::abs(ref(static_cast<Eigen::Index>(j)) - arrays[j][i]);
                ++c.compared;
                if (err > c.max_abs_err || std::isnan(err)) {
                    c.max_abs_err = std::isnan(err) ? std::numeric_limits<double>::infinity() : err;
                    c.kind = k;
                    c.edge = j;
                    c.x = x;
                    c.t = t;
                }
            }
        }
    }
    if (c.compared == 0) {
        throw DomainError("every grid node lies inside the characteristic exclusion band");
    }
    return c;
}

/// Runs the upwind scheme step by step and compares after every step.
inline Comparison compare_trajectory(const Semigroup& sg, const StateVector& s0, double dx, std::size_t steps,
                                     double truncation, double exclusion_band)
{
    const auto exact = semigroup_sampler(sg, s0);
    GridState g = sample_grid(s0, sg.signature(), dx, truncation);
    Comparison worst = compare(exact, g, exclusion_band);
    for (std::size_t k = 0; k < steps; ++k) {
        step(g, sg.boundary());
        Comparison c = compare(exact, g, exclusion_band);
        const std::size_t compared = worst.compared + c.compared;
        const std::size_t excluded = worst.excluded + c.excluded;
        if (c.max_abs_err > worst.max_abs_err) {
            worst = c;
        }
        worst.compared = compared;
        worst.excluded = excluded;
    }
    return worst;
}

} // namespace netsemi
