#pragma once

// Fixtures and fixed-seed generators shared by the unit tests and the acceptance binary.

#include "netsemi/network.hpp"
#include "netsemi/state.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace netsemi::testing {

/// Two vertices, two bounded edges in a cycle, one outgoing half-line at each
/// vertex and one incoming half-line at the second; equal split of every signal.
inline GraphSpec two_vertex_graph(double split_at_second = 0.5)
{
    GraphSpec g;
    g.vertices = {"v1", "v2"};
    g.bounded_edges = {{"e1", "v1", "v2"}, {"e2", "v2", "v1"}};
    g.outgoing_edges = {{"h1", "v1"}, {"h2", "v2"}};
    g.incoming_edges = {{"g1", "v2"}};
    const double a = split_at_second;
    const double b = 1.0 - split_at_second;
    g.weights = {
        {"v1", "e1", "e2", 0.5}, {"v1", "h1", "e2", 0.5},
        {"v2", "e2", "e1", a},   {"v2", "e2", "g1", a},
        {"v2", "h2", "e1", b},   {"v2", "h2", "g1", b},
    };
    g.column_sum = 1.0;
    return g;
}

inline Matrix two_vertex_entries()
{
    Matrix b(4, 3);
    b << 0.0, 0.5, 0.0,
         0.5, 0.0, 0.5,
         0.0, 0.5, 0.0,
         0.5, 0.0, 0.5;
    return b;
}

inline BoundaryMatrix two_vertex_matrix() { return {{2, 2, 1}, two_vertex_entries()}; }

/// u1 = 1, u2 = 0, v = 0, w1 = e^{-x}.
inline StateVector two_vertex_data()
{
    StateVector s;
    s.u = {EdgeFunction::constant(Domain::Bounded, 1.0), EdgeFunction::zero(Domain::Bounded)};
    s.v = {EdgeFunction::zero(Domain::HalfLine), EdgeFunction::zero(Domain::HalfLine)};
    s.w = {EdgeFunction::exponential(Domain::HalfLine, 1.0, -1.0)};
    return s;
}

/// Smooth, decaying, non-trivial data on every edge.
inline StateVector two_vertex_smooth_data()
{
    StateVector s;
    s.u = {EdgeFunction::polynomial(Domain::Bounded, {0.2, 1.0, -1.0}),
           EdgeFunction::gaussian(Domain::Bounded, 1.0, 0.5, 0.2)};
    s.v = {EdgeFunction::exponential(Domain::HalfLine, 0.3, -2.0),
           EdgeFunction::gaussian(Domain::HalfLine, 0.7, 1.0, 0.4)};
    s.w = {EdgeFunction::sum(Domain::HalfLine, {2.0, 1.0},
                             {EdgeFunction::gaussian(Domain::HalfLine, 1.0, 1.0, 0.5),
                              EdgeFunction::exponential(Domain::HalfLine, 1.0, -1.0)})};
    return s;
}

inline Matrix random_matrix(std::mt19937& rng, std::size_t rows, std::size_t cols, double lo = -1.0, double hi = 1.0)
{
    std::uniform_real_distribution<double> d(lo, hi);
    Matrix a(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = d(rng);
    }
    return a;
}

inline NetworkSignature random_signature(std::mt19937& rng, std::size_t max_count = 4)
{
    std::uniform_int_distribution<std::size_t> pick(0, max_count);
    std::uniform_int_distribution<std::size_t> positive(1, max_count);
    return {positive(rng), pick(rng), pick(rng)};
}

inline BoundaryMatrix random_boundary(std::mt19937& rng, const NetworkSignature& sig)
{
    return {sig, random_matrix(rng, sig.boundary_rows(), sig.boundary_cols())};
}

/// One smooth closed-form function; no interior jumps.
inline EdgeFunction random_function(std::mt19937& rng, Domain d)
{
    std::uniform_int_distribution<int> kind(0, 3);
    std::uniform_real_distribution<double> amp(-1.5, 1.5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    switch (kind(rng)) {
    case 0: return EdgeFunction::constant(d, amp(rng));
    case 1: return EdgeFunction::exponential(d, amp(rng), -0.2 - 2.0 * unit(rng));
    case 2: return EdgeFunction::gaussian(d, amp(rng), (d == Domain::Bounded ? 1.0 : 3.0) * unit(rng), 0.1 + 0.5 * unit(rng));
    default:
        if (d == Domain::Bounded) {
            return EdgeFunction::polynomial(d, {amp(rng), amp(rng), amp(rng)});
        }
        return EdgeFunction::sum(d, {amp(rng), 1.0},
                                 {EdgeFunction::exponential(d, 1.0, -1.0), EdgeFunction::gaussian(d, 1.0, 2.0, 0.7)});
    }
}

inline StateVector random_state(std::mt19937& rng, const NetworkSignature& sig)
{
    StateVector s;
    for (std::size_t j = 0; j < sig.m; ++j) s.u.push_back(random_function(rng, Domain::Bounded));
    for (std::size_t j = 0; j < sig.q; ++j) s.v.push_back(random_function(rng, Domain::HalfLine));
    for (std::size_t j = 0; j < sig.r; ++j) s.w.push_back(random_function(rng, Domain::HalfLine));
    return s;
}

inline double max_abs(const Matrix& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

} // namespace netsemi::testing
