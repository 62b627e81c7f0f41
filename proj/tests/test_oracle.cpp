#include "netsemi/oracle.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace netsemi;
using netsemi::testing::two_vertex_data;
using netsemi::testing::two_vertex_matrix;

TEST(Oracle, ZeroStepsReproducesSamples)
{
    const StateVector s = netsemi::testing::two_vertex_smooth_data();
    const GridState g = simulate(s, two_vertex_matrix(), 0.1, 0, 2.0);
    ASSERT_EQ(g.u[0].size(), 11u);
    ASSERT_EQ(g.v[0].size(), 21u);
    for (std::size_t i = 0; i <= 10; ++i) EXPECT_EQ(g.u[1][i], s.u[1](g.node(i)));
    for (std::size_t i = 0; i <= 20; ++i) EXPECT_EQ(g.w[0][i], s.w[0](g.node(i)));
}

TEST(Oracle, ZeroBoundaryMatrixIsAPureShift)
{
    const BoundaryMatrix zero({1, 0, 0}, Matrix::Zero(1, 1));
    StateVector s;
    s.u = {EdgeFunction::polynomial(Domain::Bounded, {1.0, 2.0, -1.0})};
    const double dx = 0.05;
    for (std::size_t k : {1u, 7u, 20u, 25u}) {
        const GridState g = simulate(s, zero, dx, k, 1.0);
        for (std::size_t i = 0; i < g.u[0].size(); ++i) {
            const double expected = i >= k ? s.u[0](static_cast<double>(i - k) * dx) : 0.0;
            EXPECT_NEAR(g.u[0][i], expected, 1e-15) << "step " << k << " node " << i;
        }
    }
}

TEST(Oracle, RejectsSpacingNotOfUnitFractionForm)
{
    EXPECT_THROW(cells_for_spacing(0.03), DomainError);
    EXPECT_EQ(cells_for_spacing(0.01), 100u);
    EXPECT_EQ(cells_for_spacing(0.125), 8u);
}

TEST(Oracle, RejectsTruncationThatRunsOutOfIncomingData)
{
    EXPECT_THROW(simulate(two_vertex_data(), two_vertex_matrix(), 0.1, 25, 2.0), DomainError);
    EXPECT_NO_THROW(simulate(two_vertex_data(), two_vertex_matrix(), 0.1, 20, 2.0));
    // Without incoming edges the truncation only limits what is observed.
    StateVector s;
    s.u = {EdgeFunction::constant(Domain::Bounded, 1.0)};
    s.v = {EdgeFunction::zero(Domain::HalfLine)};
    EXPECT_NO_THROW(simulate(s, BoundaryMatrix({1, 1, 0}, Matrix::Ones(2, 1)), 0.1, 50, 1.0));
}

TEST(Compare, IdenticalInputsGiveZero)
{
    const GridState g = simulate(two_vertex_data(), two_vertex_matrix(), 0.02, 0, 2.0);
    const Semigroup sg(two_vertex_matrix());
    EXPECT_EQ(compare(semigroup_sampler(sg, two_vertex_data()), g, 0.0).max_abs_err, 0.0);
}

TEST(Compare, DetectsAPerturbedNode)
{
    const StateVector s = netsemi::testing::two_vertex_smooth_data();
    const Semigroup sg(two_vertex_matrix());
    GridState g = simulate(s, two_vertex_matrix(), 0.02, 13, 3.0);
    const Comparison clean = compare(semigroup_sampler(sg, s), g, 0.03);
    ASSERT_LE(clean.max_abs_err, 1e-12);
    g.v[1][40] += 1e-6;
    const Comparison c = compare(semigroup_sampler(sg, s), g, 0.03);
    EXPECT_NEAR(c.max_abs_err, 1e-6, 1e-12);
    EXPECT_EQ(c.kind, EdgeKind::Outgoing);
    EXPECT_EQ(c.edge, 1u);
    EXPECT_NEAR(c.x, 0.8, 1e-15);
}

TEST(Compare, ThrowsWhenEverythingIsExcluded)
{
    const GridState g = simulate(two_vertex_data(), two_vertex_matrix(), 0.5, 0, 1.0);
    const Semigroup sg(two_vertex_matrix());
    EXPECT_THROW(compare(semigroup_sampler(sg, two_vertex_data()), g, 0.6), DomainError);
}

TEST(Oracle, MatchesExplicitFormulaOnTwoVertexNetwork)
{
    const Semigroup sg(two_vertex_matrix());
    const Comparison c = compare_trajectory(sg, two_vertex_data(), 0.01, 120, 3.0, 0.015);
    EXPECT_LE(c.max_abs_err, 1e-12);
    EXPECT_GT(c.compared, 10000u);
}

TEST(Oracle, MatchesExplicitFormulaOnRandomNetworks)
{
    std::mt19937 rng(77);
    for (int trial = 0; trial < 8; ++trial) {
        const NetworkSignature sig = netsemi::testing::random_signature(rng);
        const Semigroup sg(netsemi::testing::random_boundary(rng, sig));
        const StateVector s = netsemi::testing::random_state(rng, sig);
        const Comparison c = compare_trajectory(sg, s, 0.02, 150, 4.0, 0.03);
        EXPECT_LE(c.max_abs_err, 1e-12) << "trial " << trial;
    }
}

TEST(Oracle, DiscreteMassIsConservedUntilDataReachesTheTruncation)
{
    const BoundaryMatrix b = two_vertex_matrix();
    StateVector s;
    s.u = {EdgeFunction::gaussian(Domain::Bounded, 1.0, 0.5, 0.1), EdgeFunction::zero(Domain::Bounded)};
    s.v = {EdgeFunction::zero(Domain::HalfLine), EdgeFunction::zero(Domain::HalfLine)};
    s.w = {EdgeFunction::grid(Domain::HalfLine, {0.0, 0.5, 1.0, 6.0}, {0.0, 1.0, 0.0, 0.0})};
    auto mass = [](const GridState& g) {
        double total = 0.0;
        for (auto k : kAllKinds) {
            for (const auto& a : g.of(k)) {
                // Each cell is owned by one node: u(1) and w(0) are the values handed to the vertex.
                const std::size_t first = k == EdgeKind::Incoming ? 1 : 0;
                const std::size_t last = k == EdgeKind::Bounded ? a.size() - 2 : g.last_valid(k);
                for (std::size_t i = first; i <= last; ++i) total += a[i] * g.dx();
            }
        }
        return total;
    };
    GridState g = sample_grid(s, b.signature(), 0.01, 6.0);
    const double m0 = mass(g);
    for (int k = 0; k < 200; ++k) {
        step(g, b);
        EXPECT_NEAR(mass(g), m0, 1e-12) << "step " << k + 1;
    }
}
