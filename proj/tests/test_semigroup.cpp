#include "netsemi/oracle.hpp"
#include "netsemi/semigroup.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <thread>

using namespace netsemi;
using netsemi::testing::two_vertex_data;
using netsemi::testing::two_vertex_matrix;
using netsemi::testing::two_vertex_smooth_data;

TEST(ShiftIndex, BoundedBranch)
{
    EXPECT_EQ(shift_index_u(0.5, 0.2).n, 0u);
    EXPECT_FALSE(shift_index_u(0.5, 0.2).on_characteristic);
    EXPECT_EQ(shift_index_u(0.5, 1.2).n, 1u);
    const ShiftIndex on = shift_index_u(0.3, 2.3);
    EXPECT_EQ(on.n, 2u);
    EXPECT_TRUE(on.on_characteristic);
    EXPECT_EQ(on.argument, 0.0);
    EXPECT_THROW(shift_index_u(1.5, 1.0), DomainError);
    EXPECT_THROW(shift_index_u(0.5, -1.0), DomainError);
}

TEST(ShiftIndex, OutgoingBranch)
{
    EXPECT_EQ(shift_index_v(0.5, 1.2).n, 0u);
    EXPECT_NEAR(shift_index_v(0.5, 1.2).argument, 0.3, 1e-15);
    EXPECT_EQ(shift_index_v(0.5, 2.2).n, 1u);
    const ShiftIndex on = shift_index_v(1.0, 2.0);
    EXPECT_EQ(on.n, 0u);
    EXPECT_TRUE(on.on_characteristic);
    EXPECT_THROW(shift_index_v(2.0, 1.0), DomainError);
}

TEST(ShiftIndex, ArgumentAlwaysInUnitInterval)
{
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> xs(0.0, 1.0);
    std::uniform_real_distribution<double> ts(0.0, 6.0);
    for (int i = 0; i < 10000; ++i) {
        const double x = xs(rng);
        const double t = ts(rng);
        const ShiftIndex s = shift_index_u(x, t);
        EXPECT_GE(s.argument, 0.0);
        EXPECT_LT(s.argument, 1.0 + 1e-12);
        EXPECT_NEAR(s.argument, static_cast<double>(s.n) - t + x, 1e-12);
        if (t >= x) {
            const ShiftIndex v = shift_index_v(x, t);
            EXPECT_GE(v.argument, 0.0);
            EXPECT_LT(v.argument, 1.0 + 1e-12);
        }
    }
}

TEST(Semigroup, BoundedEdgeValueAfterOneTraversal)
{
    const Semigroup sg(two_vertex_matrix());
    const Vector u = sg.eval_u(two_vertex_data(), 0.5, 1.0);
    EXPECT_EQ(u(0), 0.0);
    EXPECT_NEAR(u(1), 0.5 + 0.5 * std::exp(-0.5), 1e-15);

    // Upwind grid with dx = 1/100: x = 0.5 is node 50, t = 1.0 is step 100.
    const GridState g = simulate(two_vertex_data(), two_vertex_matrix(), 0.01, 100, 3.0);
    EXPECT_NEAR(g.u[0][50], u(0), 1e-12);
    EXPECT_NEAR(g.u[1][50], u(1), 1e-12);
}

TEST(Semigroup, OutgoingEdgeValueBehindFront)
{
    const Semigroup sg(two_vertex_matrix());
    const Vector v = sg.eval_v(two_vertex_data(), 0.5, 1.2);
    EXPECT_EQ(v(0), 0.0);
    EXPECT_NEAR(v(1), 0.5 + 0.5 * std::exp(-0.7), 1e-15);

    const GridState g = simulate(two_vertex_data(), two_vertex_matrix(), 0.01, 120, 3.0);
    EXPECT_NEAR(g.v[0][50], v(0), 1e-12);
    EXPECT_NEAR(g.v[1][50], v(1), 1e-12);
}

TEST(Semigroup, PureShiftsBeforeTheBoundaryIsFelt)
{
    const Semigroup sg(two_vertex_matrix());
    const StateVector s = two_vertex_smooth_data();
    const Vector u = sg.eval_u(s, 0.7, 0.2);
    for (Eigen::Index j = 0; j < 2; ++j) EXPECT_EQ(u(j), s.u[static_cast<std::size_t>(j)](0.7 - 0.2));
    const Vector v = sg.eval_v(s, 2.5, 1.0);
    for (Eigen::Index j = 0; j < 2; ++j) EXPECT_EQ(v(j), s.v[static_cast<std::size_t>(j)](2.5 - 1.0));
    EXPECT_EQ(sg.eval_w(two_vertex_data(), 1.0, 2.0)(0), std::exp(-3.0));
}

TEST(Semigroup, TimeZeroIsIdentity)
{
    std::mt19937 rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const NetworkSignature sig = netsemi::testing::random_signature(rng);
        const Semigroup sg(netsemi::testing::random_boundary(rng, sig));
        const StateVector s = netsemi::testing::random_state(rng, sig);
        const EdgeGrids grids = uniform_grids(sig, 0.05, 4.0);
        EXPECT_LE(max_abs_difference(sample(sg.apply(s, 0.0, grids), grids), sample(s, grids)), 1e-14);
    }
}

TEST(Semigroup, LoopCirculatesWithPeriodOne)
{
    const BoundaryMatrix loop({1, 0, 0}, Matrix::Identity(1, 1));
    const Semigroup sg(loop);
    StateVector s;
    s.u = {EdgeFunction::gaussian(Domain::Bounded, 1.0, 0.4, 0.1)};
    const EdgeGrids grids = uniform_grids(loop.signature(), 0.01, 1.0);
    const auto before = sample(s, grids);
    for (double t : {1.0, 2.0, 5.0}) {
        const auto after = sample(sg.apply(s, t, grids), grids);
        // The right end reads the left end's value on the characteristic; compare interior nodes.
        // n - t + x carries a few ulps of rounding; the slope of the data is at most 6.
        for (std::size_t i = 0; i + 1 < before.u[0].x.size(); ++i) {
            EXPECT_NEAR(after.u[0].values[i], before.u[0].values[i], 1e-14);
        }
    }
}

TEST(Semigroup, IncomingEdgesIgnoreTheBoundaryMatrix)
{
    std::mt19937 rng(21);
    const NetworkSignature sig(3, 2, 2);
    const StateVector s = netsemi::testing::random_state(rng, sig);
    const Semigroup a(netsemi::testing::random_boundary(rng, sig));
    const Semigroup b(netsemi::testing::random_boundary(rng, sig));
    for (double t : {0.0, 0.4, 2.3}) {
        for (double x : {0.0, 0.5, 3.0}) EXPECT_EQ(a.eval_w(s, x, t), b.eval_w(s, x, t));
    }
}

TEST(Semigroup, BoundedEdgesIgnoreIncomingDataWhenDecoupled)
{
    std::mt19937 rng(22);
    const NetworkSignature sig(3, 2, 2);
    BoundaryBlocks bl = split_blocks(netsemi::testing::random_boundary(rng, sig));
    bl.b12.setZero();
    const Semigroup sg(join_blocks(bl));
    StateVector s = netsemi::testing::random_state(rng, sig);
    StateVector perturbed = s;
    perturbed.w = {EdgeFunction::gaussian(Domain::HalfLine, 5.0, 1.0, 0.3), EdgeFunction::constant(Domain::HalfLine, -2.0)};
    for (double t : {0.3, 1.7, 3.2}) {
        for (double x : {0.1, 0.55, 0.9}) EXPECT_EQ(sg.eval_u(s, x, t), sg.eval_u(perturbed, x, t));
    }
}

TEST(Semigroup, VertexConditionHolds)
{
    std::mt19937 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const NetworkSignature sig = trial == 0 ? NetworkSignature(2, 2, 1) : netsemi::testing::random_signature(rng);
        const BoundaryMatrix b = trial == 0 ? two_vertex_matrix() : netsemi::testing::random_boundary(rng, sig);
        const StateVector s = trial == 0 ? two_vertex_smooth_data() : netsemi::testing::random_state(rng, sig);
        const Semigroup sg(b);
        for (double t : {0.25, 1.1, 2.7}) EXPECT_LE(boundary_violation(sg, s, t), 1e-10);
    }
}

TEST(Semigroup, CompositionOfLiftedSolutions)
{
    std::mt19937 rng(40);
    for (int trial = 0; trial < 6; ++trial) {
        const NetworkSignature sig = trial == 0 ? NetworkSignature(2, 2, 1) : netsemi::testing::random_signature(rng);
        const BoundaryMatrix b = trial == 0 ? two_vertex_matrix() : netsemi::testing::random_boundary(rng, sig);
        const StateVector s0 = trial == 0 ? two_vertex_smooth_data() : netsemi::testing::random_state(rng, sig);
        const Semigroup sg(b);
        for (auto [s, t] : {std::pair{0.3, 0.4}, std::pair{1.0, 0.7}, std::pair{1.5, 1.5}}) {
            const StateVector mid = sg.lift(s0, s);
            for (auto k : kAllKinds) {
                if (s0.of(k).empty()) continue;
                const double end = k == EdgeKind::Bounded ? 1.0 : 4.0;
                for (double x = 0.013; x < end; x += 0.05) {
                    if (k != EdgeKind::Incoming && characteristic_distance(x, s + t) < 1e-9) continue;
                    const Vector lhs = sg.eval(k, mid, x, t);
                    const Vector rhs = sg.eval(k, s0, x, s + t);
                    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-9) << to_string(k) << " x=" << x;
                }
            }
        }
    }
}

TEST(Semigroup, CompositionOnSampledData)
{
    // Piecewise-linear data on a grid; each stage is sampled on a grid shortened by the
    // time step, since incoming data read beyond its coverage is an error.
    const double dx = 0.01;
    const double length = 8.0;
    const BoundaryMatrix b = two_vertex_matrix();
    const Semigroup sg(b);
    const auto grids = [&](double l) { return uniform_grids(b.signature(), dx, l); };
    const StateVector s0 = sg.apply(two_vertex_smooth_data(), 0.0, grids(length));
    ASSERT_TRUE(s0.approximate());
    for (auto [s, t] : {std::pair{0.3, 0.4}, std::pair{1.0, 0.7}, std::pair{1.5, 1.5}}) {
        const StateVector mid = sg.apply(s0, s, grids(length - s));
        ASSERT_TRUE(mid.approximate());
        const EdgeGrids out = grids(length - s - t);
        const auto lhs = sample(sg.apply(mid, t, out), out);
        const auto rhs = sample(sg.apply(s0, s + t, out), out);
        double worst = 0.0;
        for (auto k : kAllKinds) {
            for (std::size_t j = 0; j < lhs.of(k).size(); ++j) {
                const auto& e = lhs.of(k)[j];
                for (std::size_t i = 0; i < e.x.size(); ++i) {
                    if (k != EdgeKind::Incoming && characteristic_distance(e.x[i], s + t) <= 1.5 * dx) continue;
                    worst = std::max(worst, std::abs(e.values[i] - rhs.of(k)[j].values[i]));
                }
            }
        }
        EXPECT_LE(worst, 1e-9) << "s=" << s << " t=" << t;
    }
}

TEST(Semigroup, MassIsConservedForKirchhoffWeights)
{
    const BoundaryMatrix b = two_vertex_matrix();
    const Semigroup sg(b);
    const double length = 10.0;
    StateVector s;
    s.u = {EdgeFunction::grid(Domain::Bounded, {0.0, 0.2, 0.6, 1.0}, {0.0, 1.0, 0.0, 0.0}),
           EdgeFunction::grid(Domain::Bounded, {0.0, 0.5, 1.0}, {0.0, 0.5, 0.0})};
    // Grid data covers [0, 2 length] so that w0(x + t) stays inside it.
    s.v = {EdgeFunction::grid(Domain::HalfLine, {0.0, 1.0, 2.0, 2 * length}, {0.0, 1.0, 0.0, 0.0}),
           EdgeFunction::zero(Domain::HalfLine)};
    s.w = {EdgeFunction::grid(Domain::HalfLine, {0.0, 1.0, 3.0, 2 * length}, {0.0, 2.0, 0.0, 0.0})};
    const double m0 = lp_norm(s, 1.0, length);
    EXPECT_NEAR(m0, 0.3 + 0.25 + 1.0 + 3.0, 1e-12);
    for (double t : {0.5, 1.3, 4.0}) EXPECT_NEAR(lp_norm(sg.lift(s, t), 1.0, length), m0, 1e-9) << "t=" << t;
}

TEST(MatrixPowerCache, PowersMatchRepeatedProducts)
{
    std::mt19937 rng(50);
    const Matrix p = netsemi::testing::random_matrix(rng, 4, 4, -0.5, 0.5);
    const MatrixPowerCache cache(p);
    EXPECT_EQ(cache.power(0), Matrix::Identity(4, 4));
    Matrix acc = Matrix::Identity(4, 4);
    for (std::size_t k = 1; k <= 10; ++k) {
        acc = p * acc;
        EXPECT_EQ(cache.power(k), acc);
    }
}

TEST(MatrixPowerCache, ConcurrentGrowthIsConsistent)
{
    std::mt19937 rng(51);
    const Matrix p = netsemi::testing::random_matrix(rng, 3, 3, -0.5, 0.5);
    const MatrixPowerCache cache(p);
    std::vector<std::thread> pool;
    std::vector<Matrix> seen(16);
    for (std::size_t i = 0; i < seen.size(); ++i) {
        pool.emplace_back([&, i] {
            for (std::size_t k = 0; k <= 40; ++k) {
                const Matrix& m = cache.power((k * (i + 1)) % 41);
                (void)m;
            }
            seen[i] = cache.power(40);
        });
    }
    for (auto& t : pool) t.join();
    const MatrixPowerCache fresh(p);
    for (const auto& m : seen) EXPECT_EQ(m, fresh.power(40));
    EXPECT_EQ(cache.cached(), 41u);
}
