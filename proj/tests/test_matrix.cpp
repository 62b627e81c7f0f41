#include "netsemi/matrix.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace netsemi;

TEST(InfNorm, MaxAbsoluteRowSum)
{
    Matrix a(2, 3);
    a << 1, -2, 0.5,
         -4, 0, 0;
    EXPECT_DOUBLE_EQ(inf_norm(a), 4.0);
    EXPECT_DOUBLE_EQ(inf_norm(Matrix(0, 0)), 0.0);
}

TEST(Rank, IdentityAndZero)
{
    EXPECT_EQ(rank(Matrix::Identity(5, 5)), 5u);
    EXPECT_EQ(rank(Matrix::Zero(3, 4)), 0u);
    EXPECT_EQ(rank(Matrix(0, 3)), 0u);
}

TEST(Rank, DetectsDependentRows)
{
    Matrix a(3, 3);
    a << 1, 2, 3,
         2, 4, 6,
         0, 1, 1;
    EXPECT_EQ(rank(a), 2u);
}

TEST(Rank, RelativeToleranceIgnoresRoundoffPivots)
{
    Matrix a(2, 2);
    a << 1.0, 1.0,
         1.0, 1.0 + 1e-14;
    EXPECT_EQ(rank(a), 1u);
    a(1, 1) = 1.0 + 1e-6;
    EXPECT_EQ(rank(a), 2u);
}

TEST(Rank, ProductOfRandomFactorsHasInnerDimension)
{
    std::mt19937 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t k = 1 + static_cast<std::size_t>(trial % 4);
        const Matrix a = netsemi::testing::random_matrix(rng, 6, k) * netsemi::testing::random_matrix(rng, k, 5);
        EXPECT_EQ(rank(a), k);
    }
}
