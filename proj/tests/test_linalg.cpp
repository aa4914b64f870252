#include "dscn/linalg.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using dscn::Matrix;
using dscn::Vector;
using namespace testing_util;

TEST(LeastSquares, IdentitySystem)
{
    Matrix t(2, 1);
    t << 1, 2;
    const Matrix beta = dscn::least_squares(Matrix::Identity(2, 2), t);
    EXPECT_DOUBLE_EQ(beta(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(beta(1, 0), 2.0);
}

TEST(LeastSquares, SingleColumnFitsTheMean)
{
    Matrix h(2, 1);
    h << 1, 1;
    Matrix t(2, 1);
    t << 0, 2;
    EXPECT_NEAR(dscn::least_squares(h, t)(0, 0), 1.0, 1e-14);
}

TEST(LeastSquares, RankOneSystemGivesMinimumNorm)
{
    const Matrix h = Matrix::Ones(2, 2);
    Matrix t(2, 1);
    t << 2, 2;
    const Matrix beta = dscn::least_squares(h, t);
    EXPECT_NEAR(beta(0, 0), 1.0, 1e-12);
    EXPECT_NEAR(beta(1, 0), 1.0, 1e-12);
}

TEST(LeastSquares, Errors)
{
    EXPECT_THROW(dscn::least_squares(Matrix::Ones(3, 2), Matrix::Ones(2, 1)), dscn::dimension_error);
    Matrix h = Matrix::Ones(2, 2);
    h(0, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(dscn::least_squares(h, Matrix::Ones(2, 1)), dscn::invalid_input);
    h(0, 1) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(dscn::least_squares(h, Matrix::Ones(2, 1)), dscn::invalid_input);
    EXPECT_THROW(dscn::least_squares(Matrix(0, 2), Matrix(0, 1)), dscn::invalid_input);
}

TEST(LeastSquares, AgreesWithNormalEquationsOnWellConditionedSystems)
{
    std::mt19937_64 rng(20);
    std::uniform_int_distribution<int> size(1, 8);
    int checked = 0;
    while (checked < 200) {
        const int l = size(rng);
        const int n = std::max(l, size(rng));
        const Matrix h = random_matrix(n, l, rng);
        const Matrix t = random_matrix(n, size(rng) % 3 + 1, rng);
        Eigen::JacobiSVD<Matrix> svd(h);
        const auto& s = svd.singularValues();
        if (s(s.size() - 1) * 1e6 < s(0))
            continue;
        const Matrix expected = from_grid(oracle::normal_equations(to_grid(h), to_grid(t)));
        const Matrix got = dscn::least_squares(h, t);
        ASSERT_EQ(got.rows(), l);
        for (Eigen::Index i = 0; i < got.rows(); ++i)
            for (Eigen::Index j = 0; j < got.cols(); ++j)
                ASSERT_NEAR(got(i, j), expected(i, j), 1e-8) << "instance " << checked;
        ++checked;
    }
}

TEST(LeastSquares, ResidualIsOptimalUnderPerturbation)
{
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g(0.0, 1e-3);
    for (int inst = 0; inst < 20; ++inst) {
        const Matrix h = random_matrix(7, 4, rng);
        const Matrix t = random_matrix(7, 2, rng);
        const Matrix beta = dscn::least_squares(h, t);
        const double best = (h * beta - t).norm();
        for (int k = 0; k < 100; ++k) {
            Matrix other = beta;
            for (Eigen::Index i = 0; i < other.size(); ++i)
                other.data()[i] += g(rng);
            EXPECT_LE(best, (h * other - t).norm() + 1e-10);
        }
    }
}

// A = U diag(s) V^T with known factors, so pinv(A) T = V diag(1/s) U^T T
// is available without any library decomposition.
TEST(LeastSquares, MinimumNormOnConstructedRankDeficientSystems)
{
    std::mt19937_64 rng(22);
    std::uniform_int_distribution<int> size(2, 8);
    std::uniform_real_distribution<double> sv(0.5, 2.0);
    for (int inst = 0; inst < 50; ++inst) {
        const auto n = static_cast<std::size_t>(size(rng));
        const auto l = static_cast<std::size_t>(size(rng));
        const auto k = std::uniform_int_distribution<std::size_t>(1, std::min(n, l) - 1)(rng);
        const auto u = oracle::random_orthonormal(n, k, rng);
        const auto v = oracle::random_orthonormal(l, k, rng);
        auto us = u;
        auto vs_inv = v;
        for (std::size_t j = 0; j < k; ++j) {
            const double s = sv(rng);
            for (std::size_t i = 0; i < n; ++i)
                us[i][j] *= s;
            for (std::size_t i = 0; i < l; ++i)
                vs_inv[i][j] /= s;
        }
        const auto a = oracle::multiply(us, oracle::transpose(v));
        const Matrix t = random_matrix(static_cast<Eigen::Index>(n), 2, rng);
        const auto expected = oracle::multiply(vs_inv, oracle::multiply(oracle::transpose(u), to_grid(t)));

        const Matrix h = from_grid(a);
        const Matrix got = dscn::least_squares(h, t);
        const Matrix want = from_grid(expected);
        for (Eigen::Index i = 0; i < got.rows(); ++i)
            for (Eigen::Index j = 0; j < got.cols(); ++j)
                ASSERT_NEAR(got(i, j), want(i, j), 1e-8) << "instance " << inst;

        // Any other minimizer differs by a null-space component and is longer.
        const Matrix null_basis = from_grid(oracle::random_orthonormal(l, l, rng));
        for (Eigen::Index c = 0; c < null_basis.cols(); ++c) {
            Vector z = null_basis.col(c);
            z -= from_grid(v) * (from_grid(v).transpose() * z);
            if (z.norm() < 1e-6)
                continue;
            Matrix other = got;
            other.col(0) += z;
            EXPECT_NEAR((h * other - t).norm(), (h * got - t).norm(), 1e-10);
            EXPECT_GE(other.norm(), got.norm() - 1e-10);
        }
    }
}

TEST(NumericalRank, Examples)
{
    EXPECT_EQ(dscn::numerical_rank(Matrix::Identity(3, 3)), 3);
    Matrix a(2, 2);
    a << 1, 2, 2, 4;
    EXPECT_EQ(dscn::numerical_rank(a), 1);
    EXPECT_EQ(dscn::numerical_rank(Matrix::Zero(2, 2)), 0);
}

TEST(NumericalRank, TransposeInvariantAndTolerance)
{
    std::mt19937_64 rng(23);
    for (int inst = 0; inst < 30; ++inst) {
        const Matrix a = random_matrix(6, 3, rng) * random_matrix(3, 5, rng);
        EXPECT_EQ(dscn::numerical_rank(a), dscn::numerical_rank(Matrix(a.transpose())));
        EXPECT_EQ(dscn::numerical_rank(a), 3);
    }
    EXPECT_THROW(dscn::numerical_rank(Matrix::Identity(2, 2), -1.0), dscn::invalid_input);
    Matrix d = Matrix::Zero(3, 3);
    d.diagonal() << 1.0, 0.1, 0.01;
    EXPECT_EQ(dscn::numerical_rank(d, 0.05), 2);
    EXPECT_EQ(dscn::numerical_rank(d, 0.0), 3);
}

TEST(FrobeniusNorm, Examples)
{
    EXPECT_EQ(dscn::frobenius_norm(Matrix::Zero(3, 2)), 0.0);
    Matrix a(2, 1);
    a << 3, 4;
    EXPECT_DOUBLE_EQ(dscn::frobenius_norm(a), 5.0);
    EXPECT_NEAR(dscn::frobenius_norm(Matrix::Identity(2, 2)), 1.41421356, 1e-8);
}

TEST(OrthogonalBasis, SkipsDependentColumnsAndStaysOrthonormal)
{
    std::mt19937_64 rng(24);
    dscn::orthogonal_basis basis(10, 2);
    const Matrix cols = random_matrix(10, 4, rng);
    for (Eigen::Index j = 0; j < 4; ++j)
        EXPECT_TRUE(basis.append(cols.col(j)).has_value());
    EXPECT_FALSE(basis.append(cols.col(0) + 2.0 * cols.col(3)).has_value());
    EXPECT_FALSE(basis.append(Vector::Zero(10)).has_value());
    EXPECT_EQ(basis.rank(), 4);
    const Matrix q = basis.basis();
    EXPECT_LT((q.transpose() * q - Matrix::Identity(4, 4)).norm(), 1e-14);
}
