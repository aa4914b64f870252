#pragma once

// Reference computations written without the library's numerics: plain
// loops over std::vector, no Eigen decompositions.

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

using grid = std::vector<std::vector<double>>; // row-major

inline grid zeros(std::size_t rows, std::size_t cols)
{
    return grid(rows, std::vector<double>(cols, 0.0));
}

inline grid transpose(const grid& a)
{
    grid t = zeros(a.empty() ? 0 : a[0].size(), a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j)
            t[j][i] = a[i][j];
    return t;
}

inline grid multiply(const grid& a, const grid& b)
{
    grid c = zeros(a.size(), b.empty() ? 0 : b[0].size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = 0; k < b.size(); ++k)
            for (std::size_t j = 0; j < b[k].size(); ++j)
                c[i][j] += a[i][k] * b[k][j];
    return c;
}

/// Solves A X = B by Gaussian elimination with partial pivoting.
inline grid gauss_solve(grid a, grid b)
{
    const std::size_t n = a.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t i = col + 1; i < n; ++i)
            if (std::abs(a[i][col]) > std::abs(a[piv][col]))
                piv = i;
        if (a[piv][col] == 0.0)
            throw std::runtime_error("gauss_solve: singular system");
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t i = col + 1; i < n; ++i) {
            const double f = a[i][col] / a[col][col];
            for (std::size_t j = col; j < n; ++j)
                a[i][j] -= f * a[col][j];
            for (std::size_t j = 0; j < b[i].size(); ++j)
                b[i][j] -= f * b[col][j];
        }
    }
    grid x = zeros(n, b.empty() ? 0 : b[0].size());
    for (std::size_t ii = n; ii-- > 0;) {
        for (std::size_t j = 0; j < b[ii].size(); ++j) {
            double s = b[ii][j];
            for (std::size_t k = ii + 1; k < n; ++k)
                s -= a[ii][k] * x[k][j];
            x[ii][j] = s / a[ii][ii];
        }
    }
    return x;
}

/// beta = (H^T H)^{-1} H^T T.
inline grid normal_equations(const grid& h, const grid& t)
{
    const grid ht = transpose(h);
    return gauss_solve(multiply(ht, h), multiply(ht, t));
}

/// n x k matrix with orthonormal columns (modified Gram-Schmidt, repeated).
inline grid random_orthonormal(std::size_t n, std::size_t k, std::mt19937_64& rng)
{
    std::normal_distribution<double> gauss;
    grid q = zeros(n, k);
    for (std::size_t j = 0; j < k; ++j) {
        std::vector<double> v(n);
        for (auto& x : v)
            x = gauss(rng);
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t p = 0; p < j; ++p) {
                double dot = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    dot += q[i][p] * v[i];
                for (std::size_t i = 0; i < n; ++i)
                    v[i] -= dot * q[i][p];
            }
        }
        double norm = 0.0;
        for (const double x : v)
            norm += x * x;
        norm = std::sqrt(norm);
        for (std::size_t i = 0; i < n; ++i)
            q[i][j] = v[i] / norm;
    }
    return q;
}

inline double sigmoid(double z)
{
    return 1.0 / (1.0 + std::exp(-z));
}

inline double benchmark(double x)
{
    return 0.2 * std::exp(-std::pow(10.0 * x - 4.0, 2)) +
           0.5 * std::exp(-std::pow(80.0 * x - 40.0, 2)) +
           0.3 * std::exp(-std::pow(80.0 * x - 20.0, 2));
}

} // namespace oracle
