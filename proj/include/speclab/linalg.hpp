#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace speclab {

/// Dense row-major matrix of doubles. Deliberately minimal: the toolkit only
/// needs storage, dot products, and a Cholesky solve.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // rows * cols, row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const {
        return {data.data() + r * cols, cols};
    }
};

double dot(std::span<const double> a, std::span<const double> b);

/// y = M x  (M.rows results).
std::vector<double> matvec(const Matrix& m, std::span<const double> x);

/// In-place lower Cholesky factorization of a symmetric matrix. Only the
/// lower triangle of `a` is read; on success `a` holds L (upper triangle
/// zeroed) with a = L L^T. Returns false when the matrix is not positive
/// definite.
bool cholesky_lower(Matrix& a);

/// Solves L z = b for lower-triangular L by forward substitution.
std::vector<double> solve_lower(const Matrix& lower, std::span<const double> b);

/// Solves L^T x = b for lower-triangular L by back substitution.
std::vector<double> solve_lower_transpose(const Matrix& lower, std::span<const double> b);

/// Population mean and standard deviation (divide by n, two-pass).
double mean_of(std::span<const double> values);
double population_std(std::span<const double> values);

}  // namespace speclab
