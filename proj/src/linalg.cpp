#include "speclab/linalg.hpp"

#include <cmath>

namespace speclab {

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

std::vector<double> matvec(const Matrix& m, std::span<const double> x) {
    std::vector<double> y(m.rows, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) y[r] = dot(m.row(r), x);
    return y;
}

bool cholesky_lower(Matrix& a) {
    const std::size_t n = a.rows;
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a.at(j, j);
        for (std::size_t k = 0; k < j; ++k) diag -= a.at(j, k) * a.at(j, k);
        if (!(diag > 0.0) || !std::isfinite(diag)) return false;
        const double ljj = std::sqrt(diag);
        a.at(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = a.at(i, j);
            for (std::size_t k = 0; k < j; ++k) v -= a.at(i, k) * a.at(j, k);
            a.at(i, j) = v / ljj;
        }
        for (std::size_t c = j + 1; c < n; ++c) a.at(j, c) = 0.0;
    }
    return true;
}

std::vector<double> solve_lower(const Matrix& lower, std::span<const double> b) {
    const std::size_t n = lower.rows;
    std::vector<double> z(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double v = b[i];
        const auto row = lower.row(i);
        for (std::size_t k = 0; k < i; ++k) v -= row[k] * z[k];
        z[i] = v / row[i];
    }
    return z;
}

std::vector<double> solve_lower_transpose(const Matrix& lower, std::span<const double> b) {
    const std::size_t n = lower.rows;
    std::vector<double> x(n, 0.0);
    for (std::size_t ii = n; ii > 0; --ii) {
        const std::size_t i = ii - 1;
        double v = b[i];
        for (std::size_t k = i + 1; k < n; ++k) v -= lower.at(k, i) * x[k];
        x[i] = v / lower.at(i, i);
    }
    return x;
}

double mean_of(std::span<const double> values) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return values.empty() ? 0.0 : acc / static_cast<double>(values.size());
}

double population_std(std::span<const double> values) {
    if (values.empty()) return 0.0;
    const double m = mean_of(values);
    double acc = 0.0;
    for (double v : values) acc += (v - m) * (v - m);
    return std::sqrt(acc / static_cast<double>(values.size()));
}

}  // namespace speclab
