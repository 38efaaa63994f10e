#pragma once

// Independent reference implementations used by the tests. None of these
// share code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ivdr/dataset.hpp"

namespace oracle {

/// erf by its Maclaurin series in long double; fine for |x| <= 3.
inline long double erf_series(long double x)
{
    long double sum = 0.0L;
    long double term = x;  // (-1)^n x^(2n+1) / n!
    for (int n = 0; n < 200; ++n) {
        const long double add = term / (2 * n + 1);
        sum += add;
        if (std::fabs(add) < 1e-30L) break;
        term *= -x * x / (n + 1);
    }
    return sum * 2.0L / std::sqrt(3.14159265358979323846264338327950288L);
}

inline double phi_series(double t)
{
    return static_cast<double>(0.5L * (1.0L + erf_series(t / std::sqrt(2.0L))));
}

/// Least-squares projection onto nondecreasing sequences by enumerating all
/// 2^(n-1) partitions into consecutive blocks. Every feasible block-mean
/// sequence is monotone and the optimum is one of them.
inline std::vector<double> isotonic_by_enumeration(const std::vector<double>& y)
{
    const std::size_t n = y.size();
    if (n == 0) return {};
    std::vector<double> best;
    double best_sse = std::numeric_limits<double>::infinity();
    for (unsigned long mask = 0; mask < (1UL << (n - 1)); ++mask) {
        std::vector<double> fit(n);
        std::size_t start = 0;
        double prev = -std::numeric_limits<double>::infinity();
        bool feasible = true;
        for (std::size_t i = 0; i < n && feasible; ++i) {
            const bool cut = i == n - 1 || (mask >> i & 1UL);
            if (!cut) continue;
            double mean = 0.0;
            for (std::size_t j = start; j <= i; ++j) mean += y[j];
            mean /= static_cast<double>(i - start + 1);
            if (mean < prev - 1e-15) feasible = false;
            for (std::size_t j = start; j <= i; ++j) fit[j] = mean;
            prev = mean;
            start = i + 1;
        }
        if (!feasible) continue;
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) sse += (fit[i] - y[i]) * (fit[i] - y[i]);
        if (sse < best_sse) {
            best_sse = sse;
            best = fit;
        }
    }
    return best;
}

/// Discrete rearrangement by direct evaluation of the indicator sum:
/// F~(y_g) = (1/L) sum_u 1{Q(u) <= y_g}, Q(u) = min{grid y : F(y) >= u}.
inline std::vector<double> rearrange_by_indicator_sum(const std::vector<double>& grid,
                                                      const std::vector<double>& values,
                                                      const std::vector<double>& levels)
{
    std::vector<double> out(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        std::size_t count = 0;
        for (const double u : levels) {
            double q = std::numeric_limits<double>::infinity();
            for (std::size_t h = 0; h < grid.size(); ++h) {
                if (values[h] >= u) {
                    q = grid[h];
                    break;
                }
            }
            if (q <= grid[g]) ++count;
        }
        out[g] = std::clamp(static_cast<double>(count) / static_cast<double>(levels.size()), 0.0, 1.0);
    }
    return out;
}

/// Random dataset with X = [1, x], one instrument and correlated errors.
inline ivdr::Dataset random_iv_data(std::size_t n, std::uint64_t seed, double rho = 0.5)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z01;
    Eigen::VectorXd y(n), y2(n);
    Eigen::MatrixXd x(n, 1), z(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = z01(rng), zi = z01(rng), e1 = z01(rng), e2 = z01(rng);
        const double v = rho * e1 + std::sqrt(1 - rho * rho) * e2;
        x(i, 0) = xi;
        z(i, 0) = zi;
        y2[i] = 0.5 + xi + zi + v;
        y[i] = 1.0 + 0.5 * xi + y2[i] + e1;
    }
    return ivdr::Dataset::with_intercept(y, y2, x, z);
}

}  // namespace oracle
