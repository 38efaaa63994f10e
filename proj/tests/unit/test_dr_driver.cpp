#include <doctest.h>

#include <cmath>
#include <random>

#include "ivdr/dr_driver.hpp"
#include "ivdr/monotone.hpp"
#include "ivdr/numerics.hpp"
#include "ivdr/simulation.hpp"
#include "oracles.hpp"

using namespace ivdr;

namespace {

EvalPoint point(double x, double y2)
{
    return {Eigen::Vector2d(1.0, x), y2};
}

}  // namespace

TEST_CASE("grids outside the data range are degenerate")
{
    const Dataset d = oracle::random_iv_data(100, 1);
    const double lo = d.outcome().minCoeff(), hi = d.outcome().maxCoeff();
    for (const Estimator e : {Estimator::Probit, Estimator::ThreeStep, Estimator::IvMl}) {
        const CdfCurve below = fit_curve(d, e, ThresholdGrid::linspace(lo - 3, lo - 1, 5), point(0, 0));
        const CdfCurve above = fit_curve(d, e, ThresholdGrid::linspace(hi + 1, hi + 3, 5), point(0, 0));
        for (std::size_t i = 0; i < 5; ++i) {
            CHECK(below.values[i] == 0.0);
            CHECK(below.status[i] == PointStatus::DegenerateLow);
            CHECK(above.values[i] == 1.0);
            CHECK(above.status[i] == PointStatus::DegenerateHigh);
        }
    }
}

TEST_CASE("probit curve equals direct probit fits")
{
    const Dataset d = oracle::random_iv_data(300, 2);
    const ThresholdGrid grid = ThresholdGrid::linspace(0.0, 4.0, 9);
    const EvalPoint p = point(0.3, 1.1);
    const CdfCurve c = fit_curve(d, Estimator::Probit, grid, p);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const ProbitFit f = probit_fit(d.structural_design(), d.indicator(grid[i]));
        const double direct = norm_cdf(f.coefficients[0] + 0.3 * f.coefficients[1] + 1.1 * f.coefficients[2]);
        CHECK(std::abs(c.values[i] - direct) < 1e-12);
    }
}

TEST_CASE("flags partition the observed grid")
{
    const Dataset d = oracle::random_iv_data(80, 3);
    const ThresholdGrid grid = ThresholdGrid::observed(d);
    CHECK(grid.size() == 80);
    const CdfCurve c = fit_curve(d, Estimator::ThreeStep, grid, point(0, 1));
    CHECK(c.status.back() == PointStatus::DegenerateHigh);
    CHECK(c.values.back() == 1.0);
    for (std::size_t i = 0; i < c.values.size(); ++i) {
        CHECK(c.values[i] >= 0.0);
        CHECK(c.values[i] <= 1.0);
    }
}

TEST_CASE("threads do not change the result")
{
    const Dataset d = oracle::random_iv_data(200, 4);
    const ThresholdGrid grid = ThresholdGrid::linspace(0.5, 4.0, 12);
    for (const Estimator e : {Estimator::Probit, Estimator::ThreeStep, Estimator::IvMl}) {
        const CdfCurve a = fit_curve(d, e, grid, point(0.5, 1.0), {1});
        const CdfCurve b = fit_curve(d, e, grid, point(0.5, 1.0), {4});
        CHECK(a.values == b.values);
    }
}

TEST_CASE("separated tail point is filled from its neighbour")
{
    // The lowest outcome sits a hair outside the segment between two extreme
    // points, so the first threshold is separated only by a very steep slope.
    const std::size_t n = 60;
    Eigen::VectorXd y(n), y2(n);
    Eigen::MatrixXd x(n, 1), z(n, 1);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nz;
    for (std::size_t i = 0; i < n; ++i) {
        x(i, 0) = nz(rng);
        z(i, 0) = nz(rng);
        y2[i] = z(i, 0) + nz(rng);
        y[i] = y2[i] + nz(rng);
    }
    const double top = y2.maxCoeff() + 1.0;
    x(1, 0) = -1.0;
    x(2, 0) = 1.0;
    y2[1] = y2[2] = top;
    x(0, 0) = 0.0;
    y2[0] = top + 1e-6;
    y[0] = -50.0;
    const Dataset d = Dataset::with_intercept(y, y2, x, z);
    const ThresholdGrid grid({-40.0, -1.0, 0.0, 1.0});
    const DrFit fit(d, Estimator::Probit, grid);
    REQUIRE(fit.status()[0] == PointStatus::Failed);
    CHECK(fit.failure(0) == ErrorCode::SeparationSuspected);
    CHECK(fit.failed_points() == 1);
    const CdfCurve c = fit.curve_at(point(0, 0));
    CHECK(c.values[0] == c.values[1]);
    CHECK(c.failed_points() == 1);
}

TEST_CASE("all points failing throws")
{
    // outcome perfectly ordered by Y2: every threshold separates
    const std::size_t n = 30;
    Eigen::VectorXd y(n), y2(n);
    Eigen::MatrixXd x(n, 1), z(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        y2[i] = 1e-6 * static_cast<double>(i);
        y[i] = 1e-6 * static_cast<double>(i);
        x(i, 0) = std::sin(static_cast<double>(i));
        z(i, 0) = std::cos(static_cast<double>(3 * i));
    }
    const Dataset d = Dataset::with_intercept(y, y2, x, z);
    CHECK_THROWS_AS(fit_curve(d, Estimator::Probit, ThresholdGrid({5.5e-6, 10.5e-6, 20.5e-6}), point(0, 0)), Error);
}

TEST_CASE("three-step on the censored design is close to the truth")
{
    DgpConfig cfg;
    cfg.n = 400;
    cfg.seed = 99;
    const Dataset d = draw_dgp(cfg);
    const ThresholdGrid grid = ThresholdGrid::linspace(1.0, 5.0, 50);
    const CdfCurve c = fit_curve(d, Estimator::ThreeStep, grid, point(1, 1));
    const MonotoneCurve m = isotonic(c);
    double sq = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double e = m.values[i] - true_cdf(grid[i], 1, 1);
        sq += e * e;
    }
    CHECK(sq / 50.0 < 0.01);
    // below the censoring point every indicator is 0
    CHECK(c.status[0] == PointStatus::DegenerateLow);
}

TEST_CASE("quantiles of a dense normal curve")
{
    const ThresholdGrid grid = ThresholdGrid::linspace(-1.0, 7.0, 801);
    MonotoneCurve m;
    m.grid = grid;
    for (std::size_t i = 0; i < grid.size(); ++i) m.values.push_back(norm_cdf(grid[i] - 3.0));
    const std::vector<double> levels = {0.5};
    const QuantileCurve q = quantiles_from_curve(m, levels);
    CHECK(std::abs(q.values[0] - 3.0) < 0.01);
    CHECK(q.flags[0] == QuantileFlag::Ok);
}

TEST_CASE("quantile range flags")
{
    MonotoneCurve m;
    m.grid = ThresholdGrid({1.0, 2.0, 3.0});
    m.values = {0.2, 0.5, 0.8};
    const std::vector<double> levels = {0.1, 0.2, 0.35, 0.8, 0.9};
    const QuantileCurve q = quantiles_from_curve(m, levels);
    CHECK(q.values[0] == 1.0);
    CHECK(q.flags[0] == QuantileFlag::BelowRange);
    CHECK(q.values[1] == 1.0);
    CHECK(q.values[2] == doctest::Approx(1.5));
    CHECK(q.values[3] == 3.0);
    CHECK(std::isinf(q.values[4]));
    CHECK(q.flags[4] == QuantileFlag::AboveRange);
}

TEST_CASE("quantiles of random monotone curves")
{
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u01;
    const std::vector<double> levels = default_quantile_levels();
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t g = 2 + trial % 30;
        std::vector<double> v(g);
        for (auto& x : v) x = u01(rng);
        std::sort(v.begin(), v.end());
        if (trial % 2 == 0) {
            // strictly increasing variant for the Galois check
            for (std::size_t i = 0; i < g; ++i) v[i] = (static_cast<double>(i) + u01(rng)) / static_cast<double>(g);
        }
        std::vector<double> ys(g);
        for (std::size_t i = 0; i < g; ++i) ys[i] = static_cast<double>(i) + 0.5 * u01(rng);
        MonotoneCurve m;
        m.grid = ThresholdGrid(ys);
        m.values = v;
        const QuantileCurve q = quantiles_from_curve(m, levels);
        for (std::size_t j = 1; j < levels.size(); ++j) CHECK(q.values[j] >= q.values[j - 1]);
        // brute-force inf over the grid brackets the interpolated quantile
        for (std::size_t j = 0; j < levels.size(); ++j) {
            std::size_t first = g;
            for (std::size_t i = 0; i < g; ++i) {
                if (v[i] >= levels[j]) {
                    first = i;
                    break;
                }
            }
            if (first == g) {
                CHECK(std::isinf(q.values[j]));
                continue;
            }
            CHECK(q.values[j] <= ys[first]);
            if (first > 0) CHECK(q.values[j] > ys[first - 1] - 1e-12);
            if (trial % 2 == 0 && q.flags[j] == QuantileFlag::Ok) {
                CHECK(interpolate(m.grid, v, q.values[j]) >= levels[j] - 1e-12);
                CHECK(interpolate(m.grid, v, q.values[j] - 1.0) < levels[j]);
            }
        }
    }
}

TEST_CASE("estimator names")
{
    CHECK(parse_estimator("iv-ml") == Estimator::IvMl);
    CHECK(to_string(Estimator::ThreeStep) == "three-step");
    CHECK_THROWS_AS(parse_estimator("ols"), Error);
}
