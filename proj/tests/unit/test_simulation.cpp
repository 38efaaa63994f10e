#include <doctest.h>

#include <cmath>
#include <iostream>
#include <limits>

#include "ivdr/error.hpp"
#include "ivdr/numerics.hpp"
#include "ivdr/simulation.hpp"

using namespace ivdr;

TEST_CASE("true_cdf")
{
    CHECK(true_cdf(1.9, 0.3, -2.0) == 0.0);
    CHECK(true_cdf(3.0, 1.0, 1.0) == 0.5);
    CHECK(true_cdf(3.0, 2.0, 2.0) == doctest::Approx(0.022750131948179).epsilon(1e-12));
    CHECK(true_cdf(2.0, 0.0, 0.0) == doctest::Approx(norm_cdf(1.0)));
}

TEST_CASE("draw_dgp is seeded")
{
    DgpConfig c;
    c.n = 50;
    c.seed = 4;
    const Dataset a = draw_dgp(c), b = draw_dgp(c);
    CHECK(a.fingerprint() == b.fingerprint());
    c.seed = 5;
    CHECK(draw_dgp(c).fingerprint() != a.fingerprint());
    c.n = 5;
    CHECK_THROWS_AS(draw_dgp(c), Error);
}

TEST_CASE("large draw moments")
{
    // the same seed with and without censoring shares the latent draws
    DgpConfig c;
    c.n = 1000000;
    c.rho = 0.0;
    c.seed = 2;
    c.censor_at = -std::numeric_limits<double>::infinity();
    const Dataset latent = draw_dgp(c);
    c.censor_at = 2.0;
    const Dataset censored = draw_dgp(c);

    const Eigen::ArrayXd x = latent.exogenous().col(1).array(), z = latent.instruments().col(0).array();
    const Eigen::ArrayXd v = latent.endogenous().array() - 1.0 - x - z;
    const Eigen::ArrayXd u = latent.outcome().array() - 1.0 - x - latent.endogenous().array();
    const double corr = (u * v).mean() / std::sqrt((u * u).mean() * (v * v).mean());
    CHECK(std::abs(corr) < 0.005);
    CHECK(std::abs((v * v).mean() - 1.0) < 0.01);
    CHECK(std::abs((u * u).mean() - 1.0) < 0.01);

    CHECK((censored.outcome().array() >= 2.0).all());
    CHECK((censored.outcome().array() == latent.outcome().array().max(2.0)).all());
    // Y~ = 2 + 2X + Z + V + U ~ N(2, 4 + 1 + 1 + 1) when rho = 0
    const double at_floor = (latent.outcome().array() <= 2.0).cast<double>().mean();
    const double at_three = (latent.outcome().array() <= 3.0).cast<double>().mean();
    CHECK(std::abs(at_floor - 0.5) < 0.002);
    CHECK(std::abs(at_three - norm_cdf(1.0 / std::sqrt(7.0))) < 0.002);
    CHECK((censored.outcome().array() == 2.0).cast<double>().mean() == at_floor);
}

TEST_CASE("oracle estimator has zero error and the decomposition holds")
{
    StudyConfig cfg;
    cfg.sample_sizes = {50};
    cfg.replications = 5;
    cfg.grid = ThresholdGrid::linspace(1.0, 5.0, 11);
    cfg.estimators = {{"oracle", [](const Dataset&, const ThresholdGrid& g, std::span<const Scenario> sc) {
                           std::vector<CdfCurve> out;
                           for (const Scenario& s : sc) {
                               CdfCurve c;
                               c.grid = g;
                               for (const double y : g.values()) c.values.push_back(true_cdf(y, s.x, s.y2));
                               c.status.assign(g.size(), PointStatus::Ok);
                               out.push_back(c);
                           }
                           return out;
                       }}};
    cfg.monotonizers = {Monotonizer::Isotonic};
    const McReport r = run_study(cfg);
    for (const McCell& c : r.cells) {
        // averaging identical values can leave rounding residue
        CHECK(c.avg_bias_sq < 1e-30);
        CHECK(c.avg_variance < 1e-30);
        CHECK(c.avg_mse < 1e-30);
    }
}

TEST_CASE("study decomposition, determinism and ordering")
{
    StudyConfig cfg;
    cfg.sample_sizes = {100, 200};
    cfg.replications = 30;
    cfg.estimators = {dr_estimator(Estimator::Probit), dr_estimator(Estimator::ThreeStep)};
    const McReport a = run_study(cfg);
    cfg.threads = 3;
    const McReport b = run_study(cfg);
    REQUIRE(a.cells.size() == 2 * 2 * 2 * 2);
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        const McCell& c = a.cells[i];
        CHECK(c.mse == b.cells[i].mse);
        CHECK(std::abs(c.avg_mse - (c.avg_bias_sq + c.avg_variance)) < 1e-12);
        for (std::size_t g = 0; g < c.mse.size(); ++g) {
            CHECK(std::abs(c.mse[g] - (c.bias_sq[g] + c.variance[g])) < 1e-12);
        }
    }
    for (const std::size_t n : cfg.sample_sizes) {
        const McCell& ols = a.find("probit", Monotonizer::Isotonic, n, {1.0, 1.0});
        const McCell& iv = a.find("three-step", Monotonizer::Isotonic, n, {1.0, 1.0});
        CHECK(iv.avg_bias_sq * 10.0 < ols.avg_bias_sq);
        const McCell& iv_r = a.find("three-step", Monotonizer::Rearrange, n, {1.0, 1.0});
        if (n == 100 && iv.avg_mse > iv_r.avg_mse) {
            std::cout << "note: isotonic MSE " << iv.avg_mse << " above rearrangement " << iv_r.avg_mse
                      << " at n=100\n";
        }
    }
}

TEST_CASE("doubling n roughly halves the variance")
{
    StudyConfig cfg;
    cfg.sample_sizes = {200, 400};
    cfg.replications = 500;
    cfg.scenarios = {{1.0, 1.0}};
    cfg.monotonizers = {Monotonizer::Isotonic};
    cfg.estimators = {dr_estimator(Estimator::ThreeStep)};
    const McReport r = run_study(cfg);
    const double ratio = r.find("three-step", Monotonizer::Isotonic, 400, {1.0, 1.0}).avg_variance /
                         r.find("three-step", Monotonizer::Isotonic, 200, {1.0, 1.0}).avg_variance;
    CHECK(ratio > 0.35);
    CHECK(ratio < 0.65);
}

TEST_CASE("study validation")
{
    StudyConfig cfg;
    cfg.replications = 1;
    cfg.estimators = {dr_estimator(Estimator::Probit)};
    CHECK_THROWS_AS(run_study(cfg), Error);
    cfg.replications = 2;
    cfg.estimators.clear();
    CHECK_THROWS_AS(run_study(cfg), Error);
}
