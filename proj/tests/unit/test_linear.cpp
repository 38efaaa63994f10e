#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "ivdr/dataio.hpp"
#include "ivdr/linear.hpp"
#include "ivdr/three_step.hpp"
#include "oracles.hpp"

using namespace ivdr;

TEST_CASE("ols standard errors match the textbook formula")
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    Eigen::MatrixXd x(40, 3);
    Eigen::VectorXd y(40);
    for (Eigen::Index i = 0; i < 40; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = z(rng);
        x(i, 2) = z(rng);
        y[i] = 1 + 2 * x(i, 1) - x(i, 2) + z(rng);
    }
    const LinearFit f = ols_linear(x, y);
    const Eigen::MatrixXd xtx_inv = (x.transpose() * x).inverse();
    const Eigen::VectorXd b = xtx_inv * x.transpose() * y;
    const double s2 = (y - x * b).squaredNorm() / 37.0;
    CHECK((f.coefficients - b).norm() < 1e-12);
    CHECK((f.vcov - s2 * xtx_inv).norm() < 1e-12);
    const Prediction p = predict(f, Eigen::Vector3d(1, 0.5, -0.5));
    CHECK(p.value == doctest::Approx(b[0] + 0.5 * b[1] - 0.5 * b[2]));
    const Eigen::Vector3d r(1, 0.5, -0.5);
    CHECK(p.standard_error == doctest::Approx(std::sqrt(r.dot(s2 * xtx_inv * r))));
}

TEST_CASE("2SLS equals the just-identified IV formula")
{
    const Dataset d = oracle::random_iv_data(300, 4);
    const LinearFit f = two_stage_least_squares(d);
    const Eigen::MatrixXd zz = d.first_stage_design();
    const Eigen::MatrixXd xx = d.structural_design();
    const Eigen::VectorXd b = (zz.transpose() * xx).inverse() * zz.transpose() * d.outcome();
    CHECK((f.coefficients - b).norm() < 1e-10);
    const Eigen::VectorXd e = d.outcome() - xx * b;
    const double s2 = e.squaredNorm() / (300.0 - 3.0);
    const Eigen::MatrixXd zx_inv = (zz.transpose() * xx).inverse();
    const Eigen::MatrixXd v = s2 * zx_inv * (zz.transpose() * zz) * zx_inv.transpose();
    CHECK((f.vcov - v).norm() < 1e-10);
}

TEST_CASE("Mroz linear models")
{
    if (!std::filesystem::exists(IVDR_MROZ_CSV)) {
        MESSAGE("Mroz file not present, skipped");
        return;
    }
    const ColumnSpec spec = parse_column_spec(
        parse_key_values("outcome=wage:log\nendogenous=educ\nexogenous=exper,exper:square\ninstruments=motheduc\n"));
    const Dataset d = load_csv(IVDR_MROZ_CSV, spec).data;
    const LinearFit o = ols_linear(d.structural_design(), d.outcome());
    // order: const, exper, exper^2, educ
    CHECK(std::round(o.coefficients[0] * 1e4) / 1e4 == doctest::Approx(-0.5220));
    CHECK(std::round(o.coefficients[3] * 1e4) / 1e4 == doctest::Approx(0.1075));
    CHECK(std::round(o.coefficients[1] * 1e4) / 1e4 == doctest::Approx(0.0416));
    CHECK(std::round(o.coefficients[2] * 1e4) / 1e4 == doctest::Approx(-0.0008));
    const LinearFit iv = two_stage_least_squares(d);
    CHECK(std::round(iv.coefficients[3] * 1e4) / 1e4 == doctest::Approx(0.0493));
    CHECK(std::round(iv.standard_errors()[3] * 1e4) / 1e4 == doctest::Approx(0.0374));
    const FirstStage fs = first_stage(d);
    CHECK(fs.f_statistic > 65.0);
    CHECK(fs.f_statistic < 85.0);
    const EvalPoint p = make_eval_point(spec, {{"educ", 12.0}, {"exper", 12.0}});
    Eigen::VectorXd row(4);
    row << p.x, p.y2;
    CHECK(std::round(predict(iv, row).value * 1e4) / 1e4 == doctest::Approx(1.1948));
}
