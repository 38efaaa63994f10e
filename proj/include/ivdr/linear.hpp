#pragma once

#include <Eigen/Dense>

#include "ivdr/dataset.hpp"

namespace ivdr {

/// Linear regression with homoskedastic standard errors (n - p degrees of
/// freedom). Regressor order is the design column order.
struct LinearFit {
    Eigen::VectorXd coefficients;
    Eigen::MatrixXd vcov;
    double sigma2 = 0.0;

    Eigen::VectorXd standard_errors() const { return vcov.diagonal().cwiseSqrt(); }
};

struct Prediction {
    double value = 0.0;
    double standard_error = 0.0;  ///< delta method: sqrt(x' V x)
};

LinearFit ols_linear(const Eigen::MatrixXd& design, const Eigen::VectorXd& response);

/// Two-stage least squares of Y on [X, Y2] with instruments [X, Z]. The error
/// variance uses residuals at the original regressors, not the fitted ones.
LinearFit two_stage_least_squares(const Dataset& data);

/// Linear prediction x'b at a row of the design.
Prediction predict(const LinearFit& fit, const Eigen::VectorXd& row);

}  // namespace ivdr
