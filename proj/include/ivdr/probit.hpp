#pragma once

#include <Eigen/Dense>

namespace ivdr {

struct ProbitFit {
    Eigen::VectorXd coefficients;
    double loglik = 0.0;
    bool converged = false;
    int iterations = 0;
    bool separated = false;  ///< every observation fitted with probability > 1 - 1e-6
    Eigen::MatrixXd vcov;  ///< inverse observed information at the estimate

    Eigen::VectorXd standard_errors() const { return vcov.diagonal().cwiseSqrt(); }
};

struct ProbitOptions {
    int max_iterations = 100;
    double gradient_tolerance = 1e-8;
    double separation_norm = 1e3;
};

/// sum_i [ I_i log Phi(x_i'b) + (1 - I_i) log Phi(-x_i'b) ], with the score
/// written to `grad` when non-null.
double probit_loglik(const Eigen::MatrixXd& design, const Eigen::VectorXd& indicator,
                     const Eigen::VectorXd& coefficients, Eigen::VectorXd* grad = nullptr);

/// Probit maximum likelihood by damped Newton-Raphson.
///
/// Throws DegenerateOutcome when the indicator is constant, RankDeficient
/// when the design is singular and SeparationSuspected once the coefficient
/// norm exceeds `separation_norm`. An iteration cap without convergence
/// returns converged = false. Complete separation usually stops on the
/// gradient tolerance at a moderate norm; it is reported through `separated`
/// and the coefficients are returned as found.
ProbitFit probit_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& indicator,
                     const ProbitOptions& options = {});

}  // namespace ivdr
