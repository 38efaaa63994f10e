#pragma once

#include <Eigen/Dense>

#include "ivdr/dataset.hpp"
#include "ivdr/numerics.hpp"

namespace ivdr {

/// First stage: OLS of Y2 on [X, Z].
struct FirstStage {
    OlsFit gamma;               ///< coefficients ordered (gamma1, gamma2)
    Eigen::VectorXd residuals;  ///< V-hat
    double f_statistic = 0.0;   ///< homoskedastic Wald F for gamma2 = 0
    bool degenerate = false;    ///< Y2 is an exact linear function of (X, Z)

    /// ML variance of the first-stage error, RSS / n.
    double sigma2_sq() const { return gamma.rss / static_cast<double>(residuals.size()); }
};

/// Scaled coefficients of the residual-augmented probit
///   P(Y <= y | X, Y2, V) = Phi(X'b1 + Y2 b2 + V r).
struct ThetaTilde {
    Eigen::VectorXd beta1;
    double beta2 = 0.0;
    double rho = 0.0;
    Eigen::MatrixXd vcov;  ///< (beta1, beta2, rho) order; empty if unknown
};

FirstStage first_stage(const Dataset& data);

/// Probit of 1{Y <= y} on [X, Y2, residuals].
/// Throws RankDeficient for an all-zero residual vector, DegenerateOutcome and
/// SeparationSuspected as probit_fit does.
ThetaTilde second_stage(const Dataset& data, const Eigen::VectorXd& residuals, double threshold);

/// (1/n) sum_i Phi(x'b1 + y2 b2 + V_i r): the confounder averaged out over the
/// empirical first-stage residuals.
double three_step_cdf_at(const ThetaTilde& theta, const Eigen::VectorXd& residuals,
                         const Eigen::VectorXd& x, double y2);

}  // namespace ivdr
