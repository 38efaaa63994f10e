#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ivdr/dataset.hpp"
#include "ivdr/numerics.hpp"
#include "ivdr/three_step.hpp"

namespace ivdr {

/// Parameters of the joint model at one threshold y:
///
///   I*  = X'beta1 + Y2 beta2 + U,      I = 1{I* >= 0} = 1{Y <= y}
///   Y2  = X'gamma1 + Z'gamma2 + V,     Var(U) = 1, Var(V) = sigma2_sq
///
/// `rho` is the correlation Corr(U, V) = sigma12 / sigma2, so that
///   U = (rho / sigma2) V + eps,  eps ~ N(0, 1 - rho^2).
/// In the coefficient-on-V notation (rho' = sigma12 / sigma2^2) this is
/// rho' = rho / sigma2 and sigma_eps = sqrt(1 - rho'^2 sigma2^2) = sqrt(1 - rho^2).
struct ThetaFull {
    Eigen::VectorXd beta1;   ///< length k
    double beta2 = 0.0;
    Eigen::VectorXd gamma1;  ///< length k
    Eigen::VectorXd gamma2;  ///< length l
    double rho = 0.0;        ///< in (-1, 1)
    double sigma2_sq = 1.0;  ///< > 0

    Eigen::Index k() const { return beta1.size(); }
    Eigen::Index l() const { return gamma2.size(); }
    Eigen::Index size() const { return 2 * k() + l() + 3; }

    double sigma_eps() const;
    /// Coefficient on V in the structural index, rho / sigma2.
    double control_coefficient() const;

    /// Flat layout (beta1, beta2, gamma1, gamma2, rho, sigma2_sq).
    Eigen::VectorXd to_vector() const;
    static ThetaFull from_vector(const Eigen::VectorXd& v, Eigen::Index k, Eigen::Index l);

    /// Coefficients the residual-augmented probit estimates.
    ThetaTilde to_tilde() const;
    /// Inverse of to_tilde given the first-stage coefficients and variance.
    static ThetaFull from_tilde(const ThetaTilde& tilde, const Eigen::VectorXd& gamma,
                                double sigma2_sq, Eigen::Index k, Eigen::Index l);
};

/// Constraint maps matching ThetaFull::to_vector().
std::vector<Transform> ml_transforms(Eigen::Index k, Eigen::Index l);

struct MlValue {
    double value = 0.0;
    Eigen::VectorXd gradient;  ///< d value / d theta, flat layout
};

/// Joint log-likelihood of (1{Y <= y}, Y2) and its analytic score.
/// Throws NonFiniteObjective when 1 - rho^2 underflows and InvalidArgument for
/// sigma2_sq <= 0 or mismatched dimensions.
MlValue ml_loglik(const ThetaFull& theta, const Dataset& data, double threshold);

struct IvProbitMlFit {
    ThetaFull theta;
    double loglik = 0.0;
    bool converged = false;
    int iterations = 0;
    Eigen::VectorXd score_at_opt;  ///< score in the optimiser's unconstrained space
};

/// Maximum likelihood at threshold y. Without `start` the three-step
/// estimate mapped through ThetaFull::from_tilde is used.
/// Throws DegenerateOutcome for a constant indicator and BoundarySolution when
/// the solution drifts to |atanh(rho)| > 7.
IvProbitMlFit ml_fit(const Dataset& data, double threshold,
                     const std::optional<ThetaFull>& start = std::nullopt,
                     const OptimOptions& options = {});

/// Phi(x'beta1 + y2 beta2).
double ml_cdf_at(const IvProbitMlFit& fit, const Eigen::VectorXd& x, double y2);

}  // namespace ivdr
