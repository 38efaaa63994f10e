#pragma once

#include <functional>
#include <span>

#include <Eigen/Dense>

namespace ivdr {

// ---------------------------------------------------------------------------
// Standard normal distribution
// ---------------------------------------------------------------------------

/// Standard normal CDF, evaluated through erfc so both tails keep full
/// relative precision.
double norm_cdf(double t);

/// Standard normal density.
double norm_pdf(double t);

/// log Phi(t). Uses an asymptotic expansion below t = -30 instead of taking
/// the log of a tiny (or underflowed) probability.
double log_norm_cdf(double t);

/// Inverse Mills ratio phi(t) / Phi(t), stable for large negative t.
double inv_mills(double t);

/// Inverse of the standard normal CDF for p in (0, 1).
double norm_quantile(double p);

// ---------------------------------------------------------------------------
// Least squares
// ---------------------------------------------------------------------------

struct OlsFit {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd residuals;
    double rss = 0.0;
};

/// Ordinary least squares through a column-pivoting Householder QR.
/// Throws Error(RankDeficient) when the design is singular within 1e-10
/// relative to its largest pivot.
OlsFit ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& response);

/// Numerical rank of a design at the same tolerance ols() uses.
Eigen::Index design_rank(const Eigen::MatrixXd& design);

// ---------------------------------------------------------------------------
// Smooth maximisation
// ---------------------------------------------------------------------------

/// Per-coordinate constraint map. The optimiser works on an unconstrained
/// vector u and maps it to the natural parameter x coordinate-wise.
enum class Transform {
    Identity,     ///< x = u
    Correlation,  ///< x = tanh(u), x in (-1, 1)
    Positive,     ///< x = exp(u), x in (0, inf)
};

/// Objective returning f(x) and writing df/dx into grad (natural coordinates).
using SmoothObjective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

enum class OptimStatus {
    Converged,
    IterationLimit,
    LineSearchFailed,
    NonFiniteObjective,
};

struct OptimOptions {
    int max_iterations = 500;
    double gradient_tolerance = 1e-8;
};

struct OptimResult {
    Eigen::VectorXd argmax;    ///< natural coordinates
    Eigen::VectorXd unconstrained;
    Eigen::VectorXd gradient;  ///< gradient in the unconstrained space
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
    OptimStatus status = OptimStatus::IterationLimit;
};

double to_unconstrained(Transform t, double x);
double from_unconstrained(Transform t, double u);

/// Quasi-Newton (BFGS) maximiser with a cubic-interpolation Wolfe line search.
/// `transforms` is either empty (all Identity) or has one entry per coordinate,
/// and `start` must lie strictly inside the constraint set. On a non-finite
/// objective the last finite iterate is returned with status NonFiniteObjective.
OptimResult maximize_smooth(const SmoothObjective& objective, const Eigen::VectorXd& start,
                            std::span<const Transform> transforms = {},
                            const OptimOptions& options = {});

}  // namespace ivdr
