#include "ivdr/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "ivdr/error.hpp"

namespace ivdr {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kHalfLog2Pi = 0.91893853320467274178;
constexpr double kTailCut = -30.0;
constexpr double kRankTolerance = 1e-10;

// 1 - 1/t^2 + 3/t^4 - 15/t^6 + ... ; the asymptotic series of
// Phi(t) * (-t) / phi(t) for t -> -inf. Accurate to ~1e-13 for |t| >= 30.
double mills_series(double t)
{
    const double z = 1.0 / (t * t);
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k <= 6; ++k) {
        term *= -static_cast<double>(2 * k - 1) * z;
        sum += term;
    }
    return sum;
}

}  // namespace

double norm_cdf(double t)
{
    return 0.5 * std::erfc(-t * kInvSqrt2);
}

double norm_pdf(double t)
{
    return kInvSqrt2Pi * std::exp(-0.5 * t * t);
}

double log_norm_cdf(double t)
{
    if (t < kTailCut) {
        return -0.5 * t * t - std::log(-t) - kHalfLog2Pi + std::log(mills_series(t));
    }
    if (t > 5.0) {
        return std::log1p(-0.5 * std::erfc(t * kInvSqrt2));
    }
    return std::log(norm_cdf(t));
}

double inv_mills(double t)
{
    if (t < kTailCut) {
        return -t / mills_series(t);
    }
    return norm_pdf(t) / norm_cdf(t);
}

double norm_quantile(double p)
{
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw Error(ErrorCode::InvalidArgument, "norm_quantile: p outside [0, 1]");
    }
    // Acklam's rational approximation, refined by one Halley step.
    static constexpr std::array<double, 6> a = {-3.969683028665376e+01, 2.209460984245205e+02,
                                                -2.759285104469687e+02, 1.383577518672690e+02,
                                                -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr std::array<double, 5> b = {-5.447609879822406e+01, 1.615858368580409e+02,
                                                -1.556989798598866e+02, 6.680131188771972e+01,
                                                -1.328068155288572e+01};
    static constexpr std::array<double, 6> c = {-7.784894002430293e-03, -3.223964580411365e-01,
                                                -2.400758277161838e+00, -2.549732539343734e+00,
                                                4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr std::array<double, 4> d = {7.784695709041462e-03, 3.224671290700398e-01,
                                                2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x = 0.0;
    if (p < p_low || p > 1.0 - p_low) {
        const double q = std::sqrt(-2.0 * std::log(p < p_low ? p : 1.0 - p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
        if (p > 1.0 - p_low) x = -x;
    } else {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    const double e = norm_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

// ---------------------------------------------------------------------------

Eigen::Index design_rank(const Eigen::MatrixXd& design)
{
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(kRankTolerance);
    return qr.rank();
}

OlsFit ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& response)
{
    if (design.rows() != response.size()) {
        throw Error(ErrorCode::InvalidArgument, "ols: design and response lengths differ");
    }
    if (design.cols() == 0 || design.rows() < design.cols()) {
        throw Error(ErrorCode::RankDeficient, "ols: fewer observations than regressors");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(kRankTolerance);
    if (qr.rank() < design.cols()) {
        throw Error(ErrorCode::RankDeficient,
                    "ols: design has rank " + std::to_string(qr.rank()) + " < " +
                        std::to_string(design.cols()) + " columns");
    }
    OlsFit fit;
    fit.coefficients = qr.solve(response);
    fit.residuals = response - design * fit.coefficients;
    fit.rss = fit.residuals.squaredNorm();
    return fit;
}

// ---------------------------------------------------------------------------

double to_unconstrained(Transform t, double x)
{
    switch (t) {
    case Transform::Identity: return x;
    case Transform::Correlation: return std::atanh(x);
    case Transform::Positive: return std::log(x);
    }
    return x;
}

double from_unconstrained(Transform t, double u)
{
    switch (t) {
    case Transform::Identity: return u;
    case Transform::Correlation: return std::tanh(u);
    case Transform::Positive: return std::exp(u);
    }
    return u;
}

namespace {

// Minimisation of h(u) = -f(x(u)) in the unconstrained space.
class Problem {
public:
    Problem(const SmoothObjective& objective, std::span<const Transform> transforms, Eigen::Index dim)
        : objective_(objective), transforms_(transforms.begin(), transforms.end()), x_(dim), gx_(dim)
    {
        if (transforms_.empty()) transforms_.assign(static_cast<std::size_t>(dim), Transform::Identity);
    }

    Eigen::VectorXd to_natural(const Eigen::VectorXd& u) const
    {
        Eigen::VectorXd x(u.size());
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            x[i] = from_unconstrained(transforms_[static_cast<std::size_t>(i)], u[i]);
        }
        return x;
    }

    // Returns false when the value or gradient is not finite.
    bool evaluate(const Eigen::VectorXd& u, double& h, Eigen::VectorXd& gu)
    {
        x_ = to_natural(u);
        if (!x_.allFinite()) return false;
        gx_.setZero(u.size());
        const double f = objective_(x_, gx_);
        if (!std::isfinite(f) || !gx_.allFinite()) return false;
        h = -f;
        gu.resize(u.size());
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            double jac = 1.0;
            switch (transforms_[static_cast<std::size_t>(i)]) {
            case Transform::Identity: break;
            case Transform::Correlation: jac = 1.0 - x_[i] * x_[i]; break;
            case Transform::Positive: jac = x_[i]; break;
            }
            gu[i] = -gx_[i] * jac;
        }
        return gu.allFinite();
    }

private:
    const SmoothObjective& objective_;
    std::vector<Transform> transforms_;
    Eigen::VectorXd x_;
    Eigen::VectorXd gx_;
};

struct Probe {
    double alpha = 0.0;
    double value = 0.0;
    double slope = 0.0;
    bool finite = true;
    Eigen::VectorXd u;
    Eigen::VectorXd grad;
};

class LineSearch {
public:
    static constexpr double c1 = 1e-4;
    static constexpr double c2 = 0.9;
    static constexpr int max_evals = 40;

    LineSearch(Problem& problem, const Eigen::VectorXd& u0, double h0, double slope0,
               const Eigen::VectorXd& direction)
        : problem_(problem), u0_(u0), h0_(h0), slope0_(slope0), dir_(direction),
          eps_f_(1e-12 * (1.0 + std::abs(h0)))
    {
    }

    // Returns true with the accepted probe in `out`.
    bool run(double alpha_init, Probe& out)
    {
        Probe prev;
        prev.alpha = 0.0;
        prev.value = h0_;
        prev.slope = slope0_;
        double alpha = alpha_init;
        for (int i = 0; i < max_evals; ++i) {
            Probe p = probe(alpha);
            if (!p.finite) {
                // Step left the domain where the objective is finite: shrink.
                alpha = 0.5 * (prev.alpha + alpha);
                if (alpha - prev.alpha < 1e-20) break;
                continue;
            }
            if (!sufficient(p) || (prev.alpha > 0.0 && p.value >= prev.value)) {
                return zoom(prev, p, out);
            }
            if (std::abs(p.slope) <= -c2 * slope0_) {
                out = std::move(p);
                return true;
            }
            if (p.slope >= 0.0) {
                return zoom(p, prev, out);
            }
            prev = std::move(p);
            alpha *= 2.0;
        }
        if (prev.alpha > 0.0) {
            out = std::move(prev);
            return true;
        }
        return false;
    }

private:
    Probe probe(double alpha)
    {
        Probe p;
        p.alpha = alpha;
        p.u = u0_ + alpha * dir_;
        p.finite = problem_.evaluate(p.u, p.value, p.grad);
        if (p.finite) p.slope = p.grad.dot(dir_);
        ++evals_;
        return p;
    }

    // Armijo, or the approximate-Wolfe variant once values stop resolving.
    bool sufficient(const Probe& p) const
    {
        if (p.value <= h0_ + c1 * p.alpha * slope0_) return true;
        constexpr double delta = 0.1;
        return p.value <= h0_ + eps_f_ && p.slope <= (2.0 * delta - 1.0) * slope0_ &&
               p.slope >= c2 * slope0_;
    }

    static double cubic_min(const Probe& a, const Probe& b)
    {
        const double lo = std::min(a.alpha, b.alpha);
        const double hi = std::max(a.alpha, b.alpha);
        const double width = hi - lo;
        double x = 0.5 * (lo + hi);
        if (a.finite && b.finite) {
            const double d1 = a.slope + b.slope - 3.0 * (a.value - b.value) / (a.alpha - b.alpha);
            const double disc = d1 * d1 - a.slope * b.slope;
            if (disc >= 0.0) {
                const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
                const double denom = b.slope - a.slope + 2.0 * d2;
                if (denom != 0.0) {
                    const double cand = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / denom;
                    if (std::isfinite(cand)) x = cand;
                }
            }
        }
        return std::clamp(x, lo + 0.1 * width, hi - 0.1 * width);
    }

    bool zoom(Probe lo, Probe hi, Probe& out)
    {
        while (evals_ < max_evals) {
            if (std::abs(hi.alpha - lo.alpha) <= 1e-16 * std::max(1.0, std::abs(lo.alpha))) break;
            Probe p = probe(cubic_min(lo, hi));
            if (!p.finite || !sufficient(p) || p.value >= lo.value) {
                hi = std::move(p);
                continue;
            }
            if (std::abs(p.slope) <= -c2 * slope0_) {
                out = std::move(p);
                return true;
            }
            if (p.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
            lo = std::move(p);
        }
        if (lo.alpha > 0.0) {
            out = std::move(lo);
            return true;
        }
        return false;
    }

    Problem& problem_;
    const Eigen::VectorXd& u0_;
    double h0_;
    double slope0_;
    const Eigen::VectorXd& dir_;
    double eps_f_;
    int evals_ = 0;
};

}  // namespace

OptimResult maximize_smooth(const SmoothObjective& objective, const Eigen::VectorXd& start,
                            std::span<const Transform> transforms, const OptimOptions& options)
{
    const Eigen::Index dim = start.size();
    if (!transforms.empty() && static_cast<Eigen::Index>(transforms.size()) != dim) {
        throw Error(ErrorCode::InvalidArgument, "maximize_smooth: transform count mismatch");
    }
    Problem problem(objective, transforms, dim);

    OptimResult result;
    Eigen::VectorXd u(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        const Transform t = transforms.empty() ? Transform::Identity : transforms[static_cast<std::size_t>(i)];
        u[i] = to_unconstrained(t, start[i]);
    }
    double h = 0.0;
    Eigen::VectorXd g;
    if (!u.allFinite() || !problem.evaluate(u, h, g)) {
        result.argmax = start;
        result.unconstrained = u;
        result.gradient = Eigen::VectorXd::Constant(dim, std::numeric_limits<double>::quiet_NaN());
        result.value = std::numeric_limits<double>::quiet_NaN();
        result.status = OptimStatus::NonFiniteObjective;
        return result;
    }

    Eigen::MatrixXd inv_hessian = Eigen::MatrixXd::Identity(dim, dim);
    bool fresh = true;  // inv_hessian is the (unscaled) identity
    int iter = 0;
    OptimStatus status = OptimStatus::IterationLimit;
    for (; iter < options.max_iterations; ++iter) {
        if (g.norm() < options.gradient_tolerance) {
            status = OptimStatus::Converged;
            break;
        }
        Eigen::VectorXd dir = -inv_hessian * g;
        double slope = g.dot(dir);
        if (!(slope < 0.0)) {
            inv_hessian.setIdentity();
            fresh = true;
            dir = -g;
            slope = -g.squaredNorm();
        }
        const double alpha0 = fresh ? std::min(1.0, 1.0 / g.norm()) : 1.0;
        Probe accepted;
        LineSearch search(problem, u, h, slope, dir);
        if (!search.run(alpha0, accepted)) {
            if (fresh) {
                status = OptimStatus::LineSearchFailed;
                break;
            }
            inv_hessian.setIdentity();
            fresh = true;
            continue;
        }
        const Eigen::VectorXd s = accepted.u - u;
        const Eigen::VectorXd y = accepted.grad - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (fresh) {
                inv_hessian *= sy / y.squaredNorm();
                fresh = false;
            }
            const double rho = 1.0 / sy;
            const Eigen::VectorXd hy = inv_hessian * y;
            inv_hessian += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) -
                           rho * (hy * s.transpose() + s * hy.transpose());
        }
        const bool stalled = h - accepted.value <= 0.0 && s.norm() <= 1e-15 * (1.0 + u.norm());
        u = std::move(accepted.u);
        h = accepted.value;
        g = std::move(accepted.grad);
        if (stalled && g.norm() >= options.gradient_tolerance) {
            status = OptimStatus::LineSearchFailed;
            ++iter;
            break;
        }
    }
    if (status == OptimStatus::IterationLimit && g.norm() < options.gradient_tolerance) {
        status = OptimStatus::Converged;
    }

    result.argmax = problem.to_natural(u);
    result.unconstrained = u;
    result.gradient = -g;
    result.value = -h;
    result.iterations = iter;
    result.status = status;
    result.converged = status == OptimStatus::Converged;
    return result;
}

}  // namespace ivdr
