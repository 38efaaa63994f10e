#include "ivdr/ivprobit_ml.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "ivdr/error.hpp"

namespace ivdr {

namespace {

constexpr double kBoundaryAtanh = 7.0;
constexpr double kScoreTolerance = 1e-6;

// Log-likelihood without argument checks; non-finite results are returned as
// NaN so the optimiser can back off.
double loglik_kernel(const ThetaFull& th, const Dataset& data, const Eigen::VectorXd& indicator,
                     Eigen::VectorXd* grad)
{
    const double one_minus_r2 = 1.0 - th.rho * th.rho;
    if (!(one_minus_r2 > 0.0) || !(th.sigma2_sq > 0.0) || !std::isfinite(th.sigma2_sq)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const Eigen::Index n = data.n();
    const Eigen::Index k = th.k();
    const Eigen::Index l = th.l();
    const auto& x = data.exogenous();
    const auto& z = data.instruments();
    const auto& y2 = data.endogenous();

    const double s2 = th.sigma2_sq;
    const double sigma2 = std::sqrt(s2);
    const double se = std::sqrt(one_minus_r2);
    const double c = th.rho / sigma2;

    const Eigen::VectorXd v = y2 - x * th.gamma1 - z * th.gamma2;
    const Eigen::VectorXd mu = x * th.beta1 + y2 * th.beta2 + c * v;

    Eigen::VectorXd a(n);
    double binary = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double m = mu[i] / se;
        if (indicator[i] > 0.5) {
            binary += log_norm_cdf(m);
            a[i] = inv_mills(m);
        } else {
            binary += log_norm_cdf(-m);
            a[i] = -inv_mills(-m);
        }
    }
    const double vv = v.squaredNorm();
    const double nd = static_cast<double>(n);
    const double value = binary - 0.5 * nd * std::log(2.0 * std::numbers::pi) - 0.5 * nd * std::log(s2) -
                         vv / (2.0 * s2);

    if (grad != nullptr) {
        grad->resize(th.size());
        const Eigen::VectorXd a_se = a / se;
        // d/d gamma: binary part through -c v, regression part through v^2.
        const Eigen::VectorXd w_gamma = -c * a_se + v / s2;
        Eigen::Index pos = 0;
        grad->segment(pos, k) = x.transpose() * a_se;
        pos += k;
        (*grad)[pos++] = y2.dot(a_se);
        grad->segment(pos, k) = x.transpose() * w_gamma;
        pos += k;
        grad->segment(pos, l) = z.transpose() * w_gamma;
        pos += l;
        // dm/drho = v / (sigma2 se) + mu rho / se^3
        const double se3 = se * one_minus_r2;
        (*grad)[pos++] = a.dot(v) / (sigma2 * se) + th.rho * a.dot(mu) / se3;
        // dm/ds2 = -rho v / (2 s2 sigma2 se)
        (*grad)[pos++] = -th.rho * a.dot(v) / (2.0 * s2 * sigma2 * se) - 0.5 * nd / s2 +
                         vv / (2.0 * s2 * s2);
    }
    return value;
}

void check_dimensions(const ThetaFull& th, const Dataset& data)
{
    if (th.beta1.size() != data.k() || th.gamma1.size() != data.k() || th.gamma2.size() != data.l()) {
        throw Error(ErrorCode::InvalidArgument, "ivprobit: parameter dimensions do not match the data");
    }
}

}  // namespace

double ThetaFull::sigma_eps() const
{
    return std::sqrt(1.0 - rho * rho);
}

double ThetaFull::control_coefficient() const
{
    return rho / std::sqrt(sigma2_sq);
}

Eigen::VectorXd ThetaFull::to_vector() const
{
    Eigen::VectorXd v(size());
    v << beta1, beta2, gamma1, gamma2, rho, sigma2_sq;
    return v;
}

ThetaFull ThetaFull::from_vector(const Eigen::VectorXd& v, Eigen::Index k, Eigen::Index l)
{
    if (v.size() != 2 * k + l + 3) {
        throw Error(ErrorCode::InvalidArgument, "ThetaFull::from_vector: wrong length");
    }
    ThetaFull th;
    Eigen::Index pos = 0;
    th.beta1 = v.segment(pos, k);
    pos += k;
    th.beta2 = v[pos++];
    th.gamma1 = v.segment(pos, k);
    pos += k;
    th.gamma2 = v.segment(pos, l);
    pos += l;
    th.rho = v[pos++];
    th.sigma2_sq = v[pos];
    return th;
}

ThetaTilde ThetaFull::to_tilde() const
{
    const double se = sigma_eps();
    ThetaTilde t;
    t.beta1 = beta1 / se;
    t.beta2 = beta2 / se;
    t.rho = control_coefficient() / se;
    return t;
}

ThetaFull ThetaFull::from_tilde(const ThetaTilde& tilde, const Eigen::VectorXd& gamma, double sigma2_sq,
                                Eigen::Index k, Eigen::Index l)
{
    if (gamma.size() != k + l || tilde.beta1.size() != k || !(sigma2_sq > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "ThetaFull::from_tilde: inconsistent inputs");
    }
    // rho_tilde * sigma2 = rho / sqrt(1 - rho^2)
    const double t = tilde.rho * std::sqrt(sigma2_sq);
    const double scale = 1.0 / std::sqrt(1.0 + t * t);
    ThetaFull th;
    th.beta1 = tilde.beta1 * scale;
    th.beta2 = tilde.beta2 * scale;
    th.gamma1 = gamma.head(k);
    th.gamma2 = gamma.tail(l);
    th.rho = t * scale;
    th.sigma2_sq = sigma2_sq;
    return th;
}

std::vector<Transform> ml_transforms(Eigen::Index k, Eigen::Index l)
{
    std::vector<Transform> t(static_cast<std::size_t>(2 * k + l + 3), Transform::Identity);
    t[t.size() - 2] = Transform::Correlation;
    t[t.size() - 1] = Transform::Positive;
    return t;
}

MlValue ml_loglik(const ThetaFull& theta, const Dataset& data, double threshold)
{
    check_dimensions(theta, data);
    if (!(theta.sigma2_sq > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "ml_loglik: sigma2_sq must be positive");
    }
    if (!(1.0 - theta.rho * theta.rho > 0.0)) {
        throw Error(ErrorCode::NonFiniteObjective, "ml_loglik: sigma_eps underflows (|rho| -> 1)");
    }
    MlValue out;
    out.value = loglik_kernel(theta, data, data.indicator(threshold), &out.gradient);
    if (!std::isfinite(out.value) || !out.gradient.allFinite()) {
        throw Error(ErrorCode::NonFiniteObjective, "ml_loglik: non-finite value");
    }
    return out;
}

IvProbitMlFit ml_fit(const Dataset& data, double threshold, const std::optional<ThetaFull>& start,
                     const OptimOptions& options)
{
    const Eigen::VectorXd indicator = data.indicator(threshold);
    const double ones = indicator.sum();
    if (ones <= 0.0 || ones >= static_cast<double>(data.n())) {
        throw Error(ErrorCode::DegenerateOutcome, "ml_fit: indicator is constant");
    }

    ThetaFull init;
    if (start) {
        check_dimensions(*start, data);
        init = *start;
    } else {
        const FirstStage fs = first_stage(data);
        const ThetaTilde tilde = second_stage(data, fs.residuals, threshold);
        init = ThetaFull::from_tilde(tilde, fs.gamma.coefficients, fs.sigma2_sq(), data.k(), data.l());
    }

    const Eigen::Index k = data.k();
    const Eigen::Index l = data.l();
    const SmoothObjective objective = [&](const Eigen::VectorXd& v, Eigen::VectorXd& grad) {
        return loglik_kernel(ThetaFull::from_vector(v, k, l), data, indicator, &grad);
    };
    const std::vector<Transform> transforms = ml_transforms(k, l);
    const OptimResult opt = maximize_smooth(objective, init.to_vector(), transforms, options);
    if (opt.status == OptimStatus::NonFiniteObjective && opt.iterations == 0 && !std::isfinite(opt.value)) {
        throw Error(ErrorCode::NonFiniteObjective, "ml_fit: likelihood not finite at the start value");
    }

    IvProbitMlFit fit;
    fit.theta = ThetaFull::from_vector(opt.argmax, k, l);
    fit.loglik = opt.value;
    fit.iterations = opt.iterations;
    fit.score_at_opt = opt.gradient;
    fit.converged = opt.gradient.norm() < kScoreTolerance;

    const double rho_u = opt.unconstrained[opt.unconstrained.size() - 2];
    if (std::abs(rho_u) > kBoundaryAtanh) {
        throw Error(ErrorCode::BoundarySolution,
                    "ml_fit: correlation parameter at the boundary (rho = " + std::to_string(fit.theta.rho) + ")");
    }
    return fit;
}

double ml_cdf_at(const IvProbitMlFit& fit, const Eigen::VectorXd& x, double y2)
{
    if (x.size() != fit.theta.beta1.size()) {
        throw Error(ErrorCode::InvalidArgument, "ml_cdf_at: x has wrong length");
    }
    return norm_cdf(x.dot(fit.theta.beta1) + y2 * fit.theta.beta2);
}

}  // namespace ivdr
