#include "ivdr/three_step.hpp"

#include <cmath>
#include <limits>

#include "ivdr/error.hpp"
#include "ivdr/probit.hpp"

namespace ivdr {

FirstStage first_stage(const Dataset& data)
{
    FirstStage fs;
    fs.gamma = ols(data.first_stage_design(), data.endogenous());
    fs.residuals = fs.gamma.residuals;

    const double n = static_cast<double>(data.n());
    const double scale = data.endogenous().squaredNorm();
    if (fs.gamma.rss <= 1e-24 * std::max(scale, 1.0)) {
        fs.degenerate = true;
        fs.f_statistic = std::numeric_limits<double>::infinity();
        return fs;
    }
    const OlsFit restricted = ols(data.exogenous(), data.endogenous());
    const double df_num = static_cast<double>(data.l());
    const double df_den = n - static_cast<double>(data.k() + data.l());
    fs.f_statistic = std::max(0.0, (restricted.rss - fs.gamma.rss) / df_num) / (fs.gamma.rss / df_den);
    return fs;
}

ThetaTilde second_stage(const Dataset& data, const Eigen::VectorXd& residuals, double threshold)
{
    if (residuals.size() != data.n()) {
        throw Error(ErrorCode::InvalidArgument, "second_stage: residual length mismatch");
    }
    if (residuals.norm() <= 1e-10 * std::max(1.0, data.endogenous().norm())) {
        throw Error(ErrorCode::RankDeficient, "second_stage: first-stage residuals are all zero");
    }
    const Eigen::Index k = data.k();
    Eigen::MatrixXd design(data.n(), k + 2);
    design << data.exogenous(), data.endogenous(), residuals;

    const ProbitFit fit = probit_fit(design, data.indicator(threshold));
    ThetaTilde theta;
    theta.beta1 = fit.coefficients.head(k);
    theta.beta2 = fit.coefficients[k];
    theta.rho = fit.coefficients[k + 1];
    theta.vcov = fit.vcov;
    return theta;
}

double three_step_cdf_at(const ThetaTilde& theta, const Eigen::VectorXd& residuals,
                         const Eigen::VectorXd& x, double y2)
{
    if (x.size() != theta.beta1.size()) {
        throw Error(ErrorCode::InvalidArgument, "three_step_cdf_at: x has wrong length");
    }
    if (residuals.size() == 0) {
        throw Error(ErrorCode::InvalidArgument, "three_step_cdf_at: no residuals");
    }
    const double base = x.dot(theta.beta1) + y2 * theta.beta2;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < residuals.size(); ++i) {
        sum += norm_cdf(base + residuals[i] * theta.rho);
    }
    return sum / static_cast<double>(residuals.size());
}

}  // namespace ivdr
