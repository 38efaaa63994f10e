#include "ivdr/linear.hpp"

#include <cmath>

#include "ivdr/error.hpp"
#include "ivdr/numerics.hpp"

namespace ivdr {

namespace {

Eigen::MatrixXd inverse_cross_product(const Eigen::MatrixXd& design)
{
    const Eigen::Index p = design.cols();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    // (X'X)^-1 = P R^-1 R^-T P'
    const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv = r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    const Eigen::MatrixXd inner = r_inv * r_inv.transpose();
    const auto& perm = qr.colsPermutation();
    return perm * inner * perm.transpose();
}

}  // namespace

LinearFit ols_linear(const Eigen::MatrixXd& design, const Eigen::VectorXd& response)
{
    const OlsFit fit = ols(design, response);
    const double dof = static_cast<double>(design.rows() - design.cols());
    if (dof <= 0.0) throw Error(ErrorCode::InvalidArgument, "ols_linear: no residual degrees of freedom");
    LinearFit out;
    out.coefficients = fit.coefficients;
    out.sigma2 = fit.rss / dof;
    out.vcov = out.sigma2 * inverse_cross_product(design);
    return out;
}

LinearFit two_stage_least_squares(const Dataset& data)
{
    const Eigen::MatrixXd instruments = data.first_stage_design();
    const Eigen::MatrixXd regressors = data.structural_design();
    const OlsFit first = ols(instruments, data.endogenous());

    Eigen::MatrixXd projected = regressors;
    projected.col(regressors.cols() - 1) = data.endogenous() - first.residuals;
    const OlsFit second = ols(projected, data.outcome());

    const Eigen::VectorXd resid = data.outcome() - regressors * second.coefficients;
    const double dof = static_cast<double>(regressors.rows() - regressors.cols());
    LinearFit out;
    out.coefficients = second.coefficients;
    out.sigma2 = resid.squaredNorm() / dof;
    out.vcov = out.sigma2 * inverse_cross_product(projected);
    return out;
}

Prediction predict(const LinearFit& fit, const Eigen::VectorXd& row)
{
    if (row.size() != fit.coefficients.size()) {
        throw Error(ErrorCode::InvalidArgument, "predict: row has wrong length");
    }
    return {row.dot(fit.coefficients), std::sqrt(row.dot(fit.vcov * row))};
}

}  // namespace ivdr
