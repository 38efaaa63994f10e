#include "ivdr/probit.hpp"

#include <cmath>

#include "ivdr/error.hpp"
#include "ivdr/numerics.hpp"

namespace ivdr {

namespace {

struct Evaluation {
    double loglik = 0.0;
    Eigen::VectorXd grad;
    Eigen::MatrixXd info;  // negative Hessian
};

Evaluation evaluate(const Eigen::MatrixXd& design, const Eigen::VectorXd& indicator,
                    const Eigen::VectorXd& b, bool want_info)
{
    const Eigen::VectorXd index = design * b;
    Eigen::VectorXd score(index.size());
    Eigen::VectorXd weight(index.size());
    Evaluation e;
    for (Eigen::Index i = 0; i < index.size(); ++i) {
        const double m = index[i];
        if (indicator[i] > 0.5) {
            const double lambda = inv_mills(m);
            e.loglik += log_norm_cdf(m);
            score[i] = lambda;
            weight[i] = lambda * (m + lambda);
        } else {
            const double lambda = inv_mills(-m);
            e.loglik += log_norm_cdf(-m);
            score[i] = -lambda;
            weight[i] = lambda * (lambda - m);
        }
    }
    e.grad = design.transpose() * score;
    if (want_info) {
        e.info = design.transpose() * weight.asDiagonal() * design;
    }
    return e;
}

}  // namespace

double probit_loglik(const Eigen::MatrixXd& design, const Eigen::VectorXd& indicator,
                     const Eigen::VectorXd& coefficients, Eigen::VectorXd* grad)
{
    Evaluation e = evaluate(design, indicator, coefficients, false);
    if (grad != nullptr) *grad = std::move(e.grad);
    return e.loglik;
}

ProbitFit probit_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& indicator,
                     const ProbitOptions& options)
{
    if (design.rows() != indicator.size()) {
        throw Error(ErrorCode::InvalidArgument, "probit: design and indicator lengths differ");
    }
    const double ones = indicator.sum();
    if (ones <= 0.0 || ones >= static_cast<double>(indicator.size())) {
        throw Error(ErrorCode::DegenerateOutcome, "probit: indicator is constant");
    }
    if (design_rank(design) < design.cols()) {
        throw Error(ErrorCode::RankDeficient, "probit: design is rank deficient");
    }

    const Eigen::Index p = design.cols();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        if ((design.col(j).array() == 1.0).all()) {
            b[j] = norm_quantile(ones / static_cast<double>(indicator.size()));
            break;
        }
    }

    ProbitFit fit;
    Evaluation cur = evaluate(design, indicator, b, true);
    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        if (cur.grad.norm() < options.gradient_tolerance) {
            fit.converged = true;
            break;
        }
        Eigen::LDLT<Eigen::MatrixXd> ldlt(cur.info);
        Eigen::VectorXd step = ldlt.solve(cur.grad);
        if (ldlt.info() != Eigen::Success || !step.allFinite()) {
            throw Error(ErrorCode::SeparationSuspected, "probit: information matrix is singular");
        }
        const double slack = 1e-12 * (1.0 + std::abs(cur.loglik));
        double t = 1.0;
        bool accepted = false;
        for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
            Eigen::VectorXd trial = b + t * step;
            Evaluation next = evaluate(design, indicator, trial, true);
            if (std::isfinite(next.loglik) && next.loglik >= cur.loglik - slack) {
                b = std::move(trial);
                cur = std::move(next);
                accepted = true;
                break;
            }
        }
        if (b.norm() > options.separation_norm) {
            throw Error(ErrorCode::SeparationSuspected,
                        "probit: coefficient norm exceeds " + std::to_string(options.separation_norm));
        }
        if (!accepted) break;
    }
    if (!fit.converged && cur.grad.norm() < options.gradient_tolerance) fit.converged = true;

    // under complete separation the score vanishes at a finite but arbitrary b
    const Eigen::VectorXd index = design * b;
    fit.separated = true;
    for (Eigen::Index i = 0; i < index.size() && fit.separated; ++i) {
        const double signed_index = indicator[i] > 0.5 ? index[i] : -index[i];
        fit.separated = log_norm_cdf(signed_index) > -1e-6;
    }

    fit.coefficients = b;
    fit.loglik = cur.loglik;
    fit.iterations = iter;
    fit.vcov = cur.info.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
    return fit;
}

}  // namespace ivdr
