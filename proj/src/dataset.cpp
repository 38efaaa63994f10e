#include "ivdr/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#include "ivdr/error.hpp"

namespace ivdr {

Dataset::Dataset(Eigen::VectorXd outcome, Eigen::VectorXd endogenous, Eigen::MatrixXd exogenous,
                 Eigen::MatrixXd instruments)
    : outcome_(std::move(outcome)), endogenous_(std::move(endogenous)),
      exogenous_(std::move(exogenous)), instruments_(std::move(instruments))
{
    const Eigen::Index rows = outcome_.size();
    if (endogenous_.size() != rows || exogenous_.rows() != rows || instruments_.rows() != rows) {
        throw Error(ErrorCode::InvalidArgument, "dataset: columns have different lengths");
    }
    if (exogenous_.cols() < 1 || instruments_.cols() < 1) {
        throw Error(ErrorCode::InvalidArgument, "dataset: need at least one exogenous regressor and one instrument");
    }
    if (rows < exogenous_.cols() + instruments_.cols() + 3) {
        throw Error(ErrorCode::InvalidArgument,
                    "dataset: n = " + std::to_string(rows) + " is below k + l + 3");
    }
    if (!outcome_.allFinite() || !endogenous_.allFinite() || !exogenous_.allFinite() ||
        !instruments_.allFinite()) {
        throw Error(ErrorCode::InvalidArgument, "dataset: non-finite entries");
    }
    if (endogenous_.maxCoeff() == endogenous_.minCoeff()) {
        throw Error(ErrorCode::InvalidArgument, "dataset: endogenous regressor is constant");
    }
}

Dataset Dataset::with_intercept(Eigen::VectorXd outcome, Eigen::VectorXd endogenous,
                                const Eigen::MatrixXd& exogenous_no_intercept,
                                Eigen::MatrixXd instruments)
{
    Eigen::MatrixXd x(exogenous_no_intercept.rows(), exogenous_no_intercept.cols() + 1);
    x.col(0).setOnes();
    x.rightCols(exogenous_no_intercept.cols()) = exogenous_no_intercept;
    return Dataset(std::move(outcome), std::move(endogenous), std::move(x), std::move(instruments));
}

Eigen::MatrixXd Dataset::first_stage_design() const
{
    Eigen::MatrixXd d(n(), k() + l());
    d << exogenous_, instruments_;
    return d;
}

Eigen::MatrixXd Dataset::structural_design() const
{
    Eigen::MatrixXd d(n(), k() + 1);
    d << exogenous_, endogenous_;
    return d;
}

Eigen::VectorXd Dataset::indicator(double threshold) const
{
    return (outcome_.array() <= threshold).cast<double>().matrix();
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const
{
    const auto m = static_cast<Eigen::Index>(rows.size());
    Eigen::VectorXd y(m), y2(m);
    Eigen::MatrixXd x(m, k()), z(m, l());
    for (Eigen::Index r = 0; r < m; ++r) {
        const auto src = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)]);
        if (src >= n()) throw Error(ErrorCode::InvalidArgument, "dataset: subset index out of range");
        y[r] = outcome_[src];
        y2[r] = endogenous_[src];
        x.row(r) = exogenous_.row(src);
        z.row(r) = instruments_.row(src);
    }
    return Dataset(std::move(y), std::move(y2), std::move(x), std::move(z));
}

std::vector<double> Dataset::distinct_outcomes() const
{
    std::vector<double> v(outcome_.data(), outcome_.data() + outcome_.size());
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

std::uint64_t Dataset::fingerprint() const
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const double* data, Eigen::Index count) {
        for (Eigen::Index i = 0; i < count; ++i) {
            h ^= std::bit_cast<std::uint64_t>(data[i]);
            h *= 0x100000001b3ULL;
            h ^= h >> 29;
        }
    };
    mix(outcome_.data(), outcome_.size());
    mix(endogenous_.data(), endogenous_.size());
    mix(exogenous_.data(), exogenous_.size());
    mix(instruments_.data(), instruments_.size());
    return h;
}

}  // namespace ivdr
