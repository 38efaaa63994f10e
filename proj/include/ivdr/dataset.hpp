#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ivdr {

/// Cross-section with one continuous endogenous regressor.
///
/// `exogenous` carries the intercept as an explicit first column of ones;
/// `instruments` has no intercept. The constructor validates the shape and
/// content invariants and throws Error(InvalidArgument) on violation:
///   - all blocks have n rows and only finite entries,
///   - the endogenous regressor is not constant,
///   - n >= k + l + 3.
class Dataset {
public:
    Dataset(Eigen::VectorXd outcome, Eigen::VectorXd endogenous, Eigen::MatrixXd exogenous,
            Eigen::MatrixXd instruments);

    /// Same, but prepends the intercept column to `exogenous_no_intercept`.
    static Dataset with_intercept(Eigen::VectorXd outcome, Eigen::VectorXd endogenous,
                                  const Eigen::MatrixXd& exogenous_no_intercept,
                                  Eigen::MatrixXd instruments);

    Eigen::Index n() const { return outcome_.size(); }
    Eigen::Index k() const { return exogenous_.cols(); }
    Eigen::Index l() const { return instruments_.cols(); }

    const Eigen::VectorXd& outcome() const { return outcome_; }
    const Eigen::VectorXd& endogenous() const { return endogenous_; }
    const Eigen::MatrixXd& exogenous() const { return exogenous_; }
    const Eigen::MatrixXd& instruments() const { return instruments_; }

    /// [X, Z], the first-stage design.
    Eigen::MatrixXd first_stage_design() const;

    /// [X, Y2], the design of a probit that treats Y2 as exogenous.
    Eigen::MatrixXd structural_design() const;

    /// 1{Y <= y} as 0/1 doubles.
    Eigen::VectorXd indicator(double threshold) const;

    /// Rows selected by index (with repetition), for resampling.
    Dataset subset(std::span<const std::size_t> rows) const;

    /// Sorted distinct outcome values.
    std::vector<double> distinct_outcomes() const;

    /// Order-sensitive FNV-style hash of every stored value.
    std::uint64_t fingerprint() const;

private:
    Eigen::VectorXd outcome_;
    Eigen::VectorXd endogenous_;
    Eigen::MatrixXd exogenous_;
    Eigen::MatrixXd instruments_;
};

/// Point (x, y2) at which a conditional CDF is evaluated. `x` has length k and
/// includes the leading intercept entry.
struct EvalPoint {
    Eigen::VectorXd x;
    double y2 = 0.0;
};

}  // namespace ivdr
