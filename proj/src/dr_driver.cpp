#include "ivdr/dr_driver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ivdr/parallel.hpp"

namespace ivdr {

std::string_view to_string(Estimator e)
{
    switch (e) {
    case Estimator::Probit: return "probit";
    case Estimator::IvMl: return "iv-ml";
    case Estimator::ThreeStep: return "three-step";
    }
    return "unknown";
}

Estimator parse_estimator(std::string_view name)
{
    if (name == "probit") return Estimator::Probit;
    if (name == "iv-ml") return Estimator::IvMl;
    if (name == "three-step") return Estimator::ThreeStep;
    throw Error(ErrorCode::InvalidArgument, "unknown estimator '" + std::string(name) + "'");
}

DrFit::DrFit(const Dataset& data, Estimator estimator, ThresholdGrid grid, const DrOptions& options)
    : estimator_(estimator), grid_(std::move(grid)), status_(grid_.size(), PointStatus::Ok),
      errors_(grid_.size()), models_(grid_.size())
{
    std::optional<FirstStage> fs;
    Eigen::MatrixXd probit_design;
    if (estimator_ == Estimator::Probit) {
        probit_design = data.structural_design();
    } else {
        fs = first_stage(data);
        residuals_ = fs->residuals;
    }

    const double n = static_cast<double>(data.n());
    parallel_for(grid_.size(), options.threads, [&](std::size_t i) {
        const double y = grid_[i];
        const double ones = (data.outcome().array() <= y).count();
        if (ones == 0.0) {
            status_[i] = PointStatus::DegenerateLow;
            return;
        }
        if (ones == n) {
            status_[i] = PointStatus::DegenerateHigh;
            return;
        }
        try {
            bool converged = true;
            switch (estimator_) {
            case Estimator::Probit: {
                ProbitFit fit = probit_fit(probit_design, data.indicator(y));
                converged = fit.converged;
                models_[i] = std::move(fit);
                break;
            }
            case Estimator::ThreeStep: {
                ThetaTilde theta = second_stage(data, residuals_, y);
                models_[i] = std::move(theta);
                break;
            }
            case Estimator::IvMl: {
                const ThetaTilde tilde = second_stage(data, residuals_, y);
                const ThetaFull start =
                    ThetaFull::from_tilde(tilde, fs->gamma.coefficients, fs->sigma2_sq(), data.k(), data.l());
                IvProbitMlFit fit = ml_fit(data, y, start);
                converged = fit.converged;
                models_[i] = std::move(fit);
                break;
            }
            }
            if (!converged) {
                status_[i] = PointStatus::Failed;
                errors_[i] = ErrorCode::NonFiniteObjective;
            }
        } catch (const Error& e) {
            status_[i] = PointStatus::Failed;
            errors_[i] = e.code();
        }
    });
}

std::size_t DrFit::failed_points() const
{
    return static_cast<std::size_t>(std::count(status_.begin(), status_.end(), PointStatus::Failed));
}

double DrFit::value_at(std::size_t i, const EvalPoint& point) const
{
    const Model& m = models_.at(i);
    if (const auto* p = std::get_if<ProbitFit>(&m)) {
        const Eigen::Index k = point.x.size();
        if (p->coefficients.size() != k + 1) {
            throw Error(ErrorCode::InvalidArgument, "evaluation point has wrong dimension");
        }
        return norm_cdf(point.x.dot(p->coefficients.head(k)) + point.y2 * p->coefficients[k]);
    }
    if (const auto* t = std::get_if<ThetaTilde>(&m)) {
        return three_step_cdf_at(*t, residuals_, point.x, point.y2);
    }
    if (const auto* f = std::get_if<IvProbitMlFit>(&m)) {
        return ml_cdf_at(*f, point.x, point.y2);
    }
    throw Error(ErrorCode::InvalidArgument, "no fitted model at this grid point");
}

CdfCurve DrFit::curve_at(const EvalPoint& point) const
{
    CdfCurve curve;
    curve.grid = grid_;
    curve.status = status_;
    curve.values.assign(grid_.size(), std::numeric_limits<double>::quiet_NaN());

    std::vector<std::size_t> good;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        switch (status_[i]) {
        case PointStatus::Ok: curve.values[i] = value_at(i, point); break;
        case PointStatus::DegenerateLow: curve.values[i] = 0.0; break;
        case PointStatus::DegenerateHigh: curve.values[i] = 1.0; break;
        case PointStatus::Failed: continue;
        }
        good.push_back(i);
    }
    if (good.empty()) {
        throw Error(errors_.front().value_or(ErrorCode::InvalidArgument),
                    "distribution regression failed at every grid point");
    }
    if (good.size() == grid_.size()) return curve;

    std::size_t next = 0;  // index into `good` of the first good point >= i
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        while (next < good.size() && good[next] < i) ++next;
        if (status_[i] != PointStatus::Failed) continue;
        if (next == 0) {
            curve.values[i] = curve.values[good.front()];
        } else if (next == good.size()) {
            curve.values[i] = curve.values[good.back()];
        } else {
            const std::size_t lo = good[next - 1];
            const std::size_t hi = good[next];
            const double w = (grid_[i] - grid_[lo]) / (grid_[hi] - grid_[lo]);
            curve.values[i] = curve.values[lo] + w * (curve.values[hi] - curve.values[lo]);
        }
    }
    return curve;
}

CdfCurve fit_curve(const Dataset& data, Estimator estimator, const ThresholdGrid& grid,
                   const EvalPoint& point, const DrOptions& options)
{
    return DrFit(data, estimator, grid, options).curve_at(point);
}

QuantileCurve quantiles_from_curve(const MonotoneCurve& curve, std::span<const double> levels)
{
    validate_levels(levels);
    const auto& f = curve.values;
    if (f.size() != curve.grid.size() || !std::is_sorted(f.begin(), f.end())) {
        throw Error(ErrorCode::InvalidArgument, "quantiles_from_curve: curve is not monotone");
    }
    QuantileCurve q;
    q.levels.assign(levels.begin(), levels.end());
    q.values.reserve(levels.size());
    q.flags.reserve(levels.size());
    for (const double u : levels) {
        const auto it = std::lower_bound(f.begin(), f.end(), u);
        if (it == f.end()) {
            q.values.push_back(std::numeric_limits<double>::infinity());
            q.flags.push_back(QuantileFlag::AboveRange);
            continue;
        }
        const auto j = static_cast<std::size_t>(it - f.begin());
        if (j == 0) {
            q.values.push_back(curve.grid[0]);
            q.flags.push_back(QuantileFlag::BelowRange);
            continue;
        }
        const double w = (u - f[j - 1]) / (f[j] - f[j - 1]);
        q.values.push_back(curve.grid[j - 1] + w * (curve.grid[j] - curve.grid[j - 1]));
        q.flags.push_back(QuantileFlag::Ok);
    }
    return q;
}

}  // namespace ivdr
