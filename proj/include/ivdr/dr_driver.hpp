#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "ivdr/curve.hpp"
#include "ivdr/dataset.hpp"
#include "ivdr/error.hpp"
#include "ivdr/ivprobit_ml.hpp"
#include "ivdr/probit.hpp"
#include "ivdr/three_step.hpp"

namespace ivdr {

enum class Estimator {
    Probit,     ///< exogenous probit DR on [X, Y2]
    IvMl,       ///< full-information IV-probit ML per threshold
    ThreeStep,  ///< control-function probit, residuals averaged out
};

std::string_view to_string(Estimator e);
/// Accepts "probit", "iv-ml", "three-step".
Estimator parse_estimator(std::string_view name);

struct DrOptions {
    unsigned threads = 1;  ///< grid points fitted in parallel
};

/// Distribution regression fitted at every point of a threshold grid.
///
/// Fitting is independent of the evaluation point, so one DrFit serves any
/// number of (x, y2) evaluations. Grid points with a constant indicator are
/// marked degenerate and not fitted; estimator failures are recorded per
/// point. For three-step the first stage is estimated once and shared.
class DrFit {
public:
    DrFit(const Dataset& data, Estimator estimator, ThresholdGrid grid, const DrOptions& options = {});

    Estimator estimator() const { return estimator_; }
    const ThresholdGrid& grid() const { return grid_; }
    std::span<const PointStatus> status() const { return status_; }
    std::size_t failed_points() const;
    /// Error recorded at a failed grid point.
    std::optional<ErrorCode> failure(std::size_t i) const { return errors_[i]; }

    /// Conditional CDF at (x, y2). Failed interior points are filled by linear
    /// interpolation of the neighbouring non-failed values (nearest value at
    /// the ends). Throws when every grid point failed.
    CdfCurve curve_at(const EvalPoint& point) const;

    /// Raw model value at grid point i; only valid for PointStatus::Ok.
    double value_at(std::size_t i, const EvalPoint& point) const;

private:
    using Model = std::variant<std::monostate, ProbitFit, IvProbitMlFit, ThetaTilde>;

    Estimator estimator_;
    ThresholdGrid grid_;
    std::vector<PointStatus> status_;
    std::vector<std::optional<ErrorCode>> errors_;
    std::vector<Model> models_;
    Eigen::VectorXd residuals_;
};

/// Convenience wrapper: DrFit(...).curve_at(point).
CdfCurve fit_curve(const Dataset& data, Estimator estimator, const ThresholdGrid& grid,
                   const EvalPoint& point, const DrOptions& options = {});

/// Generalised inverse of a monotone CDF: the smallest y with F(y) >= u,
/// linearly interpolated between the bracketing grid points. Levels at or
/// below the first value map to the first grid point (BelowRange); levels
/// above the last value give +inf (AboveRange).
QuantileCurve quantiles_from_curve(const MonotoneCurve& curve, std::span<const double> levels);

}  // namespace ivdr
