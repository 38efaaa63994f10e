#include "ivdr/curve.hpp"

#include <algorithm>
#include <cmath>

#include "ivdr/dataset.hpp"
#include "ivdr/error.hpp"

namespace ivdr {

ThresholdGrid::ThresholdGrid(std::vector<double> values) : values_(std::move(values))
{
    if (values_.empty()) throw Error(ErrorCode::InvalidArgument, "threshold grid is empty");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) throw Error(ErrorCode::InvalidArgument, "threshold grid has non-finite values");
        if (i > 0 && !(values_[i] > values_[i - 1])) {
            throw Error(ErrorCode::InvalidArgument, "threshold grid is not strictly increasing");
        }
    }
}

ThresholdGrid ThresholdGrid::linspace(double a, double b, std::size_t m)
{
    return ThresholdGrid(ivdr::linspace(a, b, m));
}

ThresholdGrid ThresholdGrid::observed(const Dataset& data)
{
    return ThresholdGrid(data.distinct_outcomes());
}

std::string_view to_string(PointStatus s)
{
    switch (s) {
    case PointStatus::Ok: return "ok";
    case PointStatus::DegenerateLow: return "degenerate-low";
    case PointStatus::DegenerateHigh: return "degenerate-high";
    case PointStatus::Failed: return "failed";
    }
    return "unknown";
}

std::string_view to_string(MonotoneCurve::Method m)
{
    switch (m) {
    case MonotoneCurve::Method::Rearranged: return "rearranged";
    case MonotoneCurve::Method::Isotonic: return "isotonic";
    case MonotoneCurve::Method::NoneNeeded: return "none-needed";
    }
    return "unknown";
}

bool CdfCurve::is_monotone() const
{
    return std::is_sorted(values.begin(), values.end());
}

std::size_t CdfCurve::failed_points() const
{
    return static_cast<std::size_t>(std::count(status.begin(), status.end(), PointStatus::Failed));
}

std::vector<double> linspace(double a, double b, std::size_t m)
{
    if (m == 0 || !std::isfinite(a) || !std::isfinite(b)) {
        throw Error(ErrorCode::InvalidArgument, "linspace: need m >= 1 and finite bounds");
    }
    if (m == 1) return {a};
    if (!(b > a)) throw Error(ErrorCode::InvalidArgument, "linspace: need a < b");
    std::vector<double> v(m);
    const double step = (b - a) / static_cast<double>(m - 1);
    for (std::size_t i = 0; i < m; ++i) v[i] = a + step * static_cast<double>(i);
    v.back() = b;
    return v;
}

std::vector<double> default_quantile_levels()
{
    return linspace(0.01, 0.99, 99);
}

void validate_levels(std::span<const double> levels)
{
    if (levels.empty()) throw Error(ErrorCode::InvalidArgument, "quantile levels are empty");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!(levels[i] > 0.0 && levels[i] < 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "quantile levels must lie in (0, 1)");
        }
        if (i > 0 && !(levels[i] > levels[i - 1])) {
            throw Error(ErrorCode::InvalidArgument, "quantile levels must be strictly increasing");
        }
    }
}

double interpolate(const ThresholdGrid& grid, std::span<const double> values, double y)
{
    if (values.size() != grid.size()) throw Error(ErrorCode::InvalidArgument, "interpolate: size mismatch");
    const auto g = grid.values();
    if (y <= g.front()) return values.front();
    if (y >= g.back()) return values.back();
    const auto it = std::upper_bound(g.begin(), g.end(), y);
    const auto j = static_cast<std::size_t>(it - g.begin());
    const double w = (y - g[j - 1]) / (g[j] - g[j - 1]);
    return values[j - 1] + w * (values[j] - values[j - 1]);
}

}  // namespace ivdr
