#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace ivdr {

class Dataset;

/// Strictly increasing, finite, nonempty set of thresholds y.
class ThresholdGrid {
public:
    ThresholdGrid() = default;
    explicit ThresholdGrid(std::vector<double> values);

    /// m equidistant points on [a, b].
    static ThresholdGrid linspace(double a, double b, std::size_t m);
    /// Sorted distinct outcome values of a dataset.
    static ThresholdGrid observed(const Dataset& data);

    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double front() const { return values_.front(); }
    double back() const { return values_.back(); }

    friend bool operator==(const ThresholdGrid&, const ThresholdGrid&) = default;

private:
    std::vector<double> values_;
};

enum class PointStatus {
    Ok,
    DegenerateLow,   ///< no outcome at or below y: F = 0
    DegenerateHigh,  ///< every outcome at or below y: F = 1
    Failed,          ///< estimator failed; value filled from neighbours
};

std::string_view to_string(PointStatus s);

/// Estimated conditional CDF on a grid. Not necessarily monotone.
struct CdfCurve {
    ThresholdGrid grid;
    std::vector<double> values;
    std::vector<PointStatus> status;

    bool is_monotone() const;
    std::size_t failed_points() const;
};

/// Nondecreasing CDF in [0, 1] produced by a monotoniser.
struct MonotoneCurve {
    enum class Method { Rearranged, Isotonic, NoneNeeded };

    ThresholdGrid grid;
    std::vector<double> values;
    Method method = Method::NoneNeeded;
};

std::string_view to_string(MonotoneCurve::Method m);

enum class QuantileFlag {
    Ok,
    BelowRange,  ///< level at or below the first curve value: smallest grid point
    AboveRange,  ///< level above the largest curve value: +inf sentinel
};

struct QuantileCurve {
    std::vector<double> levels;
    std::vector<double> values;
    std::vector<QuantileFlag> flags;
};

std::vector<double> linspace(double a, double b, std::size_t m);

/// 99 equidistant quantile levels on [0.01, 0.99].
std::vector<double> default_quantile_levels();

/// Throws InvalidArgument unless levels are strictly increasing in (0, 1).
void validate_levels(std::span<const double> levels);

/// Piecewise-linear interpolation of grid values at y, constant outside the grid.
double interpolate(const ThresholdGrid& grid, std::span<const double> values, double y);

}  // namespace ivdr
