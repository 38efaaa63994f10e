#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "ivdr/curve.hpp"

namespace ivdr {

enum class Monotonizer { Isotonic, Rearrange, None };

std::string_view to_string(Monotonizer m);
/// Accepts "isotonic", "rearrange", "none".
Monotonizer parse_monotonizer(std::string_view name);

/// Pool-adjacent-violators: weighted least-squares projection of `values`
/// onto nondecreasing sequences. Empty `weights` means unit weights.
/// Linear time.
std::vector<double> pava(std::span<const double> values, std::span<const double> weights = {});

/// Sequence with duplicate abscissae collapsed to their weighted mean, as
/// required before running PAVA on raw observations with ties.
struct MergedSeries {
    std::vector<double> x;
    std::vector<double> values;
    std::vector<double> weights;
};

/// `x` must be sorted; equal neighbours are merged with multiplicity weights.
MergedSeries merge_ties(std::span<const double> x, std::span<const double> values);

/// Isotonic regression of the curve values on the grid, then clamped to [0, 1].
/// Method is NoneNeeded when the input was already monotone in [0, 1].
MonotoneCurve isotonic(const CdfCurve& curve);

/// Monotone rearrangement on a discrete level grid:
///   Q(u)  = min{ y in grid : F(y) >= u }   (+inf if none)
///   F~(y) = #{ u in levels : Q(u) <= y } / |levels|
MonotoneCurve rearrange(const CdfCurve& curve, std::span<const double> levels);

/// Clips values into [0, 1]; preserves monotonicity.
MonotoneCurve clamp_unit(MonotoneCurve curve);

/// Applies the chosen monotoniser and returns the resulting values. `None`
/// passes the raw values through unchanged.
std::vector<double> monotonize(const CdfCurve& curve, Monotonizer method, std::span<const double> levels);

}  // namespace ivdr
