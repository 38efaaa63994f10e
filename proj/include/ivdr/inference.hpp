#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ivdr/curve.hpp"
#include "ivdr/dataset.hpp"
#include "ivdr/dr_driver.hpp"
#include "ivdr/monotone.hpp"

namespace ivdr {

/// Everything needed to turn a dataset into one CDF curve.
struct Recipe {
    Estimator estimator = Estimator::ThreeStep;
    Monotonizer monotonizer = Monotonizer::Isotonic;
    std::vector<double> levels = default_quantile_levels();  ///< used by Rearrange
    ThresholdGrid grid;
    EvalPoint point;
};

struct RecipeOutcome {
    std::vector<double> values;
    std::size_t failed_points = 0;
};

/// Fit, evaluate and monotonise. Recipes sharing an estimator share one DrFit.
std::vector<RecipeOutcome> evaluate_recipes(const Dataset& data, std::span<const Recipe> recipes);

struct BandResult {
    ThresholdGrid grid;
    std::vector<double> point;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<bool> rejected;  ///< 0 lies outside [lower, upper]
    double level = 0.9;
    std::size_t replicates = 0;         ///< successful replicates used
    std::size_t failed_replicates = 0;  ///< dropped replicates
};

/// Called once per (replicate, recipe) with a fingerprint of the resampled
/// data the recipe was evaluated on. Invoked from worker threads.
using ResampleObserver = std::function<void(std::size_t replicate, std::size_t recipe, std::uint64_t fingerprint)>;

struct BootstrapOptions {
    std::size_t replications = 200;
    double level = 0.90;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    ResampleObserver observer;
};

/// Row indices of bootstrap replicate r: n draws with replacement from a
/// generator seeded from (seed, r) only, so replicates can run in any order.
std::vector<std::size_t> resample_indices(std::size_t n, std::uint64_t seed, std::size_t replicate);

/// Empirical quantile by inverting the ECDF: the ceil(p B)-th order statistic.
double percentile_of_sorted(std::span<const double> sorted, double p);

/// Pointwise percentile bands for one curve. A replicate is dropped when the
/// estimator fails at any grid point; fewer than B/2 survivors throws
/// Error(ReplicateFailure).
BandResult bootstrap_bands(const Dataset& data, const Recipe& recipe, const BootstrapOptions& options = {});

/// Paired bootstrap of curve_a - curve_b: both recipes are evaluated on the
/// same resample in each replicate. Recipes must share grid and point.
BandResult difference_bands(const Dataset& data, const Recipe& recipe_a, const Recipe& recipe_b,
                            const BootstrapOptions& options = {});

}  // namespace ivdr
