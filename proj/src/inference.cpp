#include "ivdr/inference.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <random>

#include "ivdr/error.hpp"
#include "ivdr/parallel.hpp"

namespace ivdr {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

bool same_point(const EvalPoint& a, const EvalPoint& b)
{
    return a.y2 == b.y2 && a.x.size() == b.x.size() && a.x == b.x;
}

void check_options(const BootstrapOptions& options)
{
    if (options.replications < 2) throw Error(ErrorCode::InvalidArgument, "bootstrap: need at least 2 replications");
    if (!(options.level > 0.0 && options.level < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "bootstrap: level must lie in (0, 1)");
    }
}

// Runs the replicates; `combine` maps the per-recipe outcomes to one curve.
BandResult run_bootstrap(const Dataset& data, std::span<const Recipe> recipes, const BootstrapOptions& options,
                         const std::function<std::vector<double>(const std::vector<RecipeOutcome>&)>& combine)
{
    check_options(options);
    const std::size_t grid_size = recipes.front().grid.size();
    const auto n = static_cast<std::size_t>(data.n());
    const std::size_t reps = options.replications;

    BandResult band;
    band.grid = recipes.front().grid;
    band.level = options.level;
    band.point = combine(evaluate_recipes(data, recipes));

    std::vector<std::optional<std::vector<double>>> draws(reps);
    parallel_for(reps, options.threads, [&](std::size_t r) {
        const std::vector<std::size_t> rows = resample_indices(n, options.seed, r);
        try {
            const Dataset sample = data.subset(rows);
            if (options.observer) {
                const std::uint64_t fp = sample.fingerprint();
                for (std::size_t j = 0; j < recipes.size(); ++j) options.observer(r, j, fp);
            }
            const std::vector<RecipeOutcome> out = evaluate_recipes(sample, recipes);
            for (const RecipeOutcome& o : out) {
                if (o.failed_points > 0) return;
            }
            draws[r] = combine(out);
        } catch (const Error&) {
            // dropped replicate
        }
    });

    std::vector<std::vector<double>> by_point(grid_size);
    for (const auto& d : draws) {
        if (!d) continue;
        for (std::size_t g = 0; g < grid_size; ++g) by_point[g].push_back((*d)[g]);
    }
    band.replicates = by_point.front().size();
    band.failed_replicates = reps - band.replicates;
    if (2 * band.replicates < reps) {
        throw Error(ErrorCode::ReplicateFailure, std::to_string(band.failed_replicates) + " of " +
                                                     std::to_string(reps) + " bootstrap replicates failed");
    }

    const double alpha = 1.0 - options.level;
    band.lower.resize(grid_size);
    band.upper.resize(grid_size);
    band.rejected.resize(grid_size);
    for (std::size_t g = 0; g < grid_size; ++g) {
        auto& v = by_point[g];
        std::sort(v.begin(), v.end());
        band.lower[g] = percentile_of_sorted(v, 0.5 * alpha);
        band.upper[g] = percentile_of_sorted(v, 1.0 - 0.5 * alpha);
        band.rejected[g] = band.lower[g] > 0.0 || band.upper[g] < 0.0;
    }
    return band;
}

}  // namespace

std::vector<RecipeOutcome> evaluate_recipes(const Dataset& data, std::span<const Recipe> recipes)
{
    std::map<Estimator, std::unique_ptr<DrFit>> fits;
    std::vector<RecipeOutcome> out;
    out.reserve(recipes.size());
    for (const Recipe& recipe : recipes) {
        auto& fit = fits[recipe.estimator];
        if (!fit || !(fit->grid() == recipe.grid)) {
            fit = std::make_unique<DrFit>(data, recipe.estimator, recipe.grid);
        }
        const CdfCurve curve = fit->curve_at(recipe.point);
        out.push_back({monotonize(curve, recipe.monotonizer, recipe.levels), curve.failed_points()});
    }
    return out;
}

std::vector<std::size_t> resample_indices(std::size_t n, std::uint64_t seed, std::size_t replicate)
{
    std::mt19937_64 rng(splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(replicate)));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = pick(rng);
    return rows;
}

double percentile_of_sorted(std::span<const double> sorted, double p)
{
    if (sorted.empty()) throw Error(ErrorCode::InvalidArgument, "percentile of an empty sample");
    const double b = static_cast<double>(sorted.size());
    // ceil(p B) with a guard against p B landing a rounding error above an integer
    const double rank = std::ceil(p * b - 1e-9);
    const auto idx = static_cast<std::size_t>(std::clamp(rank, 1.0, b)) - 1;
    return sorted[idx];
}

BandResult bootstrap_bands(const Dataset& data, const Recipe& recipe, const BootstrapOptions& options)
{
    const Recipe recipes[] = {recipe};
    return run_bootstrap(data, recipes, options,
                         [](const std::vector<RecipeOutcome>& out) { return out.front().values; });
}

BandResult difference_bands(const Dataset& data, const Recipe& recipe_a, const Recipe& recipe_b,
                            const BootstrapOptions& options)
{
    if (!(recipe_a.grid == recipe_b.grid) || !same_point(recipe_a.point, recipe_b.point)) {
        throw Error(ErrorCode::InvalidArgument, "difference_bands: recipes must share grid and evaluation point");
    }
    const Recipe recipes[] = {recipe_a, recipe_b};
    return run_bootstrap(data, recipes, options, [](const std::vector<RecipeOutcome>& out) {
        std::vector<double> d(out[0].values.size());
        for (std::size_t g = 0; g < d.size(); ++g) d[g] = out[0].values[g] - out[1].values[g];
        return d;
    });
}

}  // namespace ivdr
