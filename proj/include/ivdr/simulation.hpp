#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ivdr/curve.hpp"
#include "ivdr/dataset.hpp"
#include "ivdr/dr_driver.hpp"
#include "ivdr/monotone.hpp"

namespace ivdr {

/// Censored-outcome design with one endogenous regressor:
///   Y2 = 1 + X + Z + V,  Y~ = 1 + X + Y2 + U,  Y = max(censor_at, Y~)
/// with X, Z iid N(0,1) and (U, V) standard bivariate normal, Corr = rho.
struct DgpConfig {
    double rho = 0.7;
    std::size_t n = 400;
    double censor_at = 2.0;  ///< -inf disables censoring
    std::uint64_t seed = 1;
};

Dataset draw_dgp(const DgpConfig& config);

/// Phi(y - 1 - x - y2) for y >= censor_at, 0 below.
double true_cdf(double y, double x, double y2, double censor_at = 2.0);

struct Scenario {
    double x = 1.0;
    double y2 = 1.0;
};

/// Maps a simulated dataset to one raw CDF curve per scenario.
using CurveEstimator =
    std::function<std::vector<CdfCurve>(const Dataset&, const ThresholdGrid&, std::span<const Scenario>)>;

struct NamedEstimator {
    std::string name;
    CurveEstimator estimate;
};

/// Distribution-regression estimator evaluated at x = (1, scenario.x).
NamedEstimator dr_estimator(Estimator estimator);

struct StudyConfig {
    std::vector<Scenario> scenarios = {{1.0, 1.0}, {2.0, 2.0}};
    std::vector<std::size_t> sample_sizes = {100, 200, 400};
    std::size_t replications = 200;
    ThresholdGrid grid = ThresholdGrid::linspace(1.0, 5.0, 50);
    std::vector<double> levels = default_quantile_levels();
    std::vector<NamedEstimator> estimators;
    std::vector<Monotonizer> monotonizers = {Monotonizer::Rearrange, Monotonizer::Isotonic};
    double rho = 0.7;
    double censor_at = 2.0;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

/// One (estimator, monotoniser, n, scenario) cell. Variances use the
/// population form (divide by R), so mse = bias^2 + variance pointwise.
struct McCell {
    std::string estimator;
    Monotonizer monotonizer = Monotonizer::Isotonic;
    std::size_t n = 0;
    Scenario scenario;
    std::size_t replications = 0;  ///< successful replications
    std::size_t failed = 0;
    std::vector<double> bias_sq;   ///< per grid point
    std::vector<double> variance;
    std::vector<double> mse;
    double avg_bias_sq = 0.0;
    double avg_variance = 0.0;
    double avg_mse = 0.0;
};

struct McReport {
    std::vector<McCell> cells;
    std::size_t grid_size = 0;
    std::size_t replications = 0;  ///< requested

    const McCell& find(std::string_view estimator, Monotonizer m, std::size_t n, const Scenario& s) const;
};

/// Monte Carlo study over sample sizes x replications. Every replication
/// draws one dataset shared by all estimators. A replication is excluded for
/// an estimator that throws or fails at any grid point.
McReport run_study(const StudyConfig& config);

}  // namespace ivdr
