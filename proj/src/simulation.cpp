#include "ivdr/simulation.hpp"

#include <cmath>
#include <optional>
#include <random>

#include "ivdr/error.hpp"
#include "ivdr/numerics.hpp"
#include "ivdr/parallel.hpp"

namespace ivdr {

namespace {

std::uint64_t mix(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t replication_seed(std::uint64_t seed, std::size_t n, std::size_t rep)
{
    return mix(mix(mix(seed) ^ static_cast<std::uint64_t>(n)) ^ static_cast<std::uint64_t>(rep));
}

}  // namespace

Dataset draw_dgp(const DgpConfig& config)
{
    if (config.n < 10) throw Error(ErrorCode::InvalidArgument, "draw_dgp: n must be at least 10");
    if (!(config.rho > -1.0 && config.rho < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "draw_dgp: rho must lie in (-1, 1)");
    }
    const auto n = static_cast<Eigen::Index>(config.n);
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal;
    const double tail = std::sqrt(1.0 - config.rho * config.rho);

    Eigen::VectorXd y(n), y2(n);
    Eigen::MatrixXd x(n, 1), z(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double xi = normal(rng);
        const double zi = normal(rng);
        const double e1 = normal(rng);
        const double e2 = normal(rng);
        const double u = e1;
        const double v = config.rho * e1 + tail * e2;
        x(i, 0) = xi;
        z(i, 0) = zi;
        y2[i] = 1.0 + xi + zi + v;
        y[i] = std::max(config.censor_at, 1.0 + xi + y2[i] + u);
    }
    return Dataset::with_intercept(std::move(y), std::move(y2), x, std::move(z));
}

double true_cdf(double y, double x, double y2, double censor_at)
{
    return y >= censor_at ? norm_cdf(y - 1.0 - x - y2) : 0.0;
}

NamedEstimator dr_estimator(Estimator estimator)
{
    return {std::string(to_string(estimator)),
            [estimator](const Dataset& data, const ThresholdGrid& grid, std::span<const Scenario> scenarios) {
                const DrFit fit(data, estimator, grid);
                std::vector<CdfCurve> curves;
                curves.reserve(scenarios.size());
                for (const Scenario& s : scenarios) {
                    EvalPoint p;
                    p.x = Eigen::Vector2d(1.0, s.x);
                    p.y2 = s.y2;
                    curves.push_back(fit.curve_at(p));
                }
                return curves;
            }};
}

const McCell& McReport::find(std::string_view estimator, Monotonizer m, std::size_t n, const Scenario& s) const
{
    for (const McCell& c : cells) {
        if (c.estimator == estimator && c.monotonizer == m && c.n == n && c.scenario.x == s.x &&
            c.scenario.y2 == s.y2) {
            return c;
        }
    }
    throw Error(ErrorCode::InvalidArgument, "McReport: no such cell");
}

McReport run_study(const StudyConfig& config)
{
    if (config.replications < 2) throw Error(ErrorCode::InvalidArgument, "run_study: replications must be >= 2");
    if (config.estimators.empty() || config.scenarios.empty() || config.sample_sizes.empty() ||
        config.monotonizers.empty()) {
        throw Error(ErrorCode::InvalidArgument, "run_study: empty sweep");
    }
    validate_levels(config.levels);

    const std::size_t grid_size = config.grid.size();
    const std::size_t n_est = config.estimators.size();
    const std::size_t n_scen = config.scenarios.size();
    const std::size_t n_mono = config.monotonizers.size();
    const std::size_t reps = config.replications;

    McReport report;
    report.grid_size = grid_size;
    report.replications = reps;

    for (const std::size_t n : config.sample_sizes) {
        // draws[rep][estimator] -> curves indexed [scenario * n_mono + mono]
        using Draw = std::optional<std::vector<std::vector<double>>>;
        std::vector<std::vector<Draw>> draws(reps, std::vector<Draw>(n_est));

        parallel_for(reps, config.threads, [&](std::size_t rep) {
            DgpConfig dgp;
            dgp.rho = config.rho;
            dgp.n = n;
            dgp.censor_at = config.censor_at;
            dgp.seed = replication_seed(config.seed, n, rep);
            const Dataset data = draw_dgp(dgp);
            for (std::size_t e = 0; e < n_est; ++e) {
                try {
                    const std::vector<CdfCurve> curves =
                        config.estimators[e].estimate(data, config.grid, config.scenarios);
                    std::vector<std::vector<double>> out;
                    out.reserve(n_scen * n_mono);
                    bool failed = false;
                    for (const CdfCurve& c : curves) {
                        if (c.failed_points() > 0) failed = true;
                        for (const Monotonizer m : config.monotonizers) {
                            out.push_back(monotonize(c, m, config.levels));
                        }
                    }
                    if (!failed) draws[rep][e] = std::move(out);
                } catch (const Error&) {
                    // excluded replication
                }
            }
        });

        for (std::size_t e = 0; e < n_est; ++e) {
            for (std::size_t s = 0; s < n_scen; ++s) {
                const Scenario& sc = config.scenarios[s];
                std::vector<double> truth(grid_size);
                for (std::size_t g = 0; g < grid_size; ++g) {
                    truth[g] = true_cdf(config.grid[g], sc.x, sc.y2, config.censor_at);
                }
                for (std::size_t mi = 0; mi < n_mono; ++mi) {
                    McCell cell;
                    cell.estimator = config.estimators[e].name;
                    cell.monotonizer = config.monotonizers[mi];
                    cell.n = n;
                    cell.scenario = sc;
                    const std::size_t slot = s * n_mono + mi;

                    std::vector<double> mean(grid_size, 0.0);
                    for (std::size_t rep = 0; rep < reps; ++rep) {
                        if (!draws[rep][e]) continue;
                        ++cell.replications;
                        const auto& v = (*draws[rep][e])[slot];
                        for (std::size_t g = 0; g < grid_size; ++g) mean[g] += v[g];
                    }
                    cell.failed = reps - cell.replications;
                    if (cell.replications == 0) {
                        throw Error(ErrorCode::ReplicateFailure,
                                    "run_study: every replication failed for " + cell.estimator);
                    }
                    const double r = static_cast<double>(cell.replications);
                    for (double& m : mean) m /= r;

                    cell.bias_sq.assign(grid_size, 0.0);
                    cell.variance.assign(grid_size, 0.0);
                    cell.mse.assign(grid_size, 0.0);
                    for (std::size_t rep = 0; rep < reps; ++rep) {
                        if (!draws[rep][e]) continue;
                        const auto& v = (*draws[rep][e])[slot];
                        for (std::size_t g = 0; g < grid_size; ++g) {
                            const double dev = v[g] - mean[g];
                            const double err = v[g] - truth[g];
                            cell.variance[g] += dev * dev;
                            cell.mse[g] += err * err;
                        }
                    }
                    for (std::size_t g = 0; g < grid_size; ++g) {
                        const double bias = mean[g] - truth[g];
                        cell.bias_sq[g] = bias * bias;
                        cell.variance[g] /= r;
                        cell.mse[g] /= r;
                        cell.avg_bias_sq += cell.bias_sq[g];
                        cell.avg_variance += cell.variance[g];
                        cell.avg_mse += cell.mse[g];
                    }
                    const double gs = static_cast<double>(grid_size);
                    cell.avg_bias_sq /= gs;
                    cell.avg_variance /= gs;
                    cell.avg_mse /= gs;
                    report.cells.push_back(std::move(cell));
                }
            }
        }
    }
    return report;
}

}  // namespace ivdr
