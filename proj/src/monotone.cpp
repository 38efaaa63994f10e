#include "ivdr/monotone.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "ivdr/error.hpp"

namespace ivdr {

std::string_view to_string(Monotonizer m)
{
    switch (m) {
    case Monotonizer::Isotonic: return "isotonic";
    case Monotonizer::Rearrange: return "rearrange";
    case Monotonizer::None: return "none";
    }
    return "unknown";
}

Monotonizer parse_monotonizer(std::string_view name)
{
    if (name == "isotonic") return Monotonizer::Isotonic;
    if (name == "rearrange") return Monotonizer::Rearrange;
    if (name == "none") return Monotonizer::None;
    throw Error(ErrorCode::InvalidArgument, "unknown monotonizer '" + std::string(name) + "'");
}

std::vector<double> pava(std::span<const double> values, std::span<const double> weights)
{
    if (!weights.empty() && weights.size() != values.size()) {
        throw Error(ErrorCode::InvalidArgument, "pava: weights have the wrong length");
    }
    struct Block {
        double mean;
        double weight;
        std::size_t count;
    };
    std::vector<Block> blocks;
    blocks.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double w = weights.empty() ? 1.0 : weights[i];
        if (!(w > 0.0)) throw Error(ErrorCode::InvalidArgument, "pava: weights must be positive");
        blocks.push_back({values[i], w, 1});
        while (blocks.size() > 1 && blocks[blocks.size() - 2].mean > blocks.back().mean) {
            const Block top = blocks.back();
            blocks.pop_back();
            Block& prev = blocks.back();
            const double total = prev.weight + top.weight;
            prev.mean = (prev.mean * prev.weight + top.mean * top.weight) / total;
            prev.weight = total;
            prev.count += top.count;
        }
    }
    std::vector<double> out;
    out.reserve(values.size());
    for (const Block& b : blocks) out.insert(out.end(), b.count, b.mean);
    return out;
}

MergedSeries merge_ties(std::span<const double> x, std::span<const double> values)
{
    if (x.size() != values.size()) throw Error(ErrorCode::InvalidArgument, "merge_ties: size mismatch");
    if (!std::is_sorted(x.begin(), x.end())) throw Error(ErrorCode::InvalidArgument, "merge_ties: x not sorted");
    MergedSeries m;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!m.x.empty() && m.x.back() == x[i]) {
            double& w = m.weights.back();
            m.values.back() = (m.values.back() * w + values[i]) / (w + 1.0);
            w += 1.0;
        } else {
            m.x.push_back(x[i]);
            m.values.push_back(values[i]);
            m.weights.push_back(1.0);
        }
    }
    return m;
}

MonotoneCurve clamp_unit(MonotoneCurve curve)
{
    for (double& v : curve.values) v = std::clamp(v, 0.0, 1.0);
    return curve;
}

MonotoneCurve isotonic(const CdfCurve& curve)
{
    MonotoneCurve out;
    out.grid = curve.grid;
    const bool in_unit = std::all_of(curve.values.begin(), curve.values.end(),
                                     [](double v) { return v >= 0.0 && v <= 1.0; });
    if (curve.is_monotone() && in_unit) {
        out.values = curve.values;
        out.method = MonotoneCurve::Method::NoneNeeded;
        return out;
    }
    out.values = pava(curve.values);
    out.method = MonotoneCurve::Method::Isotonic;
    return clamp_unit(std::move(out));
}

MonotoneCurve rearrange(const CdfCurve& curve, std::span<const double> levels)
{
    validate_levels(levels);
    const auto grid = curve.grid.values();
    if (curve.values.size() != grid.size()) throw Error(ErrorCode::InvalidArgument, "rearrange: size mismatch");

    // Estimated quantile function on the level grid; nondecreasing in u.
    std::vector<double> quantile(levels.size(), std::numeric_limits<double>::infinity());
    for (std::size_t j = 0; j < levels.size(); ++j) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (curve.values[i] >= levels[j]) {
                quantile[j] = grid[i];
                break;
            }
        }
    }
    MonotoneCurve out;
    out.grid = curve.grid;
    out.method = MonotoneCurve::Method::Rearranged;
    out.values.resize(grid.size());
    const double total = static_cast<double>(levels.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto count = std::upper_bound(quantile.begin(), quantile.end(), grid[i]) - quantile.begin();
        out.values[i] = static_cast<double>(count) / total;
    }
    return clamp_unit(std::move(out));
}

std::vector<double> monotonize(const CdfCurve& curve, Monotonizer method, std::span<const double> levels)
{
    switch (method) {
    case Monotonizer::Isotonic: return isotonic(curve).values;
    case Monotonizer::Rearrange: return rearrange(curve, levels).values;
    case Monotonizer::None: return curve.values;
    }
    return curve.values;
}

}  // namespace ivdr
