#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ivdr/curve.hpp"
#include "ivdr/dataset.hpp"
#include "ivdr/inference.hpp"
#include "ivdr/simulation.hpp"

namespace ivdr {

/// Ordered key=value pairs. Blank lines and lines starting with '#' are
/// skipped; keys may repeat.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues parse_key_values(std::string_view text);
KeyValues read_key_values(const std::string& path);
/// Comma-separated list with surrounding whitespace trimmed; empty items dropped.
std::vector<std::string> split_list(std::string_view value, char sep = ',');

enum class ColumnTransform { Identity, Log, Square };

struct ColumnTerm {
    std::string column;
    ColumnTransform transform = ColumnTransform::Identity;

    /// "educ", "log(wage)", "exper^2"
    std::string label() const;
};

/// Parses "col", "col:log", "col:square" (also "col:identity").
ColumnTerm parse_term(std::string_view text);
std::string format_term(const ColumnTerm& term);

/// Column roles. A source column may appear in one role only; the same
/// column may appear twice within the exogenous block under different
/// transforms (exper and exper^2).
struct ColumnSpec {
    ColumnTerm outcome;
    ColumnTerm endogenous;
    std::vector<ColumnTerm> exogenous;  ///< intercept is prepended on load
    std::vector<ColumnTerm> instruments;

    void validate() const;
};

/// Reads keys outcome, endogenous, exogenous, instruments.
ColumnSpec parse_column_spec(const KeyValues& kv);
ColumnSpec read_column_spec(const std::string& path);
KeyValues to_key_values(const ColumnSpec& spec);

struct LoadResult {
    Dataset data;
    std::size_t rows_in = 0;
    std::size_t rows_kept = 0;
    std::size_t rows_dropped = 0;  ///< rows with an empty/NA cell in a referenced column
};

/// Comma-delimited file with a header row. Cells that are empty, "NA", "NaN"
/// or "." count as missing and drop the row. Any other unparsable cell, or a
/// log of a nonpositive value, throws NonNumeric naming the line and column.
LoadResult load_csv(const std::string& path, const ColumnSpec& spec);

/// Evaluation point from raw source-column values; transforms are applied.
EvalPoint make_eval_point(const ColumnSpec& spec, const std::map<std::string, double>& raw);

/// Serialisable curve. Band fields are empty for plain curves.
struct NamedCurve {
    std::string name;
    std::vector<double> y;
    std::vector<double> value;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<bool> rejected;

    bool has_band() const { return !lower.empty(); }
};

NamedCurve named_curve(std::string name, const CdfCurve& curve);
NamedCurve named_curve(std::string name, const MonotoneCurve& curve);
NamedCurve named_curve(std::string name, const BandResult& band);
/// y holds the levels and value the quantiles.
NamedCurve named_curve(std::string name, const QuantileCurve& curve);

/// Writes `name,y,value,lower,upper,rejected`. Duplicate names throw
/// InvalidArgument; write failures throw IoFailure.
void write_curves(std::span<const NamedCurve> curves, const std::string& path);

/// Inverse of write_curves; rows are grouped by name in file order.
std::vector<NamedCurve> read_curves(const std::string& path);

/// One row per (cell, grid point) plus the cell averages at y = "avg".
void write_report(const McReport& report, const ThresholdGrid& grid, const std::string& path);

/// Writes key=value lines.
void write_key_values(const KeyValues& kv, const std::string& path);

}  // namespace ivdr
