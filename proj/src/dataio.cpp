#include "ivdr/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "ivdr/error.hpp"

namespace ivdr {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string_view unquote(std::string_view s)
{
    s = trim(s);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return trim(s);
}

std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

bool is_missing(std::string_view cell)
{
    return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == ".";
}

std::optional<double> parse_double(std::string_view s)
{
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string_view> split_lines(std::string_view text)
{
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        auto pos = text.find('\n', start);
        if (pos == std::string_view::npos) pos = text.size();
        std::string_view line = text.substr(start, pos - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        start = pos + 1;
    }
    return lines;
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path);
    return out;
}

void finish(std::ofstream& out, const std::string& path)
{
    out.flush();
    if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path);
}

double apply(const ColumnTerm& term, double v, std::size_t line)
{
    switch (term.transform) {
    case ColumnTransform::Identity:
        return v;
    case ColumnTransform::Square:
        return v * v;
    case ColumnTransform::Log:
        if (!(v > 0.0)) {
            throw Error(ErrorCode::NonNumeric, "log of nonpositive value " + format_double(v) + " at line " +
                                                   std::to_string(line) + ", column " + term.column);
        }
        return std::log(v);
    }
    return v;
}

}  // namespace

KeyValues parse_key_values(std::string_view text)
{
    KeyValues kv;
    std::size_t lineno = 0;
    for (std::string_view line : split_lines(text)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorCode::InvalidArgument, "line " + std::to_string(lineno) + ": expected key=value");
        }
        const std::string_view key = trim(line.substr(0, eq));
        if (key.empty()) throw Error(ErrorCode::InvalidArgument, "line " + std::to_string(lineno) + ": empty key");
        kv.emplace_back(std::string(key), std::string(trim(line.substr(eq + 1))));
    }
    return kv;
}

KeyValues read_key_values(const std::string& path)
{
    return parse_key_values(read_file(path));
}

std::vector<std::string> split_list(std::string_view value, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= value.size()) {
        auto pos = value.find(sep, start);
        if (pos == std::string_view::npos) pos = value.size();
        const std::string_view item = trim(value.substr(start, pos - start));
        if (!item.empty()) out.emplace_back(item);
        start = pos + 1;
    }
    return out;
}

void write_key_values(const KeyValues& kv, const std::string& path)
{
    auto out = open_out(path);
    for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
    finish(out, path);
}

std::string ColumnTerm::label() const
{
    switch (transform) {
    case ColumnTransform::Log:
        return "log(" + column + ")";
    case ColumnTransform::Square:
        return column + "^2";
    case ColumnTransform::Identity:
        break;
    }
    return column;
}

ColumnTerm parse_term(std::string_view text)
{
    text = trim(text);
    ColumnTerm term;
    const auto colon = text.find(':');
    term.column = std::string(trim(text.substr(0, colon)));
    if (term.column.empty()) throw Error(ErrorCode::InvalidArgument, "empty column name");
    if (colon != std::string_view::npos) {
        const std::string_view t = trim(text.substr(colon + 1));
        if (t == "log") {
            term.transform = ColumnTransform::Log;
        } else if (t == "square") {
            term.transform = ColumnTransform::Square;
        } else if (t != "identity") {
            throw Error(ErrorCode::InvalidArgument, "unknown transform '" + std::string(t) + "'");
        }
    }
    return term;
}

std::string format_term(const ColumnTerm& term)
{
    switch (term.transform) {
    case ColumnTransform::Log:
        return term.column + ":log";
    case ColumnTransform::Square:
        return term.column + ":square";
    case ColumnTransform::Identity:
        break;
    }
    return term.column;
}

void ColumnSpec::validate() const
{
    if (outcome.column.empty() || endogenous.column.empty()) {
        throw Error(ErrorCode::InvalidArgument, "column spec needs outcome and endogenous columns");
    }
    if (instruments.empty()) throw Error(ErrorCode::InvalidArgument, "column spec needs at least one instrument");

    std::map<std::string, int> role;
    const auto claim = [&role](const std::string& column, int r) {
        const auto [it, inserted] = role.emplace(column, r);
        if (!inserted && it->second != r) {
            throw Error(ErrorCode::InvalidArgument, "column '" + column + "' used in more than one role");
        }
    };
    claim(outcome.column, 0);
    claim(endogenous.column, 1);
    for (const auto& t : exogenous) claim(t.column, 2);
    for (const auto& t : instruments) claim(t.column, 3);

    std::set<std::string> labels;
    for (const auto* block : {&exogenous, &instruments}) {
        for (const auto& t : *block) {
            if (!labels.insert(t.label()).second) {
                throw Error(ErrorCode::InvalidArgument, "term '" + t.label() + "' listed twice");
            }
        }
    }
}

ColumnSpec parse_column_spec(const KeyValues& kv)
{
    ColumnSpec spec;
    bool have_outcome = false;
    bool have_endogenous = false;
    for (const auto& [key, value] : kv) {
        if (key == "outcome") {
            spec.outcome = parse_term(value);
            have_outcome = true;
        } else if (key == "endogenous") {
            spec.endogenous = parse_term(value);
            have_endogenous = true;
        } else if (key == "exogenous") {
            spec.exogenous.clear();
            for (const auto& item : split_list(value)) spec.exogenous.push_back(parse_term(item));
        } else if (key == "instruments") {
            spec.instruments.clear();
            for (const auto& item : split_list(value)) spec.instruments.push_back(parse_term(item));
        } else {
            throw Error(ErrorCode::InvalidArgument, "unknown column spec key '" + key + "'");
        }
    }
    if (!have_outcome || !have_endogenous) {
        throw Error(ErrorCode::InvalidArgument, "column spec needs 'outcome' and 'endogenous'");
    }
    spec.validate();
    return spec;
}

ColumnSpec read_column_spec(const std::string& path)
{
    return parse_column_spec(read_key_values(path));
}

KeyValues to_key_values(const ColumnSpec& spec)
{
    const auto join = [](const std::vector<ColumnTerm>& terms) {
        std::string s;
        for (const auto& t : terms) {
            if (!s.empty()) s += ',';
            s += format_term(t);
        }
        return s;
    };
    return {{"outcome", format_term(spec.outcome)},
            {"endogenous", format_term(spec.endogenous)},
            {"exogenous", join(spec.exogenous)},
            {"instruments", join(spec.instruments)}};
}

LoadResult load_csv(const std::string& path, const ColumnSpec& spec)
{
    spec.validate();
    const std::string text = read_file(path);
    const auto lines = split_lines(text);
    if (lines.empty() || trim(lines.front()).empty()) {
        throw Error(ErrorCode::InvalidArgument, path + ": missing header row");
    }

    std::map<std::string, std::size_t, std::less<>> header;
    const auto names = split_fields(lines.front());
    for (std::size_t j = 0; j < names.size(); ++j) header.emplace(std::string(unquote(names[j])), j);

    std::vector<const ColumnTerm*> terms = {&spec.outcome, &spec.endogenous};
    for (const auto& t : spec.exogenous) terms.push_back(&t);
    for (const auto& t : spec.instruments) terms.push_back(&t);
    std::vector<std::size_t> index;
    for (const ColumnTerm* t : terms) {
        const auto it = header.find(t->column);
        if (it == header.end()) throw Error(ErrorCode::MissingColumn, path + ": no column '" + t->column + "'");
        index.push_back(it->second);
    }

    std::size_t rows_in = 0;
    std::size_t rows_dropped = 0;
    std::vector<std::vector<double>> rows;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (trim(lines[li]).empty()) continue;
        ++rows_in;
        const auto fields = split_fields(lines[li]);
        std::vector<double> row;
        row.reserve(terms.size());
        bool missing = false;
        for (std::size_t t = 0; t < terms.size(); ++t) {
            const std::string_view cell = index[t] < fields.size() ? unquote(fields[index[t]]) : std::string_view{};
            if (is_missing(cell)) {
                missing = true;
                break;
            }
            const auto v = parse_double(cell);
            if (!v || !std::isfinite(*v)) {
                throw Error(ErrorCode::NonNumeric, path + ": non-numeric value '" + std::string(cell) + "' at line " +
                                                       std::to_string(li + 1) + ", column " + terms[t]->column);
            }
            row.push_back(apply(*terms[t], *v, li + 1));
        }
        if (missing) {
            ++rows_dropped;
            continue;
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error(ErrorCode::EmptyAfterFiltering, path + ": no complete rows");

    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto k = static_cast<Eigen::Index>(spec.exogenous.size());
    const auto l = static_cast<Eigen::Index>(spec.instruments.size());
    Eigen::VectorXd y(n), y2(n);
    Eigen::MatrixXd x(n, k), z(n, l);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        y[i] = r[0];
        y2[i] = r[1];
        for (Eigen::Index j = 0; j < k; ++j) x(i, j) = r[static_cast<std::size_t>(2 + j)];
        for (Eigen::Index j = 0; j < l; ++j) z(i, j) = r[static_cast<std::size_t>(2 + k + j)];
    }
    return {Dataset::with_intercept(std::move(y), std::move(y2), x, std::move(z)), rows_in, rows.size(),
            rows_dropped};
}

EvalPoint make_eval_point(const ColumnSpec& spec, const std::map<std::string, double>& raw)
{
    const auto get = [&raw](const ColumnTerm& t) {
        const auto it = raw.find(t.column);
        if (it == raw.end()) throw Error(ErrorCode::InvalidArgument, "evaluation point lacks '" + t.column + "'");
        return apply(t, it->second, 0);
    };
    EvalPoint p;
    p.x.resize(static_cast<Eigen::Index>(spec.exogenous.size()) + 1);
    p.x[0] = 1.0;
    for (std::size_t j = 0; j < spec.exogenous.size(); ++j) {
        p.x[static_cast<Eigen::Index>(j) + 1] = get(spec.exogenous[j]);
    }
    p.y2 = get(spec.endogenous);
    return p;
}

NamedCurve named_curve(std::string name, const CdfCurve& curve)
{
    return {std::move(name), {curve.grid.values().begin(), curve.grid.values().end()}, curve.values, {}, {}, {}};
}

NamedCurve named_curve(std::string name, const MonotoneCurve& curve)
{
    return {std::move(name), {curve.grid.values().begin(), curve.grid.values().end()}, curve.values, {}, {}, {}};
}

NamedCurve named_curve(std::string name, const BandResult& band)
{
    return {std::move(name),
            {band.grid.values().begin(), band.grid.values().end()},
            band.point,
            band.lower,
            band.upper,
            band.rejected};
}

NamedCurve named_curve(std::string name, const QuantileCurve& curve)
{
    return {std::move(name), curve.levels, curve.values, {}, {}, {}};
}

void write_curves(std::span<const NamedCurve> curves, const std::string& path)
{
    std::set<std::string> seen;
    for (const NamedCurve& c : curves) {
        if (c.name.empty() || c.name.find_first_of(",\"\r\n") != std::string::npos) {
            throw Error(ErrorCode::InvalidArgument, "curve name '" + c.name + "' is empty or contains a delimiter");
        }
        if (!seen.insert(c.name).second) throw Error(ErrorCode::InvalidArgument, "duplicate curve name " + c.name);
        if (c.value.size() != c.y.size()) throw Error(ErrorCode::InvalidArgument, "curve " + c.name + ": ragged");
        if (c.has_band() && (c.lower.size() != c.y.size() || c.upper.size() != c.y.size() ||
                             c.rejected.size() != c.y.size())) {
            throw Error(ErrorCode::InvalidArgument, "curve " + c.name + ": ragged band");
        }
    }
    auto out = open_out(path);
    out << "name,y,value,lower,upper,rejected\n";
    for (const NamedCurve& c : curves) {
        for (std::size_t i = 0; i < c.y.size(); ++i) {
            out << c.name << ',' << format_double(c.y[i]) << ',' << format_double(c.value[i]) << ',';
            if (c.has_band()) {
                out << format_double(c.lower[i]) << ',' << format_double(c.upper[i]) << ','
                    << (c.rejected[i] ? '1' : '0');
            } else {
                out << ",,";
            }
            out << '\n';
        }
    }
    finish(out, path);
}

std::vector<NamedCurve> read_curves(const std::string& path)
{
    const std::string text = read_file(path);
    const auto lines = split_lines(text);
    if (lines.empty() || lines.front() != "name,y,value,lower,upper,rejected") {
        throw Error(ErrorCode::IoFailure, path + ": not a curve file");
    }
    std::vector<NamedCurve> curves;
    std::map<std::string, std::size_t> slot;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (lines[li].empty()) continue;
        const auto f = split_fields(lines[li]);
        const auto where = path + ":" + std::to_string(li + 1);
        if (f.size() != 6) throw Error(ErrorCode::IoFailure, where + ": expected 6 fields");
        const auto num = [&where](std::string_view s) {
            const auto v = parse_double(s);
            if (!v) throw Error(ErrorCode::NonNumeric, where + ": bad number '" + std::string(s) + "'");
            return *v;
        };
        const std::string name(f[0]);
        auto [it, inserted] = slot.emplace(name, curves.size());
        if (inserted) curves.push_back(NamedCurve{name, {}, {}, {}, {}, {}});
        NamedCurve& c = curves[it->second];
        c.y.push_back(num(f[1]));
        c.value.push_back(num(f[2]));
        if (!f[3].empty()) {
            c.lower.push_back(num(f[3]));
            c.upper.push_back(num(f[4]));
            if (f[5] != "0" && f[5] != "1") throw Error(ErrorCode::NonNumeric, where + ": rejected must be 0 or 1");
            c.rejected.push_back(f[5] == "1");
        }
    }
    return curves;
}

void write_report(const McReport& report, const ThresholdGrid& grid, const std::string& path)
{
    auto out = open_out(path);
    out << "estimator,monotonizer,n,x,y2,replications,failed,y,bias_sq,variance,mse\n";
    for (const McCell& c : report.cells) {
        const std::string prefix = c.estimator + ',' + std::string(to_string(c.monotonizer)) + ',' +
                                   std::to_string(c.n) + ',' + format_double(c.scenario.x) + ',' +
                                   format_double(c.scenario.y2) + ',' + std::to_string(c.replications) + ',' +
                                   std::to_string(c.failed) + ',';
        for (std::size_t g = 0; g < c.mse.size(); ++g) {
            out << prefix << format_double(grid[g]) << ',' << format_double(c.bias_sq[g]) << ','
                << format_double(c.variance[g]) << ',' << format_double(c.mse[g]) << '\n';
        }
        out << prefix << "avg," << format_double(c.avg_bias_sq) << ',' << format_double(c.avg_variance) << ','
            << format_double(c.avg_mse) << '\n';
    }
    finish(out, path);
}

}  // namespace ivdr
