#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string_view>

#include <CLI11.hpp>

#include "ivdr/dataio.hpp"
#include "ivdr/dr_driver.hpp"
#include "ivdr/error.hpp"
#include "ivdr/inference.hpp"
#include "ivdr/linear.hpp"
#include "ivdr/monotone.hpp"
#include "ivdr/simulation.hpp"
#include "ivdr/three_step.hpp"

namespace ivdr::cli {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Settings = std::map<std::string, std::string>;

struct KeyInfo {
    std::string name;
    std::string help;
    bool repeatable = false;
};

const std::vector<KeyInfo> kSpecKeys = {
    {"data", "input CSV file"},
    {"spec", "column spec file (key=value: outcome, endogenous, exogenous, instruments)"},
    {"outcome", "outcome column, col[:log|:square]"},
    {"endogenous", "endogenous regressor column"},
    {"exogenous", "comma-separated exogenous columns (intercept is added)"},
    {"instruments", "comma-separated instrument columns"},
};

const std::vector<KeyInfo> kCurveKeys = {
    {"estimator", "probit, iv-ml or three-step; repeatable", true},
    {"monotonize", "isotonic, rearrange or none; repeatable", true},
    {"at", "evaluation point col=value,...; repeatable", true},
    {"grid", "observed or linspace:a:b:m"},
    {"levels", "quantile levels a:b:m"},
};

const std::vector<KeyInfo> kCommonKeys = {
    {"out", "output directory"},
    {"threads", "worker threads"},
};

std::vector<KeyInfo> keys_for(std::string_view command)
{
    std::vector<KeyInfo> keys = kCommonKeys;
    const auto add = [&keys](const std::vector<KeyInfo>& more) { keys.insert(keys.end(), more.begin(), more.end()); };
    if (command == "linear") {
        add(kSpecKeys);
        keys.push_back({"at", "evaluation point col=value,...; repeatable", true});
        return keys;
    }
    add(kCurveKeys);
    if (command == "simulate") {
        add({{"reps", "Monte Carlo replications"},
             {"n", "comma-separated sample sizes"},
             {"rho", "correlation of the structural and first-stage errors"},
             {"censor", "censoring point of the outcome"},
             {"seed", "random seed"}});
        return keys;
    }
    add(kSpecKeys);
    if (command == "bands") {
        add({{"B", "bootstrap replications"}, {"level", "confidence level"}, {"seed", "random seed"}});
    }
    return keys;
}

Settings defaults_for(std::string_view command)
{
    Settings s = {{"out", "."}, {"threads", "1"}};
    if (command == "simulate") {
        s.insert({{"estimator", "probit,three-step"},
                  {"monotonize", "rearrange,isotonic"},
                  {"at", "x=1,y2=1;x=2,y2=2"},
                  {"grid", "linspace:1:5:50"},
                  {"levels", "0.01:0.99:99"},
                  {"reps", "200"},
                  {"n", "100,200,400"},
                  {"rho", "0.7"},
                  {"censor", "2"},
                  {"seed", "1"}});
        return s;
    }
    s.insert({{"data", ""},
              {"spec", ""},
              {"outcome", "wage:log"},
              {"endogenous", "educ"},
              {"exogenous", "exper,exper:square"},
              {"instruments", "motheduc"},
              {"at", "educ=10,exper=4;educ=12,exper=12;educ=16,exper=24"}});
    if (command == "linear") return s;
    s.insert({{"estimator", "probit,three-step"},
              {"monotonize", "isotonic"},
              {"grid", "observed"},
              {"levels", "0.01:0.99:99"}});
    if (command == "bands") s.insert({{"B", "200"}, {"level", "0.9"}, {"seed", "1"}});
    return s;
}

double parse_real(const Settings& s, const std::string& key)
{
    const std::string& text = s.at(key);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty() || !std::isfinite(v)) {
        throw UsageError("--" + key + ": expected a number, got '" + text + "'");
    }
    return v;
}

double parse_real_text(const std::string& what, std::string_view text)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty() || !std::isfinite(v)) {
        throw UsageError(what + ": expected a number, got '" + std::string(text) + "'");
    }
    return v;
}

std::size_t parse_count_text(const std::string& what, std::string_view text)
{
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw UsageError(what + ": expected a nonnegative integer, got '" + std::string(text) + "'");
    }
    return v;
}

std::size_t parse_count(const Settings& s, const std::string& key)
{
    return parse_count_text("--" + key, s.at(key));
}

struct Point {
    std::string label;
    std::map<std::string, double> values;
};

std::vector<Point> parse_points(const std::string& text)
{
    std::vector<Point> points;
    for (const std::string& item : split_list(text, ';')) {
        Point p;
        for (const std::string& pair : split_list(item, ',')) {
            const auto eq = pair.find('=');
            if (eq == std::string::npos) throw UsageError("--at: expected name=value, got '" + pair + "'");
            const std::string name = pair.substr(0, eq);
            const double v = parse_real_text("--at " + name, pair.substr(eq + 1));
            if (!p.values.emplace(name, v).second) throw UsageError("--at: '" + name + "' given twice");
            if (!p.label.empty()) p.label += ';';
            p.label += pair;
        }
        if (p.values.empty()) throw UsageError("--at: empty evaluation point");
        points.push_back(std::move(p));
    }
    if (points.empty()) throw UsageError("--at: no evaluation points");
    return points;
}

std::vector<double> parse_levels(const std::string& text)
{
    const auto parts = split_list(text, ':');
    if (parts.size() != 3) throw UsageError("--levels: expected a:b:m");
    const double a = parse_real_text("--levels", parts[0]);
    const double b = parse_real_text("--levels", parts[1]);
    const std::size_t m = parse_count_text("--levels", parts[2]);
    if (m < 1) throw UsageError("--levels: need at least one level");
    std::vector<double> levels = m == 1 ? std::vector<double>{a} : linspace(a, b, m);
    try {
        validate_levels(levels);
    } catch (const Error& e) {
        throw UsageError(std::string("--levels: ") + e.what());
    }
    return levels;
}

ThresholdGrid parse_grid(const std::string& text, const Dataset* data)
{
    if (text == "observed") {
        if (!data) throw UsageError("--grid observed needs a dataset");
        return ThresholdGrid::observed(*data);
    }
    const auto parts = split_list(text, ':');
    if (parts.size() != 4 || parts[0] != "linspace") throw UsageError("--grid: expected observed or linspace:a:b:m");
    const double a = parse_real_text("--grid", parts[1]);
    const double b = parse_real_text("--grid", parts[2]);
    const std::size_t m = parse_count_text("--grid", parts[3]);
    if (m < 2 || !(b > a)) throw UsageError("--grid: need m >= 2 and a < b");
    return ThresholdGrid::linspace(a, b, m);
}

std::vector<Estimator> parse_estimators(const std::string& text)
{
    std::vector<Estimator> out;
    for (const std::string& item : split_list(text)) {
        try {
            out.push_back(parse_estimator(item));
        } catch (const Error&) {
            throw UsageError("--estimator: unknown estimator '" + item + "'");
        }
    }
    if (out.empty()) throw UsageError("--estimator: none given");
    return out;
}

std::vector<Monotonizer> parse_monotonizers(const std::string& text)
{
    std::vector<Monotonizer> out;
    for (const std::string& item : split_list(text)) {
        try {
            out.push_back(parse_monotonizer(item));
        } catch (const Error&) {
            throw UsageError("--monotonize: unknown method '" + item + "'");
        }
    }
    if (out.empty()) throw UsageError("--monotonize: none given");
    return out;
}

unsigned parse_threads(const Settings& s)
{
    const std::size_t t = parse_count(s, "threads");
    if (t < 1 || t > 1024) throw UsageError("--threads: expected 1..1024");
    return static_cast<unsigned>(t);
}

std::string format_real(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string fixed4(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::filesystem::path output_dir(const Settings& s)
{
    std::filesystem::path dir = s.at("out");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create output directory " + dir.string());
    return dir;
}

ColumnSpec spec_from(const Settings& s)
{
    KeyValues kv = {{"outcome", s.at("outcome")},
                    {"endogenous", s.at("endogenous")},
                    {"exogenous", s.at("exogenous")},
                    {"instruments", s.at("instruments")}};
    try {
        return parse_column_spec(kv);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidArgument) throw UsageError(e.what());
        throw;
    }
}

struct Loaded {
    ColumnSpec spec;
    LoadResult result;
};

Loaded load(const Settings& s, std::ostream& out)
{
    if (s.at("data").empty()) throw UsageError("--data is required");
    ColumnSpec spec = spec_from(s);
    LoadResult result = load_csv(s.at("data"), spec);
    out << "data: " << s.at("data") << ", rows " << result.rows_in << ", kept " << result.rows_kept << ", dropped "
        << result.rows_dropped << '\n';
    return {std::move(spec), std::move(result)};
}

std::vector<std::pair<std::string, EvalPoint>> data_points(const Settings& s, const ColumnSpec& spec)
{
    std::vector<std::pair<std::string, EvalPoint>> out;
    for (const Point& p : parse_points(s.at("at"))) {
        try {
            out.emplace_back(p.label, make_eval_point(spec, p.values));
        } catch (const Error& e) {
            throw UsageError(std::string("--at: ") + e.what());
        }
    }
    return out;
}

MonotoneCurve as_monotone(const ThresholdGrid& grid, std::vector<double> values)
{
    MonotoneCurve m;
    m.grid = grid;
    m.values = std::move(values);
    return m;
}

void write_config(const Settings& s, const std::string& command, const std::filesystem::path& dir)
{
    KeyValues kv = {{"command", command}};
    for (const auto& [k, v] : s) kv.emplace_back(k, v);
    write_key_values(kv, (dir / "resolved.cfg").string());
}

int cmd_fit(const Settings& s, bool quantiles, std::ostream& out)
{
    const auto estimators = parse_estimators(s.at("estimator"));
    const auto monotonizers = parse_monotonizers(s.at("monotonize"));
    const auto levels = parse_levels(s.at("levels"));
    const unsigned threads = parse_threads(s);
    const Loaded loaded = load(s, out);
    const auto points = data_points(s, loaded.spec);
    const ThresholdGrid grid = parse_grid(s.at("grid"), &loaded.result.data);
    const auto dir = output_dir(s);

    std::vector<NamedCurve> curves;
    std::vector<NamedCurve> quantile_curves;
    const std::vector<double> median = {0.5};
    for (const Estimator e : estimators) {
        const DrFit fit(loaded.result.data, e, grid, DrOptions{threads});
        for (const auto& [label, point] : points) {
            const CdfCurve raw = fit.curve_at(point);
            const std::string base = std::string(to_string(e)) + "/";
            curves.push_back(named_curve(base + "raw/" + label, raw));
            for (const Monotonizer m : monotonizers) {
                const MonotoneCurve mono = as_monotone(grid, monotonize(raw, m, levels));
                const std::string name = base + std::string(to_string(m)) + "/" + label;
                curves.push_back(named_curve(name, mono));
                if (quantiles) quantile_curves.push_back(named_curve(name, quantiles_from_curve(mono, levels)));
                const QuantileCurve q = quantiles_from_curve(mono, median);
                out << name << ": " << grid.size() << " points, " << raw.failed_points()
                    << " failed, median " << format_real(q.values[0]) << '\n';
            }
        }
    }
    if (quantiles) {
        write_curves(quantile_curves, (dir / "quantiles.csv").string());
    } else {
        write_curves(curves, (dir / "curves.csv").string());
    }
    write_config(s, quantiles ? "quantiles" : "fit", dir);
    return kSuccess;
}

int cmd_linear(const Settings& s, std::ostream& out)
{
    const Loaded loaded = load(s, out);
    const auto points = data_points(s, loaded.spec);
    const auto dir = output_dir(s);
    const Dataset& data = loaded.result.data;

    std::vector<std::string> terms = {"const"};
    for (const auto& t : loaded.spec.exogenous) terms.push_back(t.label());
    terms.push_back(loaded.spec.endogenous.label());

    const LinearFit ols = ols_linear(data.structural_design(), data.outcome());
    const LinearFit iv = two_stage_least_squares(data);
    const FirstStage fs = first_stage(data);

    KeyValues rows;
    auto table = std::string("model,term,estimate,std_error\n");
    for (const auto& [model, fit] : {std::pair<std::string, const LinearFit*>{"ols", &ols}, {"iv", &iv}}) {
        const Eigen::VectorXd se = fit->standard_errors();
        out << model << ":\n";
        for (std::size_t j = 0; j < terms.size(); ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            out << "  " << terms[j] << "  " << fixed4(fit->coefficients[jj]) << " (" << fixed4(se[jj]) << ")\n";
            table += model + "," + terms[j] + "," + std::to_string(fit->coefficients[jj]) + "," +
                     std::to_string(se[jj]) + "\n";
        }
        for (const auto& [label, point] : points) {
            Eigen::VectorXd row(point.x.size() + 1);
            row << point.x, point.y2;
            const Prediction p = predict(*fit, row);
            out << "  E[y | " << label << "]  " << fixed4(p.value) << " (" << fixed4(p.standard_error)
                << ", delta method)\n";
            table += model + ",E[y|" + label + "]," + std::to_string(p.value) + "," +
                     std::to_string(p.standard_error) + "\n";
        }
    }
    out << "first-stage F: " << format_real(fs.f_statistic) << '\n';
    table += "first_stage,F," + std::to_string(fs.f_statistic) + ",\n";

    const auto path = (dir / "linear.csv").string();
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw Error(ErrorCode::IoFailure, "cannot write " + path);
    const bool ok = std::fwrite(table.data(), 1, table.size(), f) == table.size();
    if (std::fclose(f) != 0 || !ok) throw Error(ErrorCode::IoFailure, "write failed: " + path);
    write_config(s, "linear", dir);
    return kSuccess;
}

int cmd_bands(const Settings& s, std::ostream& out)
{
    const auto estimators = parse_estimators(s.at("estimator"));
    if (estimators.size() > 2) throw UsageError("bands: give one estimator, or two for a difference");
    const auto monotonizers = parse_monotonizers(s.at("monotonize"));
    if (monotonizers.size() != 1) throw UsageError("bands: give exactly one monotonizer");
    const auto levels = parse_levels(s.at("levels"));
    BootstrapOptions options;
    options.replications = parse_count(s, "B");
    options.level = parse_real(s, "level");
    options.seed = parse_count(s, "seed");
    options.threads = parse_threads(s);
    if (options.replications < 2) throw UsageError("--B: need at least 2 replications");
    if (!(options.level > 0.0 && options.level < 1.0)) throw UsageError("--level: must lie in (0, 1)");

    const Loaded loaded = load(s, out);
    const auto points = data_points(s, loaded.spec);
    const ThresholdGrid grid = parse_grid(s.at("grid"), &loaded.result.data);
    const auto dir = output_dir(s);

    std::vector<NamedCurve> curves;
    for (const auto& [label, point] : points) {
        std::vector<Recipe> recipes;
        for (const Estimator e : estimators) recipes.push_back({e, monotonizers[0], levels, grid, point});
        BandResult band;
        std::string name;
        if (recipes.size() == 2) {
            band = difference_bands(loaded.result.data, recipes[0], recipes[1], options);
            name = std::string(to_string(estimators[0])) + "-" + std::string(to_string(estimators[1]));
        } else {
            band = bootstrap_bands(loaded.result.data, recipes[0], options);
            name = std::string(to_string(estimators[0]));
        }
        name += "/" + std::string(to_string(monotonizers[0])) + "/" + label;
        std::size_t rejected = 0;
        for (const bool r : band.rejected) rejected += r ? 1 : 0;
        out << name << ": " << band.replicates << " replicates (" << band.failed_replicates << " dropped), "
            << rejected << " of " << grid.size() << " points exclude 0\n";
        curves.push_back(named_curve(name, band));
    }
    write_curves(curves, (dir / "bands.csv").string());
    write_config(s, "bands", dir);
    return kSuccess;
}

int cmd_simulate(const Settings& s, std::ostream& out)
{
    StudyConfig config;
    config.estimators.clear();
    for (const Estimator e : parse_estimators(s.at("estimator"))) config.estimators.push_back(dr_estimator(e));
    config.monotonizers = parse_monotonizers(s.at("monotonize"));
    config.levels = parse_levels(s.at("levels"));
    config.grid = parse_grid(s.at("grid"), nullptr);
    config.replications = parse_count(s, "reps");
    if (config.replications < 2) throw UsageError("--reps: need at least 2 replications");
    config.sample_sizes.clear();
    for (const std::string& item : split_list(s.at("n"))) {
        const std::size_t n = parse_count_text("--n", item);
        if (n < 10) throw UsageError("--n: sample sizes must be at least 10");
        config.sample_sizes.push_back(n);
    }
    if (config.sample_sizes.empty()) throw UsageError("--n: no sample sizes");
    config.rho = parse_real(s, "rho");
    if (!(std::abs(config.rho) < 1.0)) throw UsageError("--rho: must lie in (-1, 1)");
    config.censor_at = parse_real(s, "censor");
    config.seed = parse_count(s, "seed");
    config.threads = parse_threads(s);
    config.scenarios.clear();
    for (const Point& p : parse_points(s.at("at"))) {
        if (p.values.size() != 2 || !p.values.count("x") || !p.values.count("y2")) {
            throw UsageError("--at: simulation points take x=...,y2=...");
        }
        config.scenarios.push_back({p.values.at("x"), p.values.at("y2")});
    }
    const auto dir = output_dir(s);

    const McReport report = run_study(config);
    write_report(report, config.grid, (dir / "report.csv").string());
    out << "estimator monotonizer n x y2 reps bias^2 variance mse\n";
    for (const McCell& c : report.cells) {
        out << c.estimator << ' ' << to_string(c.monotonizer) << ' ' << c.n << ' ' << format_real(c.scenario.x) << ' '
            << format_real(c.scenario.y2) << ' ' << c.replications << ' ' << format_real(c.avg_bias_sq) << ' '
            << format_real(c.avg_variance) << ' ' << format_real(c.avg_mse) << '\n';
    }
    write_config(s, "simulate", dir);
    return kSuccess;
}

int dispatch(const std::string& command, const Settings& s, std::ostream& out)
{
    if (command == "fit") return cmd_fit(s, false, out);
    if (command == "quantiles") return cmd_fit(s, true, out);
    if (command == "linear") return cmd_linear(s, out);
    if (command == "bands") return cmd_bands(s, out);
    return cmd_simulate(s, out);
}

// defaults < config file < spec file < command line
Settings resolve(const std::string& command, const std::string& config_path,
                 const std::map<std::string, std::string>& given)
{
    const auto keys = keys_for(command);
    const auto known = [&keys](const std::string& k) {
        for (const auto& info : keys) {
            if (info.name == k) return true;
        }
        return false;
    };
    Settings s = defaults_for(command);
    if (!config_path.empty()) {
        for (const auto& [k, v] : read_key_values(config_path)) {
            if (k == "command") {
                if (v != command) throw UsageError("config file is for command '" + v + "', not '" + command + "'");
                continue;
            }
            if (!known(k)) throw UsageError("config file: unknown key '" + k + "' for " + command);
            s[k] = v;
        }
    }
    const auto spec_path = given.count("spec") ? given.at("spec") : (s.count("spec") ? s.at("spec") : "");
    if (!spec_path.empty()) {
        for (const auto& [k, v] : to_key_values(read_column_spec(spec_path))) s[k] = v;
    }
    for (const auto& [k, v] : given) s[k] = v;
    if (s.count("spec")) s["spec"] = "";
    return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Distribution regression with an endogenous regressor"};
    app.require_subcommand(1);

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"fit", "fit conditional distribution curves"},
        {"quantiles", "quantile curves from monotonized fits"},
        {"linear", "OLS and 2SLS linear models"},
        {"bands", "bootstrap bands, or difference bands for two estimators"},
        {"simulate", "Monte Carlo study on the censored design"},
    };

    std::map<std::string, std::map<std::string, std::string>> scalars;
    std::map<std::string, std::map<std::string, std::vector<std::string>>> lists;
    std::map<std::string, std::string> config_paths;
    bool long_run = false;
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_paths[name], "key=value file, e.g. a resolved.cfg from an earlier run");
        for (const KeyInfo& key : keys_for(name)) {
            if (key.repeatable) {
                sub->add_option("--" + key.name, lists[name][key.name], key.help);
            } else {
                sub->add_option("--" + key.name, scalars[name][key.name], key.help);
            }
        }
        if (name == "simulate") sub->add_flag("--long", long_run, "1000 replications");
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsageError;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    CLI::App* sub = app.get_subcommand(command);
    std::map<std::string, std::string> given;
    for (const KeyInfo& key : keys_for(command)) {
        if (sub->count("--" + key.name) == 0) continue;
        if (key.repeatable) {
            std::string joined;
            for (const auto& v : lists[command][key.name]) {
                if (!joined.empty()) joined += key.name == "at" ? ";" : ",";
                joined += v;
            }
            given[key.name] = joined;
        } else {
            given[key.name] = scalars[command][key.name];
        }
    }
    if (long_run && !given.count("reps")) given["reps"] = "1000";

    try {
        const Settings settings = resolve(command, config_paths[command], given);
        return dispatch(command, settings, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsageError;
    } catch (const Error& e) {
        err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
        switch (e.code()) {
        case ErrorCode::IoFailure:
        case ErrorCode::MissingColumn:
        case ErrorCode::NonNumeric:
        case ErrorCode::EmptyAfterFiltering:
            return kIoError;
        default:
            return kComputationError;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kComputationError;
    }
}

}  // namespace ivdr::cli
