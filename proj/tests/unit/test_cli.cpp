#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "ivdr/dataio.hpp"

namespace fs = std::filesystem;
using ivdr::cli::run;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome call(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string dir_for(const std::string& name)
{
    const fs::path p = fs::current_path() / "cli_out" / name;
    fs::remove_all(p);
    return p.string();
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool have_mroz()
{
    return fs::exists(IVDR_MROZ_CSV);
}

}  // namespace

TEST_CASE("usage errors")
{
    CHECK(call({}).code == ivdr::cli::kUsageError);
    CHECK(call({"--help"}).code == ivdr::cli::kSuccess);
    CHECK(call({"frobnicate"}).code == ivdr::cli::kUsageError);
    CHECK(call({"fit", "--data", IVDR_MROZ_CSV, "--estimator", "lasso"}).code == ivdr::cli::kUsageError);
    CHECK(call({"simulate", "--reps", "1"}).code == ivdr::cli::kUsageError);
    CHECK(call({"fit"}).code == ivdr::cli::kUsageError);
    CHECK(call({"bands", "--data", IVDR_MROZ_CSV, "--level", "1.5"}).code == ivdr::cli::kUsageError);
    const Outcome bad_cfg = call({"fit", "--config", "/nonexistent/file.cfg"});
    CHECK(bad_cfg.code == ivdr::cli::kIoError);
}

TEST_CASE("data errors map to the I/O exit code")
{
    CHECK(call({"fit", "--data", "/nonexistent/mroz.csv", "--out", dir_for("missing")}).code ==
          ivdr::cli::kIoError);
    if (!have_mroz()) return;
    CHECK(call({"linear", "--data", IVDR_MROZ_CSV, "--instruments", "no_such_column", "--out", dir_for("nocol")})
              .code == ivdr::cli::kIoError);
}

TEST_CASE("linear writes its table")
{
    if (!have_mroz()) return;
    const std::string dir = dir_for("linear");
    const Outcome r = call({"linear", "--data", IVDR_MROZ_CSV, "--out", dir});
    REQUIRE(r.code == ivdr::cli::kSuccess);
    CHECK(r.out.find("0.1075") != std::string::npos);
    CHECK(r.out.find("0.0493") != std::string::npos);
    CHECK(fs::exists(fs::path(dir) / "linear.csv"));
    CHECK(fs::exists(fs::path(dir) / "resolved.cfg"));
}

TEST_CASE("fit writes curves and replays from resolved.cfg")
{
    if (!have_mroz()) return;
    const std::string dir = dir_for("fit");
    const Outcome r = call({"fit", "--data", IVDR_MROZ_CSV, "--estimator", "three-step", "--monotonize", "isotonic",
                            "--monotonize", "rearrange", "--at", "educ=12,exper=12", "--out", dir});
    REQUIRE(r.code == ivdr::cli::kSuccess);
    const auto curves = ivdr::read_curves((fs::path(dir) / "curves.csv").string());
    REQUIRE(curves.size() == 3);
    for (const auto& c : curves) CHECK(c.y.size() == 373);

    const std::string again = dir_for("fit_again");
    const Outcome replay = call({"fit", "--config", (fs::path(dir) / "resolved.cfg").string(), "--out", again});
    REQUIRE(replay.code == ivdr::cli::kSuccess);
    CHECK(slurp(fs::path(dir) / "curves.csv") == slurp(fs::path(again) / "curves.csv"));

    const std::string qdir = dir_for("quantiles");
    REQUIRE(call({"quantiles", "--data", IVDR_MROZ_CSV, "--estimator", "three-step", "--at", "educ=12,exper=12",
                  "--levels", "0.5:0.5:1", "--out", qdir})
                .code == ivdr::cli::kSuccess);
    const auto q = ivdr::read_curves((fs::path(qdir) / "quantiles.csv").string());
    REQUIRE(q.size() == 1);
    CHECK(q[0].value[0] > 1.19 - 0.15);
    CHECK(q[0].value[0] < 1.19 + 0.15);
}

TEST_CASE("config file mismatches")
{
    const fs::path dir = dir_for("cfg");
    fs::create_directories(dir);
    std::ofstream(dir / "sim.cfg") << "command=simulate\nreps=2\n";
    CHECK(call({"fit", "--config", (dir / "sim.cfg").string()}).code == ivdr::cli::kUsageError);
    std::ofstream(dir / "unknown.cfg") << "colour=blue\n";
    CHECK(call({"fit", "--config", (dir / "unknown.cfg").string()}).code == ivdr::cli::kUsageError);
}

TEST_CASE("bands on identical recipes reject nowhere")
{
    if (!have_mroz()) return;
    const std::string dir = dir_for("bands");
    const Outcome r = call({"bands", "--data", IVDR_MROZ_CSV, "--estimator", "three-step", "--estimator",
                            "three-step", "--at", "educ=12,exper=12", "--grid", "linspace:0.5:2:6", "--B", "20",
                            "--out", dir});
    REQUIRE(r.code == ivdr::cli::kSuccess);
    const auto bands = ivdr::read_curves((fs::path(dir) / "bands.csv").string());
    REQUIRE(bands.size() == 1);
    for (const bool rej : bands[0].rejected) CHECK_FALSE(rej);
}

TEST_CASE("short simulation")
{
    const std::string dir = dir_for("sim");
    const Outcome r = call({"simulate", "--reps", "3", "--n", "100", "--grid", "linspace:1:5:5", "--out", dir});
    REQUIRE(r.code == ivdr::cli::kSuccess);
    CHECK(fs::exists(fs::path(dir) / "report.csv"));
}
