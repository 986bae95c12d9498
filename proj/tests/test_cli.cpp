#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sqzkit/cli.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = sqz::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string reference_cfg() { return (fs::path(SQZKIT_SOURCE_DIR) / "paper.cfg").string(); }

fs::path scratch_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("sqzkit_test_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

fs::path write_file(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
    return p;
}

bool contains(const std::string& s, const std::string& needle) {
    return s.find(needle) != std::string::npos;
}

} // namespace

TEST_CASE("usage errors exit 1") {
    const Outcome none = run_cli({});
    CHECK(none.code == 1);
    CHECK(contains(none.err, "Subcommands:"));
    CHECK(run_cli({"bogus"}).code == 1);
    CHECK(run_cli({"cavity", "--no-such-flag"}).code == 1);
    CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("cavity") {
    const Outcome o = run_cli({"cavity", "--config", reference_cfg()});
    CHECK(o.code == 0);
    CHECK(contains(o.out, "22.160 mm"));
    CHECK(contains(o.out, "57.55"));
    CHECK(contains(o.out, "60.53"));
    CHECK(contains(o.out, "23.11 um"));
    // Built-in defaults match the reference configuration.
    CHECK(run_cli({"cavity"}).out == o.out);
}

TEST_CASE("squeeze") {
    const Outcome o = run_cli({"squeeze", "--config", reference_cfg(), "--pump-mw", "360",
                               "--freq-mhz", "2", "100"});
    CHECK(o.code == 0);
    CHECK(contains(o.out, "squeezed -6.45 dB, anti-squeezed +8.23 dB"));
    CHECK(contains(o.out, "squeezed -2.99 dB"));
    CHECK(run_cli({"squeeze", "--pump-mw", "2000"}).code == 1); // above threshold
}

TEST_CASE("squeeze normalises traces") {
    const fs::path d = scratch_dir("norm");
    write_file(d / "sig.csv", "frequency_hz,power_db\n1e6,-86\n2e6,-85\n");
    write_file(d / "shot.csv", "frequency_hz,power_db\n1e6,-80\n2e6,-80\n");
    write_file(d / "bad.csv", "frequency_hz,power_db\n1e6,-80\n3e6,-80\n");
    const Outcome ok = run_cli({"squeeze", "--signal", (d / "sig.csv").string(), "--shot",
                                (d / "shot.csv").string(), "--normalized-out",
                                (d / "n.csv").string()});
    CHECK(ok.code == 0);
    CHECK(fs::exists(d / "n.csv"));
    const Outcome bad = run_cli({"squeeze", "--signal", (d / "sig.csv").string(), "--shot",
                                 (d / "bad.csv").string()});
    CHECK(bad.code == 1);
    CHECK(contains(bad.err, "index 1"));
    fs::remove_all(d);
}

TEST_CASE("qpm") {
    const Outcome o = run_cli({"qpm", "--config", reference_cfg()});
    CHECK(o.code == 0);
    CHECK(contains(o.out, "worst-case penalty:        0.52506"));
    CHECK(contains(o.out, "1.734 W"));
    CHECK(run_cli({"qpm", "--ratio", "0.001"}).code == 1);
}

TEST_CASE("fit") {
    const fs::path d = scratch_dir("fit");
    const Outcome s = run_cli({"fit", "--synthetic", "--noise-db", "0", "--write-data",
                               (d / "obs.csv").string(), "--out", (d / "fit.txt").string()});
    CHECK(s.code == 0);
    CHECK(contains(s.out, "converged = true"));
    const Outcome f = run_cli({"fit", "--data", (d / "obs.csv").string()});
    CHECK(f.code == 0);
    CHECK(contains(f.out, "threshold_power_w = 1.7"));

    write_file(d / "broken.csv", "pump_power_w,frequency_hz,branch,level_db\n0.1,x,anti,1\n");
    CHECK(run_cli({"fit", "--data", (d / "broken.csv").string()}).code == 1);
    CHECK(run_cli({"fit"}).code == 1); // no data source
    fs::remove_all(d);
}

TEST_CASE("config errors exit 1") {
    const fs::path d = scratch_dir("cfg");
    write_file(d / "bare.cfg", "cavity.air_gap = 2\n");
    const Outcome o = run_cli({"cavity", "--config", (d / "bare.cfg").string()});
    CHECK(o.code == 1);
    CHECK(contains(o.err, "unit"));
    CHECK(run_cli({"cavity", "--config", (d / "missing.cfg").string()}).code == 1);
    fs::remove_all(d);
}

TEST_CASE("waveguide") {
    const fs::path d = scratch_dir("wg");
    const Outcome o = run_cli({"waveguide", "--core-um", "40", "--spacing-um", "2", "--waist-um",
                               "15", "--mode-out", (d / "mode.txt").string()});
    CHECK(o.code == 0);
    CHECK(contains(o.out, "n_eff"));
    CHECK(fs::exists(d / "mode.txt"));

    // Validation passes, but the mode has not decayed at the domain edge.
    write_file(d / "tight.cfg", "waveguide.domain_padding = 3.5 um\n");
    const Outcome n = run_cli({"waveguide", "--config", (d / "tight.cfg").string()});
    CHECK(n.code == 2);
    CHECK(contains(n.err, "decayed"));
    fs::remove_all(d);
}

TEST_CASE("report") {
    const fs::path d = scratch_dir("report");
    write_file(d / "small.cfg", "fit.runs = 3\nwaveguide.sweep_min = 59 um\n"
                                "waveguide.sweep_max = 67 um\nwaveguide.sweep_step = 2 um\n");
    const Outcome o = run_cli({"report", "--config", (d / "small.cfg").string()});
    CHECK(o.code == 0);
    CHECK(contains(o.out, "## checks"));
    CHECK(contains(o.out, "summary:"));
    fs::remove_all(d);
}
