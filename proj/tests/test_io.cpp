#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sqzkit/config.hpp>
#include <sqzkit/error.hpp>
#include <sqzkit/plot.hpp>
#include <sqzkit/trace.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace sqz;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

NoiseTrace parse(const std::string& text) {
    std::istringstream in(text);
    return parse_trace_csv(in, "t.csv");
}

std::string error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return {};
}

ToolkitConfig parse_cfg(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in, "c.cfg");
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

NoiseTrace make_trace(std::initializer_list<std::pair<double, double>> pts) {
    NoiseTrace t;
    for (auto [f, p] : pts) t.points.push_back({f, p});
    return t;
}

fs::path scratch_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("sqzkit_test_io_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

} // namespace

TEST_CASE("trace parsing") {
    const NoiseTrace t = parse("# rbw_hz=300000\n# vbw_hz=300\n# note=after warm-up\n"
                               "frequency_hz,power_db\n1e6,-80.5\n2e6,-81\n");
    REQUIRE(t.points.size() == 2);
    CHECK(t.points[1].frequency == 2e6);
    CHECK(t.points[1].power_db == -81.0);
    CHECK(*t.metadata.rbw_hz == 300000.0);
    CHECK(*t.metadata.vbw_hz == 300.0);
    CHECK(t.metadata.extra.at("note") == "after warm-up");
    CHECK(t.reference == TraceReference::absolute_dbm);

    CHECK(parse("frequency_hz,power_db\n").points.empty());
}

TEST_CASE("trace errors name the line") {
    CHECK(error_of("frequency_hz,power_db\n1e6,abc\n").find("t.csv:2:") == 0);
    CHECK(error_of("frequency_hz,power_db\n1e6,-80\n1e6,-81\n").find("t.csv:3:") == 0);
    CHECK(error_of("frequency_hz,power_db\n2e6,-80\n1e6,-81\n").find("strictly increasing") !=
          std::string::npos);
    CHECK(error_of("freq,power\n1,2\n").find("t.csv:1:") == 0);
    CHECK(error_of("frequency_hz,power_db\n1e6,-80,3\n").find("t.csv:2:") == 0);
    CHECK(!error_of("# rbw_hz=-5\nfrequency_hz,power_db\n").empty());
    CHECK(!error_of("").empty());
}

TEST_CASE("trace write/parse round trip") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> step(1.0, 1e6), level(-120.0, 0.0);
    for (int k = 0; k < 50; ++k) {
        NoiseTrace t;
        t.label = "run " + std::to_string(k);
        t.metadata.rbw_hz = 1e5;
        t.metadata.pump_power_w = 0.36;
        double f = 0.0;
        for (int i = 0; i < 100; ++i) {
            f += step(rng);
            t.points.push_back({f, level(rng)});
        }
        std::stringstream buf;
        write_trace_csv(buf, t);
        const NoiseTrace r = parse_trace_csv(buf);
        REQUIRE(r.points.size() == t.points.size());
        for (std::size_t i = 0; i < t.points.size(); ++i) {
            CHECK(r.points[i].frequency == Approx(t.points[i].frequency).epsilon(1e-9));
            CHECK(r.points[i].power_db == Approx(t.points[i].power_db).epsilon(1e-9));
        }
        CHECK(r.label == t.label);
        CHECK(*r.metadata.pump_power_w == 0.36);
    }
}

TEST_CASE("normalisation to shot noise") {
    const NoiseTrace sig = make_trace({{1e6, -86.0}, {2e6, -85.5}});
    const NoiseTrace shot = make_trace({{1e6, -80.0}, {2e6, -80.0}});
    const NoiseTrace n = normalize_to_shot(sig, shot);
    CHECK(n.reference == TraceReference::relative_to_shot);
    CHECK(n.points[0].power_db == Approx(-6.0));
    CHECK(n.points[1].power_db == Approx(-5.5));

    const NoiseTrace self = normalize_to_shot(shot, shot);
    for (const auto& p : self.points) CHECK(p.power_db == 0.0);

    const NoiseTrace shifted = make_trace({{1e6, -80.0}, {2.1e6, -80.0}});
    try {
        normalize_to_shot(sig, shifted);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("index 1") != std::string::npos);
    }
    const NoiseTrace shorter = make_trace({{1e6, -80.0}});
    CHECK_THROWS_AS(normalize_to_shot(sig, shorter), ValidationError);
}

TEST_CASE("observation tables") {
    const std::string text = "pump_power_w,frequency_hz,branch,level_db,uncertainty_db\n"
                             "0.36,2e6,squeezed,-6.2,0.1\n0.36,2e6,anti,8.6,0.1\n";
    std::istringstream in(text);
    const auto obs = parse_observations_csv(in);
    REQUIRE(obs.size() == 2);
    CHECK(obs[1].branch == Branch::anti);
    CHECK(obs[1].level_db == 8.6);

    std::stringstream buf;
    write_observations_csv(buf, obs);
    const auto again = parse_observations_csv(buf);
    REQUIRE(again.size() == 2);
    CHECK(again[0].pump_power == 0.36);
    CHECK(again[0].uncertainty_db == 0.1);

    std::istringstream no_sigma("pump_power_w,frequency_hz,branch,level_db\n0.1,1e6,anti,2\n");
    CHECK(parse_observations_csv(no_sigma)[0].uncertainty_db == 0.1);

    std::istringstream bad("pump_power_w,frequency_hz,branch,level_db\n0.1,1e6,sideways,2\n");
    CHECK_THROWS_AS(parse_observations_csv(bad), ValidationError);
}

TEST_CASE("config units and errors") {
    const ToolkitConfig c = parse_cfg("cavity.air_gap = 2.5 mm\ncavity.output_coupler_transmittance"
                                      " = 12 %\nsqueezing.pump_power = 200 mW\n"
                                      "waveguide.core_size = 60 um\nsqueezing.total_detection_loss = 0.05\n");
    CHECK(c.cavity.air_gap == Approx(2.5e-3));
    CHECK(c.cavity.output_coupler_transmittance == Approx(0.12));
    CHECK(c.pump_power == Approx(0.2));
    CHECK(c.waveguide.core_size_um == Approx(60.0));
    CHECK(c.total_detection_loss == 0.05);
    CHECK(c.cavity.mirror_curvature_radius == 5e-3); // default kept

    CHECK_THROWS_AS(parse_cfg("cavity.air_gap = 2\n"), ValidationError);
    CHECK_THROWS_AS(parse_cfg("cavity.air_gap = 2 W\n"), ValidationError);
    CHECK_THROWS_AS(parse_cfg("cavity.air_gapp = 2 mm\n"), ValidationError);
    CHECK_THROWS_AS(parse_cfg("cavity.air_gap = 2 mm\ncavity.air_gap = 3 mm\n"), ValidationError);
    CHECK_THROWS_AS(parse_cfg("cavity.air_gap 2 mm\n"), ValidationError);
    CHECK_THROWS_AS(parse_cfg("squeezing.pump_power = 2 W\n"), ValidationError); // above threshold
    CHECK_THROWS_AS(parse_cfg("fit.runs = 2.5\n"), ValidationError);

    // Any loss.* line replaces the default budget.
    const ToolkitConfig l = parse_cfg("loss.window = 0.5 %\n");
    REQUIRE(l.loss.components.size() == 1);
    CHECK(l.loss.components.at("window") == Approx(0.005));
}

TEST_CASE("config serialisation round trip") {
    const fs::path cfg = fs::path(SQZKIT_SOURCE_DIR) / "paper.cfg";
    const ToolkitConfig c = load_config(cfg);
    CHECK(c.cavity.intra_cavity_loss == Approx(0.0038).epsilon(1e-14));
    CHECK(c.fit.pump_powers.size() == 4);
    CHECK(c.waveguide.relative_index_difference == Approx(0.015));

    const std::string text = serialize_config(c);
    const ToolkitConfig r = parse_cfg(text);
    CHECK(serialize_config(r) == text);
    CHECK(r.cavity.intra_cavity_loss == c.cavity.intra_cavity_loss);
    CHECK(r.cavity_half_width == c.cavity_half_width);
    CHECK(r.fit.pump_powers == c.fit.pump_powers);
    CHECK(r.loss.components == c.loss.components);

    CHECK_THROWS_AS(load_config("/nonexistent/sqzkit.cfg"), ValidationError);
}

TEST_CASE("plot emission") {
    PlotSeries s{"sq", {{1e6, -6.0}, {1e7, -5.0}, {1e8, -3.0}}};
    AxesSpec axes;
    axes.title = "spectrum <test>";
    const std::string a = render_svg({s}, axes), b = render_svg({s}, axes);
    CHECK(a == b);
    CHECK(a.find("<svg") != std::string::npos);
    CHECK(a.find("&lt;test&gt;") != std::string::npos);

    const fs::path dir = scratch_dir("plot");
    const auto csvs = emit_plot({s, s}, dir / "spec.svg", axes);
    REQUIRE(csvs.size() == 2);
    CHECK(csvs[0].filename() == "spec-0.csv");
    const std::string svg1 = slurp(dir / "spec.svg");
    emit_plot({s, s}, dir / "spec.svg", axes);
    CHECK(slurp(dir / "spec.svg") == svg1);

    // The sibling CSV reads back as a trace.
    const NoiseTrace t = parse_trace_csv(csvs[0]);
    REQUIRE(t.points.size() == 3);
    CHECK(t.points[2].power_db == -3.0);
    CHECK(t.label == "sq");

    CHECK_THROWS_AS(render_svg({}, axes), ValidationError);
    CHECK_THROWS_AS(render_svg({PlotSeries{"e", {}}}, axes), ValidationError);
    CHECK_THROWS_AS(render_svg({PlotSeries{"z", {{0.0, 1.0}}}}, axes), ValidationError);
    axes.log_x = false;
    CHECK_NOTHROW(render_svg({PlotSeries{"z", {{0.0, 1.0}}}}, axes));
    fs::remove_all(dir);
}
