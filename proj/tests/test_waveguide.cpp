#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sqzkit/constants.hpp>
#include <sqzkit/error.hpp>
#include <sqzkit/waveguide.hpp>

#include <cmath>
#include <random>
#include <sstream>

using namespace sqz;
using doctest::Approx;

namespace {

const ModeField& reference_mode() {
    static const ModeField m = solve_fundamental_mode(WaveguideSpec{});
    return m;
}

ModeField blank_grid(int n, double h) {
    ModeField g;
    g.nx = g.ny = n;
    g.spacing_um = h;
    g.values.assign(static_cast<std::size_t>(n) * n, 0.0);
    return g;
}

GaussianBeam beam_um(double w) { return {w * 1e-6, 0.0, 1550e-9}; }

} // namespace

TEST_CASE("index profile") {
    WaveguideSpec s;
    CHECK(s.core_index() == Approx(1.46598984771574).epsilon(1e-13));
    CHECK(s.wavenumber() == Approx(2 * kPi / 1.55).epsilon(1e-14));

    s.grid_spacing_um = 0.5;
    const IndexProfile p = build_index_profile(s);
    CHECK(p.core_cells == 126);
    CHECK(p.nx == p.ny);
    const int c = p.nx / 2;
    CHECK(p.index[static_cast<std::size_t>(c) * p.nx + c] == Approx(s.core_index()));
    CHECK(p.index[0] == s.cladding_index);

    WaveguideSpec flat;
    flat.relative_index_difference = 0.0;
    const IndexProfile u = build_index_profile(flat);
    for (double n : u.index) CHECK(n == flat.cladding_index);

    WaveguideSpec coarse;
    coarse.grid_spacing_um = 4.0; // > 63/20
    CHECK_THROWS_AS(build_index_profile(coarse), ValidationError);
}

TEST_CASE("spec validation") {
    WaveguideSpec s;
    s.relative_index_difference = 0.0;
    CHECK_THROWS_AS(s.validate(), ValidationError);
    s = WaveguideSpec{};
    s.domain_padding_um = 1.0;
    CHECK_THROWS_AS(s.validate(), ValidationError);
    s = WaveguideSpec{};
    s.core_size_um = -1.0;
    CHECK_THROWS_AS(s.validate(), ValidationError);
}

TEST_CASE("fundamental mode of the reference guide") {
    const ModeField& m = reference_mode();
    const WaveguideSpec s;
    CHECK(m.n_eff > s.cladding_index);
    CHECK(m.n_eff < s.core_index());
    CHECK(m.residual < 1e-8);

    double norm = 0.0, peak = 0.0;
    for (double v : m.values) {
        norm += v * v * m.spacing_um * m.spacing_um;
        peak = std::max(peak, std::abs(v));
    }
    CHECK(norm == Approx(1.0).epsilon(1e-10));

    // Mirror symmetric about both axes and the diagonal, single-signed.
    bool symmetric = true, nodeless = true;
    const double sign = m.at(m.nx / 2, m.ny / 2) > 0 ? 1.0 : -1.0;
    for (int iy = 0; iy < m.ny; ++iy) {
        for (int ix = 0; ix < m.nx; ++ix) {
            const double v = m.at(ix, iy);
            symmetric = symmetric && std::abs(v - m.at(m.nx - 1 - ix, iy)) < 1e-8 * peak &&
                        std::abs(v - m.at(ix, m.ny - 1 - iy)) < 1e-8 * peak &&
                        std::abs(v - m.at(iy, ix)) < 1e-8 * peak;
            nodeless = nodeless && sign * v > -1e-12 * peak;
        }
    }
    CHECK(symmetric);
    CHECK(nodeless);
    CHECK(std::abs(m.at(0, m.ny / 2)) < 1e-6 * peak);
}

TEST_CASE("effective index grows with core size") {
    double prev = 0.0;
    for (double a : {20.0, 40.0, 63.0, 90.0}) {
        WaveguideSpec s;
        s.core_size_um = a;
        const ModeField m = solve_fundamental_mode(s);
        CHECK(m.n_eff > prev);
        CHECK(m.residual < 1e-8);
        prev = m.n_eff;
    }
}

TEST_CASE("grid refinement barely moves the effective index") {
    WaveguideSpec fine;
    fine.grid_spacing_um = 0.5;
    const ModeField m = solve_fundamental_mode(fine);
    CHECK(std::abs(m.n_eff - reference_mode().n_eff) < 1e-5);
}

TEST_CASE("large core approaches a cosine-cosine mode") {
    WaveguideSpec s;
    s.core_size_um = 100.0;
    s.grid_spacing_um = 2.0;
    s.domain_padding_um = 20.0;
    const ModeField m = solve_fundamental_mode(s);
    // Strong guidance: field ≈ cos(πx/a')cos(πy/a') with a' the core plus
    // one evanescent decay length on each side.
    const double decay = 1.0 / (s.wavenumber() * std::sqrt(m.n_eff * m.n_eff -
                                                           s.cladding_index * s.cladding_index));
    const double a = s.core_size_um + 2 * decay;
    ModeField c = m;
    for (int iy = 0; iy < m.ny; ++iy)
        for (int ix = 0; ix < m.nx; ++ix) {
            const double x = m.x(ix), y = m.y(iy);
            const double v = std::abs(x) < a / 2 && std::abs(y) < a / 2
                                 ? std::cos(kPi * x / a) * std::cos(kPi * y / a)
                                 : 0.0;
            c.values[static_cast<std::size_t>(iy) * m.nx + ix] = v;
        }
    CHECK(overlap_efficiency(m, c) > 0.99);
}

TEST_CASE("overlap of sampled Gaussians") {
    const ModeField g = blank_grid(401, 1.0);
    const ModeField a = sample_gaussian(g, 23.0), b = sample_gaussian(g, 46.0);
    CHECK(overlap_efficiency(a, b) == Approx(0.64).epsilon(1e-4));
    CHECK(overlap_efficiency(a, a) == Approx(1.0).epsilon(1e-14));
    CHECK(overlap_efficiency(a, b) == Approx(overlap_efficiency(b, a)).epsilon(1e-14));
    CHECK_THROWS_AS(sample_gaussian(g, 0.0), ValidationError);

    const ModeField other = blank_grid(201, 1.0);
    CHECK_THROWS_AS(overlap_efficiency(a, sample_gaussian(other, 23.0)), ValidationError);
    CHECK_THROWS_AS(overlap_efficiency(a, g), ValidationError); // zero field
}

TEST_CASE("overlap stays in [0, 1] for arbitrary fields") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> n(0.0, 1.0);
    ModeField a = blank_grid(15, 1.0), b = a;
    for (int k = 0; k < 1000; ++k) {
        for (auto& v : a.values) v = n(rng);
        for (auto& v : b.values) v = n(rng);
        const double e = overlap_efficiency(a, b);
        CHECK(e >= 0.0);
        CHECK(e <= 1.0);
    }
}

TEST_CASE("coupling into the reference guide") {
    const double e = overlap_efficiency(reference_mode(), beam_um(23.0));
    CHECK(e == Approx(0.979).epsilon(0.015));
}

TEST_CASE("sweep") {
    const auto single = sweep_core_size({63.0}, beam_um(23.0), WaveguideSpec{});
    REQUIRE(single.points.size() == 1);
    CHECK(single.points[0].ok);
    CHECK(single.best_size_um == 63.0);
    CHECK(single.best_efficiency == single.points[0].efficiency);

    CHECK_THROWS_AS(sweep_core_size({60.0, 50.0}, beam_um(23.0), WaveguideSpec{}), ValidationError);
    CHECK_THROWS_AS(sweep_core_size({}, beam_um(23.0), WaveguideSpec{}), ValidationError);

    const std::vector<double> sizes{55.0, 59.0, 63.0, 67.0, 71.0};
    const auto one = sweep_core_size(sizes, beam_um(23.0), WaveguideSpec{}, 1);
    const auto three = sweep_core_size(sizes, beam_um(23.0), WaveguideSpec{}, 3);
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        CHECK(one.points[i].efficiency == three.points[i].efficiency);
        CHECK(one.points[i].n_eff == three.points[i].n_eff);
    }
    CHECK(one.best_size_um == three.best_size_um);
    CHECK(is_unimodal(one));
}

TEST_CASE("doubling the source waist roughly doubles the optimum core") {
    WaveguideSpec base;
    base.grid_spacing_um = 2.0;
    std::vector<double> small, large;
    for (double a = 50.0; a <= 80.0; a += 2.0) small.push_back(a);
    for (double a = 100.0; a <= 160.0; a += 4.0) large.push_back(a);
    const auto s = sweep_core_size(small, beam_um(23.0), base);
    const auto l = sweep_core_size(large, beam_um(46.0), base);
    CHECK(l.best_size_um / s.best_size_um == Approx(2.0).epsilon(0.15));
}

TEST_CASE("mode file round trip") {
    WaveguideSpec s;
    s.core_size_um = 40.0;
    s.domain_padding_um = 20.0;
    s.grid_spacing_um = 2.0;
    const ModeField m = solve_fundamental_mode(s);
    std::stringstream buf;
    write_mode_field(buf, m);
    const ModeField r = read_mode_field(buf);
    CHECK(r.nx == m.nx);
    CHECK(r.ny == m.ny);
    CHECK(r.spacing_um == m.spacing_um);
    CHECK(r.n_eff == m.n_eff);
    CHECK(r.values == m.values);

    std::stringstream bad("# nx ny spacing_um n_eff\n3 3 1 1.45\n1 2 3\n");
    CHECK_THROWS_AS(read_mode_field(bad), ValidationError);
}

TEST_CASE("sweep CSV") {
    SweepResult r;
    r.points.push_back({60.0, 0.97, 1.46, true, ""});
    r.points.push_back({62.0, 0.98, 1.46, true, ""});
    std::ostringstream out;
    write_sweep_csv(out, r);
    CHECK(out.str().rfind("core_size_um,efficiency\n", 0) == 0);
    CHECK(out.str().find("62,0.98") != std::string::npos);
}
