// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <sqzkit/cavity.hpp>
#include <sqzkit/config.hpp>
#include <sqzkit/constants.hpp>
#include <sqzkit/error.hpp>
#include <sqzkit/qpm.hpp>
#include <sqzkit/report.hpp>
#include <sqzkit/squeezing.hpp>
#include <sqzkit/waveguide.hpp>

#include <fmt/core.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

using namespace sqz;

namespace {

bool within(double v, double target, double tol) { return std::abs(v - target) <= tol; }

struct Verdict {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, const std::function<Verdict()>& body) {
    Verdict v;
    try {
        v = body();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failures;
    fmt::print("{} {:>2} {}: {}\n", v.pass ? "PASS" : "FAIL", id, name, v.detail);
    std::fflush(stdout);
}

const ToolkitConfig& reference_config() {
    static const ToolkitConfig c =
        load_config(std::filesystem::path(SQZKIT_SOURCE_DIR) / "paper.cfg");
    return c;
}

Verdict cavity_figures() {
    const CavitySummary s = summarize_cavity(reference_config().cavity);
    const bool ok = within(s.finesse_low_loss, 60.5, 1.0) && within(s.fwhm, 224e6, 12e6) &&
                    within(s.fwhm_low_loss, 224e6, 12e6) &&
                    within(s.round_trip_length, 22.16e-3, 0.5e-3);
    return {ok, fmt::format("finesse 2pi/(T+L) {:.2f} (Airy {:.2f}), FWHM {:.1f} MHz (low-loss "
                            "{:.1f} MHz), round trip {:.3f} mm",
                            s.finesse_low_loss, s.finesse, s.fwhm / 1e6, s.fwhm_low_loss / 1e6,
                            s.round_trip_length * 1e3)};
}

Verdict resonant_waist() {
    const double w = plano_concave_waist(reference_config().cavity).waist_radius;
    return {within(w, 23e-6, 1.5e-6) && within(w, 23.1e-6, 0.05e-6),
            fmt::format("waist {:.3f} um", w * 1e6)};
}

Verdict enhancement_enl() {
    const QpmSummary q = summarize_qpm(reference_config());
    const bool ok = within(q.enhancement / 1442.0, 1.0, 0.01) && within(q.enl / 1.56e-3, 1.0, 0.02);
    return {ok, fmt::format("enhancement {:.2f}, E_NL {:.4e} /W", q.enhancement, q.enl)};
}

Verdict thresholds() {
    const QpmSummary q = summarize_qpm(reference_config());
    const bool ok = within(q.threshold / 1.73, 1.0, 0.02) &&
                    within(q.threshold_phase_matched, 1.10, 0.05);
    return {ok, fmt::format("threshold {:.4f} W, phase-matched {:.4f} W (penalty {:.4f})",
                            q.threshold, q.threshold_phase_matched, q.theta_penalty)};
}

Verdict quadrature_penalty() {
    const PenaltyResult r = worst_case_penalty();
    const double x = std::abs(r.maximizer);
    const double stationarity = std::abs(std::tan(x / 2) - x);
    return {within(r.penalty, 0.5258, 0.001) && stationarity < 1e-6,
            fmt::format("penalty {:.6f} at dkl {:.6f}, |tan(x/2) - x| = {:.2e}", r.penalty, x,
                        stationarity)};
}

Verdict measured_levels() {
    const ToolkitConfig& c = reference_config();
    const SqueezerParams p = c.squeezer();
    const double sq2 = to_db(variance(p, 2e6, Branch::squeezed));
    const double sq100 = to_db(variance(p, 100e6, Branch::squeezed));
    const double anti2 = to_db(variance(p, 2e6, Branch::anti));
    const bool ok = within(sq2, -6.2, 0.5) && within(sq100, -3.0, 0.2) && within(anti2, 8.6, 0.7);
    return {ok, fmt::format("2 MHz {:+.3f} dB (meas -6.2), 100 MHz {:+.3f} dB (meas -3.0), "
                            "anti 2 MHz {:+.3f} dB (meas +8.6)",
                            sq2, sq100, anti2)};
}

Verdict fit_round_trip() {
    const FitStudy f = run_fit_study(reference_config());
    const bool ok = f.noiseless_threshold_rel_error < 1e-6 &&
                    f.noiseless_half_width_rel_error < 1e-6 && f.runs == 100 &&
                    f.successes >= 95;
    return {ok, fmt::format("noiseless rel err P_th {:.1e}, f_HWHM {:.1e}; {}/{} runs within 3 SE "
                            "({} failed)",
                            f.noiseless_threshold_rel_error, f.noiseless_half_width_rel_error,
                            f.successes, f.runs, f.failures)};
}

Verdict waveguide_coupling() {
    const WaveguideStudy w = run_waveguide_study(reference_config(), 1);
    const bool ok = within(w.sweep.best_efficiency, 0.979, 0.015) &&
                    within(w.sweep.best_size_um, 63.0, 4.0) && w.peak_change_pp < 0.2;
    return {ok, fmt::format("peak {:.4f} at {:.2f} um (source waist {:.2f} um), half-grid change "
                            "{:.4f} pp",
                            w.sweep.best_efficiency, w.sweep.best_size_um,
                            w.source.waist_radius * 1e6, w.peak_change_pp)};
}

Verdict property_suites() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto sample = [&](bool lossless) {
        SqueezerParams p;
        p.output_coupler_transmittance = 0.01 + 0.5 * u(rng);
        p.intra_cavity_loss = lossless ? 0.0 : 0.1 * u(rng);
        p.total_detection_loss = lossless ? 0.0 : 0.5 * u(rng);
        p.threshold_power = 0.1 + 5.0 * u(rng);
        p.pump_power = 0.999 * u(rng) * p.threshold_power;
        p.cavity_half_width = 1e6 + 500e6 * u(rng);
        return p;
    };
    double worst_lossless = 0.0, min_lossy = INFINITY;
    for (int i = 0; i < 10000; ++i) {
        const double f = 1e9 * u(rng);
        const SqueezerParams a = sample(true);
        worst_lossless = std::max(worst_lossless, std::abs(variance(a, f, Branch::squeezed) *
                                                               variance(a, f, Branch::anti) -
                                                           1.0));
        const SqueezerParams b = sample(false);
        min_lossy = std::min(min_lossy,
                             variance(b, f, Branch::squeezed) * variance(b, f, Branch::anti));
    }

    double worst_qpm = 0.0;
    for (int i = 0; i <= 200000; ++i) {
        const double x = -8 * kPi + 16 * kPi * i / 200000.0;
        const double s = sinc(x);
        const double q = x == 0.0 ? 0.0 : (1 - std::cos(x)) / x;
        worst_qpm = std::max(worst_qpm, std::abs(double_pass_shape(x, 0.0) - s * s));
        worst_qpm = std::max(worst_qpm, std::abs(double_pass_shape(x, kPi / 2) - q * q));
    }

    const ModeField mode = solve_fundamental_mode(reference_config().waveguide);

    double lo = INFINITY, hi = -INFINITY;
    std::normal_distribution<double> n(0.0, 1.0);
    ModeField a;
    a.nx = a.ny = 12;
    a.spacing_um = 1.0;
    a.values.assign(144, 0.0);
    ModeField b = a;
    for (int k = 0; k < 10000; ++k) {
        for (auto& v : a.values) v = n(rng);
        // Odd samples sit close to a, probing the upper bound.
        for (std::size_t i = 0; i < b.values.size(); ++i)
            b.values[i] = k % 2 ? a.values[i] + 0.1 * n(rng) : n(rng);
        const double e = overlap_efficiency(a, b);
        lo = std::min(lo, e);
        hi = std::max(hi, e);
    }
    for (double w = 5.0; w <= 80.0; w += 0.5) {
        const double e = overlap_efficiency(mode, sample_gaussian(mode, w));
        lo = std::min(lo, e);
        hi = std::max(hi, e);
    }

    const bool ok = worst_lossless <= 1e-12 && min_lossy >= 1.0 - 1e-12 && worst_qpm <= 1e-12 &&
                    mode.residual < 1e-8 && lo >= 0.0 && hi <= 1.0;
    return {ok, fmt::format("lossless |V+V- - 1| <= {:.1e}, lossy min V+V- {:.6f}, QPM identity "
                            "err {:.1e}, eigen residual {:.1e}, overlap range [{:.4f}, {:.12f}]",
                            worst_lossless, min_lossy, worst_qpm, mode.residual, lo, hi)};
}

Verdict determinism() {
    const std::string one = build_report(reference_config(), {1});
    const std::string again = build_report(reference_config(), {1});
    const std::string four = build_report(reference_config(), {4});
    return {one == again && one == four,
            fmt::format("{} bytes; repeat {}, 4 threads {}", one.size(),
                        one == again ? "identical" : "differs", one == four ? "identical" : "differs")};
}

} // namespace

int main() {
    criterion(1, "cavity figures of merit", cavity_figures);
    criterion(2, "resonant waist", resonant_waist);
    criterion(3, "enhancement factor and E_NL", enhancement_enl);
    criterion(4, "threshold", thresholds);
    criterion(5, "quadrature phase penalty", quadrature_penalty);
    criterion(6, "predicted vs measured levels", measured_levels);
    criterion(7, "fit round trip", fit_round_trip);
    criterion(8, "waveguide coupling", waveguide_coupling);
    criterion(9, "property suites", property_suites);
    criterion(10, "determinism", determinism);
    fmt::print("{} of 10 criteria passed\n", 10 - failures);
    return failures == 0 ? 0 : 1;
}
