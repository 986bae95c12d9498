#include "sqzkit/report.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "sqzkit/constants.hpp"
#include "sqzkit/error.hpp"

namespace sqz {
namespace {

// Reference values and tolerances for the comparison block.
struct Reference {
    double value;
    double tolerance;
};

constexpr Reference kFinesse{60.5, 1.0};
constexpr Reference kFwhmMHz{224.0, 12.0};
constexpr Reference kRoundTripMm{22.0, 0.5};
constexpr Reference kWaistUm{23.0, 1.5};
constexpr Reference kEnhancement{1.442e3, 0.01};     // relative
constexpr Reference kEnl{1.56e-3, 0.02};             // relative
constexpr Reference kThreshold{1.73, 0.02};          // relative
constexpr Reference kThresholdPhased{1.10, 0.05};
constexpr Reference kPenalty{0.5258, 0.001};
constexpr Reference kSqueezing2MHz{-6.2, 0.5};
constexpr Reference kSqueezing100MHz{-3.0, 0.2};
constexpr Reference kAnti2MHz{8.6, 0.7};
constexpr Reference kCoupling{0.979, 0.015};
constexpr Reference kCoreUm{63.0, 4.0};

struct Check {
    std::string name;
    bool pass;
    std::string detail;
};

std::string pf(bool ok) {
    return ok ? "PASS" : "FAIL";
}

bool within(double v, Reference r) {
    return std::abs(v - r.value) <= r.tolerance;
}

bool within_rel(double v, Reference r) {
    return std::abs(v - r.value) <= r.tolerance * std::abs(r.value);
}

} // namespace

CavitySummary summarize_cavity(const CavitySpec& spec) {
    CavitySummary s;
    s.round_trip_length = round_trip_optical_length(spec);
    s.fsr = cavity_fsr(spec);
    s.finesse = cavity_finesse(spec);
    s.finesse_low_loss = cavity_finesse_approx(spec);
    s.fwhm = cavity_linewidth_fwhm(spec);
    s.fwhm_low_loss = cavity_linewidth_fwhm_approx(spec);
    s.reduced_length = reduced_cavity_length(spec);
    s.waist = plano_concave_waist(spec).waist_radius;
    return s;
}

QpmSummary summarize_qpm(const ToolkitConfig& config) {
    QpmSummary s;
    s.theta = normalize_phase(config.qpm.double_pass_phase);
    s.worst_case = worst_case_penalty();
    s.theta_penalty = phase_penalty(s.theta).penalty;
    s.ratio_at_theta = peak_ratio(s.theta);
    // The observable only resolves theta up to 180° − theta.
    const double folded = s.theta <= kPi / 2.0 ? s.theta : kPi - s.theta;
    s.theta_round_trip = folded > 0.0 ? estimate_theta(s.ratio_at_theta.ratio) : 0.0;
    const double t = config.cavity.output_coupler_transmittance;
    ShgMeasurement meas{config.shg_conversion_efficiency, t, 1.0 - t};
    s.enhancement = cavity_enhancement_factor(t, 1.0 - t);
    s.enl = extract_enl(meas);
    s.threshold = threshold_power(t, config.cavity.intra_cavity_loss, s.enl);
    s.threshold_phase_matched =
        threshold_power(t, config.cavity.intra_cavity_loss, s.enl / s.theta_penalty);
    return s;
}

FitStudy run_fit_study(const ToolkitConfig& config) {
    const SqueezerParams truth = config.squeezer();
    const auto freqs =
        log_space(config.fit.frequency_min, config.fit.frequency_max, config.fit.frequency_points);
    const auto& powers = config.fit.pump_powers;

    // Start away from the truth so recovery is not trivial.
    SqueezerParams guess = truth;
    guess.threshold_power = truth.threshold_power * 1.4;
    guess.cavity_half_width = truth.cavity_half_width * 0.7;

    FitStudy study;
    const auto exact = synth_dataset(truth, powers, freqs, 0.0, config.fit.seed);
    study.noiseless = fit_squeezing(exact, guess);
    study.noiseless_threshold_rel_error =
        std::abs(study.noiseless.threshold_power / truth.threshold_power - 1.0);
    study.noiseless_half_width_rel_error =
        std::abs(study.noiseless.cavity_half_width / truth.cavity_half_width - 1.0);

    study.runs = config.fit.runs;
    for (int run = 0; run < config.fit.runs; ++run) {
        const auto noisy = synth_dataset(truth, powers, freqs, config.fit.noise_sigma_db,
                                         config.fit.seed + static_cast<std::uint64_t>(run));
        try {
            const FitResult r = fit_squeezing(noisy, guess);
            const bool ok_p = std::abs(r.threshold_power - truth.threshold_power) <=
                              3.0 * r.threshold_power_se;
            const bool ok_f = std::abs(r.cavity_half_width - truth.cavity_half_width) <=
                              3.0 * r.cavity_half_width_se;
            if (ok_p && ok_f) ++study.successes;
        } catch (const std::exception&) {
            ++study.failures;
        }
    }

    const double p = config.pump_power;
    const std::vector<SqueezingObservation> levels = {
        {p, 2e6, Branch::squeezed, -6.2, 0.1},
        {p, 2e6, Branch::anti, 8.6, 0.1},
        {p, 100e6, Branch::squeezed, -3.0, 0.1},
        {p, 100e6, Branch::anti, 3.4, 0.1},
    };
    study.reference_levels_objective = objective(truth, levels);
    return study;
}

WaveguideStudy run_waveguide_study(const ToolkitConfig& config, int threads) {
    WaveguideStudy study;
    study.source = config.source_beam();
    study.sweep = sweep_core_size(config.sweep.sizes_um(), study.source, config.waveguide, threads);
    study.unimodal = is_unimodal(study.sweep);

    // Re-solve the best grid point and its neighbours on a grid twice as fine.
    const auto& pts = study.sweep.points;
    std::size_t best = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (pts[i].ok && (!pts[best].ok || pts[i].efficiency > pts[best].efficiency)) best = i;
    }
    std::vector<double> sizes;
    for (std::size_t i = best > 0 ? best - 1 : 0; i <= std::min(best + 1, pts.size() - 1); ++i) {
        sizes.push_back(pts[i].core_size_um);
    }
    WaveguideSpec fine = config.waveguide;
    fine.grid_spacing_um /= 2.0;
    study.refined = sweep_core_size(sizes, study.source, fine, threads);
    study.peak_change_pp =
        100.0 * std::abs(study.refined.best_efficiency - study.sweep.best_efficiency);
    return study;
}

std::string build_report(const ToolkitConfig& config, const ReportOptions& options) {
    config.validate();
    std::string out;
    std::vector<Check> checks;
    auto line = [&out](const std::string& s) {
        out += s;
        out += '\n';
    };

    line("# sqzkit report");
    line("");
    line("## configuration");
    out += serialize_config(config);
    line("");

    // Cavity
    const CavitySummary cav = summarize_cavity(config.cavity);
    line("## cavity");
    line(fmt::format("round_trip_optical_length_mm = {:.4f}", cav.round_trip_length * 1e3));
    line(fmt::format("free_spectral_range_ghz = {:.4f}", cav.fsr * 1e-9));
    line(fmt::format("finesse_airy = {:.3f}", cav.finesse));
    line(fmt::format("finesse_low_loss = {:.3f}", cav.finesse_low_loss));
    line(fmt::format("fwhm_airy_mhz = {:.2f}", cav.fwhm * 1e-6));
    line(fmt::format("fwhm_low_loss_mhz = {:.2f}", cav.fwhm_low_loss * 1e-6));
    line(fmt::format("hwhm_airy_mhz = {:.2f}", cav.fwhm * 0.5e-6));
    line(fmt::format("fitted_hwhm_mhz = {:.2f}", config.cavity_half_width * 1e-6));
    line(fmt::format("reduced_length_mm = {:.4f}", cav.reduced_length * 1e3));
    line(fmt::format("waist_um = {:.3f}", cav.waist * 1e6));
    line("");
    checks.push_back({"finesse (low-loss form) vs 61", within(cav.finesse_low_loss, kFinesse),
                      fmt::format("{:.2f} (airy {:.2f}), want {} +- {}", cav.finesse_low_loss,
                                  cav.finesse, kFinesse.value, kFinesse.tolerance)});
    checks.push_back({"FWHM linewidth vs 2.4e2 MHz",
                      within(cav.fwhm * 1e-6, kFwhmMHz) && within(cav.fwhm_low_loss * 1e-6, kFwhmMHz),
                      fmt::format("airy {:.1f} MHz, low-loss {:.1f} MHz, want {} +- {}",
                                  cav.fwhm * 1e-6, cav.fwhm_low_loss * 1e-6, kFwhmMHz.value,
                                  kFwhmMHz.tolerance)});
    checks.push_back({"round-trip optical length vs 22 mm",
                      within(cav.round_trip_length * 1e3, kRoundTripMm),
                      fmt::format("{:.3f} mm, want {} +- {}", cav.round_trip_length * 1e3,
                                  kRoundTripMm.value, kRoundTripMm.tolerance)});
    checks.push_back({"resonant waist vs 23 um", within(cav.waist * 1e6, kWaistUm),
                      fmt::format("{:.2f} um, want {} +- {}", cav.waist * 1e6, kWaistUm.value,
                                  kWaistUm.tolerance)});

    // QPM
    const QpmSummary q = summarize_qpm(config);
    line("## qpm");
    line(fmt::format("double_pass_phase_deg = {:.3f}", q.theta * 180.0 / kPi));
    line(fmt::format("worst_case_penalty = {:.6f}", q.worst_case.penalty));
    line(fmt::format("worst_case_maximizer = {:.6f}", q.worst_case.maximizer));
    line(fmt::format("phase_penalty = {:.6f}", q.theta_penalty));
    line(fmt::format("peak_ratio = {:.6f}", q.ratio_at_theta.ratio));
    line(fmt::format("theta_from_ratio_deg = {:.4f}", q.theta_round_trip * 180.0 / kPi));
    line(fmt::format("enhancement_factor = {:.2f}", q.enhancement));
    line(fmt::format("enl_per_w = {:.6e}", q.enl));
    line(fmt::format("threshold_w = {:.4f}", q.threshold));
    line(fmt::format("threshold_phase_matched_w = {:.4f}", q.threshold_phase_matched));
    if (config.qpm.poling_period && config.qpm.refractive_index_fundamental &&
        config.qpm.refractive_index_second_harmonic) {
        line(fmt::format("delta_kq_per_m = {:.6e}", delta_kq(config.qpm)));
    }
    line("");
    const double x = q.worst_case.maximizer;
    checks.push_back({"cavity enhancement vs 1.44e3", within_rel(q.enhancement, kEnhancement),
                      fmt::format("{:.1f}, want {} +- 1%", q.enhancement, kEnhancement.value)});
    checks.push_back({"E_NL vs 1.56e-3 /W", within_rel(q.enl, kEnl),
                      fmt::format("{:.4e} /W, want {} +- 2%", q.enl, kEnl.value)});
    checks.push_back({"threshold vs 1.73 W", within_rel(q.threshold, kThreshold),
                      fmt::format("{:.4f} W, want {} +- 2%", q.threshold, kThreshold.value)});
    checks.push_back({"phase-matched threshold vs 1.1 W",
                      within(q.threshold_phase_matched, kThresholdPhased),
                      fmt::format("{:.4f} W, want {} +- {}", q.threshold_phase_matched,
                                  kThresholdPhased.value, kThresholdPhased.tolerance)});
    checks.push_back({"theta = 90 deg penalty vs 0.525",
                      within(q.worst_case.penalty, kPenalty) && std::abs(std::tan(x / 2) - x) < 1e-6,
                      fmt::format("{:.6f} at dkl {:.6f} (tan(x/2) - x = {:.1e})", q.worst_case.penalty,
                                  x, std::tan(x / 2) - x)});

    // Squeezing
    const SqueezerParams sp = config.squeezer();
    line("## squeezing");
    line(fmt::format("normalized_pump = {:.6f}", sp.normalized_pump()));
    line(fmt::format("escape_efficiency = {:.6f}",
                     escape_efficiency(sp.output_coupler_transmittance, sp.intra_cavity_loss)));
    line(fmt::format("detection_loss = {:.4f}", sp.total_detection_loss));
    line(fmt::format("loss_budget_composed = {:.6f}", compose_loss_budget(config.loss)));
    for (const auto& [name, value] : config.loss.components) {
        line(fmt::format("loss_budget.{} = {:.4f}", name, value));
    }
    line(fmt::format("clearance_db = {:.2f}", config.clearance_db));
    line(fmt::format("clearance_equivalent_loss = {:.6f}",
                     equivalent_loss_from_clearance(config.clearance_db)));
    const auto spec = predict_spectrum(sp, config.report_frequencies);
    for (std::size_t i = 0; i < spec.squeezed.size(); ++i) {
        line(fmt::format("level_at_{:g}_mhz_db = {:.3f} / {:+.3f}", spec.squeezed[i].frequency * 1e-6,
                         spec.squeezed[i].level_db, spec.anti[i].level_db));
    }
    line("");
    const auto at = [&sp](double f, Branch b) { return to_db(variance(sp, f, b)); };
    const double s2 = at(2e6, Branch::squeezed);
    const double s100 = at(100e6, Branch::squeezed);
    const double a2 = at(2e6, Branch::anti);
    checks.push_back({"squeezing at 2 MHz vs 6.2 dB", within(s2, kSqueezing2MHz),
                      fmt::format("{:.3f} dB, want {} +- {}", s2, kSqueezing2MHz.value,
                                  kSqueezing2MHz.tolerance)});
    checks.push_back({"squeezing at 100 MHz vs 3.0 dB", within(s100, kSqueezing100MHz),
                      fmt::format("{:.3f} dB, want {} +- {}", s100, kSqueezing100MHz.value,
                                  kSqueezing100MHz.tolerance)});
    checks.push_back({"anti-squeezing at 2 MHz vs 8.6 dB", within(a2, kAnti2MHz),
                      fmt::format("{:+.3f} dB, want {} +- {}", a2, kAnti2MHz.value,
                                  kAnti2MHz.tolerance)});

    // Fit
    const FitStudy fs = run_fit_study(config);
    line("## fit");
    line(fmt::format("noiseless_threshold_w = {:.9f}", fs.noiseless.threshold_power));
    line(fmt::format("noiseless_half_width_mhz = {:.6f}", fs.noiseless.cavity_half_width * 1e-6));
    line(fmt::format("noiseless_iterations = {}", fs.noiseless.iterations));
    line(fmt::format("monte_carlo_runs = {}", fs.runs));
    line(fmt::format("monte_carlo_within_3se = {}", fs.successes));
    line(fmt::format("monte_carlo_failures = {}", fs.failures));
    line(fmt::format("reference_levels_objective = {:.4f}", fs.reference_levels_objective));
    line("");
    checks.push_back({"noiseless fit recovery",
                      fs.noiseless_threshold_rel_error < 1e-6 && fs.noiseless_half_width_rel_error < 1e-6,
                      fmt::format("rel errors {:.1e}, {:.1e}", fs.noiseless_threshold_rel_error,
                                  fs.noiseless_half_width_rel_error)});
    checks.push_back({"noisy fit coverage", fs.successes >= (95 * fs.runs + 99) / 100,
                      fmt::format("{}/{} within 3 standard errors", fs.successes, fs.runs)});

    // Waveguide
    const WaveguideStudy ws = run_waveguide_study(config, options.threads);
    line("## waveguide");
    line(fmt::format("source_waist_um = {:.3f}", ws.source.waist_radius * 1e6));
    line(fmt::format("core_index = {:.6f}", config.waveguide.core_index()));
    line("core_size_um,efficiency,n_eff");
    for (const auto& p : ws.sweep.points) {
        if (p.ok) {
            line(fmt::format("{:.3f},{:.6f},{:.8f}", p.core_size_um, p.efficiency, p.n_eff));
        } else {
            line(fmt::format("{:.3f},failed,{}", p.core_size_um, p.error));
        }
    }
    line(fmt::format("best_core_um = {:.3f}", ws.sweep.best_size_um));
    line(fmt::format("best_efficiency = {:.6f}", ws.sweep.best_efficiency));
    line(fmt::format("unimodal = {}", ws.unimodal ? "yes" : "no"));
    line(fmt::format("half_grid_best_efficiency = {:.6f}", ws.refined.best_efficiency));
    line(fmt::format("half_grid_change_pp = {:.4f}", ws.peak_change_pp));
    line("");
    checks.push_back({"peak coupling vs 97.9%", within(ws.sweep.best_efficiency, kCoupling),
                      fmt::format("{:.4f}, want {} +- {}", ws.sweep.best_efficiency, kCoupling.value,
                                  kCoupling.tolerance)});
    checks.push_back({"optimal core vs 63 um", within(ws.sweep.best_size_um, kCoreUm),
                      fmt::format("{:.2f} um, want {} +- {}", ws.sweep.best_size_um, kCoreUm.value,
                                  kCoreUm.tolerance)});
    checks.push_back({"grid halving", ws.peak_change_pp < 0.2,
                      fmt::format("{:.4f} pp, want < 0.2", ws.peak_change_pp)});

    line("## checks");
    int passed = 0;
    for (const auto& c : checks) {
        if (c.pass) ++passed;
        line(fmt::format("{}  {}: {}", pf(c.pass), c.name, c.detail));
    }
    line(fmt::format("summary: {}/{} passed", passed, checks.size()));
    return out;
}

} // namespace sqz
