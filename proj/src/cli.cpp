#include "sqzkit/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "sqzkit/config.hpp"
#include "sqzkit/constants.hpp"
#include "sqzkit/error.hpp"
#include "sqzkit/fit.hpp"
#include "sqzkit/plot.hpp"
#include "sqzkit/report.hpp"
#include "sqzkit/trace.hpp"

namespace sqz {
namespace {

ToolkitConfig config_from(const std::string& path) {
    return path.empty() ? ToolkitConfig{} : load_config(path);
}

std::ofstream open_output(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot write '" + path + "'");
    return f;
}

void cmd_cavity(const ToolkitConfig& cfg, std::ostream& out) {
    const CavitySummary s = summarize_cavity(cfg.cavity);
    fmt::print(out, "round-trip optical length: {:.3f} mm\n", s.round_trip_length * 1e3);
    fmt::print(out, "free spectral range:       {:.4f} GHz\n", s.fsr * 1e-9);
    fmt::print(out, "finesse (Airy):            {:.2f}\n", s.finesse);
    fmt::print(out, "finesse (2pi/(T+L)):       {:.2f}\n", s.finesse_low_loss);
    fmt::print(out, "linewidth FWHM (Airy):     {:.1f} MHz\n", s.fwhm * 1e-6);
    fmt::print(out, "linewidth FWHM (2pi/(T+L)): {:.1f} MHz\n", s.fwhm_low_loss * 1e-6);
    fmt::print(out, "reduced length:            {:.4f} mm\n", s.reduced_length * 1e3);
    fmt::print(out, "waist radius:              {:.2f} um\n", s.waist * 1e6);
}

struct QpmArgs {
    double theta_deg = std::nan("");
    double ratio = std::nan("");
    double efficiency = std::nan("");
    std::string curve_csv;
    std::string plot;
};

void cmd_qpm(ToolkitConfig cfg, const QpmArgs& a, std::ostream& out) {
    if (!std::isnan(a.theta_deg)) cfg.qpm.double_pass_phase = a.theta_deg * kPi / 180.0;
    if (!std::isnan(a.efficiency)) cfg.shg_conversion_efficiency = a.efficiency;
    cfg.validate();
    const QpmSummary s = summarize_qpm(cfg);
    fmt::print(out, "double-pass phase:         {:.2f} deg\n", s.theta * 180.0 / kPi);
    fmt::print(out, "worst-case penalty:        {:.5f} at dkl = {:.5f}\n", s.worst_case.penalty,
               s.worst_case.maximizer);
    fmt::print(out, "peak output vs in-phase:   {:.5f}\n", s.theta_penalty);
    fmt::print(out, "peak ratio at phase:       {:.5f}{}\n", s.ratio_at_theta.ratio,
               s.ratio_at_theta.degenerate ? " (degenerate)" : "");
    if (!std::isnan(a.ratio)) {
        fmt::print(out, "phase from ratio {:.5f}:   {:.3f} deg\n", a.ratio,
                   estimate_theta(a.ratio) * 180.0 / kPi);
    }
    if (cfg.qpm.poling_period && cfg.qpm.refractive_index_fundamental &&
        cfg.qpm.refractive_index_second_harmonic) {
        fmt::print(out, "delta k_Q:                 {:.6e} 1/m\n", delta_kq(cfg.qpm));
    }
    fmt::print(out, "cavity enhancement:        {:.1f}\n", s.enhancement);
    fmt::print(out, "E_NL:                      {:.4e} /W\n", s.enl);
    fmt::print(out, "threshold:                 {:.3f} W\n", s.threshold);
    fmt::print(out, "threshold, phase matched:  {:.3f} W\n", s.threshold_phase_matched);

    if (!a.curve_csv.empty() || !a.plot.empty()) {
        const auto curve = tuning_curve(s.theta, -4.0 * kPi, 4.0 * kPi, 801);
        if (!a.curve_csv.empty()) {
            auto f = open_output(a.curve_csv);
            f << "dkl,single_pass,double_pass\n";
            for (const auto& p : curve) fmt::print(f, "{},{},{}\n", p.dkl, p.single_pass, p.double_pass);
        }
        if (!a.plot.empty()) {
            PlotSeries single{"single pass", {}};
            PlotSeries dbl{fmt::format("double pass, {:.0f} deg", s.theta * 180.0 / kPi), {}};
            for (const auto& p : curve) {
                single.points.push_back({p.dkl, p.single_pass});
                dbl.points.push_back({p.dkl, p.double_pass});
            }
            AxesSpec axes{"SHG tuning curve", "dkL", "SHG power (A L)^2", false, "dkl", "intensity"};
            emit_plot({single, dbl}, a.plot, axes);
        }
    }
}

struct SqueezeArgs {
    double pump_mw = std::nan("");
    std::vector<double> freqs_mhz;
    std::string plot;
    std::string csv;
    std::string signal;
    std::string shot;
    std::string normalized_out;
};

void cmd_squeeze(ToolkitConfig cfg, const SqueezeArgs& a, std::ostream& out) {
    if (!std::isnan(a.pump_mw)) cfg.pump_power = a.pump_mw * 1e-3;
    cfg.validate();
    const SqueezerParams p = cfg.squeezer();
    std::vector<double> freqs = cfg.report_frequencies;
    if (!a.freqs_mhz.empty()) {
        freqs.clear();
        for (double f : a.freqs_mhz) freqs.push_back(f * 1e6);
    }
    fmt::print(out, "pump {:.1f} mW, threshold {:.3f} W, xi = {:.5f}\n", p.pump_power * 1e3,
               p.threshold_power, p.normalized_pump());
    fmt::print(out, "escape efficiency {:.4f}, detection loss {:.4f} (budget composes to {:.4f})\n",
               escape_efficiency(p.output_coupler_transmittance, p.intra_cavity_loss),
               p.total_detection_loss, compose_loss_budget(cfg.loss));
    fmt::print(out, "clearance {:.1f} dB -> equivalent loss {:.4f}\n", cfg.clearance_db,
               equivalent_loss_from_clearance(cfg.clearance_db));
    const auto spec = predict_spectrum(p, freqs);
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        fmt::print(out, "{:8.3f} MHz: squeezed {:+.2f} dB, anti-squeezed {:+.2f} dB\n",
                   freqs[i] * 1e-6, spec.squeezed[i].level_db, spec.anti[i].level_db);
    }

    std::vector<PlotSeries> series;
    if (!a.plot.empty() || !a.csv.empty()) {
        const auto grid = log_space(1e6, 300e6, 200);
        const auto dense = predict_spectrum(p, grid);
        NoiseTrace sq{"model squeezed", {}, TraceReference::relative_to_shot, {}};
        NoiseTrace an{"model anti-squeezed", {}, TraceReference::relative_to_shot, {}};
        sq.metadata.pump_power_w = an.metadata.pump_power_w = p.pump_power;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            sq.points.push_back({grid[i], dense.squeezed[i].level_db});
            an.points.push_back({grid[i], dense.anti[i].level_db});
        }
        if (!a.csv.empty()) {
            write_trace_csv(a.csv, sq);
            write_trace_csv(std::filesystem::path(a.csv).replace_extension(".anti.csv"), an);
        }
        series.push_back(to_series(an));
        series.push_back(to_series(sq));
    }
    if (!a.signal.empty() || !a.shot.empty()) {
        if (a.signal.empty() || a.shot.empty()) {
            throw ValidationError("--signal and --shot must be given together");
        }
        const NoiseTrace norm = normalize_to_shot(parse_trace_csv(a.signal), parse_trace_csv(a.shot));
        for (const auto& pt : norm.points) {
            fmt::print(out, "measured {:8.3f} MHz: {:+.2f} dB\n", pt.frequency * 1e-6, pt.power_db);
        }
        if (!a.normalized_out.empty()) write_trace_csv(a.normalized_out, norm);
        series.push_back(to_series(norm));
    }
    if (!a.plot.empty()) {
        AxesSpec axes;
        axes.title = "noise relative to shot noise";
        axes.x_label = "frequency (Hz)";
        axes.y_label = "noise power (dB rel. shot)";
        emit_plot(series, a.plot, axes);
    }
}

struct FitArgs {
    std::string data;
    bool synthetic = false;
    std::string write_data;
    double noise_db = std::nan("");
    long long seed = -1;
    bool free_eta = false;
    bool linear = false;
    double guess_pth_w = 2.0;
    double guess_fhwhm_mhz = 100.0;
    std::string out_path;
};

void write_fit(std::ostream& out, const FitResult& r) {
    fmt::print(out, "threshold_power_w = {}\n", r.threshold_power);
    fmt::print(out, "threshold_power_se_w = {}\n", r.threshold_power_se);
    fmt::print(out, "cavity_half_width_hz = {}\n", r.cavity_half_width);
    fmt::print(out, "cavity_half_width_se_hz = {}\n", r.cavity_half_width_se);
    if (r.total_detection_loss) {
        fmt::print(out, "total_detection_loss = {}\n", *r.total_detection_loss);
        fmt::print(out, "total_detection_loss_se = {}\n", r.total_detection_loss_se.value_or(0.0));
    }
    fmt::print(out, "objective = {}\n", r.objective);
    fmt::print(out, "residual_norm = {}\n", r.residual_norm);
    fmt::print(out, "converged = {}\n", r.converged ? "true" : "false");
    fmt::print(out, "iterations = {}\n", r.iterations);
}

void cmd_fit(const ToolkitConfig& cfg, const FitArgs& a, std::ostream& out) {
    std::vector<SqueezingObservation> obs;
    if (!a.data.empty()) {
        obs = parse_observations_csv(a.data);
    } else if (a.synthetic) {
        const auto freqs = log_space(cfg.fit.frequency_min, cfg.fit.frequency_max, cfg.fit.frequency_points);
        const double sigma = std::isnan(a.noise_db) ? cfg.fit.noise_sigma_db : a.noise_db;
        const std::uint64_t seed = a.seed >= 0 ? static_cast<std::uint64_t>(a.seed) : cfg.fit.seed;
        obs = synth_dataset(cfg.squeezer(), cfg.fit.pump_powers, freqs, sigma, seed);
    } else {
        throw ValidationError("fit: give --data FILE or --synthetic");
    }
    if (!a.write_data.empty()) {
        auto f = open_output(a.write_data);
        write_observations_csv(f, obs);
    }
    SqueezerParams guess = cfg.squeezer();
    guess.threshold_power = a.guess_pth_w;
    guess.cavity_half_width = a.guess_fhwhm_mhz * 1e6;
    FitOptions opt;
    opt.fit_detection_loss = a.free_eta;
    opt.linear_residuals = a.linear;
    const FitResult r = fit_squeezing(obs, guess, opt);
    write_fit(out, r);
    if (!a.out_path.empty()) {
        auto f = open_output(a.out_path);
        write_fit(f, r);
    }
}

struct WaveguideArgs {
    double core_um = std::nan("");
    double spacing_um = std::nan("");
    double waist_um = std::nan("");
    bool sweep = false;
    std::string mode_out;
    std::string csv;
    std::string plot;
    int threads = 1;
};

void cmd_waveguide(ToolkitConfig cfg, const WaveguideArgs& a, std::ostream& out) {
    if (!std::isnan(a.core_um)) cfg.waveguide.core_size_um = a.core_um;
    if (!std::isnan(a.spacing_um)) cfg.waveguide.grid_spacing_um = a.spacing_um;
    if (!std::isnan(a.waist_um)) cfg.source_waist = a.waist_um * 1e-6;
    cfg.waveguide.validate();
    const GaussianBeam source = cfg.source_beam();
    fmt::print(out, "core index {:.6f}, cladding index {:.6f}, source waist {:.2f} um\n",
               cfg.waveguide.core_index(), cfg.waveguide.cladding_index, source.waist_radius * 1e6);
    if (a.sweep) {
        const SweepResult sw = sweep_core_size(cfg.sweep.sizes_um(), source, cfg.waveguide, a.threads);
        for (const auto& p : sw.points) {
            if (p.ok) {
                fmt::print(out, "{:7.2f} um: coupling {:.4f}, n_eff {:.7f}\n", p.core_size_um,
                           p.efficiency, p.n_eff);
            } else {
                fmt::print(out, "{:7.2f} um: failed ({})\n", p.core_size_um, p.error);
            }
        }
        fmt::print(out, "best: {:.2f} um, coupling {:.4f}\n", sw.best_size_um, sw.best_efficiency);
        if (!a.csv.empty()) {
            auto f = open_output(a.csv);
            write_sweep_csv(f, sw);
        }
        if (!a.plot.empty()) {
            AxesSpec axes{"coupling vs core size", "core size (um)", "coupling efficiency", false,
                          "core_size_um", "efficiency"};
            emit_plot({to_series(sw)}, a.plot, axes);
        }
        return;
    }
    const ModeField mode = solve_fundamental_mode(cfg.waveguide);
    fmt::print(out, "core {:.2f} um: n_eff {:.8f}, coupling {:.5f}, residual {:.2e}, {} iterations\n",
               cfg.waveguide.core_size_um, mode.n_eff, overlap_efficiency(mode, source), mode.residual,
               mode.iterations);
    if (!a.mode_out.empty()) {
        auto f = open_output(a.mode_out);
        write_mode_field(f, mode);
    }
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Design and analysis toolkit for cavity squeezed-light sources", "sqzkit"};
    app.require_subcommand(1);
    std::string config_path;
    int threads = 1;

    auto* cavity = app.add_subcommand("cavity", "cavity figures of merit and resonant waist");
    cavity->add_option("--config", config_path, "configuration file");

    QpmArgs qa;
    auto* qpm = app.add_subcommand("qpm", "double-pass QPM tuning, phase estimate, E_NL");
    qpm->add_option("--config", config_path, "configuration file");
    qpm->add_option("--theta-deg", qa.theta_deg, "double-pass phase override (deg)");
    qpm->add_option("--ratio", qa.ratio, "measured second/first peak ratio to invert");
    qpm->add_option("--efficiency", qa.efficiency, "measured SHG conversion efficiency (1/W)");
    qpm->add_option("--curve-csv", qa.curve_csv, "write the tuning curve as CSV");
    qpm->add_option("--plot", qa.plot, "write the tuning curve as SVG");

    SqueezeArgs sa;
    auto* squeeze = app.add_subcommand("squeeze", "predicted squeezing spectra and threshold");
    squeeze->add_option("--config", config_path, "configuration file");
    squeeze->add_option("--pump-mw", sa.pump_mw, "pump power before the OPO (mW)");
    squeeze->add_option("--freq-mhz", sa.freqs_mhz, "analysis frequencies (MHz)");
    squeeze->add_option("--plot", sa.plot, "write predicted (and measured) spectra as SVG");
    squeeze->add_option("--csv", sa.csv, "write the predicted squeezed trace as CSV");
    squeeze->add_option("--signal", sa.signal, "measured trace CSV to normalise");
    squeeze->add_option("--shot", sa.shot, "shot-noise trace CSV on the same grid");
    squeeze->add_option("--normalized-out", sa.normalized_out, "write the normalised trace");

    FitArgs fa;
    auto* fit = app.add_subcommand("fit", "fit threshold and cavity half width to squeezing data");
    fit->add_option("--config", config_path, "configuration file");
    fit->add_option("--data", fa.data, "observation CSV");
    fit->add_flag("--synthetic", fa.synthetic, "fit a synthetic dataset from the config");
    fit->add_option("--write-data", fa.write_data, "write the observations used");
    fit->add_option("--noise-db", fa.noise_db, "synthetic noise sigma (dB)");
    fit->add_option("--seed", fa.seed, "synthetic noise seed");
    fit->add_flag("--free-eta", fa.free_eta, "also fit the detection loss");
    fit->add_flag("--linear", fa.linear, "residuals in linear variance instead of dB");
    fit->add_option("--guess-pth-w", fa.guess_pth_w, "initial threshold (W)");
    fit->add_option("--guess-fhwhm-mhz", fa.guess_fhwhm_mhz, "initial half width (MHz)");
    fit->add_option("--out", fa.out_path, "write the key=value result to a file");

    WaveguideArgs wa;
    auto* wg = app.add_subcommand("waveguide", "fundamental mode and Gaussian coupling");
    wg->add_option("--config", config_path, "configuration file");
    wg->add_option("--core-um", wa.core_um, "core side (um)");
    wg->add_option("--spacing-um", wa.spacing_um, "grid spacing (um)");
    wg->add_option("--waist-um", wa.waist_um, "source waist (um), default: cavity waist");
    wg->add_flag("--sweep", wa.sweep, "sweep the configured core-size range");
    wg->add_option("--mode-out", wa.mode_out, "write the mode field grid file");
    wg->add_option("--csv", wa.csv, "write the sweep curve CSV");
    wg->add_option("--plot", wa.plot, "write the sweep curve SVG");
    wg->add_option("--threads", wa.threads, "worker threads for the sweep");

    std::string report_out;
    auto* report = app.add_subcommand("report", "all studies and reference comparisons");
    report->add_option("--config", config_path, "configuration file");
    report->add_option("--out", report_out, "write the report to a file instead of stdout");
    report->add_option("--threads", threads, "worker threads");

    std::vector<std::string> argv_store{"sqzkit"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& s : argv_store) argv.push_back(s.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        if (args.empty()) {
            err << app.help();
        } else {
            err << "error: " << e.what() << "\n\n" << app.help();
        }
        return kExitValidation;
    }

    try {
        const ToolkitConfig cfg = config_from(config_path);
        if (cavity->parsed()) {
            cmd_cavity(cfg, out);
        } else if (qpm->parsed()) {
            cmd_qpm(cfg, qa, out);
        } else if (squeeze->parsed()) {
            cmd_squeeze(cfg, sa, out);
        } else if (fit->parsed()) {
            cmd_fit(cfg, fa, out);
        } else if (wg->parsed()) {
            cmd_waveguide(cfg, wa, out);
        } else if (report->parsed()) {
            const std::string text = build_report(cfg, ReportOptions{threads});
            if (report_out.empty()) {
                out << text;
            } else {
                auto f = open_output(report_out);
                f << text;
            }
        }
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitOk;
}

} // namespace sqz
