#pragma once

// End-to-end studies that tie the modules together, shared by the CLI and
// the combined report.

#include <string>
#include <vector>

#include "sqzkit/config.hpp"
#include "sqzkit/fit.hpp"
#include "sqzkit/waveguide.hpp"

namespace sqz {

struct CavitySummary {
    double round_trip_length = 0.0; // m
    double fsr = 0.0;               // Hz
    double finesse = 0.0;
    double finesse_low_loss = 0.0;
    double fwhm = 0.0;              // Hz
    double fwhm_low_loss = 0.0;     // Hz
    double reduced_length = 0.0;    // m
    double waist = 0.0;             // m
};

CavitySummary summarize_cavity(const CavitySpec& spec);

struct QpmSummary {
    double theta = 0.0;             // rad, normalised
    PenaltyResult worst_case;
    double theta_penalty = 0.0;     // peak output at theta relative to theta = 0
    PeakRatio ratio_at_theta;
    double theta_round_trip = 0.0;  // estimate_theta(peak_ratio(theta))
    double enhancement = 0.0;
    double enl = 0.0;               // 1/W
    double threshold = 0.0;         // W, with the extracted E_NL
    double threshold_phase_matched = 0.0; // W, E_NL / theta_penalty
};

QpmSummary summarize_qpm(const ToolkitConfig& config);

struct FitStudy {
    FitResult noiseless;
    double noiseless_threshold_rel_error = 0.0;
    double noiseless_half_width_rel_error = 0.0;
    int runs = 0;
    int successes = 0;             // both parameters within 3 standard errors
    int failures = 0;              // fits that threw
    double reference_levels_objective = 0.0;
};

/// Synthetic recovery study on the configured pump/frequency grid.
FitStudy run_fit_study(const ToolkitConfig& config);

struct WaveguideStudy {
    GaussianBeam source;
    SweepResult sweep;
    bool unimodal = false;
    SweepResult refined;           // best three sizes at half the grid spacing
    double peak_change_pp = 0.0;   // |refined − sweep| peak coupling, percentage points
};

WaveguideStudy run_waveguide_study(const ToolkitConfig& config, int threads);

struct ReportOptions {
    int threads = 1;
};

/// Every module's reference-comparison numbers and pass/fail lines, as text.
/// Identical for identical config regardless of thread count.
std::string build_report(const ToolkitConfig& config, const ReportOptions& options = {});

} // namespace sqz
