#pragma once

// Quasi-phase-matched second harmonic generation in a crystal pumped in
// both directions (pump retro-reflected by the curved mirror). The
// mismatch product dkl = Δk_Q · L_c is the scan variable throughout; it is
// what a crystal temperature scan sweeps in practice.

#include <optional>

#include "sqzkit/constants.hpp"
#include <vector>

namespace sqz {

struct QpmConfig {
    double crystal_length = 5.0e-3;            // m
    std::optional<double> poling_period;       // m
    double fundamental_wavelength = 1550e-9;   // m
    double second_harmonic_wavelength = 775e-9; // m
    std::optional<double> refractive_index_fundamental;
    std::optional<double> refractive_index_second_harmonic;
    double double_pass_phase = 75.0 * kPi / 180.0; // rad
    double amplitude_constant = 1.0;           // arbitrary units

    void validate() const;
};

/// Maps any angle onto [0, pi). The double-pass intensity is pi-periodic.
double normalize_phase(double theta);

/// 2π(n_2f/λ_2f − 2 n_f/λ_f − 1/Λ). Needs both indices and the poling period.
double delta_kq(const QpmConfig& config);

double sinc(double x);

/// A·L·sinc(dkl/2).
double shg_single_pass_field(const QpmConfig& config, double dkl);

/// (2AL)² sinc²(dkl/2) cos²(dkl/2 + θ) with θ from the config.
double shg_double_pass_intensity(const QpmConfig& config, double dkl);

/// Double-pass intensity divided by (2AL)²; independent of A and L.
double double_pass_shape(double dkl, double theta);

struct PenaltyResult {
    double penalty = 0.0;   // peak output relative to theta = 0
    double maximizer = 0.0; // dkl at the peak
};

/// Peak double-pass output at phase theta relative to the in-phase peak.
PenaltyResult phase_penalty(double theta);

/// phase_penalty at theta = 90°, the smallest attainable peak.
PenaltyResult worst_case_penalty();

struct PeakRatio {
    double ratio = 0.0;       // second largest / largest local maximum
    bool degenerate = false;  // two equal peaks; ratio reported as exactly 1
    double largest_at = 0.0;  // dkl of the largest peak
    double second_at = 0.0;   // dkl of the runner-up
};

/// Local maxima of the double-pass tuning curve over dkl in [−4π, 4π],
/// found on a fixed dense grid and refined by golden-section search.
PeakRatio peak_ratio(double theta);

/// Inverts peak_ratio on theta in [0, 90°]. The observable cannot tell
/// theta from 180° − theta; the result is always in the lower half.
/// Throws ValidationError for ratios outside [peak_ratio(0), 1].
double estimate_theta(double measured_ratio);

struct TuningPoint {
    double dkl = 0.0;
    double single_pass = 0.0; // |single-pass field|² normalised to (AL)²
    double double_pass = 0.0; // double-pass intensity normalised to (AL)²
};

std::vector<TuningPoint> tuning_curve(double theta, double dkl_min, double dkl_max,
                                      int points);

/// Intracavity power build-up T²/(1 − √R)⁴ seen by the SHG process.
double cavity_enhancement_factor(double transmittance, double reflectance);

struct ShgMeasurement {
    double conversion_efficiency = 0.0; // 1/W
    double transmittance = 0.0;
    double reflectance = 0.0;

    void validate() const;
};

/// Nonlinear conversion coefficient E_NL with the cavity enhancement removed.
double extract_enl(const ShgMeasurement& meas);

} // namespace sqz
