#pragma once

// Below-threshold degenerate OPO: quadrature variance spectra at the
// homodyne detector, threshold, and loss bookkeeping. Variances are linear
// and normalised to shot noise = 1.

#include <map>
#include <string>
#include <vector>

namespace sqz {

enum class Branch { squeezed, anti };

const char* to_string(Branch b);
Branch branch_from_string(const std::string& s);

struct SqueezerParams {
    double output_coupler_transmittance = 0.10;
    double intra_cavity_loss = 0.0038;
    double total_detection_loss = 0.07;
    double pump_power = 0.360;        // W, measured before the OPO
    double threshold_power = 1.7;     // W
    double cavity_half_width = 92e6;  // Hz

    void validate() const;
    /// Normalised pump ξ = pump_power / threshold_power.
    double normalized_pump() const { return pump_power / threshold_power; }
};

/// Linear variance relative to shot noise. Throws ValidationError when the
/// pump reaches threshold; the model only holds below it.
double variance(const SqueezerParams& params, double frequency, Branch branch);

double threshold_power(double transmittance, double intra_cavity_loss, double enl);
double escape_efficiency(double transmittance, double intra_cavity_loss);

struct LossBudget {
    std::map<std::string, double> components; // name -> loss fraction

    void validate() const;
};

/// η = 1 − Π(1 − ℓ_i); components act as independent efficiencies.
double compose_loss_budget(const LossBudget& budget);

/// Circuit noise relative to shot noise, treated as an admixed vacuum
/// fraction. +inf clearance gives 0.
double equivalent_loss_from_clearance(double clearance_db);

double to_db(double linear);
double from_db(double db);

struct SpectrumPoint {
    double frequency = 0.0; // Hz
    double level_db = 0.0;  // dB relative to shot noise
};

struct PredictedSpectrum {
    SqueezerParams params;
    std::vector<SpectrumPoint> squeezed;
    std::vector<SpectrumPoint> anti;
};

PredictedSpectrum predict_spectrum(const SqueezerParams& params,
                                   const std::vector<double>& frequencies);

} // namespace sqz
