#include "sqzkit/squeezing.hpp"

#include <cmath>
#include <limits>

#include "sqzkit/error.hpp"

namespace sqz {

const char* to_string(Branch b) {
    return b == Branch::squeezed ? "squeezed" : "anti";
}

Branch branch_from_string(const std::string& s) {
    if (s == "squeezed" || s == "sq" || s == "-") return Branch::squeezed;
    if (s == "anti" || s == "antisqueezed" || s == "+") return Branch::anti;
    throw ValidationError("unknown branch '" + s + "' (expected squeezed|anti)");
}

void SqueezerParams::validate() const {
    require(output_coupler_transmittance > 0.0 && output_coupler_transmittance < 1.0,
            "squeezer: T must lie in (0, 1)");
    require(intra_cavity_loss >= 0.0 && intra_cavity_loss < 1.0,
            "squeezer: intra-cavity loss must lie in [0, 1)");
    require(total_detection_loss >= 0.0 && total_detection_loss < 1.0,
            "squeezer: detection loss must lie in [0, 1)");
    require(pump_power >= 0.0, "squeezer: pump power must be >= 0");
    require(threshold_power > 0.0, "squeezer: threshold power must be > 0");
    require(cavity_half_width > 0.0, "squeezer: cavity half width must be > 0");
    require(normalized_pump() < 1.0, "squeezer: pump at or above oscillation threshold");
}

double variance(const SqueezerParams& params, double frequency, Branch branch) {
    params.validate();
    require(frequency >= 0.0, "variance: frequency must be >= 0");
    const double amp = std::sqrt(params.normalized_pump());
    const double gain = (1.0 - params.total_detection_loss) *
                        escape_efficiency(params.output_coupler_transmittance,
                                          params.intra_cavity_loss);
    const double x = frequency / params.cavity_half_width;
    if (branch == Branch::anti) {
        const double d = 1.0 - amp;
        return 1.0 + gain * 4.0 * amp / (d * d + x * x);
    }
    const double d = 1.0 + amp;
    return 1.0 - gain * 4.0 * amp / (d * d + x * x);
}

double threshold_power(double transmittance, double intra_cavity_loss, double enl) {
    require(enl > 0.0, "threshold: E_NL must be > 0");
    require(transmittance >= 0.0 && intra_cavity_loss >= 0.0, "threshold: losses must be >= 0");
    const double total = transmittance + intra_cavity_loss;
    return total * total / (4.0 * enl);
}

double escape_efficiency(double transmittance, double intra_cavity_loss) {
    require(transmittance + intra_cavity_loss > 0.0, "escape efficiency: T + L must be > 0");
    return transmittance / (transmittance + intra_cavity_loss);
}

void LossBudget::validate() const {
    for (const auto& [name, loss] : components) {
        require(loss >= 0.0 && loss < 1.0, "loss budget: component '" + name + "' outside [0, 1)");
    }
}

double compose_loss_budget(const LossBudget& budget) {
    budget.validate();
    double efficiency = 1.0;
    for (const auto& [name, loss] : budget.components) efficiency *= 1.0 - loss;
    return 1.0 - efficiency;
}

double equivalent_loss_from_clearance(double clearance_db) {
    require(clearance_db > 0.0, "clearance must be > 0 dB");
    if (std::isinf(clearance_db)) return 0.0;
    return std::pow(10.0, -clearance_db / 10.0);
}

double to_db(double linear) {
    if (!(linear > 0.0)) throw ValidationError("to_db: value must be > 0");
    return 10.0 * std::log10(linear);
}

double from_db(double db) {
    return std::pow(10.0, db / 10.0);
}

PredictedSpectrum predict_spectrum(const SqueezerParams& params,
                                   const std::vector<double>& frequencies) {
    params.validate();
    PredictedSpectrum out;
    out.params = params;
    out.squeezed.reserve(frequencies.size());
    out.anti.reserve(frequencies.size());
    for (double f : frequencies) {
        out.squeezed.push_back({f, to_db(variance(params, f, Branch::squeezed))});
        out.anti.push_back({f, to_db(variance(params, f, Branch::anti))});
    }
    return out;
}

} // namespace sqz
