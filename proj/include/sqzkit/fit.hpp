#pragma once

// Weighted nonlinear least squares for the OPO threshold and cavity half
// width (optionally the detection loss) against squeezing/anti-squeezing
// levels measured over several pump powers and analysis frequencies.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sqzkit/error.hpp"
#include "sqzkit/squeezing.hpp"

namespace sqz {

struct SqueezingObservation {
    double pump_power = 0.0; // W
    double frequency = 0.0;  // Hz
    Branch branch = Branch::squeezed;
    double level_db = 0.0;   // relative to shot noise
    double uncertainty_db = 0.1;

    void validate() const;
};

struct FitOptions {
    bool fit_detection_loss = false;
    bool linear_residuals = false; // residuals in linear variance instead of dB
    int max_iterations = 200;
    double parameter_tolerance = 1e-8;
    double objective_tolerance = 1e-10;
    double jacobian_step = 1e-6;  // relative
    double max_detection_loss = 0.5;
};

struct FitResult {
    double threshold_power = 0.0;   // W
    double cavity_half_width = 0.0; // Hz
    std::optional<double> total_detection_loss;
    double objective = 0.0;         // weighted sum of squares
    double residual_norm = 0.0;     // unweighted, same units as the residuals
    double threshold_power_se = 0.0;
    double cavity_half_width_se = 0.0;
    std::optional<double> total_detection_loss_se;
    bool converged = false;
    int iterations = 0;
};

/// Raised when the iteration limit is hit; carries the best point found.
class FitError : public NumericalError {
public:
    FitError(const std::string& what, FitResult best)
        : NumericalError(what), best_(best) {}
    const FitResult& best() const { return best_; }

private:
    FitResult best_;
};

/// Model level for one observation, dB (or linear variance) relative to
/// shot noise. `model.pump_power` is ignored; the observation supplies it.
double model_level(const SqueezerParams& model, const SqueezingObservation& obs,
                   bool linear = false);

/// Σ((model − level)/σ)². Throws ValidationError if the model puts any
/// observation at or above threshold.
double objective(const SqueezerParams& model, std::span<const SqueezingObservation> observations,
                 bool linear = false);

/// Damped Gauss-Newton (Levenberg-Marquardt) fit. `initial` supplies the
/// fixed T and intra-cavity loss, the starting threshold and half width,
/// and η (fixed, or the starting value when it is fitted).
FitResult fit_squeezing(std::span<const SqueezingObservation> observations,
                        const SqueezerParams& initial, const FitOptions& options = {});

/// Model levels on a (pump, frequency) grid, both branches, with
/// optional i.i.d. Gaussian noise in dB. Deterministic for a given seed.
std::vector<SqueezingObservation> synth_dataset(const SqueezerParams& model,
                                                std::span<const double> pump_powers,
                                                std::span<const double> frequencies,
                                                double noise_sigma_db, std::uint64_t seed);

/// n points log-spaced over [lo, hi].
std::vector<double> log_space(double lo, double hi, int n);

} // namespace sqz
