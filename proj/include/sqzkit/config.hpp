#pragma once

// Flat `section.key = value unit` configuration. Dimensional values must
// carry a unit suffix; unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sqzkit/cavity.hpp"
#include "sqzkit/qpm.hpp"
#include "sqzkit/squeezing.hpp"
#include "sqzkit/waveguide.hpp"

namespace sqz {

struct FitSettings {
    std::vector<double> pump_powers{0.090, 0.139, 0.229, 0.360}; // W
    double frequency_min = 1e6;   // Hz
    double frequency_max = 300e6; // Hz
    int frequency_points = 12;
    double noise_sigma_db = 0.1;
    std::uint64_t seed = 1;
    int runs = 100;
};

struct SweepSettings {
    double min_core = 40e-6;  // m
    double max_core = 90e-6;  // m
    double step = 2e-6;       // m

    std::vector<double> sizes_um() const;
};

struct ToolkitConfig {
    CavitySpec cavity;
    QpmConfig qpm;
    double shg_conversion_efficiency = 2.24; // 1/W

    // T and the intra-cavity loss come from the cavity section.
    double total_detection_loss = 0.07;
    double pump_power = 0.360;        // W
    double threshold_power = 1.7;     // W
    double cavity_half_width = 92e6;  // Hz
    double clearance_db = 14.0;
    std::vector<double> report_frequencies{2e6, 100e6}; // Hz
    LossBudget loss{{{"propagation", 0.03},
                     {"mode_mismatch", 0.02},
                     {"photodiode", 0.01},
                     {"circuit_equivalent", 0.01}}};

    FitSettings fit;
    WaveguideSpec waveguide;
    std::optional<double> source_waist; // m; defaults to the cavity waist
    SweepSettings sweep;

    SqueezerParams squeezer() const;
    GaussianBeam source_beam() const;
    void validate() const;
};

ToolkitConfig parse_config(std::istream& in, const std::string& source = "<stream>");
ToolkitConfig load_config(const std::filesystem::path& path);

/// Canonical SI text; parse_config(serialize_config(c)) reproduces c exactly.
std::string serialize_config(const ToolkitConfig& config);

} // namespace sqz
