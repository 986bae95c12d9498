#pragma once

// Spectrum-analyser noise traces and squeezing observation tables on disk.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sqzkit/fit.hpp"

namespace sqz {

enum class TraceReference { absolute_dbm, relative_to_shot };

struct TraceMetadata {
    std::optional<double> rbw_hz;
    std::optional<double> vbw_hz;
    std::optional<double> pump_power_w;
    std::optional<double> lo_power_w;
    std::map<std::string, std::string> extra; // unrecognised `# key=value` lines
};

struct TracePoint {
    double frequency = 0.0; // Hz
    double power_db = 0.0;
};

struct NoiseTrace {
    std::string label;
    std::vector<TracePoint> points;
    TraceReference reference = TraceReference::absolute_dbm;
    TraceMetadata metadata;

    /// Frequencies strictly increasing, bandwidths positive.
    void validate() const;
};

/// `frequency_hz,power_db` CSV with optional `# key=value` metadata lines.
/// Errors name the offending line.
NoiseTrace parse_trace_csv(std::istream& in, const std::string& source = "<stream>");
NoiseTrace parse_trace_csv(const std::filesystem::path& path);

void write_trace_csv(std::ostream& out, const NoiseTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const NoiseTrace& trace);

/// Pointwise difference in dB. Both traces must share one frequency grid.
NoiseTrace normalize_to_shot(const NoiseTrace& signal, const NoiseTrace& shot);

/// `pump_power_w,frequency_hz,branch,level_db[,uncertainty_db]`.
std::vector<SqueezingObservation> parse_observations_csv(std::istream& in,
                                                         const std::string& source = "<stream>");
std::vector<SqueezingObservation> parse_observations_csv(const std::filesystem::path& path);
void write_observations_csv(std::ostream& out, std::span<const SqueezingObservation> obs);

} // namespace sqz
