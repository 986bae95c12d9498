#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sqzkit/trace.hpp"
#include "sqzkit/waveguide.hpp"

namespace sqz {

struct PlotPoint {
    double x = 0.0;
    double y = 0.0;
};

struct PlotSeries {
    std::string label;
    std::vector<PlotPoint> points;
};

struct AxesSpec {
    std::string title;
    std::string x_label = "frequency (Hz)";
    std::string y_label = "noise power (dB)";
    bool log_x = true;
    // Column names of the sibling CSVs. The defaults make them valid traces.
    std::string x_column = "frequency_hz";
    std::string y_column = "power_db";
};

PlotSeries to_series(const NoiseTrace& trace);
PlotSeries to_series(const SweepResult& sweep, const std::string& label = "coupling");

/// Writes an SVG line plot plus one `<stem>-<i>.csv` per series next to
/// it. Output bytes depend only on the inputs. Returns the CSV paths.
std::vector<std::filesystem::path> emit_plot(const std::vector<PlotSeries>& series,
                                             const std::filesystem::path& svg_path,
                                             const AxesSpec& axes);

/// The SVG document alone.
std::string render_svg(const std::vector<PlotSeries>& series, const AxesSpec& axes);

} // namespace sqz
