#include "sqzkit/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "sqzkit/error.hpp"

namespace sqz {
namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 450.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

// 1-2-5 tick spacing giving roughly `target` intervals.
double nice_step(double span, int target) {
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double r = raw / mag;
    const double m = r < 1.5 ? 1.0 : r < 3.5 ? 2.0 : r < 7.5 ? 5.0 : 10.0;
    return m * mag;
}

struct Range {
    double lo;
    double hi;
};

Range padded(double lo, double hi) {
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
        const double d = std::max(1.0, std::abs(hi) * 0.1);
        return {lo - d, hi + d};
    }
    return {lo, hi};
}

} // namespace

PlotSeries to_series(const NoiseTrace& trace) {
    PlotSeries s;
    s.label = trace.label;
    for (const auto& p : trace.points) s.points.push_back({p.frequency, p.power_db});
    return s;
}

PlotSeries to_series(const SweepResult& sweep, const std::string& label) {
    PlotSeries s;
    s.label = label;
    for (const auto& p : sweep.points) {
        if (p.ok) s.points.push_back({p.core_size_um, p.efficiency});
    }
    return s;
}

std::string render_svg(const std::vector<PlotSeries>& series, const AxesSpec& axes) {
    require(!series.empty(), "plot: nothing to plot");
    double xmin = std::numeric_limits<double>::infinity();
    double xmax = -xmin;
    double ymin = xmin;
    double ymax = -xmin;
    for (const auto& s : series) {
        for (const auto& p : s.points) {
            if (axes.log_x) require(p.x > 0.0, "plot: log axis needs positive x values");
            xmin = std::min(xmin, p.x);
            xmax = std::max(xmax, p.x);
            ymin = std::min(ymin, p.y);
            ymax = std::max(ymax, p.y);
        }
    }
    require(std::isfinite(xmin) && std::isfinite(ymin), "plot: all series are empty");

    auto tx = [&](double x) { return axes.log_x ? std::log10(x) : x; };
    const Range xr = padded(tx(xmin), tx(xmax));
    Range yr = padded(ymin, ymax);
    const double ystep = nice_step(yr.hi - yr.lo, 6);
    yr = {std::floor(yr.lo / ystep) * ystep, std::ceil(yr.hi / ystep) * ystep};

    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (tx(x) - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto py = [&](double y) { return kTop + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

    std::string svg;
    svg += fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
        "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"12\">\n",
        kWidth, kHeight);
    svg += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n", kWidth,
                       kHeight);
    if (!axes.title.empty()) {
        svg += fmt::format("<text x=\"{:.2f}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
                           kLeft + pw / 2, escape(axes.title));
    }
    svg += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" "
                       "fill=\"none\" stroke=\"black\"/>\n",
                       kLeft, kTop, pw, ph);

    // y ticks
    for (double y = yr.lo; y <= yr.hi + 1e-9 * ystep; y += ystep) {
        const double yy = py(y);
        svg += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#ddd\"/>\n",
                           kLeft, yy, kLeft + pw, yy);
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{:g}</text>\n",
                           kLeft - 6, yy + 4, std::abs(y) < 1e-12 * ystep ? 0.0 : y);
    }
    // x ticks
    std::vector<double> xticks;
    if (axes.log_x) {
        for (int e = static_cast<int>(std::floor(xr.lo)); e <= static_cast<int>(std::ceil(xr.hi)); ++e) {
            for (double m : {1.0, 2.0, 5.0}) {
                const double v = m * std::pow(10.0, e);
                if (std::log10(v) >= xr.lo - 1e-12 && std::log10(v) <= xr.hi + 1e-12) xticks.push_back(v);
            }
        }
    } else {
        const double xstep = nice_step(xr.hi - xr.lo, 8);
        for (double x = std::ceil(xr.lo / xstep) * xstep; x <= xr.hi + 1e-9 * xstep; x += xstep) {
            xticks.push_back(x);
        }
    }
    for (double x : xticks) {
        const double xx = px(x);
        svg += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#ddd\"/>\n",
                           xx, kTop, xx, kTop + ph);
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{:g}</text>\n", xx,
                           kTop + ph + 18, x);
    }
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n",
                       kLeft + pw / 2, kHeight - 16, escape(axes.x_label));
    svg += fmt::format("<text x=\"18\" y=\"{0:.2f}\" text-anchor=\"middle\" "
                       "transform=\"rotate(-90 18 {0:.2f})\">{1}</text>\n",
                       kTop + ph / 2, escape(axes.y_label));

    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const char* color = kColors[i % std::size(kColors)];
        std::string pts;
        for (const auto& p : s.points) {
            if (!pts.empty()) pts += ' ';
            pts += fmt::format("{:.2f},{:.2f}", px(p.x), py(p.y));
        }
        svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                           color, pts);
        const double ly = kTop + 14 + 18.0 * static_cast<double>(i);
        svg += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" "
                           "stroke=\"{3}\" stroke-width=\"2\"/>\n",
                           kLeft + pw + 12, ly, kLeft + pw + 32, color);
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\">{}</text>\n", kLeft + pw + 38, ly + 4,
                           escape(s.label));
    }
    svg += "</svg>\n";
    return svg;
}

std::vector<std::filesystem::path> emit_plot(const std::vector<PlotSeries>& series,
                                             const std::filesystem::path& svg_path,
                                             const AxesSpec& axes) {
    const std::string svg = render_svg(series, axes);
    {
        std::ofstream out(svg_path, std::ios::binary);
        if (!out) throw ValidationError("plot: cannot write '" + svg_path.string() + "'");
        out << svg;
        if (!out) throw ValidationError("plot: write failed for '" + svg_path.string() + "'");
    }
    std::vector<std::filesystem::path> csvs;
    for (std::size_t i = 0; i < series.size(); ++i) {
        auto path = svg_path;
        path.replace_filename(svg_path.stem().string() + "-" + std::to_string(i) + ".csv");
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ValidationError("plot: cannot write '" + path.string() + "'");
        if (!series[i].label.empty()) fmt::print(out, "# label={}\n", series[i].label);
        fmt::print(out, "{},{}\n", axes.x_column, axes.y_column);
        for (const auto& p : series[i].points) fmt::print(out, "{},{}\n", p.x, p.y);
        csvs.push_back(path);
    }
    return csvs;
}

} // namespace sqz
