#include "sqzkit/trace.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "sqzkit/error.hpp"
#include "sqzkit/text.hpp"

namespace sqz {
namespace {

[[noreturn]] void fail(const std::string& source, int line, const std::string& what) {
    throw ValidationError(fmt::format("{}:{}: {}", source, line, what));
}

double number_field(const std::string& source, int line, std::string_view text) {
    const auto value = parse_double(trim(text));
    if (!value) fail(source, line, fmt::format("not a number: '{}'", text));
    return *value;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path.string() + "'");
    return in;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
    return out;
}

void set_metadata(NoiseTrace& trace, const std::string& key, const std::string& value,
                  const std::string& source, int line) {
    if (key == "label") {
        trace.label = value;
    } else if (key == "reference") {
        if (value == "absolute_dbm") {
            trace.reference = TraceReference::absolute_dbm;
        } else if (value == "relative_to_shot") {
            trace.reference = TraceReference::relative_to_shot;
        } else {
            fail(source, line, "reference must be absolute_dbm or relative_to_shot");
        }
    } else if (key == "rbw_hz") {
        trace.metadata.rbw_hz = number_field(source, line, value);
    } else if (key == "vbw_hz") {
        trace.metadata.vbw_hz = number_field(source, line, value);
    } else if (key == "pump_power_w") {
        trace.metadata.pump_power_w = number_field(source, line, value);
    } else if (key == "lo_power_w") {
        trace.metadata.lo_power_w = number_field(source, line, value);
    } else {
        trace.metadata.extra[key] = value;
    }
}

} // namespace

void NoiseTrace::validate() const {
    for (std::size_t i = 1; i < points.size(); ++i) {
        require(points[i].frequency > points[i - 1].frequency,
                fmt::format("trace '{}': frequencies not strictly increasing at {} Hz", label,
                            points[i].frequency));
    }
    if (metadata.rbw_hz) require(*metadata.rbw_hz > 0.0, "trace: RBW must be > 0");
    if (metadata.vbw_hz) require(*metadata.vbw_hz > 0.0, "trace: VBW must be > 0");
}

NoiseTrace parse_trace_csv(std::istream& in, const std::string& source) {
    NoiseTrace trace;
    std::string raw;
    int line = 0;
    bool header = false;
    while (std::getline(in, raw)) {
        ++line;
        const std::string_view text = trim(raw);
        if (text.empty()) continue;
        if (text.front() == '#') {
            const std::string_view body = trim(text.substr(1));
            const auto eq = body.find('=');
            if (eq != std::string_view::npos) {
                set_metadata(trace, std::string(trim(body.substr(0, eq))),
                             std::string(trim(body.substr(eq + 1))), source, line);
            }
            continue;
        }
        const auto fields = split(text, ',');
        if (!header) {
            if (fields.size() != 2 || trim(fields[0]) != "frequency_hz" ||
                trim(fields[1]) != "power_db") {
                fail(source, line, "expected header 'frequency_hz,power_db'");
            }
            header = true;
            continue;
        }
        if (fields.size() != 2) fail(source, line, "expected 2 fields");
        const double f = number_field(source, line, fields[0]);
        const double p = number_field(source, line, fields[1]);
        if (!trace.points.empty() && !(f > trace.points.back().frequency)) {
            fail(source, line, "frequencies must be strictly increasing");
        }
        trace.points.push_back({f, p});
    }
    if (!header) fail(source, line, "missing header 'frequency_hz,power_db'");
    trace.validate();
    return trace;
}

NoiseTrace parse_trace_csv(const std::filesystem::path& path) {
    auto in = open_for_read(path);
    return parse_trace_csv(in, path.string());
}

void write_trace_csv(std::ostream& out, const NoiseTrace& trace) {
    trace.validate();
    if (!trace.label.empty()) fmt::print(out, "# label={}\n", trace.label);
    fmt::print(out, "# reference={}\n", trace.reference == TraceReference::absolute_dbm
                                            ? "absolute_dbm"
                                            : "relative_to_shot");
    const auto& md = trace.metadata;
    if (md.rbw_hz) fmt::print(out, "# rbw_hz={}\n", *md.rbw_hz);
    if (md.vbw_hz) fmt::print(out, "# vbw_hz={}\n", *md.vbw_hz);
    if (md.pump_power_w) fmt::print(out, "# pump_power_w={}\n", *md.pump_power_w);
    if (md.lo_power_w) fmt::print(out, "# lo_power_w={}\n", *md.lo_power_w);
    for (const auto& [k, v] : md.extra) fmt::print(out, "# {}={}\n", k, v);
    out << "frequency_hz,power_db\n";
    for (const auto& p : trace.points) fmt::print(out, "{},{}\n", p.frequency, p.power_db);
}

void write_trace_csv(const std::filesystem::path& path, const NoiseTrace& trace) {
    auto out = open_for_write(path);
    write_trace_csv(out, trace);
    if (!out) throw ValidationError("write failed for '" + path.string() + "'");
}

NoiseTrace normalize_to_shot(const NoiseTrace& signal, const NoiseTrace& shot) {
    signal.validate();
    shot.validate();
    const std::size_t n = std::min(signal.points.size(), shot.points.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (signal.points[i].frequency != shot.points[i].frequency) {
            throw ValidationError(fmt::format(
                "normalize: frequency grids differ at index {} ({} Hz vs {} Hz)", i,
                signal.points[i].frequency, shot.points[i].frequency));
        }
    }
    if (signal.points.size() != shot.points.size()) {
        const auto& longer = signal.points.size() > n ? signal.points : shot.points;
        throw ValidationError(fmt::format("normalize: frequency grids differ at index {} ({} Hz "
                                          "present in only one trace)",
                                          n, longer[n].frequency));
    }
    NoiseTrace out;
    out.label = signal.label;
    out.reference = TraceReference::relative_to_shot;
    out.metadata = signal.metadata;
    out.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.points.push_back(
            {signal.points[i].frequency, signal.points[i].power_db - shot.points[i].power_db});
    }
    return out;
}

std::vector<SqueezingObservation> parse_observations_csv(std::istream& in,
                                                         const std::string& source) {
    std::vector<SqueezingObservation> obs;
    std::string raw;
    int line = 0;
    bool header = false;
    bool with_sigma = false;
    while (std::getline(in, raw)) {
        ++line;
        const std::string_view text = trim(raw);
        if (text.empty() || text.front() == '#') continue;
        const auto fields = split(text, ',');
        if (!header) {
            const bool base = fields.size() >= 4 && trim(fields[0]) == "pump_power_w" &&
                              trim(fields[1]) == "frequency_hz" && trim(fields[2]) == "branch" &&
                              trim(fields[3]) == "level_db";
            with_sigma = fields.size() == 5 && trim(fields[4]) == "uncertainty_db";
            if (!base || (fields.size() != 4 && !with_sigma)) {
                fail(source, line,
                     "expected header 'pump_power_w,frequency_hz,branch,level_db[,uncertainty_db]'");
            }
            header = true;
            continue;
        }
        if (fields.size() != (with_sigma ? 5u : 4u)) fail(source, line, "wrong number of fields");
        SqueezingObservation o;
        o.pump_power = number_field(source, line, fields[0]);
        o.frequency = number_field(source, line, fields[1]);
        try {
            o.branch = branch_from_string(std::string(trim(fields[2])));
        } catch (const ValidationError& e) {
            fail(source, line, e.what());
        }
        o.level_db = number_field(source, line, fields[3]);
        if (with_sigma) o.uncertainty_db = number_field(source, line, fields[4]);
        try {
            o.validate();
        } catch (const ValidationError& e) {
            fail(source, line, e.what());
        }
        obs.push_back(o);
    }
    if (!header) fail(source, line, "missing observation header");
    return obs;
}

std::vector<SqueezingObservation> parse_observations_csv(const std::filesystem::path& path) {
    auto in = open_for_read(path);
    return parse_observations_csv(in, path.string());
}

void write_observations_csv(std::ostream& out, std::span<const SqueezingObservation> obs) {
    out << "pump_power_w,frequency_hz,branch,level_db,uncertainty_db\n";
    for (const auto& o : obs) {
        fmt::print(out, "{},{},{},{},{}\n", o.pump_power, o.frequency, to_string(o.branch),
                   o.level_db, o.uncertainty_db);
    }
}

} // namespace sqz
