#include "sqzkit/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "sqzkit/constants.hpp"
#include "sqzkit/error.hpp"
#include "sqzkit/text.hpp"

namespace sqz {
namespace {

enum class Dim { length, frequency, power, fraction, dimensionless, angle, inverse_power, decibel, count };

struct Unit {
    std::string_view name;
    double factor;
};

// The first entry of each list is the canonical unit used for output.
std::vector<Unit> units_for(Dim d) {
    switch (d) {
    case Dim::length: return {{"m", 1.0}, {"mm", 1e-3}, {"um", 1e-6}, {"µm", 1e-6}, {"nm", 1e-9}};
    case Dim::frequency: return {{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}};
    case Dim::power: return {{"W", 1.0}, {"mW", 1e-3}, {"uW", 1e-6}};
    case Dim::fraction: return {{"", 1.0}, {"%", 1e-2}};
    case Dim::angle: return {{"rad", 1.0}, {"deg", kPi / 180.0}};
    case Dim::inverse_power: return {{"/W", 1.0}, {"1/W", 1.0}, {"W^-1", 1.0}};
    case Dim::decibel: return {{"dB", 1.0}};
    case Dim::dimensionless:
    case Dim::count: return {{"", 1.0}};
    }
    return {};
}

double parse_quantity(std::string_view text, Dim dim, const std::string& where) {
    text = trim(text);
    double value = 0.0;
    std::string_view num = text;
    if (!num.empty() && num.front() == '+') num.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), value);
    if (ec != std::errc{} || std::isnan(value)) {
        throw ValidationError(where + ": expected a number, got '" + std::string(text) + "'");
    }
    const std::string_view unit = trim(std::string_view(ptr, num.data() + num.size() - ptr));
    for (const auto& u : units_for(dim)) {
        if (unit == u.name) {
            if (dim == Dim::count && (value < 0.0 || value != std::floor(value))) {
                throw ValidationError(where + ": expected a non-negative integer");
            }
            return value * u.factor;
        }
    }
    if (unit.empty()) {
        throw ValidationError(where + ": missing unit suffix (e.g. '" +
                              std::string(units_for(dim).front().name) + "')");
    }
    throw ValidationError(where + ": unit '" + std::string(unit) + "' not valid here");
}

std::string format_quantity(double v, Dim dim) {
    const auto unit = units_for(dim).front().name;
    if (unit.empty()) return fmt::format("{}", v);
    return fmt::format("{} {}", v, unit);
}

struct Key {
    std::string name;
    Dim dim;
    bool list = false;
    std::function<void(ToolkitConfig&, const std::vector<double>&)> set;
    // Empty result means "unset, omit from output".
    std::function<std::vector<double>(const ToolkitConfig&)> get;
};

template <class Member>
Key scalar(std::string name, Dim dim, Member member) {
    return {std::move(name), dim, false,
            [member](ToolkitConfig& c, const std::vector<double>& v) { member(c) = v.front(); },
            [member](const ToolkitConfig& c) {
                return std::vector<double>{member(c)};
            }};
}

template <class Member>
Key optional_scalar(std::string name, Dim dim, Member member) {
    return {std::move(name), dim, false,
            [member](ToolkitConfig& c, const std::vector<double>& v) { member(c) = v.front(); },
            [member](const ToolkitConfig& c) {
                const auto& o = member(c);
                return o ? std::vector<double>{*o} : std::vector<double>{};
            }};
}

template <class Member>
Key list(std::string name, Dim dim, Member member) {
    return {std::move(name), dim, true,
            [member](ToolkitConfig& c, const std::vector<double>& v) { member(c) = v; },
            [member](const ToolkitConfig& c) { return member(c); }};
}

#define FIELD(expr) [](auto& c) -> auto& { return c.expr; }

const std::vector<Key>& key_table() {
    static const std::vector<Key> keys = {
        scalar("cavity.mirror_curvature_radius", Dim::length, FIELD(cavity.mirror_curvature_radius)),
        scalar("cavity.air_gap", Dim::length, FIELD(cavity.air_gap)),
        scalar("cavity.crystal_length", Dim::length, FIELD(cavity.crystal_length)),
        scalar("cavity.crystal_refractive_index", Dim::dimensionless,
               FIELD(cavity.crystal_refractive_index)),
        scalar("cavity.output_coupler_transmittance", Dim::fraction,
               FIELD(cavity.output_coupler_transmittance)),
        scalar("cavity.intra_cavity_loss", Dim::fraction, FIELD(cavity.intra_cavity_loss)),
        scalar("cavity.wavelength", Dim::length, FIELD(cavity.wavelength)),

        scalar("qpm.crystal_length", Dim::length, FIELD(qpm.crystal_length)),
        optional_scalar("qpm.poling_period", Dim::length, FIELD(qpm.poling_period)),
        scalar("qpm.fundamental_wavelength", Dim::length, FIELD(qpm.fundamental_wavelength)),
        scalar("qpm.second_harmonic_wavelength", Dim::length, FIELD(qpm.second_harmonic_wavelength)),
        optional_scalar("qpm.refractive_index_fundamental", Dim::dimensionless,
                        FIELD(qpm.refractive_index_fundamental)),
        optional_scalar("qpm.refractive_index_second_harmonic", Dim::dimensionless,
                        FIELD(qpm.refractive_index_second_harmonic)),
        scalar("qpm.double_pass_phase", Dim::angle, FIELD(qpm.double_pass_phase)),
        scalar("qpm.amplitude_constant", Dim::dimensionless, FIELD(qpm.amplitude_constant)),
        scalar("qpm.shg_conversion_efficiency", Dim::inverse_power, FIELD(shg_conversion_efficiency)),

        scalar("squeezing.total_detection_loss", Dim::fraction, FIELD(total_detection_loss)),
        scalar("squeezing.pump_power", Dim::power, FIELD(pump_power)),
        scalar("squeezing.threshold_power", Dim::power, FIELD(threshold_power)),
        scalar("squeezing.cavity_half_width", Dim::frequency, FIELD(cavity_half_width)),
        scalar("squeezing.clearance", Dim::decibel, FIELD(clearance_db)),
        list("squeezing.report_frequencies", Dim::frequency, FIELD(report_frequencies)),

        list("fit.pump_powers", Dim::power, FIELD(fit.pump_powers)),
        scalar("fit.frequency_min", Dim::frequency, FIELD(fit.frequency_min)),
        scalar("fit.frequency_max", Dim::frequency, FIELD(fit.frequency_max)),
        {"fit.frequency_points", Dim::count, false,
         [](ToolkitConfig& c, const std::vector<double>& v) { c.fit.frequency_points = static_cast<int>(v.front()); },
         [](const ToolkitConfig& c) { return std::vector<double>{double(c.fit.frequency_points)}; }},
        scalar("fit.noise_sigma", Dim::decibel, FIELD(fit.noise_sigma_db)),
        {"fit.seed", Dim::count, false,
         [](ToolkitConfig& c, const std::vector<double>& v) { c.fit.seed = static_cast<std::uint64_t>(v.front()); },
         [](const ToolkitConfig& c) { return std::vector<double>{double(c.fit.seed)}; }},
        {"fit.runs", Dim::count, false,
         [](ToolkitConfig& c, const std::vector<double>& v) { c.fit.runs = static_cast<int>(v.front()); },
         [](const ToolkitConfig& c) { return std::vector<double>{double(c.fit.runs)}; }},

        // The waveguide module works in micrometres; the file is SI.
        {"waveguide.core_size", Dim::length, false,
         [](ToolkitConfig& c, const std::vector<double>& v) { c.waveguide.core_size_um = v.front() * 1e6; },
         [](const ToolkitConfig& c) { return std::vector<double>{c.waveguide.core_size_um * 1e-6}; }},
        scalar("waveguide.relative_index_difference", Dim::fraction,
               FIELD(waveguide.relative_index_difference)),
        scalar("waveguide.cladding_index", Dim::dimensionless, FIELD(waveguide.cladding_index)),
        {"waveguide.wavelength", Dim::length, false,
         [](ToolkitConfig& c, const std::vector<double>& v) { c.waveguide.wavelength_um = v.front() * 1e6; },
         [](const ToolkitConfig& c) { return std::vector<double>{c.waveguide.wavelength_um * 1e-6}; }},
        {"waveguide.grid_spacing", Dim::length, false,
         [](ToolkitConfig& c, const std::vector<double>& v) { c.waveguide.grid_spacing_um = v.front() * 1e6; },
         [](const ToolkitConfig& c) { return std::vector<double>{c.waveguide.grid_spacing_um * 1e-6}; }},
        {"waveguide.domain_padding", Dim::length, false,
         [](ToolkitConfig& c, const std::vector<double>& v) { c.waveguide.domain_padding_um = v.front() * 1e6; },
         [](const ToolkitConfig& c) { return std::vector<double>{c.waveguide.domain_padding_um * 1e-6}; }},
        optional_scalar("waveguide.source_waist", Dim::length, FIELD(source_waist)),
        scalar("waveguide.sweep_min", Dim::length, FIELD(sweep.min_core)),
        scalar("waveguide.sweep_max", Dim::length, FIELD(sweep.max_core)),
        scalar("waveguide.sweep_step", Dim::length, FIELD(sweep.step)),
    };
    return keys;
}

#undef FIELD

constexpr std::string_view kLossPrefix = "loss.";

} // namespace

std::vector<double> SweepSettings::sizes_um() const {
    require(min_core > 0.0 && max_core >= min_core && step > 0.0, "sweep: invalid range");
    std::vector<double> out;
    const int n = static_cast<int>(std::floor((max_core - min_core) / step + 1e-9)) + 1;
    for (int i = 0; i < n; ++i) out.push_back((min_core + i * step) * 1e6);
    return out;
}

SqueezerParams ToolkitConfig::squeezer() const {
    SqueezerParams p;
    p.output_coupler_transmittance = cavity.output_coupler_transmittance;
    p.intra_cavity_loss = cavity.intra_cavity_loss;
    p.total_detection_loss = total_detection_loss;
    p.pump_power = pump_power;
    p.threshold_power = threshold_power;
    p.cavity_half_width = cavity_half_width;
    return p;
}

GaussianBeam ToolkitConfig::source_beam() const {
    if (source_waist) return GaussianBeam{*source_waist, 0.0, waveguide.wavelength_um * 1e-6};
    return plano_concave_waist(cavity);
}

void ToolkitConfig::validate() const {
    cavity.validate();
    qpm.validate();
    require(shg_conversion_efficiency > 0.0, "qpm.shg_conversion_efficiency must be > 0");
    squeezer().validate();
    require(clearance_db > 0.0, "squeezing.clearance must be > 0 dB");
    require(!report_frequencies.empty(), "squeezing.report_frequencies must not be empty");
    for (double f : report_frequencies) require(f >= 0.0, "squeezing.report_frequencies must be >= 0");
    loss.validate();
    require(!fit.pump_powers.empty(), "fit.pump_powers must not be empty");
    for (double p : fit.pump_powers) {
        require(p > 0.0 && p < threshold_power, "fit.pump_powers must lie in (0, threshold)");
    }
    require(fit.frequency_min > 0.0 && fit.frequency_max >= fit.frequency_min,
            "fit frequency range invalid");
    require(fit.frequency_points >= 2, "fit.frequency_points must be >= 2");
    require(fit.noise_sigma_db >= 0.0, "fit.noise_sigma must be >= 0");
    require(fit.runs >= 1, "fit.runs must be >= 1");
    waveguide.validate();
    if (source_waist) require(*source_waist > 0.0, "waveguide.source_waist must be > 0");
    (void)sweep.sizes_um();
}

ToolkitConfig parse_config(std::istream& in, const std::string& source) {
    ToolkitConfig cfg;
    std::set<std::string> seen;
    bool loss_reset = false;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view text = raw;
        if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
        text = trim(text);
        if (text.empty()) continue;
        const std::string where = fmt::format("{}:{}", source, line);
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) throw ValidationError(where + ": expected key = value");
        const std::string key(trim(text.substr(0, eq)));
        const std::string_view value = trim(text.substr(eq + 1));
        if (!seen.insert(key).second) throw ValidationError(where + ": duplicate key '" + key + "'");

        if (key.starts_with(kLossPrefix)) {
            const std::string name = key.substr(kLossPrefix.size());
            if (name.empty()) throw ValidationError(where + ": empty loss component name");
            // Any loss.* line replaces the built-in budget as a whole.
            if (!loss_reset) {
                cfg.loss.components.clear();
                loss_reset = true;
            }
            cfg.loss.components[name] = parse_quantity(value, Dim::fraction, where + " (" + key + ")");
            continue;
        }
        const auto& keys = key_table();
        const auto it = std::find_if(keys.begin(), keys.end(), [&](const Key& k) { return k.name == key; });
        if (it == keys.end()) throw ValidationError(where + ": unknown key '" + key + "'");
        std::vector<double> values;
        if (it->list) {
            for (auto part : split(value, ',')) {
                values.push_back(parse_quantity(part, it->dim, where + " (" + key + ")"));
            }
        } else {
            values.push_back(parse_quantity(value, it->dim, where + " (" + key + ")"));
        }
        it->set(cfg, values);
    }
    try {
        cfg.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(source + ": " + e.what());
    }
    return cfg;
}

ToolkitConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config '" + path.string() + "'");
    return parse_config(in, path.string());
}

std::string serialize_config(const ToolkitConfig& config) {
    std::string out;
    std::string section;
    for (const auto& k : key_table()) {
        const auto values = k.get(config);
        if (values.empty()) continue;
        const std::string sec = k.name.substr(0, k.name.find('.'));
        if (sec != section) {
            if (!section.empty()) out += '\n';
            section = sec;
        }
        std::string text;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) text += ", ";
            text += format_quantity(values[i], k.dim);
        }
        out += fmt::format("{} = {}\n", k.name, text);
    }
    if (!config.loss.components.empty()) out += '\n';
    for (const auto& [name, value] : config.loss.components) {
        out += fmt::format("loss.{} = {}\n", name, format_quantity(value, Dim::fraction));
    }
    return out;
}

} // namespace sqz
