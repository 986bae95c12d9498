#include "sqzkit/qpm.hpp"

#include <algorithm>
#include <cmath>

#include "sqzkit/constants.hpp"
#include "sqzkit/error.hpp"

namespace sqz {
namespace {

constexpr double kScanHalfWidth = 4.0 * kPi;
constexpr int kScanPoints = 20001;
constexpr double kGoldenTol = 1e-11;

// Maximum of a unimodal f on [lo, hi].
template <class F>
double golden_section_max(F&& f, double lo, double hi) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double fc = f(c);
    double fd = f(d);
    while (hi - lo > kGoldenTol) {
        if (fc > fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    return 0.5 * (lo + hi);
}

struct Peak {
    double at;
    double value;
};

// All interior local maxima of shape(·, theta) on the fixed scan grid.
std::vector<Peak> local_maxima(double theta) {
    const double step = 2.0 * kScanHalfWidth / (kScanPoints - 1);
    std::vector<double> grid(kScanPoints);
    for (int i = 0; i < kScanPoints; ++i) {
        grid[i] = double_pass_shape(-kScanHalfWidth + i * step, theta);
    }
    auto f = [theta](double u) { return double_pass_shape(u, theta); };
    std::vector<Peak> peaks;
    for (int i = 1; i + 1 < kScanPoints; ++i) {
        if (grid[i] > grid[i - 1] && grid[i] >= grid[i + 1]) {
            const double lo = -kScanHalfWidth + (i - 1) * step;
            const double hi = -kScanHalfWidth + (i + 1) * step;
            const double at = golden_section_max(f, lo, hi);
            peaks.push_back({at, std::max(f(at), grid[i])});
        }
    }
    std::stable_sort(peaks.begin(), peaks.end(),
                     [](const Peak& a, const Peak& b) { return a.value > b.value; });
    return peaks;
}

} // namespace

void QpmConfig::validate() const {
    require(crystal_length > 0.0, "qpm: crystal length must be > 0");
    require(fundamental_wavelength > 0.0, "qpm: fundamental wavelength must be > 0");
    require(second_harmonic_wavelength > 0.0, "qpm: second-harmonic wavelength must be > 0");
    require(std::abs(second_harmonic_wavelength - fundamental_wavelength / 2.0) <=
                1e-9 * fundamental_wavelength,
            "qpm: second-harmonic wavelength must be half the fundamental");
    if (poling_period) require(*poling_period > 0.0, "qpm: poling period must be > 0");
    if (refractive_index_fundamental)
        require(*refractive_index_fundamental >= 1.0, "qpm: refractive index must be >= 1");
    if (refractive_index_second_harmonic)
        require(*refractive_index_second_harmonic >= 1.0, "qpm: refractive index must be >= 1");
    require(std::isfinite(double_pass_phase), "qpm: double-pass phase must be finite");
}

double normalize_phase(double theta) {
    double t = std::fmod(theta, kPi);
    if (t < 0.0) t += kPi;
    if (t >= kPi) t = 0.0;
    return t;
}

double delta_kq(const QpmConfig& config) {
    config.validate();
    require(config.poling_period.has_value(), "qpm: poling period required for delta_kq");
    require(config.refractive_index_fundamental && config.refractive_index_second_harmonic,
            "qpm: both refractive indices required for delta_kq");
    const double n_f = *config.refractive_index_fundamental;
    const double n_2f = *config.refractive_index_second_harmonic;
    return 2.0 * kPi *
           (n_2f / config.second_harmonic_wavelength - 2.0 * n_f / config.fundamental_wavelength -
            1.0 / *config.poling_period);
}

double sinc(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

double shg_single_pass_field(const QpmConfig& config, double dkl) {
    return config.amplitude_constant * config.crystal_length * sinc(dkl / 2.0);
}

double double_pass_shape(double dkl, double theta) {
    const double s = sinc(dkl / 2.0);
    const double c = std::cos(dkl / 2.0 + theta);
    return s * s * c * c;
}

double shg_double_pass_intensity(const QpmConfig& config, double dkl) {
    const double scale = 2.0 * config.amplitude_constant * config.crystal_length;
    return scale * scale * double_pass_shape(dkl, config.double_pass_phase);
}

PenaltyResult phase_penalty(double theta) {
    const auto peaks = local_maxima(normalize_phase(theta));
    if (peaks.empty()) throw NumericalError("qpm: no peak found in tuning curve");
    // The in-phase curve peaks at dkl = 0 with unit height.
    return {peaks.front().value, peaks.front().at};
}

PenaltyResult worst_case_penalty() {
    auto r = phase_penalty(kPi / 2.0);
    // Two mirror-image maxima; report the one at positive dkl.
    r.maximizer = std::abs(r.maximizer);
    return r;
}

PeakRatio peak_ratio(double theta) {
    const double t = normalize_phase(theta);
    const auto peaks = local_maxima(t);
    if (peaks.size() < 2) throw NumericalError("qpm: fewer than two peaks in scan window");
    PeakRatio out;
    out.largest_at = peaks[0].at;
    out.second_at = peaks[1].at;
    out.ratio = peaks[1].value / peaks[0].value;
    if (std::abs(peaks[0].value - peaks[1].value) <= 1e-9 * peaks[0].value &&
        std::abs(peaks[0].at + peaks[1].at) <= 1e-6) {
        out.degenerate = true;
        out.ratio = 1.0;
    }
    return out;
}

double estimate_theta(double measured_ratio) {
    const double floor_ratio = peak_ratio(0.0).ratio;
    if (!(measured_ratio >= floor_ratio && measured_ratio <= 1.0)) {
        throw ValidationError("qpm: peak ratio outside the achievable range [" +
                              std::to_string(floor_ratio) + ", 1]");
    }
    if (measured_ratio == floor_ratio) return 0.0;
    if (measured_ratio == 1.0) return kPi / 2.0;
    double lo = 0.0;
    double hi = kPi / 2.0;
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (peak_ratio(mid).ratio < measured_ratio) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::vector<TuningPoint> tuning_curve(double theta, double dkl_min, double dkl_max, int points) {
    require(points >= 2, "qpm: tuning curve needs at least two points");
    require(dkl_max > dkl_min, "qpm: tuning curve range is empty");
    std::vector<TuningPoint> curve;
    curve.reserve(points);
    for (int i = 0; i < points; ++i) {
        const double u = dkl_min + (dkl_max - dkl_min) * i / (points - 1);
        const double s = sinc(u / 2.0);
        curve.push_back({u, s * s, 4.0 * double_pass_shape(u, theta)});
    }
    return curve;
}

double cavity_enhancement_factor(double transmittance, double reflectance) {
    require(transmittance > 0.0 && transmittance <= 1.0,
            "enhancement: transmittance must lie in (0, 1]");
    require(reflectance >= 0.0 && reflectance < 1.0, "enhancement: reflectance must lie in [0, 1)");
    const double d = 1.0 - std::sqrt(reflectance);
    return transmittance * transmittance / (d * d * d * d);
}

void ShgMeasurement::validate() const {
    require(conversion_efficiency > 0.0, "shg: conversion efficiency must be > 0");
    require(transmittance > 0.0 && transmittance < 1.0, "shg: transmittance must lie in (0, 1)");
    require(reflectance > 0.0 && reflectance < 1.0, "shg: reflectance must lie in (0, 1)");
    require(std::abs(reflectance - (1.0 - transmittance)) <= 1e-9, "shg: R must equal 1 - T");
}

double extract_enl(const ShgMeasurement& meas) {
    meas.validate();
    return meas.conversion_efficiency /
           cavity_enhancement_factor(meas.transmittance, meas.reflectance);
}

} // namespace sqz
