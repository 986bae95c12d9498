#include "sqzkit/cavity.hpp"

#include <cmath>

#include "sqzkit/constants.hpp"
#include "sqzkit/error.hpp"

namespace sqz {

void CavitySpec::validate() const {
    require(mirror_curvature_radius > 0.0, "cavity: mirror curvature radius must be > 0");
    require(air_gap > 0.0, "cavity: air gap must be > 0");
    require(crystal_length > 0.0, "cavity: crystal length must be > 0");
    require(wavelength > 0.0, "cavity: wavelength must be > 0");
    require(crystal_refractive_index >= 1.0, "cavity: refractive index must be >= 1");
    require(output_coupler_transmittance > 0.0 && output_coupler_transmittance < 1.0,
            "cavity: output coupler transmittance must lie in (0, 1)");
    require(intra_cavity_loss >= 0.0 && intra_cavity_loss < 1.0,
            "cavity: intra-cavity loss must lie in [0, 1)");
    require(output_coupler_transmittance + intra_cavity_loss < 1.0,
            "cavity: T + L must be < 1");
}

void GaussianBeam::validate() const {
    require(waist_radius > 0.0, "gaussian beam: waist radius must be > 0");
    require(wavelength > 0.0, "gaussian beam: wavelength must be > 0");
}

double round_trip_optical_length(const CavitySpec& spec) {
    spec.validate();
    return 2.0 * (spec.air_gap + spec.crystal_length * spec.crystal_refractive_index);
}

double fsr_from_round_trip(double round_trip_length) {
    require(round_trip_length > 0.0, "cavity: round-trip length must be > 0");
    return kSpeedOfLight / round_trip_length;
}

double cavity_fsr(const CavitySpec& spec) {
    return fsr_from_round_trip(round_trip_optical_length(spec));
}

double round_trip_amplitude(const CavitySpec& spec) {
    spec.validate();
    return std::sqrt((1.0 - spec.output_coupler_transmittance) * (1.0 - spec.intra_cavity_loss));
}

double cavity_finesse(const CavitySpec& spec) {
    const double r = round_trip_amplitude(spec);
    if (!(r < 1.0)) throw NumericalError("cavity: lossless round trip, finesse diverges");
    return kPi * std::sqrt(r) / (1.0 - r);
}

double cavity_finesse_approx(const CavitySpec& spec) {
    spec.validate();
    return 2.0 * kPi / (spec.output_coupler_transmittance + spec.intra_cavity_loss);
}

double cavity_linewidth_fwhm(const CavitySpec& spec) {
    return cavity_fsr(spec) / cavity_finesse(spec);
}

double cavity_linewidth_fwhm_approx(const CavitySpec& spec) {
    return cavity_fsr(spec) / cavity_finesse_approx(spec);
}

double reduced_cavity_length(const CavitySpec& spec) {
    spec.validate();
    return spec.air_gap + spec.crystal_length / spec.crystal_refractive_index;
}

GaussianBeam plano_concave_waist(const CavitySpec& spec) {
    const double l_eff = reduced_cavity_length(spec);
    const double rc = spec.mirror_curvature_radius;
    if (!(l_eff > 0.0 && l_eff < rc)) {
        throw ValidationError("cavity: unstable, reduced length must lie in (0, mirror radius)");
    }
    const double w0_sq = spec.wavelength / kPi * std::sqrt(l_eff * (rc - l_eff));
    return GaussianBeam{std::sqrt(w0_sq), 0.0, spec.wavelength};
}

double gaussian_overlap(const GaussianBeam& a, const GaussianBeam& b) {
    a.validate();
    b.validate();
    const double wa = a.waist_radius;
    const double wb = b.waist_radius;
    const double amp = 2.0 * wa * wb / (wa * wa + wb * wb);
    return amp * amp;
}

} // namespace sqz
