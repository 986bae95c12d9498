#pragma once

// Plano-concave Fabry-Perot cavity with a nonlinear crystal whose flat,
// partially reflecting face is the output coupler. All quantities in SI.

namespace sqz {

struct CavitySpec {
    double mirror_curvature_radius = 5.0e-3; // m
    double air_gap = 2.0e-3;                 // m, mirror to crystal
    double crystal_length = 5.0e-3;          // m
    double crystal_refractive_index = 1.816;
    double output_coupler_transmittance = 0.10; // power T, R = 1 - T
    double intra_cavity_loss = 0.0038;          // lumped round-trip power loss
    double wavelength = 1550e-9;                // m

    /// Throws ValidationError when any field invariant is violated.
    void validate() const;
};

struct GaussianBeam {
    double waist_radius = 0.0;  // m, 1/e^2 intensity radius
    double waist_position = 0.0; // m along the axis, 0 = flat crystal face
    double wavelength = 0.0;    // m

    void validate() const;
};

double round_trip_optical_length(const CavitySpec& spec);
double cavity_fsr(const CavitySpec& spec);
double fsr_from_round_trip(double round_trip_length);

/// Round-trip field amplitude factor sqrt((1 - T)(1 - L)).
double round_trip_amplitude(const CavitySpec& spec);

/// Airy finesse pi*sqrt(r)/(1 - r) from the round-trip amplitude factor r.
double cavity_finesse(const CavitySpec& spec);

/// Low-loss approximation 2*pi/(T + L). Only for comparison with rounded
/// published figures; cavity_finesse is the model value.
double cavity_finesse_approx(const CavitySpec& spec);

double cavity_linewidth_fwhm(const CavitySpec& spec);
double cavity_linewidth_fwhm_approx(const CavitySpec& spec);

/// Air gap plus crystal length divided by its index.
double reduced_cavity_length(const CavitySpec& spec);

/// Fundamental mode of the plano-concave resonator. The waist sits on the
/// flat crystal face. Throws ValidationError if the cavity is unstable.
GaussianBeam plano_concave_waist(const CavitySpec& spec);

/// Power overlap of two co-axial Gaussian beams with waists in one plane.
double gaussian_overlap(const GaussianBeam& a, const GaussianBeam& b);

} // namespace sqz
