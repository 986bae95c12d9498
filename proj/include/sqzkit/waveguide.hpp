#pragma once

// Scalar finite-difference mode solver for square step-index guides and
// facet coupling of a flat-phase Gaussian beam into the fundamental mode.
// Lengths in this module are in micrometres.

#include <iosfwd>
#include <string>
#include <vector>

#include "sqzkit/cavity.hpp"

namespace sqz {

struct WaveguideSpec {
    double core_size_um = 63.0;             // side of the square core
    double relative_index_difference = 0.015; // (n_core − n_clad) / n_core
    double cladding_index = 1.444;
    double wavelength_um = 1.55;
    double grid_spacing_um = 1.0;
    double domain_padding_um = 40.0;        // cladding beyond the core, each side

    double core_index() const { return cladding_index / (1.0 - relative_index_difference); }
    double wavenumber() const; // 2π/λ in 1/µm

    /// Full validation for mode solving (requires Δ > 0).
    void validate() const;
};

/// Cell-centred refractive index map on a square grid. Cells cut by the
/// core edge carry the area-weighted mean of n².
struct IndexProfile {
    int nx = 0;
    int ny = 0;
    double spacing_um = 0.0;
    int core_cells = 0;           // cells fully or partly inside the core, per side
    std::vector<double> index;    // row-major, index[iy * nx + ix]

    double x(int ix) const { return (ix - 0.5 * (nx - 1)) * spacing_um; }
    double y(int iy) const { return (iy - 0.5 * (ny - 1)) * spacing_um; }
};

/// Index map for the spec. Accepts Δ = 0 (uniform map); rejects grids
/// coarser than core/20.
IndexProfile build_index_profile(const WaveguideSpec& spec);

struct ModeField {
    int nx = 0;
    int ny = 0;
    double spacing_um = 0.0;
    double n_eff = 0.0;
    std::vector<double> values; // row-major, Σ ψ² h² = 1 with h in µm
    double residual = 0.0;      // ‖(A − β²)ψ‖ / ‖β²ψ‖
    int iterations = 0;

    double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * nx + ix]; }
    double x(int ix) const { return (ix - 0.5 * (nx - 1)) * spacing_um; }
    double y(int iy) const { return (iy - 0.5 * (ny - 1)) * spacing_um; }
};

struct SolverOptions {
    int max_iterations = 500;
    double residual_tolerance = 1e-10;
    double boundary_tolerance = 1e-6; // |ψ| on the domain edge relative to the peak
};

/// Fundamental (largest β²) mode of the 5-point scalar Helmholtz operator
/// with zero boundary values, by shift-and-invert iteration about k·n_core.
/// Throws NumericalError when no guided eigenvalue is found, the iteration
/// stalls, or the field has not decayed at the domain edge.
ModeField solve_fundamental_mode(const WaveguideSpec& spec, const SolverOptions& options = {});

/// Samples exp(−r²/w²) on the mode's grid (flat phase, waist at the facet).
ModeField sample_gaussian(const ModeField& grid, double waist_um);

/// |⟨a, b⟩|² / (⟨a, a⟩⟨b, b⟩) over a shared grid.
double overlap_efficiency(const ModeField& a, const ModeField& b);
double overlap_efficiency(const ModeField& mode, const GaussianBeam& source);

struct SweepPoint {
    double core_size_um = 0.0;
    double efficiency = 0.0;
    double n_eff = 0.0;
    bool ok = false;
    std::string error;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    double best_size_um = 0.0;     // parabolic refinement of the best three points
    double best_efficiency = 0.0;
};

/// One solve plus overlap per core size; `base` supplies every field but
/// the core size. Sizes must be strictly ascending. Failed sizes are
/// flagged, not fatal. Results do not depend on `threads`.
SweepResult sweep_core_size(const std::vector<double>& sizes_um, const GaussianBeam& source,
                            const WaveguideSpec& base, int threads = 1);

/// True when the discrete derivative of the successful points changes sign
/// at most once, from + to −.
bool is_unimodal(const SweepResult& sweep);

void write_mode_field(std::ostream& out, const ModeField& mode);
ModeField read_mode_field(std::istream& in);
void write_sweep_csv(std::ostream& out, const SweepResult& sweep);

} // namespace sqz
