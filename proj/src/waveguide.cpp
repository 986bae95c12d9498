#include "sqzkit/waveguide.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "sqzkit/constants.hpp"
#include "sqzkit/error.hpp"

namespace sqz {
namespace {

// Fraction of the cell [c - h/2, c + h/2] that lies inside [-a/2, a/2].
double inside_fraction(double centre, double h, double a) {
    const double lo = std::max(centre - 0.5 * h, -0.5 * a);
    const double hi = std::min(centre + 0.5 * h, 0.5 * a);
    return std::clamp((hi - lo) / h, 0.0, 1.0);
}

void validate_grid(const WaveguideSpec& s) {
    require(s.core_size_um > 0.0, "waveguide: core size must be > 0");
    require(s.relative_index_difference >= 0.0 && s.relative_index_difference < 0.1,
            "waveguide: relative index difference must lie in [0, 0.1)");
    require(s.cladding_index >= 1.0, "waveguide: cladding index must be >= 1");
    require(s.wavelength_um > 0.0, "waveguide: wavelength must be > 0");
    require(s.grid_spacing_um > 0.0, "waveguide: grid spacing must be > 0");
    require(s.grid_spacing_um <= s.core_size_um / 20.0 * (1.0 + 1e-12),
            "waveguide: grid spacing must be <= core size / 20");
    require(s.domain_padding_um > 0.0, "waveguide: domain padding must be > 0");
}

} // namespace

double WaveguideSpec::wavenumber() const {
    return 2.0 * kPi / wavelength_um;
}

void WaveguideSpec::validate() const {
    validate_grid(*this);
    require(relative_index_difference > 0.0, "waveguide: relative index difference must be > 0");
    // Slowest possible cladding decay is bounded below by 1/(k·NA).
    const double na = std::sqrt(core_index() * core_index() - cladding_index * cladding_index);
    const double decay = 1.0 / (wavenumber() * na);
    require(domain_padding_um >= 3.0 * decay,
            "waveguide: domain padding shorter than three cladding decay lengths");
}

IndexProfile build_index_profile(const WaveguideSpec& spec) {
    validate_grid(spec);
    const double h = spec.grid_spacing_um;
    const double a = spec.core_size_um;
    const long core_cells = std::lround(std::ceil(a / h - 1e-9));
    long n = std::lround(std::ceil((a + 2.0 * spec.domain_padding_um) / h - 1e-9));
    // Matching parity keeps core edges on cell boundaries when a/h is integral.
    if ((n - core_cells) % 2 != 0) ++n;

    IndexProfile prof;
    prof.nx = prof.ny = static_cast<int>(n);
    prof.spacing_um = h;
    prof.index.resize(static_cast<std::size_t>(n * n));
    const double n_clad = spec.cladding_index;
    const double n_core = spec.core_index();
    const double contrast = n_core * n_core - n_clad * n_clad;
    std::vector<double> frac(static_cast<std::size_t>(n));
    int cells = 0;
    for (int i = 0; i < n; ++i) {
        frac[i] = inside_fraction(prof.x(i), h, a);
        if (frac[i] > 0.0) ++cells;
    }
    prof.core_cells = cells;
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            prof.index[static_cast<std::size_t>(iy) * n + ix] =
                std::sqrt(n_clad * n_clad + contrast * frac[ix] * frac[iy]);
        }
    }
    return prof;
}

ModeField solve_fundamental_mode(const WaveguideSpec& spec, const SolverOptions& options) {
    spec.validate();
    const IndexProfile prof = build_index_profile(spec);
    const int nx = prof.nx;
    const int ny = prof.ny;
    const Eigen::Index size = static_cast<Eigen::Index>(nx) * ny;
    const double h2 = prof.spacing_um * prof.spacing_um;
    const double k = spec.wavenumber();
    const double n_core = spec.core_index();
    const double shift = k * k * n_core * n_core;

    // A = Laplacian + k²n² (Dirichlet). Factor shift·I − A, which is SPD.
    std::vector<double> potential(static_cast<std::size_t>(size));
    for (Eigen::Index i = 0; i < size; ++i) potential[i] = k * k * prof.index[i] * prof.index[i];

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(size) * 5);
    auto id = [nx](int ix, int iy) { return static_cast<Eigen::Index>(iy) * nx + ix; };
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const Eigen::Index p = id(ix, iy);
            trip.emplace_back(p, p, 4.0 / h2 + shift - potential[p]);
            if (ix > 0) trip.emplace_back(p, id(ix - 1, iy), -1.0 / h2);
            if (ix + 1 < nx) trip.emplace_back(p, id(ix + 1, iy), -1.0 / h2);
            if (iy > 0) trip.emplace_back(p, id(ix, iy - 1), -1.0 / h2);
            if (iy + 1 < ny) trip.emplace_back(p, id(ix, iy + 1), -1.0 / h2);
        }
    }
    Eigen::SparseMatrix<double> shifted(size, size);
    shifted.setFromTriplets(trip.begin(), trip.end());

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(shifted);
    if (solver.info() != Eigen::Success) throw NumericalError("waveguide: factorisation failed");

    // A·v = shift·v − (shift·I − A)·v
    auto apply_a = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        return shift * v - shifted * v;
    };

    Eigen::VectorXd v = Eigen::VectorXd::Ones(size);
    v.normalize();
    double lambda = 0.0;
    double residual = 1.0;
    int iter = 0;
    while (iter < options.max_iterations) {
        ++iter;
        Eigen::VectorXd w = solver.solve(v);
        if (solver.info() != Eigen::Success) throw NumericalError("waveguide: back-substitution failed");
        v = w / w.norm();
        const Eigen::VectorXd av = apply_a(v);
        lambda = v.dot(av);
        residual = (av - lambda * v).norm() / std::abs(lambda);
        if (residual < options.residual_tolerance) break;
    }
    if (!(residual < options.residual_tolerance)) {
        throw NumericalError(fmt::format("waveguide: shift-invert iteration stalled at residual {:.3g}",
                                         residual));
    }
    const double n_eff = std::sqrt(std::max(lambda, 0.0)) / k;
    if (!(n_eff > spec.cladding_index && n_eff < n_core)) {
        throw NumericalError(fmt::format("waveguide: no guided mode (n_eff = {:.8f})", n_eff));
    }

    if (v.sum() < 0.0) v = -v;
    v /= std::sqrt(v.squaredNorm() * h2);

    ModeField mode;
    mode.nx = nx;
    mode.ny = ny;
    mode.spacing_um = prof.spacing_um;
    mode.n_eff = n_eff;
    mode.residual = residual;
    mode.iterations = iter;
    mode.values.assign(v.data(), v.data() + size);

    const double peak = v.cwiseAbs().maxCoeff();
    double edge = 0.0;
    for (int i = 0; i < nx; ++i) {
        edge = std::max({edge, std::abs(mode.at(i, 0)), std::abs(mode.at(i, ny - 1))});
    }
    for (int j = 0; j < ny; ++j) {
        edge = std::max({edge, std::abs(mode.at(0, j)), std::abs(mode.at(nx - 1, j))});
    }
    if (edge > options.boundary_tolerance * peak) {
        throw NumericalError("waveguide: mode has not decayed at the domain edge, increase padding");
    }
    return mode;
}

ModeField sample_gaussian(const ModeField& grid, double waist_um) {
    require(waist_um > 0.0, "gaussian: waist must be > 0");
    ModeField g;
    g.nx = grid.nx;
    g.ny = grid.ny;
    g.spacing_um = grid.spacing_um;
    g.values.resize(static_cast<std::size_t>(g.nx) * g.ny);
    const double w2 = waist_um * waist_um;
    for (int iy = 0; iy < g.ny; ++iy) {
        const double y = g.y(iy);
        for (int ix = 0; ix < g.nx; ++ix) {
            const double x = g.x(ix);
            g.values[static_cast<std::size_t>(iy) * g.nx + ix] = std::exp(-(x * x + y * y) / w2);
        }
    }
    return g;
}

double overlap_efficiency(const ModeField& a, const ModeField& b) {
    require(a.nx == b.nx && a.ny == b.ny && a.spacing_um == b.spacing_um,
            "overlap: fields are on different grids");
    require(!a.values.empty() && a.values.size() == b.values.size(), "overlap: empty field");
    double ab = 0.0;
    double aa = 0.0;
    double bb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        ab += a.values[i] * b.values[i];
        aa += a.values[i] * a.values[i];
        bb += b.values[i] * b.values[i];
    }
    require(aa > 0.0 && bb > 0.0, "overlap: zero field");
    // Spacing factors cancel between numerator and denominator.
    return std::clamp(ab * ab / (aa * bb), 0.0, 1.0);
}

double overlap_efficiency(const ModeField& mode, const GaussianBeam& source) {
    source.validate();
    return overlap_efficiency(mode, sample_gaussian(mode, source.waist_radius * 1e6));
}

SweepResult sweep_core_size(const std::vector<double>& sizes_um, const GaussianBeam& source,
                            const WaveguideSpec& base, int threads) {
    require(!sizes_um.empty(), "sweep: no core sizes");
    for (std::size_t i = 1; i < sizes_um.size(); ++i) {
        require(sizes_um[i] > sizes_um[i - 1], "sweep: core sizes must be strictly ascending");
    }
    source.validate();

    SweepResult out;
    out.points.resize(sizes_um.size());
    auto run_one = [&](std::size_t i) {
        SweepPoint& pt = out.points[i];
        pt.core_size_um = sizes_um[i];
        try {
            WaveguideSpec spec = base;
            spec.core_size_um = sizes_um[i];
            const ModeField mode = solve_fundamental_mode(spec);
            pt.n_eff = mode.n_eff;
            pt.efficiency = overlap_efficiency(mode, source);
            pt.ok = true;
        } catch (const std::exception& e) {
            pt.ok = false;
            pt.error = e.what();
        }
    };
    const std::size_t n_threads =
        std::clamp<std::size_t>(threads > 0 ? static_cast<std::size_t>(threads) : 1, 1, sizes_um.size());
    if (n_threads == 1) {
        for (std::size_t i = 0; i < sizes_um.size(); ++i) run_one(i);
    } else {
        // Static interleaved partition; each point is written by one thread.
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t i = t; i < sizes_um.size(); i += n_threads) run_one(i);
            });
        }
        for (auto& th : pool) th.join();
    }

    std::size_t best = out.points.size();
    for (std::size_t i = 0; i < out.points.size(); ++i) {
        if (out.points[i].ok && (best == out.points.size() ||
                                 out.points[i].efficiency > out.points[best].efficiency)) {
            best = i;
        }
    }
    if (best == out.points.size()) throw NumericalError("sweep: every core size failed");
    out.best_size_um = out.points[best].core_size_um;
    out.best_efficiency = out.points[best].efficiency;
    if (best > 0 && best + 1 < out.points.size() && out.points[best - 1].ok &&
        out.points[best + 1].ok) {
        const double x0 = out.points[best - 1].core_size_um;
        const double x1 = out.points[best].core_size_um;
        const double x2 = out.points[best + 1].core_size_um;
        const double y0 = out.points[best - 1].efficiency;
        const double y1 = out.points[best].efficiency;
        const double y2 = out.points[best + 1].efficiency;
        // Vertex of the parabola through the three points.
        const double d01 = (y1 - y0) / (x1 - x0);
        const double d12 = (y2 - y1) / (x2 - x1);
        const double curv = (d12 - d01) / (x2 - x0);
        if (curv < 0.0) {
            const double xv = 0.5 * (x0 + x1) - d01 / (2.0 * curv);
            const double x = std::clamp(xv, x0, x2);
            out.best_size_um = x;
            out.best_efficiency = std::max(y1, y0 + d01 * (x - x0) + curv * (x - x0) * (x - x1));
        }
    }
    return out;
}

bool is_unimodal(const SweepResult& sweep) {
    std::vector<double> eff;
    for (const auto& p : sweep.points) {
        if (p.ok) eff.push_back(p.efficiency);
    }
    bool descending = false;
    for (std::size_t i = 1; i < eff.size(); ++i) {
        const double d = eff[i] - eff[i - 1];
        if (d < 0.0) descending = true;
        if (d > 0.0 && descending) return false;
    }
    return true;
}

void write_mode_field(std::ostream& out, const ModeField& mode) {
    fmt::print(out, "# nx ny spacing_um n_eff\n{} {} {} {}\n", mode.nx, mode.ny, mode.spacing_um,
               mode.n_eff);
    for (int iy = 0; iy < mode.ny; ++iy) {
        for (int ix = 0; ix < mode.nx; ++ix) {
            fmt::print(out, ix == 0 ? "{}" : " {}", mode.at(ix, iy));
        }
        out << '\n';
    }
}

ModeField read_mode_field(std::istream& in) {
    std::string line;
    do {
        if (!std::getline(in, line)) throw ValidationError("mode file: missing header");
    } while (line.empty() || line[0] == '#');
    ModeField mode;
    std::istringstream header(line);
    if (!(header >> mode.nx >> mode.ny >> mode.spacing_um >> mode.n_eff) || mode.nx <= 0 ||
        mode.ny <= 0 || !(mode.spacing_um > 0.0)) {
        throw ValidationError("mode file: malformed header '" + line + "'");
    }
    mode.values.resize(static_cast<std::size_t>(mode.nx) * mode.ny);
    for (auto& v : mode.values) {
        if (!(in >> v)) throw ValidationError("mode file: truncated amplitude data");
    }
    return mode;
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
    out << "core_size_um,efficiency\n";
    for (const auto& p : sweep.points) {
        if (p.ok) fmt::print(out, "{},{}\n", p.core_size_um, p.efficiency);
    }
}

} // namespace sqz
