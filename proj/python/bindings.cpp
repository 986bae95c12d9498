// Python bindings for the sqzkit core.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "sqzkit/cavity.hpp"
#include "sqzkit/cli.hpp"
#include "sqzkit/config.hpp"
#include "sqzkit/error.hpp"
#include "sqzkit/fit.hpp"
#include "sqzkit/qpm.hpp"
#include "sqzkit/report.hpp"
#include "sqzkit/squeezing.hpp"
#include "sqzkit/waveguide.hpp"

namespace py = pybind11;
using namespace sqz;

namespace {

py::array_t<double> mode_array(const ModeField& m) {
    py::array_t<double> arr({m.ny, m.nx});
    auto buf = arr.mutable_unchecked<2>();
    for (int iy = 0; iy < m.ny; ++iy)
        for (int ix = 0; ix < m.nx; ++ix) buf(iy, ix) = m.at(ix, iy);
    return arr;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Cavity squeezed-light source design toolkit";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

    // cavity
    py::class_<CavitySpec>(m, "CavitySpec")
        .def(py::init<>())
        .def_readwrite("mirror_curvature_radius", &CavitySpec::mirror_curvature_radius)
        .def_readwrite("air_gap", &CavitySpec::air_gap)
        .def_readwrite("crystal_length", &CavitySpec::crystal_length)
        .def_readwrite("crystal_refractive_index", &CavitySpec::crystal_refractive_index)
        .def_readwrite("output_coupler_transmittance", &CavitySpec::output_coupler_transmittance)
        .def_readwrite("intra_cavity_loss", &CavitySpec::intra_cavity_loss)
        .def_readwrite("wavelength", &CavitySpec::wavelength)
        .def("validate", &CavitySpec::validate);

    py::class_<GaussianBeam>(m, "GaussianBeam")
        .def(py::init<>())
        .def(py::init([](double w0, double wavelength) { return GaussianBeam{w0, 0.0, wavelength}; }),
             py::arg("waist_radius"), py::arg("wavelength") = 1550e-9)
        .def_readwrite("waist_radius", &GaussianBeam::waist_radius)
        .def_readwrite("waist_position", &GaussianBeam::waist_position)
        .def_readwrite("wavelength", &GaussianBeam::wavelength);

    m.def("round_trip_optical_length", &round_trip_optical_length);
    m.def("cavity_fsr", &cavity_fsr);
    m.def("cavity_finesse", &cavity_finesse);
    m.def("cavity_finesse_approx", &cavity_finesse_approx);
    m.def("cavity_linewidth_fwhm", &cavity_linewidth_fwhm);
    m.def("plano_concave_waist", &plano_concave_waist);
    m.def("gaussian_overlap", &gaussian_overlap);

    // qpm
    m.def("double_pass_shape", &double_pass_shape, py::arg("dkl"), py::arg("theta"));
    m.def("phase_penalty", [](double theta) {
        const auto r = phase_penalty(theta);
        return py::make_tuple(r.penalty, r.maximizer);
    });
    m.def("worst_case_penalty", [] {
        const auto r = worst_case_penalty();
        return py::make_tuple(r.penalty, r.maximizer);
    });
    m.def("peak_ratio", [](double theta) {
        const auto r = peak_ratio(theta);
        py::dict d;
        d["ratio"] = r.ratio;
        d["degenerate"] = r.degenerate;
        d["largest_at"] = r.largest_at;
        d["second_at"] = r.second_at;
        return d;
    });
    m.def("estimate_theta", &estimate_theta, py::arg("measured_ratio"));
    m.def("cavity_enhancement_factor", &cavity_enhancement_factor);
    m.def("extract_enl",
          [](double efficiency, double t, double r) { return extract_enl({efficiency, t, r}); },
          py::arg("conversion_efficiency"), py::arg("transmittance"), py::arg("reflectance"));

    // squeezing
    py::enum_<Branch>(m, "Branch")
        .value("squeezed", Branch::squeezed)
        .value("anti", Branch::anti);

    py::class_<SqueezerParams>(m, "SqueezerParams")
        .def(py::init<>())
        .def_readwrite("output_coupler_transmittance", &SqueezerParams::output_coupler_transmittance)
        .def_readwrite("intra_cavity_loss", &SqueezerParams::intra_cavity_loss)
        .def_readwrite("total_detection_loss", &SqueezerParams::total_detection_loss)
        .def_readwrite("pump_power", &SqueezerParams::pump_power)
        .def_readwrite("threshold_power", &SqueezerParams::threshold_power)
        .def_readwrite("cavity_half_width", &SqueezerParams::cavity_half_width)
        .def("normalized_pump", &SqueezerParams::normalized_pump);

    m.def("variance", &variance, py::arg("params"), py::arg("frequency"), py::arg("branch"));
    m.def("threshold_power", &threshold_power);
    m.def("escape_efficiency", &escape_efficiency);
    m.def("compose_loss_budget", [](const std::map<std::string, double>& c) {
        return compose_loss_budget(LossBudget{c});
    });
    m.def("equivalent_loss_from_clearance", &equivalent_loss_from_clearance);
    m.def("to_db", &to_db);
    m.def("from_db", &from_db);
    m.def("predict_spectrum", [](const SqueezerParams& p, const std::vector<double>& f) {
        const auto s = predict_spectrum(p, f);
        std::vector<double> sq;
        std::vector<double> an;
        for (const auto& pt : s.squeezed) sq.push_back(pt.level_db);
        for (const auto& pt : s.anti) an.push_back(pt.level_db);
        return py::make_tuple(sq, an);
    });

    // fit
    py::class_<SqueezingObservation>(m, "SqueezingObservation")
        .def(py::init([](double p, double f, Branch b, double level, double sigma) {
                 return SqueezingObservation{p, f, b, level, sigma};
             }),
             py::arg("pump_power"), py::arg("frequency"), py::arg("branch"), py::arg("level_db"),
             py::arg("uncertainty_db") = 0.1)
        .def_readwrite("pump_power", &SqueezingObservation::pump_power)
        .def_readwrite("frequency", &SqueezingObservation::frequency)
        .def_readwrite("branch", &SqueezingObservation::branch)
        .def_readwrite("level_db", &SqueezingObservation::level_db)
        .def_readwrite("uncertainty_db", &SqueezingObservation::uncertainty_db);

    py::class_<FitOptions>(m, "FitOptions")
        .def(py::init<>())
        .def_readwrite("fit_detection_loss", &FitOptions::fit_detection_loss)
        .def_readwrite("linear_residuals", &FitOptions::linear_residuals)
        .def_readwrite("max_iterations", &FitOptions::max_iterations);

    py::class_<FitResult>(m, "FitResult")
        .def_readonly("threshold_power", &FitResult::threshold_power)
        .def_readonly("cavity_half_width", &FitResult::cavity_half_width)
        .def_readonly("total_detection_loss", &FitResult::total_detection_loss)
        .def_readonly("threshold_power_se", &FitResult::threshold_power_se)
        .def_readonly("cavity_half_width_se", &FitResult::cavity_half_width_se)
        .def_readonly("objective", &FitResult::objective)
        .def_readonly("residual_norm", &FitResult::residual_norm)
        .def_readonly("converged", &FitResult::converged)
        .def_readonly("iterations", &FitResult::iterations);

    m.def("synth_dataset",
          [](const SqueezerParams& p, const std::vector<double>& pumps, const std::vector<double>& freqs,
             double sigma, std::uint64_t seed) { return synth_dataset(p, pumps, freqs, sigma, seed); },
          py::arg("params"), py::arg("pump_powers"), py::arg("frequencies"),
          py::arg("noise_sigma_db") = 0.0, py::arg("seed") = 1);
    m.def("fit_squeezing",
          [](const std::vector<SqueezingObservation>& obs, const SqueezerParams& initial,
             const FitOptions& opt) { return fit_squeezing(obs, initial, opt); },
          py::arg("observations"), py::arg("initial"), py::arg("options") = FitOptions{});
    m.def("log_space", &log_space);

    // waveguide
    py::class_<WaveguideSpec>(m, "WaveguideSpec")
        .def(py::init<>())
        .def_readwrite("core_size_um", &WaveguideSpec::core_size_um)
        .def_readwrite("relative_index_difference", &WaveguideSpec::relative_index_difference)
        .def_readwrite("cladding_index", &WaveguideSpec::cladding_index)
        .def_readwrite("wavelength_um", &WaveguideSpec::wavelength_um)
        .def_readwrite("grid_spacing_um", &WaveguideSpec::grid_spacing_um)
        .def_readwrite("domain_padding_um", &WaveguideSpec::domain_padding_um)
        .def("core_index", &WaveguideSpec::core_index);

    py::class_<ModeField>(m, "ModeField")
        .def_readonly("nx", &ModeField::nx)
        .def_readonly("ny", &ModeField::ny)
        .def_readonly("spacing_um", &ModeField::spacing_um)
        .def_readonly("n_eff", &ModeField::n_eff)
        .def_readonly("residual", &ModeField::residual)
        .def_property_readonly("values", &mode_array);

    m.def("solve_fundamental_mode", [](const WaveguideSpec& s) { return solve_fundamental_mode(s); });
    m.def("overlap_efficiency",
          py::overload_cast<const ModeField&, const GaussianBeam&>(&overlap_efficiency));
    m.def("sweep_core_size",
          [](const std::vector<double>& sizes, const GaussianBeam& source, const WaveguideSpec& base,
             int threads) {
              const auto r = sweep_core_size(sizes, source, base, threads);
              std::vector<double> eff;
              for (const auto& p : r.points) eff.push_back(p.ok ? p.efficiency : std::nan(""));
              return py::make_tuple(eff, r.best_size_um, r.best_efficiency);
          },
          py::arg("sizes_um"), py::arg("source"), py::arg("base") = WaveguideSpec{},
          py::arg("threads") = 1);

    // config, report, CLI
    m.def("default_config_text", [] { return serialize_config(ToolkitConfig{}); });
    m.def("build_report", [](const std::string& config_text, int threads) {
        std::istringstream in(config_text);
        const ToolkitConfig cfg = config_text.empty() ? ToolkitConfig{} : parse_config(in, "<string>");
        py::gil_scoped_release release;
        return build_report(cfg, ReportOptions{threads});
    }, py::arg("config_text") = "", py::arg("threads") = 1);
    m.def("run_cli", [](const std::vector<std::string>& args) {
        std::ostringstream out;
        std::ostringstream err;
        const int code = run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
    });
}
