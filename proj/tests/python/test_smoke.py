import math
import os

import numpy as np
import pytest

import sqzkit

CFG = os.path.join(os.environ.get("SQZKIT_SOURCE_DIR", "."), "paper.cfg")


def test_cavity():
    spec = sqzkit.CavitySpec()
    assert sqzkit.round_trip_optical_length(spec) == pytest.approx(22.16e-3)
    assert sqzkit.cavity_finesse(spec) == pytest.approx(57.549, rel=1e-4)
    assert sqzkit.cavity_finesse_approx(spec) == pytest.approx(2 * math.pi / 0.1038)
    waist = sqzkit.plano_concave_waist(spec)
    assert waist.waist_radius == pytest.approx(23.11e-6, rel=1e-3)


def test_validation_error_is_raised():
    spec = sqzkit.CavitySpec()
    spec.air_gap = 0.0
    with pytest.raises(sqzkit.ValidationError):
        sqzkit.cavity_fsr(spec)


def test_qpm():
    penalty, x = sqzkit.worst_case_penalty()
    assert penalty == pytest.approx(0.525062, abs=1e-6)
    assert abs(math.tan(x / 2) - x) < 1e-6
    ratio = sqzkit.peak_ratio(math.radians(40))["ratio"]
    assert sqzkit.estimate_theta(ratio) == pytest.approx(math.radians(40), abs=1e-6)
    assert sqzkit.cavity_enhancement_factor(0.1, 0.9) == pytest.approx(1442.0, rel=1e-4)


def test_squeezing():
    p = sqzkit.SqueezerParams()
    sq, anti = sqzkit.predict_spectrum(p, [2e6, 100e6])
    assert sq[0] == pytest.approx(-6.446, abs=1e-3)
    assert anti[0] == pytest.approx(8.228, abs=1e-3)
    assert sq[1] == pytest.approx(-2.990, abs=1e-3)
    p.pump_power = 2.0
    with pytest.raises(sqzkit.ValidationError):
        sqzkit.variance(p, 1e6, sqzkit.Branch.squeezed)


def test_fit_recovers_noiseless_parameters():
    truth = sqzkit.SqueezerParams()
    freqs = sqzkit.log_space(1e6, 300e6, 12)
    data = sqzkit.synth_dataset(truth, [0.09, 0.139, 0.229, 0.36], freqs)
    guess = sqzkit.SqueezerParams()
    guess.threshold_power = 2.4
    guess.cavity_half_width = 60e6
    r = sqzkit.fit_squeezing(data, guess)
    assert r.converged
    assert r.threshold_power == pytest.approx(1.7, rel=1e-6)
    assert r.cavity_half_width == pytest.approx(92e6, rel=1e-6)


def test_waveguide_mode_and_coupling():
    spec = sqzkit.WaveguideSpec()
    mode = sqzkit.solve_fundamental_mode(spec)
    field = np.asarray(mode.values)
    assert field.shape == (mode.ny, mode.nx)
    assert np.sum(field**2) * mode.spacing_um**2 == pytest.approx(1.0, rel=1e-10)
    assert 1.444 < mode.n_eff < spec.core_index()
    eff = sqzkit.overlap_efficiency(mode, sqzkit.GaussianBeam(23e-6, 1550e-9))
    assert eff == pytest.approx(0.979, abs=0.015)


def test_cli_and_report():
    code, out, _ = sqzkit.run_cli(["cavity", "--config", CFG])
    assert code == 0
    assert "23.11 um" in out
    code, _, err = sqzkit.run_cli([])
    assert code == 1
    text = "fit.runs = 2\nwaveguide.sweep_min = 61 um\nwaveguide.sweep_max = 65 um\n"
    a = sqzkit.build_report(text, threads=1)
    b = sqzkit.build_report(text, threads=2)
    assert a == b
    assert "summary:" in a
