"""Calibration arithmetic, file formats, and configuration loading."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cvpol.config import AnalysisSettings, ConfigError, load_config, load_params
from cvpol.experiment import (
    ExperimentConfig,
    build_polarization_pair,
    simulate_measured_series,
    sweep_spectrum,
)
from cvpol.export import (
    format_real,
    read_measured_csv,
    read_spectrum_csv,
    read_spectrum_text,
    write_measured_csv,
    write_noise_ball_csv,
    write_noise_ball_text,
    write_spectrum_csv,
    write_spectrum_text,
)
from cvpol.spectra import (
    HEADROOM_DB,
    CalibratedSeries,
    MeasuredSpectrum,
    SeriesBundle,
    Spectrum,
    calibrate,
    criteria_from_spectra,
)
from cvpol.stokes import noise_ball


def test_measured_spectrum_broadcasts_references():
    m = MeasuredSpectrum([1e6, 2e6, 3e6], [1.0, 2.0, 3.0], 0.1, 1.0)
    assert m.dark_variance.shape == (3,)
    assert m.shot_reference.shape == (3,)
    with pytest.raises(ValueError, match="length"):
        MeasuredSpectrum([1e6, 2e6], [1.0, 2.0, 3.0], 0.1, 1.0)
    with pytest.raises(ValueError):
        MeasuredSpectrum([1e6], [1.0], 0.1, 1.0, traces_averaged=0)
    with pytest.raises(ValueError):
        MeasuredSpectrum([1e6], [1.0], 0.1, 1.0, rbw_hz=0.0)


def test_calibrate_arithmetic():
    m = MeasuredSpectrum([1e6], [2.0], [0.5], [1.5])
    cal = calibrate(m)
    assert_allclose(cal.value, [(2.0 - 0.5) / (1.5 - 0.5)])
    assert not cal.low_headroom[0]
    assert not cal.invalid[0]


def test_calibrate_flags():
    freq = [1e6, 2e6, 3e6, 4e6]
    #        ok     low headroom  at dark    shot at dark
    var = [10.0, 2.0, 0.5, 3.0]
    dark = [0.5, 1.0, 0.5, 0.5]
    shot = [1.5, 3.0, 1.5, 0.5]
    cal = calibrate(MeasuredSpectrum(freq, var, dark, shot))
    assert not cal.low_headroom[0] and not cal.invalid[0]
    # 10 log10(2/1) = 3.0 dB < 4.5 dB
    assert cal.low_headroom[1] and not cal.invalid[1]
    assert cal.invalid[2] and math.isnan(cal.value[2])
    assert cal.invalid[3] and math.isnan(cal.value[3])
    assert HEADROOM_DB == 4.5
    # zero dark level: no headroom flag, plain normalization
    clean = calibrate(MeasuredSpectrum([1e6], [0.8], [0.0], [1.0]))
    assert_allclose(clean.value, [0.8])
    assert not clean.low_headroom[0]


def test_calibrate_preserves_series_name():
    m = MeasuredSpectrum([1e6], [2.0], [0.5], [1.5], series="sum_s2")
    assert calibrate(m).series == "sum_s2"


def test_spectrum_validation():
    with pytest.raises(ValueError, match="series"):
        Spectrum([1e6, 2e6], {"a": [1.0]})
    with pytest.raises(ValueError, match="flag"):
        Spectrum([1e6], {"a": [1.0]}, {"q": ["x", "y"]})
    s = Spectrum([1e6], {"a": [1.0]}, {"q": ["ok"]}, {"kind": "test"})
    assert s.series["a"].dtype == float


def test_series_bundle_broadcast():
    bundle = SeriesBundle([1e6, 2e6], {2: 0.5, 3: [0.4, 0.6]}, 1.0, 5.5, math.pi / 2)
    assert bundle.sum_diff[2].shape == (2,)
    with pytest.raises(ValueError):
        SeriesBundle([1e6, 2e6], {2: [0.5, 0.5, 0.5]}, 1.0, 5.5, math.pi / 2)


def test_criteria_from_spectra_values():
    # alpha_H = 1, alpha_V = 5.5, theta = pi/2: <S0> = 31.25, |<S1>| = 29.25
    bundle = SeriesBundle(
        [6.8e6],
        {2: [0.45864], 3: [0.45864]},
        1.0,
        5.5,
        math.pi / 2,
        conditional={2: [0.794222337], 3: [0.794222337]},
    )
    spectrum = criteria_from_spectra(bundle, (2, 3))
    assert_allclose(spectrum.series["inseparability_s2s3"], [0.49], atol=1e-12)
    assert_allclose(spectrum.series["epr_s2s3"], [0.72], atol=2e-9)
    assert spectrum.flags["status_inseparability_s2s3"][0] == "entangled"
    assert spectrum.flags["status_epr_s2s3"][0] == "entangled"
    assert spectrum.provenance["calibration_applied"] is True


def test_criteria_from_spectra_guards():
    bundle = SeriesBundle([1e6], {2: [0.5], 3: [0.5]}, 1.0, 5.5, math.pi / 2)
    with pytest.raises(ValueError, match="pair"):
        criteria_from_spectra(bundle, (0, 1))
    with pytest.raises(ValueError, match="missing"):
        criteria_from_spectra(SeriesBundle([1e6], {2: [0.5]}, 1.0, 5.5, math.pi / 2), (2, 3))
    # equal amplitudes make the (2,3) bound degenerate
    degenerate = SeriesBundle([1e6], {2: [0.5], 3: [0.5]}, 2.0, 2.0, math.pi / 2)
    spectrum = criteria_from_spectra(degenerate, (2, 3))
    assert math.isinf(spectrum.series["inseparability_s2s3"][0])
    assert spectrum.flags["status_inseparability_s2s3"][0] == "unverifiable"
    # no conditional series, no EPR output
    assert "epr_s2s3" not in criteria_from_spectra(bundle, (2, 3)).series


def test_format_real():
    assert format_real(0.4586400000001) == "0.45864"
    assert format_real(1234567890.0) == "1.23456789e+09"
    assert format_real(-1.5) == "-1.5"


@pytest.fixture
def model_spectrum():
    config = ExperimentConfig.ideal(0.44, alpha_h=2.0, alpha_v=11.0,
                                    frequencies_hz=(2e6, 5e6, 8e6))
    return sweep_spectrum(config, pairs=((2, 3),))


def test_spectrum_csv_round_trip(tmp_path, model_spectrum):
    path = tmp_path / "spectrum.csv"
    write_spectrum_csv(model_spectrum, path)
    back = read_spectrum_csv(path)
    assert_allclose(back.frequency_hz, model_spectrum.frequency_hz)
    for name, values in model_spectrum.series.items():
        assert_allclose(back.series[name], values, rtol=1e-8)
    for name, flags in model_spectrum.flags.items():
        assert list(back.flags[name]) == list(flags)
    assert back.provenance["kind"] == "model_sweep"


def test_spectrum_text_round_trip(tmp_path, model_spectrum):
    path = tmp_path / "spectrum.json"
    write_spectrum_text(model_spectrum, path)
    back = read_spectrum_text(path)
    assert_allclose(back.frequency_hz, model_spectrum.frequency_hz)
    for name, values in model_spectrum.series.items():
        assert_allclose(back.series[name], values, rtol=1e-8)
    assert back.provenance["kind"] == "model_sweep"


def test_spectrum_csv_rejects_foreign_files(tmp_path):
    path = tmp_path / "junk.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError, match="frequency_hz"):
        read_spectrum_csv(path)


def test_measured_csv_round_trip(tmp_path):
    m = MeasuredSpectrum([1e6, 2e6], [0.5, 0.6], [0.02, 0.02], [1.02, 1.02],
                         traces_averaged=10, rbw_hz=300e3, vbw_hz=300.0, series="sum_s2")
    path = tmp_path / "measured.csv"
    write_measured_csv(m, path)
    back = read_measured_csv(path)
    assert back.series == "sum_s2"
    assert back.traces_averaged == 10
    assert back.rbw_hz == 300e3
    assert_allclose(back.variance, m.variance, rtol=1e-8)
    bad = tmp_path / "bad.csv"
    bad.write_text("frequency_hz,variance\n1e6,0.5\n")
    with pytest.raises(ValueError, match="columns"):
        read_measured_csv(bad)


def test_noise_ball_export(tmp_path):
    config = ExperimentConfig.ideal(0.1, alpha_h=2.0, alpha_v=11.0)
    _, beam_x, _ = build_polarization_pair(config)
    ball = noise_ball(beam_x)
    csv_path = tmp_path / "ball.csv"
    write_noise_ball_csv(ball, csv_path)
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "quantity,c1,c2,c3"
    names = [line.split(",")[0] for line in lines[1:]]
    assert names == ["mean", "cov_s1", "cov_s2", "cov_s3",
                     "axis_1", "axis_2", "axis_3", "std", "shot_radius", "degenerate"]
    mean_row = [float(v) for v in lines[1].split(",")[1:]]
    assert_allclose(mean_row, ball.mean, rtol=1e-8)

    import json

    text_path = tmp_path / "ball.json"
    write_noise_ball_text(ball, text_path)
    payload = json.loads(text_path.read_text())
    assert_allclose(payload["std"], ball.stds, rtol=1e-8)
    assert payload["degenerate"] is False


def test_ingestion_file_round_trip(tmp_path):
    """Exported raw traces, re-read and calibrated, rebuild the criteria curves."""
    config = ExperimentConfig.ideal(0.44, alpha_h=2.0, alpha_v=2.0 * math.sqrt(30.0),
                                    frequencies_hz=(2e6, 6.8e6, 10e6))
    traces = simulate_measured_series(config, (2, 3), dark_power=0.02, shot_power=1.02)
    calibrated = {}
    for role, m in traces.items():
        path = tmp_path / f"{role}.csv"
        write_measured_csv(m, path)
        calibrated[role] = calibrate(read_measured_csv(path))
    bundle = SeriesBundle(
        calibrated["sum_s2"].frequency_hz,
        {2: calibrated["sum_s2"].value, 3: calibrated["sum_s3"].value},
        config.alpha_h,
        config.alpha_v,
        config.theta_x,
        conditional={2: calibrated["cond_s2"].value, 3: calibrated["cond_s3"].value},
    )
    spectrum = criteria_from_spectra(bundle, (2, 3))
    from cvpol.criteria import stokes_criterion

    for k, f in enumerate(bundle.frequency_hz):
        _, bx, by = build_polarization_pair(config, float(f))
        assert_allclose(spectrum.series["inseparability_s2s3"][k],
                        stokes_criterion(bx, by, (2, 3)).value, atol=5e-9)
        assert_allclose(spectrum.series["epr_s2s3"][k],
                        stokes_criterion(bx, by, (2, 3), "epr").value, atol=5e-9)


CONFIG_DIR = "configs"


def test_load_shipped_polarization_config():
    loaded = load_config(f"{CONFIG_DIR}/polarization_pair.toml")
    exp = loaded.experiment
    assert exp.squeezer_a.squeezed_variance == 0.44
    assert exp.squeezer_a.antisqueezed_variance == 2.4
    assert exp.squeezer_a is exp.squeezer_b  # single [squeezer] covers both
    assert_allclose(exp.alpha_v**2 / exp.alpha_h**2, 30.0, rtol=1e-12)
    assert exp.theta_x == math.pi / 2
    assert len(exp.frequencies_hz) == 81
    assert loaded.analysis.stokes_pair == (2, 3)
    assert loaded.analysis.frequency_hz == 6.8e6
    assert len(loaded.config_hash) == 64
    # hash is the digest of the raw bytes, so identical content is stable
    assert loaded.config_hash == load_config(f"{CONFIG_DIR}/polarization_pair.toml").config_hash


def test_load_shipped_three_stokes_config():
    loaded = load_config(f"{CONFIG_DIR}/three_stokes.toml")
    exp = loaded.experiment
    assert_allclose(exp.alpha_h**2, (math.sqrt(3.0) + 1.0) / 2.0 * 100.0, rtol=1e-6)
    assert_allclose(exp.alpha_v**2, (math.sqrt(3.0) - 1.0) / 2.0 * 100.0, rtol=1e-6)
    assert exp.theta_x == math.pi / 4


def test_config_error_cases(tmp_path):
    def load_text(text):
        path = tmp_path / "case.toml"
        path.write_text(text)
        return load_config(path)

    with pytest.raises(ConfigError, match="missing \\[squeezer\\]"):
        load_text("[beams]\nalpha_h = 1.0\nalpha_v = 2.0\n")
    with pytest.raises(ConfigError, match="missing \\[beams\\]"):
        load_text("[squeezer]\nsqueezed_variance = 0.5\n")
    with pytest.raises(ConfigError, match="unknown keys"):
        load_text(
            "[squeezer]\nsqueezed_variance = 0.5\nbogus = 1\n"
            "[beams]\nalpha_h = 1.0\nalpha_v = 2.0\n"
        )
    with pytest.raises(ConfigError, match="unknown sections"):
        load_text(
            "[squeezer]\nsqueezed_variance = 0.5\n"
            "[beams]\nalpha_h = 1.0\nalpha_v = 2.0\n[typo]\nx = 1\n"
        )
    with pytest.raises(ConfigError, match="stokes_pair"):
        load_text(
            "[squeezer]\nsqueezed_variance = 0.5\n"
            "[beams]\nalpha_h = 1.0\nalpha_v = 2.0\n"
            "[analysis]\nstokes_pair = [0, 1]\n"
        )
    with pytest.raises(ConfigError, match="frequency_points"):
        load_text(
            "[squeezer]\nsqueezed_variance = 0.5\n"
            "[beams]\nalpha_h = 1.0\nalpha_v = 2.0\n"
            "[analysis]\nfrequency_points = 0\n"
        )
    with pytest.raises(ConfigError):  # model validation funnels into ConfigError
        load_text(
            "[squeezer]\nsqueezed_variance = 1.5\n"
            "[beams]\nalpha_h = 1.0\nalpha_v = 2.0\n"
        )
    with pytest.raises(ConfigError):  # not TOML at all
        load_text("{json: true}")


def test_config_explicit_grid_wins(tmp_path):
    path = tmp_path / "grid.toml"
    path.write_text(
        "[squeezer]\nsqueezed_variance = 0.5\n"
        "[beams]\nalpha_h = 1.0\nalpha_v = 2.0\n"
        "[analysis]\nfrequencies_hz = [3.0e6, 4.0e6]\n"
        "frequency_start_hz = 1.0e6\nfrequency_stop_hz = 2.0e6\nfrequency_points = 5\n"
    )
    loaded = load_config(path)
    assert loaded.experiment.frequencies_hz == (3.0e6, 4.0e6)


def test_config_second_squeezer(tmp_path):
    path = tmp_path / "two.toml"
    path.write_text(
        "[squeezer]\nsqueezed_variance = 0.5\n"
        "[squeezer_b]\nsqueezed_variance = 0.25\n"
        "[beams]\nalpha_h = 1.0\nalpha_v = 2.0\n"
    )
    exp = load_config(path).experiment
    assert exp.squeezer_a.squeezed_variance == 0.5
    assert exp.squeezer_b.squeezed_variance == 0.25


def test_analysis_settings_defaults():
    settings = AnalysisSettings()
    assert settings.stokes_pair == (2, 3)
    assert settings.frequency_hz is None


def test_load_params(tmp_path):
    path = tmp_path / "params.toml"
    path.write_text(
        "[params]\nalpha_h = 1.0\nalpha_v = 5.5\n"
        "theta_rad = 1.5707963267948966\nstokes_pair = [2, 3]\n"
    )
    params = load_params(path)
    assert params["alpha_h"] == 1.0
    assert params["alpha_v"] == 5.5
    assert params["stokes_pair"] == (2, 3)
    bad = tmp_path / "bad.toml"
    bad.write_text("[params]\nalpha_h = 1.0\n")
    with pytest.raises(ConfigError, match="alpha_v"):
        load_params(bad)
    bad.write_text("[other]\nx = 1\n")
    with pytest.raises(ConfigError, match="params"):
        load_params(bad)
