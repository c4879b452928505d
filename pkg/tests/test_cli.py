"""End-to-end runs of the command-line front end, in process."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cvpol import cli
from cvpol.config import load_config
from cvpol.criteria import stokes_criterion
from cvpol.experiment import ExperimentConfig, build_polarization_pair, simulate_measured_series
from cvpol.export import read_spectrum_csv, read_spectrum_text, write_measured_csv

PAIR_CONFIG = "configs/polarization_pair.toml"


def test_simulate_csv(tmp_path):
    out = tmp_path / "spectrum.csv"
    assert cli.main(["simulate", "--config", PAIR_CONFIG, "--out", str(out)]) == 0
    spectrum = read_spectrum_csv(out)
    assert "inseparability_s2s3" in spectrum.series
    assert "epr_s2s3" in spectrum.series
    assert spectrum.provenance["calibration_applied"] is False
    assert len(spectrum.provenance["config_hash"]) == 64
    loaded = load_config(PAIR_CONFIG)
    assert len(spectrum.frequency_hz) == len(loaded.experiment.frequencies_hz)


def test_simulate_text(tmp_path):
    out = tmp_path / "spectrum.json"
    code = cli.main(["simulate", "--config", PAIR_CONFIG, "--out", str(out),
                     "--format", "text"])
    assert code == 0
    spectrum = read_spectrum_text(out)
    assert "inseparability_s2s3" in spectrum.series


def test_simulate_errors(tmp_path, capsys):
    out = tmp_path / "never.csv"
    assert cli.main(["simulate", "--config", str(tmp_path / "nope.toml"),
                     "--out", str(out)]) == 2
    assert "error:" in capsys.readouterr().err
    bad = tmp_path / "bad.toml"
    bad.write_text("[squeezer]\nsqueezed_variance = 0.5\nwhat = 1\n"
                   "[beams]\nalpha_h = 1.0\nalpha_v = 2.0\n")
    assert cli.main(["simulate", "--config", str(bad), "--out", str(out)]) == 2


@pytest.fixture
def measured_files(tmp_path):
    config = ExperimentConfig.ideal(0.44, alpha_h=1.0, alpha_v=math.sqrt(30.0),
                                    frequencies_hz=(3e6, 6.8e6))
    traces = simulate_measured_series(config, (2, 3), dark_power=0.02, shot_power=1.02,
                                      traces_averaged=10)
    paths = []
    for role, m in traces.items():
        path = tmp_path / f"{role}.csv"
        write_measured_csv(m, path)
        paths.append(str(path))
    params = tmp_path / "params.toml"
    params.write_text(
        "[params]\nalpha_h = 1.0\nalpha_v = %r\n"
        "theta_rad = %r\nstokes_pair = [2, 3]\n" % (math.sqrt(30.0), math.pi / 2)
    )
    return config, paths, str(params)


def test_criteria_from_files(tmp_path, measured_files):
    config, paths, params = measured_files
    out = tmp_path / "criteria.csv"
    code = cli.main(["criteria", "--spectra", *paths, "--params", params,
                     "--out", str(out)])
    assert code == 0
    spectrum = read_spectrum_csv(out)
    for k, f in enumerate(spectrum.frequency_hz):
        _, bx, by = build_polarization_pair(config, float(f))
        assert_allclose(spectrum.series["inseparability_s2s3"][k],
                        stokes_criterion(bx, by, (2, 3)).value, atol=5e-9)
        assert_allclose(spectrum.series["epr_s2s3"][k],
                        stokes_criterion(bx, by, (2, 3), "epr").value, atol=5e-9)
    assert list(spectrum.flags["quality_sum_s2"]) == ["ok", "ok"]
    assert list(spectrum.flags["quality_cond_s3"]) == ["ok", "ok"]
    assert spectrum.provenance["calibration_applied"] is True


def test_criteria_sum_only(tmp_path, measured_files):
    _, paths, params = measured_files
    sums = [p for p in paths if p.endswith(("sum_s2.csv", "sum_s3.csv"))]
    out = tmp_path / "criteria.csv"
    assert cli.main(["criteria", "--spectra", *sums, "--params", params,
                     "--out", str(out)]) == 0
    spectrum = read_spectrum_csv(out)
    assert "inseparability_s2s3" in spectrum.series
    assert "epr_s2s3" not in spectrum.series


def test_criteria_errors(tmp_path, measured_files, capsys):
    config, paths, params = measured_files
    out = tmp_path / "criteria.csv"
    # missing one of the required sum series
    just_one = [p for p in paths if p.endswith("sum_s2.csv")]
    assert cli.main(["criteria", "--spectra", *just_one, "--params", params,
                     "--out", str(out)]) == 2
    assert "sum_s3" in capsys.readouterr().err
    # anonymous measured file
    anon = simulate_measured_series(config, (2, 3))["sum_s2"]
    anon = type(anon)(anon.frequency_hz, anon.variance, anon.dark_variance,
                      anon.shot_reference, series="")
    anon_path = tmp_path / "anon.csv"
    write_measured_csv(anon, anon_path)
    code = cli.main(["criteria", "--spectra", str(anon_path), "--params", params,
                     "--out", str(out)])
    assert code == 2
    # mismatched frequency grids
    other = simulate_measured_series(
        ExperimentConfig.ideal(0.44, alpha_h=1.0, alpha_v=math.sqrt(30.0),
                               frequencies_hz=(4e6, 8e6)),
        (2, 3))["sum_s3"]
    other_path = tmp_path / "offgrid_sum_s3.csv"
    write_measured_csv(other, other_path)
    sums = [p for p in paths if p.endswith("sum_s2.csv")] + [str(other_path)]
    assert cli.main(["criteria", "--spectra", *sums, "--params", params,
                     "--out", str(out)]) == 2


def test_poincare(tmp_path):
    plain = tmp_path / "plain.csv"
    cond = tmp_path / "cond.csv"
    assert cli.main(["poincare", "--config", PAIR_CONFIG, "--out", str(plain)]) == 0
    assert cli.main(["poincare", "--config", PAIR_CONFIG, "--beam", "y",
                     "--conditional", "s2", "--out", str(cond)]) == 0

    def stds(path):
        for line in path.read_text().splitlines():
            if line.startswith("std,"):
                return np.array([float(v) for v in line.split(",")[1:]])
        raise AssertionError("no std row")

    # conditioning on the partner beam cannot inflate the noise ball
    assert np.all(np.sort(stds(cond)) <= np.sort(stds(plain)) + 1e-9)


def test_poincare_text(tmp_path):
    import json

    out = tmp_path / "ball.json"
    assert cli.main(["poincare", "--config", PAIR_CONFIG, "--conditional", "s3",
                     "--out", str(out), "--format", "text"]) == 0
    payload = json.loads(out.read_text())
    assert len(payload["std"]) == 3


def test_validate(capsys):
    assert cli.main(["validate"]) == 0
    report = capsys.readouterr().out
    assert "PASS" in report
    assert "FAIL" not in report


def test_validate_failure_exit(monkeypatch, capsys):
    monkeypatch.setattr(cli, "run_checks", lambda: (False, [("broken", False, "detail")]))
    assert cli.main(["validate"]) == 1


def test_parser_rejects_unknown_command():
    with pytest.raises(SystemExit):
        cli.main(["frobnicate"])
