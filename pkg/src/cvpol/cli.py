"""Command-line front end.

Subcommands:

* ``simulate``  -- criteria spectra of a configured experiment over its
  sideband frequency grid.
* ``criteria``  -- calibrate measured spectra and evaluate the criteria.
* ``poincare``  -- noise-ball geometry of one beam, optionally conditioned
  on a Stokes measurement of the other.
* ``validate``  -- run the built-in oracle/property checks.

Exit status: 0 success, 1 validation failure, 2 input error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import ConfigError, load_config, load_params
from .experiment import build_polarization_pair, sweep_spectrum
from .export import (
    read_measured_csv,
    write_noise_ball_csv,
    write_noise_ball_text,
    write_spectrum_csv,
    write_spectrum_text,
)
from .spectra import SeriesBundle, calibrate, criteria_from_spectra
from .stokes import conditional_noise_ball, noise_ball
from .validate import format_report, run_checks

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cvpol", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="criteria spectra from a config file")
    sim.add_argument("--config", required=True, help="TOML run configuration")
    sim.add_argument("--out", required=True, help="output file")
    sim.add_argument("--format", choices=("csv", "text"), default="csv")

    cri = sub.add_parser("criteria", help="criteria from measured spectra")
    cri.add_argument("--spectra", nargs="+", required=True, metavar="PATH",
                     help="measured CSV files; roles come from their embedded series names")
    cri.add_argument("--params", required=True, help="TOML mean-field parameters")
    cri.add_argument("--out", required=True)
    cri.add_argument("--format", choices=("csv", "text"), default="csv")

    poi = sub.add_parser("poincare", help="noise-ball geometry of one beam")
    poi.add_argument("--config", required=True)
    poi.add_argument("--beam", choices=("x", "y"), default="x")
    poi.add_argument("--conditional", choices=("none", "s1", "s2", "s3"), default="none")
    poi.add_argument("--out", required=True)
    poi.add_argument("--format", choices=("csv", "text"), default="csv")

    sub.add_parser("validate", help="run built-in oracle/property checks")
    return parser


def _cmd_simulate(args) -> int:
    loaded = load_config(args.config)
    spectrum = sweep_spectrum(loaded.experiment, pairs=(loaded.analysis.stokes_pair,))
    spectrum.provenance.update(config_hash=loaded.config_hash, calibration_applied=False)
    writer = write_spectrum_csv if args.format == "csv" else write_spectrum_text
    writer(spectrum, args.out)
    return 0


def _cmd_criteria(args) -> int:
    params = load_params(args.params)
    calibrated = {}
    for path in args.spectra:
        measured = read_measured_csv(path)
        if not measured.series:
            raise ConfigError(f"{path}: measured file does not name its series role")
        calibrated[measured.series] = calibrate(measured)
    i, j = params["stokes_pair"]
    freq = None
    sum_diff, conditional, quality = {}, {}, {}
    for idx in (i, j):
        role = f"sum_s{idx}"
        if role not in calibrated:
            raise ConfigError(f"missing measured series {role!r} for pair ({i},{j})")
        cal = calibrated[role]
        if freq is None:
            freq = cal.frequency_hz
        elif not np.array_equal(freq, cal.frequency_hz):
            raise ConfigError("measured spectra are on different frequency grids")
        sum_diff[idx] = cal.value
        quality[f"quality_sum_s{idx}"] = np.where(
            cal.invalid, "invalid", np.where(cal.low_headroom, "low_headroom", "ok")
        ).astype(object)
        cond = calibrated.get(f"cond_s{idx}")
        if cond is not None:
            if not np.array_equal(freq, cond.frequency_hz):
                raise ConfigError("measured spectra are on different frequency grids")
            conditional[idx] = cond.value
            quality[f"quality_cond_s{idx}"] = np.where(
                cond.invalid, "invalid", np.where(cond.low_headroom, "low_headroom", "ok")
            ).astype(object)
    bundle = SeriesBundle(
        freq, sum_diff, params["alpha_h"], params["alpha_v"], params["theta"], conditional
    )
    spectrum = criteria_from_spectra(bundle, (i, j))
    spectrum.flags.update(quality)
    writer = write_spectrum_csv if args.format == "csv" else write_spectrum_text
    writer(spectrum, args.out)
    return 0


def _cmd_poincare(args) -> int:
    loaded = load_config(args.config)
    f = loaded.analysis.frequency_hz
    _, beam_x, beam_y = build_polarization_pair(loaded.experiment, f)
    mine, other = (beam_x, beam_y) if args.beam == "x" else (beam_y, beam_x)
    if args.conditional == "none":
        ball = noise_ball(mine)
    else:
        ball = conditional_noise_ball(mine, other, int(args.conditional[1]))
    writer = write_noise_ball_csv if args.format == "csv" else write_noise_ball_text
    writer(ball, args.out)
    return 0


def _cmd_validate(args) -> int:
    ok, results = run_checks()
    print(format_report(results))
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {
        "simulate": _cmd_simulate,
        "criteria": _cmd_criteria,
        "poincare": _cmd_poincare,
        "validate": _cmd_validate,
    }[args.command]
    try:
        return handler(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
