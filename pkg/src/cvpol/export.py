"""File export and re-import of spectra and noise-ball geometry.

Two formats share one schema: CSV (primary, plot-tool neutral) and a
JSON-structured text mirror.  All reals are written with 9 significant
digits, which the round-trip tests treat as the preservation contract.

Spectrum CSV layout: one provenance comment line, then a header
``frequency_hz, <series...>, <flags...>`` and one row per grid point.
Noise-ball CSV layout: labeled rows with up to three numeric columns (mean,
covariance rows, principal axes as rows, standard deviations), then scalar
rows for the shot radius and the degeneracy flag.
"""

from __future__ import annotations

import csv
import json

import numpy as np

from .spectra import MeasuredSpectrum, Spectrum
from .stokes import NoiseBall

__all__ = [
    "format_real",
    "write_spectrum_csv",
    "read_spectrum_csv",
    "write_spectrum_text",
    "read_spectrum_text",
    "write_noise_ball_csv",
    "write_noise_ball_text",
    "read_measured_csv",
    "write_measured_csv",
]

_SIG = "%.9g"


def format_real(value: float) -> str:
    return _SIG % float(value)


def _round9(value: float) -> float:
    return float(_SIG % float(value))


def write_spectrum_csv(spectrum: Spectrum, path) -> None:
    names = sorted(spectrum.series)
    flag_names = sorted(spectrum.flags)
    with open(path, "w", newline="") as fh:
        fh.write("# provenance=" + json.dumps(spectrum.provenance, default=str) + "\n")
        writer = csv.writer(fh)
        writer.writerow(["frequency_hz"] + names + flag_names)
        for k, f in enumerate(spectrum.frequency_hz):
            row = [format_real(f)]
            row += [format_real(spectrum.series[n][k]) for n in names]
            row += [str(spectrum.flags[n][k]) for n in flag_names]
            writer.writerow(row)


def read_spectrum_csv(path) -> Spectrum:
    provenance = {}
    rows = []
    header = None
    with open(path, newline="") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if body.startswith("provenance="):
                    provenance = json.loads(body[len("provenance="):])
                continue
            cells = next(csv.reader([line]))
            if header is None:
                header = cells
            else:
                rows.append(cells)
    if header is None or header[0] != "frequency_hz":
        raise ValueError(f"{path}: not a spectrum file (missing frequency_hz header)")
    columns = list(zip(*rows)) if rows else [[] for _ in header]
    freq = np.array([float(v) for v in columns[0]])
    series, flags = {}, {}
    for name, column in zip(header[1:], columns[1:]):
        try:
            series[name] = np.array([float(v) for v in column])
        except ValueError:
            flags[name] = np.array(column, dtype=object)
    return Spectrum(freq, series, flags, provenance)


def _spectrum_payload(spectrum: Spectrum) -> dict:
    return {
        "provenance": spectrum.provenance,
        "frequency_hz": [_round9(v) for v in spectrum.frequency_hz],
        "series": {k: [_round9(x) for x in v] for k, v in sorted(spectrum.series.items())},
        "flags": {k: [str(x) for x in v] for k, v in sorted(spectrum.flags.items())},
    }


def write_spectrum_text(spectrum: Spectrum, path) -> None:
    with open(path, "w") as fh:
        json.dump(_spectrum_payload(spectrum), fh, indent=2, default=str)
        fh.write("\n")


def read_spectrum_text(path) -> Spectrum:
    with open(path) as fh:
        payload = json.load(fh)
    return Spectrum(
        np.asarray(payload["frequency_hz"], dtype=float),
        {k: np.asarray(v, dtype=float) for k, v in payload["series"].items()},
        {k: np.asarray(v, dtype=object) for k, v in payload["flags"].items()},
        payload.get("provenance", {}),
    )


def _ball_rows(ball: NoiseBall):
    rows = [("mean", ball.mean)]
    rows += [(f"cov_s{i + 1}", ball.cov[i]) for i in range(3)]
    # principal axes as rows: axis_k is the k-th eigenvector
    rows += [(f"axis_{k + 1}", ball.axes[:, k]) for k in range(3)]
    rows.append(("std", ball.stds))
    return rows


def write_noise_ball_csv(ball: NoiseBall, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["quantity", "c1", "c2", "c3"])
        for name, vec in _ball_rows(ball):
            writer.writerow([name] + [format_real(v) for v in vec])
        writer.writerow(["shot_radius", format_real(ball.shot_radius), "", ""])
        writer.writerow(["degenerate", str(ball.degenerate).lower(), "", ""])


def write_noise_ball_text(ball: NoiseBall, path) -> None:
    payload = {name: [_round9(v) for v in vec] for name, vec in _ball_rows(ball)}
    payload["shot_radius"] = _round9(ball.shot_radius)
    payload["degenerate"] = bool(ball.degenerate)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


_MEASURED_COLUMNS = ["frequency_hz", "variance", "dark_variance", "shot_reference"]


def write_measured_csv(measured: MeasuredSpectrum, path) -> None:
    meta = {
        "series": measured.series,
        "traces_averaged": measured.traces_averaged,
        "rbw_hz": _round9(measured.rbw_hz),
        "vbw_hz": _round9(measured.vbw_hz),
    }
    with open(path, "w", newline="") as fh:
        fh.write("# measured=" + json.dumps(meta) + "\n")
        writer = csv.writer(fh)
        writer.writerow(_MEASURED_COLUMNS)
        for k in range(measured.frequency_hz.size):
            writer.writerow(
                [
                    format_real(measured.frequency_hz[k]),
                    format_real(measured.variance[k]),
                    format_real(measured.dark_variance[k]),
                    format_real(measured.shot_reference[k]),
                ]
            )


def read_measured_csv(path) -> MeasuredSpectrum:
    meta = {}
    header = None
    rows = []
    with open(path, newline="") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if body.startswith("measured="):
                    meta = json.loads(body[len("measured="):])
                continue
            cells = next(csv.reader([line]))
            if header is None:
                header = cells
            else:
                rows.append([float(v) for v in cells])
    if header != _MEASURED_COLUMNS:
        raise ValueError(f"{path}: expected columns {_MEASURED_COLUMNS}, got {header}")
    data = np.array(rows, dtype=float).reshape(-1, 4)
    return MeasuredSpectrum(
        data[:, 0],
        data[:, 1],
        data[:, 2],
        data[:, 3],
        traces_averaged=int(meta.get("traces_averaged", 1)),
        rbw_hz=float(meta.get("rbw_hz", 300e3)),
        vbw_hz=float(meta.get("vbw_hz", 300.0)),
        series=str(meta.get("series", "")),
    )
