"""Measured variance spectra: calibration and criteria evaluation.

The measurement chain records variance spectra in linear power units together
with the dark level and a shot-noise reference trace.  Calibration subtracts
the dark level linearly and normalizes to the corrected shot reference.
Points too close to the dark noise (below 4.5 dB headroom) or with
non-positive corrected power are flagged, never silently clipped.

Criteria evaluation consumes calibrated series plus the mean-field parameters
(alpha_H, alpha_V, theta) that a measurement run logs anyway; the sum or
difference series are normalized to the two-beam shot level 2<S0> and the
conditional series to the single-beam level <S0>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .stokes import COMPLEMENT
from .criteria import COMMUTATOR_FLOOR

__all__ = [
    "MeasuredSpectrum",
    "CalibratedSeries",
    "Spectrum",
    "SeriesBundle",
    "HEADROOM_DB",
    "calibrate",
    "criteria_from_spectra",
]

HEADROOM_DB = 4.5


def _as_grid(values, n=None, name="array"):
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if n is not None:
        if arr.size == 1:
            arr = np.full(n, arr[0])
        elif arr.size != n:
            raise ValueError(f"{name} length {arr.size} does not match grid length {n}")
    return arr


@dataclass(frozen=True)
class MeasuredSpectrum:
    """Raw spectrum analyzer trace with its dark and shot references.

    ``dark_variance`` and ``shot_reference`` may be scalars (flat references)
    or full traces on the same frequency grid.  ``series`` names the measured
    quantity, e.g. "sum_s2" or "cond_s3".
    """

    frequency_hz: np.ndarray
    variance: np.ndarray
    dark_variance: np.ndarray
    shot_reference: np.ndarray
    traces_averaged: int = 1
    rbw_hz: float = 300e3
    vbw_hz: float = 300.0
    series: str = ""

    def __post_init__(self):
        freq = _as_grid(self.frequency_hz)
        n = freq.size
        object.__setattr__(self, "frequency_hz", freq)
        for name in ("variance", "dark_variance", "shot_reference"):
            object.__setattr__(self, name, _as_grid(getattr(self, name), n, name))
        if self.traces_averaged < 1:
            raise ValueError("traces_averaged must be >= 1")
        if self.rbw_hz <= 0 or self.vbw_hz <= 0:
            raise ValueError("bandwidths must be positive")


@dataclass(frozen=True)
class CalibratedSeries:
    """Shot-normalized series with per-point quality flags."""

    frequency_hz: np.ndarray
    value: np.ndarray
    low_headroom: np.ndarray
    invalid: np.ndarray
    series: str = ""


def calibrate(measured: MeasuredSpectrum) -> CalibratedSeries:
    """Dark-corrected, shot-normalized variance: (V - D) / (S - D) per point.

    Points within 4.5 dB of the dark noise are flagged ``low_headroom``;
    points whose corrected value is non-positive (trace at or below dark, or a
    shot reference at or below dark) are flagged ``invalid`` and carry NaN.
    """
    dark = measured.dark_variance
    corrected_shot = measured.shot_reference - dark
    corrected = measured.variance - dark
    with np.errstate(divide="ignore", invalid="ignore"):
        value = corrected / corrected_shot
        headroom_db = 10.0 * np.log10(measured.variance / dark)
    low_headroom = np.where(dark > 0, headroom_db < HEADROOM_DB, False)
    invalid = (corrected <= 0) | (corrected_shot <= 0)
    value = np.where(invalid, np.nan, value)
    return CalibratedSeries(
        measured.frequency_hz, value, np.asarray(low_headroom, bool), invalid, measured.series
    )


@dataclass(frozen=True)
class Spectrum:
    """Frequency grid with named series and provenance metadata.

    ``series`` maps names to float arrays and ``flags`` to string or bool
    arrays on the same grid; ``provenance`` records at least the config hash
    and whether calibration was applied.
    """

    frequency_hz: np.ndarray
    series: dict
    flags: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        freq = _as_grid(self.frequency_hz)
        object.__setattr__(self, "frequency_hz", freq)
        for name, values in list(self.series.items()):
            arr = np.asarray(values, dtype=float)
            if arr.shape != freq.shape:
                raise ValueError(f"series {name!r} does not match the frequency grid")
            self.series[name] = arr
        for name, values in list(self.flags.items()):
            arr = np.asarray(values)
            if arr.shape != freq.shape:
                raise ValueError(f"flag {name!r} does not match the frequency grid")
            self.flags[name] = arr


@dataclass(frozen=True)
class SeriesBundle:
    """Calibrated input of :func:`criteria_from_spectra`.

    ``sum_diff`` maps Stokes indices to two-beam sum-or-difference variance
    series normalized to the two-beam shot level; ``conditional`` maps indices
    to conditional variance series normalized to the single-beam shot level
    (optional, needed only for the EPR output).  The mean-field parameters fix
    the normalization constants.
    """

    frequency_hz: np.ndarray
    sum_diff: dict
    alpha_h: float
    alpha_v: float
    theta: float
    conditional: dict = field(default_factory=dict)

    def __post_init__(self):
        freq = _as_grid(self.frequency_hz)
        object.__setattr__(self, "frequency_hz", freq)
        for table in (self.sum_diff, self.conditional):
            for i, values in list(table.items()):
                table[i] = _as_grid(values, freq.size, f"series S{i}")


def _bright_means(alpha_h, alpha_v, theta):
    return np.array(
        [
            alpha_h**2 + alpha_v**2,
            alpha_h**2 - alpha_v**2,
            2.0 * math.cos(theta) * alpha_h * alpha_v,
            2.0 * math.sin(theta) * alpha_h * alpha_v,
        ]
    )


def criteria_from_spectra(bundle: SeriesBundle, pair=(2, 3)) -> Spectrum:
    """Inseparability (and EPR, when conditional data exist) spectra for a pair.

    Applies the same normalization as the direct criteria: variances are
    rescaled from shot units by the bright <S0>, the bound is 2 |<[S_i,S_j]>| =
    4 |<S_k>|, and a degenerate |<S_k>| (below 1e-6 of <S0>) makes every point
    unverifiable (inf value) rather than producing a spurious number.
    """
    i, j = pair
    if (i, j) not in COMPLEMENT:
        raise ValueError("Stokes pair must be one of (1,2), (1,3), (2,3)")
    for idx in (i, j):
        if idx not in bundle.sum_diff:
            raise ValueError(f"bundle is missing the sum/diff series for S{idx}")
    means = _bright_means(bundle.alpha_h, bundle.alpha_v, bundle.theta)
    s0 = means[0]
    comm = 2.0 * abs(means[COMPLEMENT[(i, j)]])
    degenerate = abs(means[COMPLEMENT[(i, j)]]) < COMMUTATOR_FLOOR * max(s0, 1e-300)

    n = bundle.frequency_hz.size
    series = {}
    flags = {}
    di = bundle.sum_diff[i] * 2.0 * s0
    dj = bundle.sum_diff[j] * 2.0 * s0
    if degenerate:
        insep = np.full(n, np.inf)
        status = np.full(n, "unverifiable", dtype=object)
    else:
        insep = (di + dj) / (2.0 * comm)
        status = np.where(insep < 1.0, "entangled", "not_demonstrated").astype(object)
        status[~np.isfinite(insep)] = "unverifiable"
    series[f"inseparability_s{i}s{j}"] = insep
    flags[f"status_inseparability_s{i}s{j}"] = status

    if i in bundle.conditional and j in bundle.conditional:
        cv_i = bundle.conditional[i] * s0
        cv_j = bundle.conditional[j] * s0
        if degenerate:
            epr = np.full(n, np.inf)
            estatus = np.full(n, "unverifiable", dtype=object)
        else:
            epr = 4.0 * cv_i * cv_j / comm**2
            estatus = np.where(epr < 1.0, "entangled", "not_demonstrated").astype(object)
            estatus[~np.isfinite(epr)] = "unverifiable"
        series[f"epr_s{i}s{j}"] = epr
        flags[f"status_epr_s{i}s{j}"] = estatus

    return Spectrum(
        bundle.frequency_hz,
        series,
        flags,
        {
            "calibration_applied": True,
            "alpha_h": bundle.alpha_h,
            "alpha_v": bundle.alpha_v,
            "theta": bundle.theta,
            "pair": (i, j),
        },
    )
