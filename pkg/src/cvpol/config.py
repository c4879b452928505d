"""Run configuration: TOML schema, loading, and provenance hashing.

Dimensionful keys carry their unit in the name (``corner_frequency_hz``,
``theta_x_rad``); dimensionless variances are in shot-noise units.  The
sha256 of the raw file bytes travels into every exported artifact so a run
can be traced back to its exact configuration.

Schema::

    [squeezer]                       # input a, and input b unless overridden
    squeezed_variance = 0.44        # best value, shot units
    antisqueezed_variance = 2.4     # optional, defaults to 1/squeezed
    corner_frequency_hz = 1.9e7     # optional Lorentzian rolloff
    relaxation_shot_units = 0.0     # optional low-frequency noise
    relaxation_ref_hz = 1.0e6

    [squeezer_b]                     # optional second input, same keys

    [mixing]                         # optional
    transmittance = 0.5
    phase_rad = 1.5707963267948966

    [beams]
    alpha_h = 2.0
    alpha_v = 11.0
    theta_x_rad = 1.5707963267948966
    theta_y_rad = 1.5707963267948966

    [chain]                          # optional
    propagation_efficiency = 0.99
    mode_match_efficiency = 0.98
    detection_efficiency = 0.86
    mode_match_on_h = true
    electronic_noise_shot_units = 0.0

    [analysis]                       # optional
    frequency_start_hz = 2.0e6       # grid as start/stop/points ...
    frequency_stop_hz = 1.0e7
    frequency_points = 81
    frequencies_hz = [2.0e6, 3.0e6]  # ... or explicit (wins when present)
    frequency_hz = 6.8e6             # single-point analyses (poincare)
    stokes_pair = [2, 3]
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib

from .experiment import ExperimentConfig, SqueezerSpec

__all__ = ["AnalysisSettings", "LoadedConfig", "load_config", "load_params", "ConfigError"]


class ConfigError(ValueError):
    """Malformed or incomplete configuration file."""


@dataclass(frozen=True)
class AnalysisSettings:
    """Analysis choices that sit outside the physical model."""

    stokes_pair: tuple = (2, 3)
    frequency_hz: float | None = None


@dataclass(frozen=True)
class LoadedConfig:
    experiment: ExperimentConfig
    analysis: AnalysisSettings
    config_hash: str
    raw: dict


def _section(data: dict, name: str, required: bool) -> dict:
    section = data.get(name)
    if section is None:
        if required:
            raise ConfigError(f"missing [{name}] section")
        return {}
    if not isinstance(section, dict):
        raise ConfigError(f"[{name}] must be a table")
    return dict(section)


def _take(section: dict, key: str, default=None, required=False):
    if key in section:
        return section.pop(key)
    if required:
        raise ConfigError(f"missing required key {key!r}")
    return default


def _no_leftovers(section: dict, name: str):
    if section:
        raise ConfigError(f"unknown keys in [{name}]: {sorted(section)}")


def _squeezer_from(section: dict, name: str) -> SqueezerSpec:
    spec = SqueezerSpec(
        squeezed_variance=float(_take(section, "squeezed_variance", required=True)),
        antisqueezed_variance=(
            None if (va := _take(section, "antisqueezed_variance")) is None else float(va)
        ),
        corner_frequency_hz=float(_take(section, "corner_frequency_hz", math.inf)),
        relaxation_shot_units=float(_take(section, "relaxation_shot_units", 0.0)),
        relaxation_ref_hz=float(_take(section, "relaxation_ref_hz", 1e6)),
    )
    _no_leftovers(section, name)
    return spec


def _check_pair(pair) -> tuple:
    pair = tuple(int(v) for v in pair)
    if pair not in ((1, 2), (1, 3), (2, 3)):
        raise ConfigError("stokes_pair must be one of [1,2], [1,3], [2,3]")
    return pair


def load_config(path) -> LoadedConfig:
    """Parse and validate a TOML run configuration; see the module docstring."""
    with open(path, "rb") as fh:
        blob = fh.read()
    digest = hashlib.sha256(blob).hexdigest()
    try:
        data = tomllib.loads(blob.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None

    sq = _section(data, "squeezer", required=True)
    sq_b = _section(data, "squeezer_b", required=False)
    mixing = _section(data, "mixing", required=False)
    beams = _section(data, "beams", required=True)
    chain = _section(data, "chain", required=False)
    analysis = _section(data, "analysis", required=False)
    known = {"squeezer", "squeezer_b", "mixing", "beams", "chain", "analysis"}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown sections: {sorted(extra)}")

    try:
        spec_a = _squeezer_from(sq, "squeezer")
        spec_b = _squeezer_from(sq_b, "squeezer_b") if sq_b else spec_a

        theta_x = float(_take(beams, "theta_x_rad", math.pi / 2))
        theta_y = float(_take(beams, "theta_y_rad", theta_x))
        single_point = _take(analysis, "frequency_hz")
        explicit = _take(analysis, "frequencies_hz")
        if explicit is None:
            start = float(_take(analysis, "frequency_start_hz", 2.0e6))
            stop = float(_take(analysis, "frequency_stop_hz", 10.0e6))
            points = int(_take(analysis, "frequency_points", 81))
            if points < 1:
                raise ConfigError("frequency_points must be >= 1")
            if start <= 0 or (points > 1 and stop <= start):
                raise ConfigError("frequency grid must be positive and ordered")
            grid = np.linspace(start, stop, points) if points > 1 else np.array([start])
        else:
            for key in ("frequency_start_hz", "frequency_stop_hz", "frequency_points"):
                _take(analysis, key)
            grid = np.asarray([float(f) for f in explicit])

        experiment = ExperimentConfig(
            squeezer_a=spec_a,
            squeezer_b=spec_b,
            alpha_h=float(_take(beams, "alpha_h", required=True)),
            alpha_v=float(_take(beams, "alpha_v", required=True)),
            theta_x=theta_x,
            theta_y=theta_y,
            mixing_transmittance=float(_take(mixing, "transmittance", 0.5)),
            mixing_phase=float(_take(mixing, "phase_rad", math.pi / 2)),
            mode_match_efficiency=float(_take(chain, "mode_match_efficiency", 1.0)),
            detection_efficiency=float(_take(chain, "detection_efficiency", 1.0)),
            propagation_efficiency=float(_take(chain, "propagation_efficiency", 1.0)),
            mode_match_on_h=bool(_take(chain, "mode_match_on_h", True)),
            electronic_noise_shot_units=float(_take(chain, "electronic_noise_shot_units", 0.0)),
            frequencies_hz=tuple(grid),
            analysis_frequency_hz=None if single_point is None else float(single_point),
        )
        _no_leftovers(mixing, "mixing")
        _no_leftovers(beams, "beams")
        _no_leftovers(chain, "chain")

        settings = AnalysisSettings(
            stokes_pair=_check_pair(_take(analysis, "stokes_pair", [2, 3])),
            frequency_hz=experiment.analysis_frequency_hz,
        )
        _no_leftovers(analysis, "analysis")
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{path}: {exc}") from None

    return LoadedConfig(experiment, settings, digest, data)


def load_params(path) -> dict:
    """Mean-field parameters for criteria evaluation from measured spectra.

    Schema::

        [params]
        alpha_h = 1.0
        alpha_v = 5.5
        theta_rad = 1.5707963267948966
        stokes_pair = [2, 3]

    Returns a dict with keys alpha_h, alpha_v, theta, stokes_pair.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    try:
        data = tomllib.loads(blob.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    section = _section(data, "params", required=True)
    try:
        out = {
            "alpha_h": float(_take(section, "alpha_h", required=True)),
            "alpha_v": float(_take(section, "alpha_v", required=True)),
            "theta": float(_take(section, "theta_rad", math.pi / 2)),
        }
        pair = _check_pair(_take(section, "stokes_pair", [2, 3]))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{path}: {exc}") from None
    out["stokes_pair"] = pair
    _no_leftovers(section, "params")
    return out
