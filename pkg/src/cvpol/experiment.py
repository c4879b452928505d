"""Builders for the polarization entanglement experiment.

The source is a pair of amplitude-squeezed inputs interfered on a mixing
beam splitter (balanced, pi/2 relative phase by default), which produces
quadrature entanglement: Delta^2(X+_x + X+_y) = Delta^2(X-_x - X-_y) = 2 Vs
for pure inputs with squeezed variance Vs (which combination carries the
correlation is a sign convention; the criteria take the tighter one).  Each entangled mode becomes the H
component of a polarized beam; the V component is an independent bright mode
combined on a polarizer.  All bright amplitudes are quoted at the detectors,
so displacements are applied after the loss chain.

Squeezer imperfections are frequency dependent: the squeezed and antisqueezed
variances follow a Lorentzian cavity rolloff, and low-frequency relaxation
noise enters both squeezers from a common pump, so it is injected with shared
correlation tags.

Loss maps commute in their effect on the final covariance, but the chain
order is fixed anyway so intermediate states are reproducible: propagation,
then mode matching, then detector efficiency, then electronic noise.  By
default the mode-matching loss sits on the entangled H modes before the
polarizer instead (``mode_match_on_h``), where it physically belongs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gaussian import (
    GaussianState,
    add_classical_noise,
    attach_vacuum,
    beam_splitter,
    displace,
    loss,
    squeeze,
    vacuum_state,
)
from .stokes import (
    COMPLEMENT,
    STOKES_PAIRS,
    PolarizedBeam,
    same_state,
    stokes_means,
)
from .criteria import conditional_variance, stokes_criterion, stokes_pair_stats, sum_diff_variance
from .spectra import MeasuredSpectrum, Spectrum

__all__ = [
    "SqueezerSpec",
    "ExperimentConfig",
    "ThreeStokesConfig",
    "AuditReport",
    "build_quad_entangler",
    "build_polarization_pair",
    "build_three_stokes",
    "apply_detection_chain",
    "assumption_audit",
    "sweep_spectrum",
    "simulate_measured_series",
]

SQRT3 = math.sqrt(3.0)
BRIGHT_FLUX = 100.0  # photon flux below which the linearization is suspect


@dataclass(frozen=True)
class SqueezerSpec:
    """Frequency model of one squeezer in shot-noise units.

    ``squeezed_variance`` and ``antisqueezed_variance`` are the best values,
    reached below the cavity linewidth (just above the relaxation band); both
    roll off toward shot noise above the Lorentzian ``corner_frequency_hz``.
    Relaxation noise scales as ``relaxation_shot_units * (relaxation_ref_hz /
    f)**2`` and is common to both squeezers.
    """

    squeezed_variance: float
    antisqueezed_variance: float | None = None
    corner_frequency_hz: float = math.inf
    relaxation_shot_units: float = 0.0
    relaxation_ref_hz: float = 1e6

    def __post_init__(self):
        if not 0.0 < self.squeezed_variance <= 1.0:
            raise ValueError("squeezed variance must lie in (0, 1]")
        if self.antisqueezed_variance is None:
            object.__setattr__(self, "antisqueezed_variance", 1.0 / self.squeezed_variance)
        if self.antisqueezed_variance < 1.0 / self.squeezed_variance - 1e-12:
            raise ValueError("antisqueezed variance below the uncertainty limit")
        if self.relaxation_shot_units < 0:
            raise ValueError("relaxation noise must be non-negative")

    def squeezed_at(self, frequency_hz: float) -> float:
        rolloff = 1.0 / (1.0 + (frequency_hz / self.corner_frequency_hz) ** 2)
        return 1.0 - (1.0 - self.squeezed_variance) * rolloff

    def antisqueezed_at(self, frequency_hz: float) -> float:
        rolloff = 1.0 / (1.0 + (frequency_hz / self.corner_frequency_hz) ** 2)
        return 1.0 + (self.antisqueezed_variance - 1.0) * rolloff

    def relaxation_at(self, frequency_hz: float) -> float:
        if self.relaxation_shot_units == 0.0:
            return 0.0
        return self.relaxation_shot_units * (self.relaxation_ref_hz / frequency_hz) ** 2


def _check_grid(frequencies):
    grid = tuple(float(f) for f in frequencies)
    if any(f <= 0 for f in grid):
        raise ValueError("frequencies must be positive")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("frequency grid must be strictly increasing")
    return grid


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings of the polarization pair, amplitudes quoted at the detectors.

    ``squeezer_a`` and ``squeezer_b`` model the two inputs of the mixing beam
    splitter (``mixing_transmittance``, ``mixing_phase``).  The loss budget is
    split into propagation, mode matching at the combining polarizer, and
    detector quantum efficiency; ``mode_match_on_h`` keeps the mode-matching
    loss on the entangled H modes before combination (its physical location)
    rather than inside the per-detector chain.
    """

    squeezer_a: SqueezerSpec
    squeezer_b: SqueezerSpec
    alpha_h: float
    alpha_v: float
    theta_x: float = math.pi / 2
    theta_y: float = math.pi / 2
    mixing_transmittance: float = 0.5
    mixing_phase: float = math.pi / 2
    mode_match_efficiency: float = 1.0
    detection_efficiency: float = 1.0
    propagation_efficiency: float = 1.0
    mode_match_on_h: bool = True
    electronic_noise_shot_units: float = 0.0
    frequencies_hz: tuple = ()
    analysis_frequency_hz: float | None = None

    def __post_init__(self):
        for name in ("mode_match_efficiency", "detection_efficiency",
                     "propagation_efficiency", "mixing_transmittance"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.alpha_h < 0 or self.alpha_v < 0:
            raise ValueError("amplitudes must be non-negative; phases live in theta")
        if self.electronic_noise_shot_units < 0:
            raise ValueError("electronic noise must be non-negative")
        object.__setattr__(self, "frequencies_hz", _check_grid(self.frequencies_hz))

    @classmethod
    def ideal(cls, squeezed_variance: float = 1.0, alpha_h: float = 0.0,
              alpha_v: float = 0.0, antisqueezed_variance: float | None = None, **overrides):
        """Lossless config with two identical squeezers; 1.0 means no squeezing."""
        spec = SqueezerSpec(squeezed_variance, antisqueezed_variance)
        return cls(squeezer_a=spec, squeezer_b=spec, alpha_h=alpha_h, alpha_v=alpha_v, **overrides)


def _entangler_state(spec_a: SqueezerSpec, spec_b: SqueezerSpec,
                     transmittance: float, phase: float,
                     frequency_hz: float | None) -> GaussianState:
    state = vacuum_state(2)
    for mode, spec in ((0, spec_a), (1, spec_b)):
        if frequency_hz is None:
            vs, va, relax = spec.squeezed_variance, spec.antisqueezed_variance, 0.0
        else:
            vs = spec.squeezed_at(frequency_hz)
            va = spec.antisqueezed_at(frequency_hz)
            relax = spec.relaxation_at(frequency_hz)
        state = squeeze(state, mode, vs, 0.0)
        excess = va - 1.0 / vs
        if excess > 0:
            state = add_classical_noise(state, mode, math.pi / 2, excess)
        if relax > 0:
            # common pump: same tag on both inputs -> fully correlated
            state = add_classical_noise(state, mode, 0.0, relax, "relaxation_plus")
            state = add_classical_noise(state, mode, math.pi / 2, relax, "relaxation_minus")
    return beam_splitter(state, 0, 1, transmittance, phase)


def build_quad_entangler(config: ExperimentConfig, frequency_hz: float | None = None) -> GaussianState:
    """Two-mode quadrature-entangled state from the two squeezed inputs.

    Both inputs are squeezed in X+; impurity (antisqueezing above 1/Vs) is
    classical noise on X-, and relaxation noise is common-mode on both
    quadratures of both inputs before the mixing splitter.  ``frequency_hz``
    of None evaluates the squeezer models at their best values.
    """
    if frequency_hz is None:
        frequency_hz = config.analysis_frequency_hz
    return _entangler_state(config.squeezer_a, config.squeezer_b,
                            config.mixing_transmittance, config.mixing_phase, frequency_hz)


def apply_detection_chain(state: GaussianState, config: ExperimentConfig, modes=None,
                          include_mode_match: bool = True) -> GaussianState:
    """Detection chain: propagation, mode match, detector loss, electronic noise.

    Electronic noise is dark noise referenced to the optical shot level,
    uncorrelated between quadratures and between detectors.  Mode matching is
    skipped when the caller has already placed it elsewhere.
    """
    if modes is None:
        modes = range(state.n_modes)
    etas = [config.propagation_efficiency]
    if include_mode_match:
        etas.append(config.mode_match_efficiency)
    etas.append(config.detection_efficiency)
    for mode in modes:
        for eta in etas:
            if eta < 1.0:
                state = loss(state, mode, eta)
        if config.electronic_noise_shot_units > 0:
            state = add_classical_noise(state, mode, 0.0, config.electronic_noise_shot_units)
            state = add_classical_noise(state, mode, math.pi / 2, config.electronic_noise_shot_units)
    return state


def build_polarization_pair(config: ExperimentConfig, frequency_hz: float | None = None):
    """Polarization-entangled beam pair; returns ``(state, beam_x, beam_y)``.

    Modes 0/1 are the H components carrying the quadrature entanglement,
    modes 2/3 the bright V components.  With ``mode_match_on_h`` the
    mode-matching loss acts on H alone before the polarizer and the
    detection chain applies propagation and detector loss to all modes;
    otherwise all three losses sit in the chain.
    """
    if frequency_hz is None:
        frequency_hz = config.analysis_frequency_hz
    state = build_quad_entangler(config, frequency_hz)
    if config.mode_match_on_h and config.mode_match_efficiency < 1.0:
        state = loss(state, 0, config.mode_match_efficiency)
        state = loss(state, 1, config.mode_match_efficiency)
    state = attach_vacuum(state, 2)
    state = apply_detection_chain(state, config, range(4),
                                  include_mode_match=not config.mode_match_on_h)
    for mode, amp in ((0, config.alpha_h), (1, config.alpha_h),
                      (2, config.alpha_v), (3, config.alpha_v)):
        if amp != 0.0:
            state = displace(state, mode, 2.0 * amp, 0.0)
    beam_x = PolarizedBeam(state, 0, 2, config.theta_x)
    beam_y = PolarizedBeam(state, 1, 3, config.theta_y)
    return state, beam_x, beam_y


@dataclass(frozen=True)
class ThreeStokesConfig:
    """Two entangled pairs feeding both polarization components of two beams.

    ``squeezers`` are the four input squeezer specs (H pair then V pair).  The
    amplitude split alpha_H^2 = (sqrt(3)+1)/2 * alpha_sq, alpha_V^2 =
    (sqrt(3)-1)/2 * alpha_sq together with theta_x = -theta_y = pi/4 makes
    |<S1>| = |<S2>| = |<S3>| = alpha_sq on each beam; ``alpha_h``/``alpha_v``
    override the split (breaking that symmetry).  The relative phases must
    satisfy theta_x = -theta_y + m*pi, the stationary condition of the
    three-way criterion minimization.
    """

    squeezers: tuple
    alpha_sq: float = 100.0
    theta_x: float = math.pi / 4
    theta_y: float = -math.pi / 4
    alpha_h: float | None = None
    alpha_v: float | None = None
    mixing_transmittance: float = 0.5
    mixing_phase: float = math.pi / 2

    def __post_init__(self):
        if len(self.squeezers) != 4 or not all(isinstance(s, SqueezerSpec) for s in self.squeezers):
            raise ValueError("need four SqueezerSpec inputs (H pair then V pair)")
        object.__setattr__(self, "squeezers", tuple(self.squeezers))
        if self.alpha_sq <= 0:
            raise ValueError("alpha_sq must be positive")
        if abs(math.remainder(self.theta_x + self.theta_y, math.pi)) > 1e-9:
            raise ValueError("relative phases must satisfy theta_x = -theta_y + m*pi")

    @classmethod
    def pure(cls, squeezed_variance: float, alpha_sq: float = 100.0,
             antisqueezed_variance: float | None = None, **overrides):
        spec = SqueezerSpec(squeezed_variance, antisqueezed_variance)
        return cls(squeezers=(spec,) * 4, alpha_sq=alpha_sq, **overrides)


def build_three_stokes(config: ThreeStokesConfig, frequency_hz: float | None = None):
    """Beam pair entangled in S1, S2 and S3 simultaneously.

    Uses two entangled pairs (H pair modes 0/1, V pair modes 2/3) so that every
    pairwise Stokes combination inherits the two-beam quadrature correlations.
    Returns ``(state, beam_x, beam_y)`` with beams (0, 2) and (1, 3).
    """
    ent_h = _entangler_state(config.squeezers[0], config.squeezers[1],
                             config.mixing_transmittance, config.mixing_phase, frequency_hz)
    ent_v = _entangler_state(config.squeezers[2], config.squeezers[3],
                             config.mixing_transmittance, config.mixing_phase, frequency_hz)
    mean = np.zeros(8)
    cov = np.eye(8)
    cov[:4, :4] = ent_h.cov
    cov[4:, 4:] = ent_v.cov
    state = GaussianState(mean, cov)
    alpha_h = config.alpha_h
    alpha_v = config.alpha_v
    if alpha_h is None:
        alpha_h = math.sqrt((SQRT3 + 1.0) / 2.0 * config.alpha_sq)
    if alpha_v is None:
        alpha_v = math.sqrt((SQRT3 - 1.0) / 2.0 * config.alpha_sq)
    for mode, amp in ((0, alpha_h), (1, alpha_h), (2, alpha_v), (3, alpha_v)):
        if amp != 0.0:
            state = displace(state, mode, 2.0 * amp, 0.0)
    beam_x = PolarizedBeam(state, 0, 2, config.theta_x)
    beam_y = PolarizedBeam(state, 1, 3, config.theta_y)
    return state, beam_x, beam_y


@dataclass(frozen=True)
class AuditReport:
    """Residuals of the assumptions behind the two-beam Stokes criteria.

    The criteria derivations take the beams as interchangeable (equal
    amplitudes, equal H and V quadrature variances, phases related by
    theta_x = +/-theta_y + m*pi), the H and V components of each beam as
    uncorrelated, and the internal X+/X- correlations of every mode as zero.
    All residuals are non-negative; amplitude residuals are absolute
    amplitude differences, variance and correlation residuals are in shot
    units.  ``degenerate_pairs`` lists the Stokes pairs whose commutator mean
    vanishes on either beam, and ``bright_limit_warning`` is set when the
    vertical carrier is too dim (flux below 100) for the dropped
    second-order terms to be negligible.
    """

    amplitude_h_residual: float
    amplitude_v_residual: float
    variance_h_residual: float
    variance_v_residual: float
    cross_correlation_residual: float
    internal_correlation_residual: float
    theta_relation_residual: float
    degenerate_pairs: tuple
    bright_limit_warning: bool

    def residuals(self) -> dict:
        return {
            "amplitude_h": self.amplitude_h_residual,
            "amplitude_v": self.amplitude_v_residual,
            "variance_h": self.variance_h_residual,
            "variance_v": self.variance_v_residual,
            "cross_correlation": self.cross_correlation_residual,
            "internal_correlation": self.internal_correlation_residual,
            "theta_relation": self.theta_relation_residual,
        }

    def ok(self, tol: float = 1e-6) -> bool:
        return max(self.residuals().values()) <= tol and not self.bright_limit_warning


def _mode_cov(state: GaussianState, mode: int) -> np.ndarray:
    sl = state.block(mode)
    return state.cov[sl, sl]


def assumption_audit(beam_x: PolarizedBeam, beam_y: PolarizedBeam) -> AuditReport:
    """Audit whether two beams satisfy the criteria assumptions.

    Checks beam interchangeability (amplitudes and quadrature variances of the
    matching polarization components), vanishing H-V cross correlations within
    each beam, vanishing internal X+/X- correlations of every mode, and the
    theta relation; flags degenerate Stokes pairs and dim beams.
    """
    if not same_state(beam_x, beam_y):
        raise ValueError("beams must live on the same underlying state")
    state = beam_x.state
    amp_h = abs(beam_x.alpha_h - beam_y.alpha_h)
    amp_v = abs(beam_x.alpha_v - beam_y.alpha_v)
    var_res = {}
    for tag, mode_x, mode_y in (("h", beam_x.h_mode, beam_y.h_mode),
                                ("v", beam_x.v_mode, beam_y.v_mode)):
        cx = _mode_cov(state, mode_x)
        cy = _mode_cov(state, mode_y)
        var_res[tag] = float(max(abs(cx[0, 0] - cy[0, 0]), abs(cx[1, 1] - cy[1, 1])))
    cross = 0.0
    for beam in (beam_x, beam_y):
        idx = beam.indices()
        block = state.cov[np.ix_(idx, idx)]
        cross = max(cross, float(np.max(np.abs(block[:2, 2:]))))
    internal = 0.0
    for mode in (beam_x.h_mode, beam_x.v_mode, beam_y.h_mode, beam_y.v_mode):
        internal = max(internal, abs(float(_mode_cov(state, mode)[0, 1])))
    theta_res = min(
        abs(math.remainder(beam_x.theta - s * beam_y.theta, math.pi)) for s in (1.0, -1.0)
    )
    degenerate = []
    for pair in STOKES_PAIRS:
        k = COMPLEMENT[pair]
        for beam in (beam_x, beam_y):
            bright = stokes_means(beam, "bright_limit")
            if abs(bright[k]) < 1e-6 * max(bright[0], 1e-300):
                degenerate.append(pair)
                break
    # the expansions drop terms relative to the V carrier, so that is what
    # must be bright; a dim H component is a legitimate operating regime
    v_flux = min(beam_x.alpha_v**2, beam_y.alpha_v**2)
    return AuditReport(
        amplitude_h_residual=amp_h,
        amplitude_v_residual=amp_v,
        variance_h_residual=var_res["h"],
        variance_v_residual=var_res["v"],
        cross_correlation_residual=cross,
        internal_correlation_residual=internal,
        theta_relation_residual=theta_res,
        degenerate_pairs=tuple(degenerate),
        bright_limit_warning=bool(v_flux < BRIGHT_FLUX),
    )


def sweep_spectrum(config: ExperimentConfig, pairs=((2, 3),)) -> Spectrum:
    """Criteria spectrum over the config's frequency grid.

    For each requested Stokes pair the sum inseparability and the EPR degree
    are evaluated at every grid frequency; the squeezer model variances ride
    along for reference.  Statuses land in the Spectrum flags.
    """
    grid = np.asarray(config.frequencies_hz, dtype=float)
    if grid.size == 0:
        raise ValueError("config carries an empty frequency grid")
    pairs = [(int(i), int(j)) for i, j in pairs]
    series = {
        "squeezed_variance_a": [], "antisqueezed_variance_a": [], "relaxation_variance_a": [],
        "squeezed_variance_b": [], "antisqueezed_variance_b": [], "relaxation_variance_b": [],
    }
    flags = {}
    for i, j in pairs:
        series[f"inseparability_s{i}s{j}"] = []
        series[f"epr_s{i}s{j}"] = []
        flags[f"status_inseparability_s{i}s{j}"] = []
        flags[f"status_epr_s{i}s{j}"] = []
    for f in grid:
        for tag, spec in (("a", config.squeezer_a), ("b", config.squeezer_b)):
            series[f"squeezed_variance_{tag}"].append(spec.squeezed_at(f))
            series[f"antisqueezed_variance_{tag}"].append(spec.antisqueezed_at(f))
            series[f"relaxation_variance_{tag}"].append(spec.relaxation_at(f))
        _, beam_x, beam_y = build_polarization_pair(config, float(f))
        for pair in pairs:
            i, j = pair
            insep = stokes_criterion(beam_x, beam_y, pair, "inseparability", "sum")
            epr = stokes_criterion(beam_x, beam_y, pair, "epr")
            series[f"inseparability_s{i}s{j}"].append(insep.value)
            series[f"epr_s{i}s{j}"].append(epr.value)
            flags[f"status_inseparability_s{i}s{j}"].append(insep.status)
            flags[f"status_epr_s{i}s{j}"].append(epr.status)
    return Spectrum(
        frequency_hz=grid,
        series={k: np.asarray(v) for k, v in series.items()},
        flags={k: np.asarray(v) for k, v in flags.items()},
        provenance={"kind": "model_sweep", "pairs": [list(p) for p in pairs]},
    )


def simulate_measured_series(config: ExperimentConfig, pair=(2, 3), dark_power: float = 0.1,
                             shot_power: float = 1.0, traces_averaged: int = 1) -> dict:
    """Synthesize analyzer-style raw traces of the criteria inputs.

    Produces, over the config grid, the two-beam sum/difference variances of
    the Stokes pair normalized to their shot level (2 <S0>) and the optimal
    conditional variances normalized to the single-beam shot level (<S0>),
    each embedded in a raw power trace ``dark + (shot - dark) * value`` so
    that the calibration arithmetic recovers the value exactly.  Returns
    ``{"sum_s<i>": MeasuredSpectrum, ..., "cond_s<j>": ...}``.
    """
    if not dark_power < shot_power:
        raise ValueError("shot power must exceed dark power")
    i, j = int(pair[0]), int(pair[1])
    grid = np.asarray(config.frequencies_hz, dtype=float)
    if grid.size == 0:
        raise ValueError("config carries an empty frequency grid")
    rows = {f"sum_s{i}": [], f"sum_s{j}": [], f"cond_s{i}": [], f"cond_s{j}": []}
    for f in grid:
        _, beam_x, beam_y = build_polarization_pair(config, float(f))
        stats_i, stats_j, _ = stokes_pair_stats(beam_x, beam_y, (i, j))
        s0 = 0.5 * (stokes_means(beam_x, "bright_limit")[0]
                    + stokes_means(beam_y, "bright_limit")[0])
        for idx, stats in ((i, stats_i), (j, stats_j)):
            rows[f"sum_s{idx}"].append(sum_diff_variance(stats)[0] / (2.0 * s0))
            rows[f"cond_s{idx}"].append(conditional_variance(stats)[0] / s0)
    out = {}
    for role, values in rows.items():
        values = np.asarray(values)
        out[role] = MeasuredSpectrum(
            frequency_hz=grid.copy(),
            variance=dark_power + (shot_power - dark_power) * values,
            dark_variance=np.full_like(grid, dark_power),
            shot_reference=np.full_like(grid, shot_power),
            traces_averaged=traces_averaged,
            series=role,
        )
    return out
