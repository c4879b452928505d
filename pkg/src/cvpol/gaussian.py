"""Gaussian states of optical modes and the symplectic circuit operations on them.

Conventions used throughout the package:

* Quadratures are shot-noise normalized: ``X+ = a + a^dag``, ``X- = i(a^dag - a)``,
  so the vacuum has unit variance in every quadrature and ``[X+, X-] = 2i``.
* A state of ``n`` modes carries a mean vector of length ``2n`` and a ``2n x 2n``
  symmetrized covariance matrix, both ordered ``(X+_1, X-_1, ..., X+_n, X-_n)``.
* A coherent amplitude ``alpha`` (real) appears as ``<X+> = 2 alpha``.
* The symplectic form is block diagonal with ``[[0, 1], [-1, 0]]`` per mode, and a
  covariance matrix is physical iff ``cov + i*Omega >= 0``.

Operations never mutate their input; each returns a new :class:`GaussianState`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GaussianState",
    "QuadratureRef",
    "vacuum_state",
    "displace",
    "phase_shift",
    "squeeze",
    "beam_splitter",
    "loss",
    "add_classical_noise",
    "attach_vacuum",
    "quadrature_moments",
    "physicality_check",
    "apply_symplectic",
    "symplectic_form",
    "phase_matrix",
    "squeeze_matrix",
    "beam_splitter_matrix",
]

PHYSICALITY_TOL = 1e-9


def symplectic_form(n_modes: int) -> np.ndarray:
    """Symplectic form Omega for ``n_modes`` modes, per-mode blocks [[0, 1], [-1, 0]]."""
    omega = np.zeros((2 * n_modes, 2 * n_modes))
    for m in range(n_modes):
        omega[2 * m, 2 * m + 1] = 1.0
        omega[2 * m + 1, 2 * m] = -1.0
    return omega


@dataclass(frozen=True)
class GaussianState:
    """Mean vector and covariance matrix of a multimode Gaussian state.

    ``noise_tags`` records classical-noise injections keyed by correlation tag so
    that later tagged injections can be correlated with earlier ones.  The stored
    vectors are ``sqrt(N) * u`` for injection direction ``u`` and are transformed
    alongside the state by every linear operation.
    """

    mean: np.ndarray
    cov: np.ndarray
    noise_tags: dict = field(default_factory=dict)

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        if mean.ndim != 1 or mean.size % 2 != 0:
            raise ValueError("mean vector must have length 2 * n_modes")
        if cov.shape != (mean.size, mean.size):
            raise ValueError("covariance shape does not match mean vector")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2

    def block(self, mode: int) -> slice:
        """Index slice of the (X+, X-) pair belonging to ``mode``."""
        if not 0 <= mode < self.n_modes:
            raise ValueError(f"mode index {mode} out of range for {self.n_modes} modes")
        return slice(2 * mode, 2 * mode + 2)


@dataclass(frozen=True)
class QuadratureRef:
    """Reference to the rotated quadrature ``X(angle) = cos(angle) X+ + sin(angle) X-``.

    ``angle`` is stored normalized to [0, 2pi); an angle of pi refers to the same
    measurement axis as 0 with inverted sign on the mean.
    """

    mode: int
    angle: float

    def __post_init__(self):
        object.__setattr__(self, "angle", float(self.angle) % (2.0 * math.pi))

    def direction(self, n_modes: int) -> np.ndarray:
        u = np.zeros(2 * n_modes)
        u[2 * self.mode] = math.cos(self.angle)
        u[2 * self.mode + 1] = math.sin(self.angle)
        return u


def _copy_tags(tags: dict) -> dict:
    return {k: [w.copy() for w in ws] for k, ws in tags.items()}


def _transform_tags(tags: dict, matrix: np.ndarray) -> dict:
    return {k: [matrix @ w for w in ws] for k, ws in tags.items()}


def vacuum_state(n_modes: int) -> GaussianState:
    """The ``n_modes``-mode vacuum: zero mean, identity covariance."""
    if n_modes < 1:
        raise ValueError("need at least one mode")
    return GaussianState(np.zeros(2 * n_modes), np.eye(2 * n_modes))


def displace(state: GaussianState, mode: int, dplus: float, dminus: float) -> GaussianState:
    """Shift the mean of ``mode`` by ``(dplus, dminus)``; covariance is untouched.

    A real coherent amplitude ``alpha`` corresponds to ``dplus = 2 * alpha``.
    """
    mean = state.mean.copy()
    b = state.block(mode)
    mean[b.start] += dplus
    mean[b.start + 1] += dminus
    return GaussianState(mean, state.cov.copy(), _copy_tags(state.noise_tags))


def phase_matrix(phase: float) -> np.ndarray:
    """2x2 quadrature rotation for ``a -> exp(i*phase) a``."""
    c, s = math.cos(phase), math.sin(phase)
    return np.array([[c, -s], [s, c]])


def squeeze_matrix(squeezed_variance: float, angle: float = 0.0) -> np.ndarray:
    """2x2 symplectic squeezer.

    On vacuum the quadrature at ``angle`` ends with variance ``squeezed_variance``
    and the conjugate quadrature with its inverse (minimum-uncertainty squeeze).
    """
    if squeezed_variance <= 0.0:
        raise ValueError("squeezed variance must be positive")
    r = math.sqrt(squeezed_variance)
    c, s = math.cos(angle), math.sin(angle)
    rot = np.array([[c, s], [-s, c]])
    return rot.T @ np.diag([r, 1.0 / r]) @ rot


def beam_splitter_matrix(transmittance: float, relative_phase: float = 0.0) -> np.ndarray:
    """4x4 symplectic beam-splitter matrix acting on modes (a, b).

    Mode ``b`` is first rotated by ``relative_phase`` and the pair is then mixed
    with the real orthogonal matrix ``[[t, -r], [r, t]]`` (``t = sqrt(T)``).  With
    ``relative_phase = 0`` and ``transmittance = 1`` this is the identity.
    """
    if not 0.0 <= transmittance <= 1.0:
        raise ValueError("transmittance must lie in [0, 1]")
    t = math.sqrt(transmittance)
    r = math.sqrt(1.0 - transmittance)
    eye = np.eye(2)
    mix = np.block([[t * eye, -r * eye], [r * eye, t * eye]])
    rot = np.block([[eye, np.zeros((2, 2))], [np.zeros((2, 2)), phase_matrix(relative_phase)]])
    return mix @ rot


def _embed(n_modes: int, matrix: np.ndarray, modes: tuple) -> np.ndarray:
    """Embed a small symplectic on ``modes`` into the full 2n x 2n identity."""
    full = np.eye(2 * n_modes)
    idx = np.concatenate([[2 * m, 2 * m + 1] for m in modes])
    full[np.ix_(idx, idx)] = matrix
    return full


def apply_symplectic(state: GaussianState, matrix: np.ndarray) -> GaussianState:
    """Apply a full-size symplectic matrix: mean -> S mean, cov -> S cov S^T."""
    if matrix.shape != (state.mean.size, state.mean.size):
        raise ValueError("symplectic matrix size does not match state")
    return GaussianState(
        matrix @ state.mean,
        matrix @ state.cov @ matrix.T,
        _transform_tags(state.noise_tags, matrix),
    )


def phase_shift(state: GaussianState, mode: int, phase: float) -> GaussianState:
    """Rotate ``mode`` by ``phase`` (``a -> exp(i*phase) a``)."""
    state.block(mode)
    return apply_symplectic(state, _embed(state.n_modes, phase_matrix(phase), (mode,)))


def squeeze(state: GaussianState, mode: int, squeezed_variance: float, angle: float = 0.0) -> GaussianState:
    """Squeeze ``mode`` so the quadrature at ``angle`` reaches ``squeezed_variance`` on vacuum."""
    state.block(mode)
    return apply_symplectic(
        state, _embed(state.n_modes, squeeze_matrix(squeezed_variance, angle), (mode,))
    )


def beam_splitter(
    state: GaussianState,
    mode_a: int,
    mode_b: int,
    transmittance: float,
    relative_phase: float = 0.0,
) -> GaussianState:
    """Interfere ``mode_a`` and ``mode_b`` on a beam splitter.

    See :func:`beam_splitter_matrix` for the phase convention.  Two equally
    amplitude-squeezed inputs mixed at transmittance 1/2 with relative phase pi/2
    leave with their joint ``X+`` sum and ``X-`` difference at twice the input
    squeezed variance (the criteria take the tighter sign, so only the labels
    depend on this convention).
    """
    if mode_a == mode_b:
        raise ValueError("beam splitter needs two distinct modes")
    state.block(mode_a)
    state.block(mode_b)
    bs = beam_splitter_matrix(transmittance, relative_phase)
    return apply_symplectic(state, _embed(state.n_modes, bs, (mode_a, mode_b)))


def loss(state: GaussianState, mode: int, transmittance: float) -> GaussianState:
    """Pure attenuation of ``mode``: transmittance ``eta`` mixes in ``(1 - eta)`` vacuum.

    Means scale by ``sqrt(eta)``, the mode's covariance block by ``eta`` with the
    identity filling in, and cross blocks by ``sqrt(eta)``.  Not symplectic.
    """
    if not 0.0 <= transmittance <= 1.0:
        raise ValueError("transmittance must lie in [0, 1]")
    b = state.block(mode)
    scale = np.ones(state.mean.size)
    scale[b] = math.sqrt(transmittance)
    return GaussianState(
        scale * state.mean,
        _lossy_cov(state.cov, b, transmittance),
        _transform_tags(state.noise_tags, np.diag(scale)),
    )


def _lossy_cov(cov: np.ndarray, b: slice, eta: float) -> np.ndarray:
    root = math.sqrt(eta)
    out = cov.copy()
    out[b, :] *= root
    out[:, b] *= root
    out[b.start, b.start] += 1.0 - eta
    out[b.start + 1, b.start + 1] += 1.0 - eta
    return out


def add_classical_noise(
    state: GaussianState,
    mode: int,
    angle: float,
    noise_variance: float,
    correlation_tag: str | None = None,
) -> GaussianState:
    """Add classical (always physical) noise to the quadrature of ``mode`` at ``angle``.

    When two calls share ``correlation_tag`` the injected noises are perfectly
    correlated: for equal variances the tagged quadratures gain a cross
    covariance of ``+noise_variance`` on top of their individual increases.
    """
    if noise_variance < 0.0:
        raise ValueError("noise variance must be non-negative")
    u = QuadratureRef(mode, angle).direction(state.n_modes)
    w = math.sqrt(noise_variance) * u
    cov = state.cov + noise_variance * np.outer(u, u)
    tags = _copy_tags(state.noise_tags)
    if correlation_tag is not None:
        for prev in tags.get(correlation_tag, []):
            cross = np.outer(w, prev)
            cov = cov + cross + cross.T
        tags.setdefault(correlation_tag, []).append(w)
    return GaussianState(state.mean.copy(), cov, tags)


def attach_vacuum(state: GaussianState, n_new: int = 1) -> GaussianState:
    """Tensor ``n_new`` vacuum modes onto the end of the state."""
    if n_new < 1:
        raise ValueError("need at least one new mode")
    old = state.mean.size
    new = old + 2 * n_new
    mean = np.zeros(new)
    mean[:old] = state.mean
    cov = np.eye(new)
    cov[:old, :old] = state.cov
    tags = {
        k: [np.concatenate([w, np.zeros(2 * n_new)]) for w in ws]
        for k, ws in state.noise_tags.items()
    }
    return GaussianState(mean, cov, tags)


def quadrature_moments(state: GaussianState, refs) -> tuple:
    """Means and covariance matrix of a set of rotated quadratures.

    Parameters
    ----------
    refs : sequence of QuadratureRef
        The quadratures to project onto.

    Returns
    -------
    (means, cov) : 1-D and 2-D arrays over the given references.
    """
    rows = np.array([r.direction(state.n_modes) for r in refs])
    return rows @ state.mean, rows @ state.cov @ rows.T


def physicality_check(state: GaussianState, tol: float = PHYSICALITY_TOL) -> tuple:
    """Test ``cov + i*Omega >= 0``.

    Returns ``(ok, worst_eigenvalue)`` where the worst eigenvalue is the smallest
    eigenvalue of the Hermitian matrix ``cov + i*Omega`` (0 for pure vacuum,
    negative means unphysical).  ``ok`` allows numerical dust down to ``-tol``.
    """
    herm = state.cov.astype(complex) + 1j * symplectic_form(state.n_modes)
    worst = float(np.linalg.eigvalsh(herm)[0])
    return worst >= -tol, worst
