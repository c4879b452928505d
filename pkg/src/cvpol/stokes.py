"""Stokes-operator statistics of a polarized two-mode beam.

A beam couples a horizontal and a vertical mode of a Gaussian state with a fixed
relative phase ``theta``.  The Stokes operators are, with ``theta`` inside the
operator definitions and both mean amplitudes real,

    S0 = aH^dag aH + aV^dag aV
    S1 = aH^dag aH - aV^dag aV
    S2 = aH^dag aV e^{i theta} + aV^dag aH e^{-i theta}
    S3 = i aV^dag aH e^{-i theta} - i aH^dag aV e^{i theta}

Every S_i is an exact quadratic form ``x^T A_i x + c_i`` in the beam's four
quadratures, which gives two evaluation routes:

* exact moments from the quantum moment (Wick) theorem with the complex
  second-moment matrix ``M = cov + i*Omega``;
* linearized (bright mean field) moments from the gradient ``v_i = 2 A_i mu``.

The commutation relations [S1, S2] = 2i S3 (and cyclic) are available through an
independent matrix route ``D_ij = A_i Omega A_j - A_j Omega A_i``, used by the
self-consistency checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gaussian import GaussianState, symplectic_form

__all__ = [
    "PolarizedBeam",
    "BeamConventionError",
    "StokesStats",
    "NoiseBall",
    "stokes_quadratic_form",
    "stokes_means",
    "stokes_lin_coeff",
    "stokes_lin_cov",
    "stokes_exact_var",
    "stokes_exact_cov",
    "stokes_commutator_exact",
    "stokes_commutators_lin",
    "correlation_functions",
    "poincare_radius",
    "stokes_stats",
    "noise_ball",
    "conditional_noise_ball",
    "same_state",
]

CONVENTION_TOL = 1e-9
DEGENERACY_EPS = 1e-12

STOKES_PAIRS = ((1, 2), (1, 3), (2, 3))
# third operator completing each pair under [S_i, S_j] = 2i S_k
COMPLEMENT = {(1, 2): 3, (1, 3): 2, (2, 3): 1}


class BeamConventionError(ValueError):
    """Beam mean field violates the real-amplitude convention."""


@dataclass(frozen=True)
class PolarizedBeam:
    """A polarized beam: H and V mode indices of a shared state plus their relative phase.

    The convention is that all of the beam's optical phase lives in ``theta``:
    the mean amplitudes must be real and non-negative (``<X-> = 0``,
    ``<X+> >= 0`` within 1e-9).  Pass ``check_convention=False`` to skip the
    audit, e.g. for frame-invariance tests on rotated copies.
    """

    state: GaussianState
    h_mode: int
    v_mode: int
    theta: float
    check_convention: bool = field(default=True, compare=False)

    def __post_init__(self):
        if self.h_mode == self.v_mode:
            raise ValueError("H and V must be distinct modes")
        self.state.block(self.h_mode)
        self.state.block(self.v_mode)
        if self.check_convention:
            for mode in (self.h_mode, self.v_mode):
                plus = self.state.mean[2 * mode]
                minus = self.state.mean[2 * mode + 1]
                scale = max(1.0, abs(plus))
                if abs(minus) > CONVENTION_TOL * scale or plus < -CONVENTION_TOL:
                    raise BeamConventionError(
                        f"mode {mode} mean ({plus:.3g}, {minus:.3g}) is not a real "
                        "non-negative amplitude; fold its phase into theta"
                    )

    @property
    def alpha_h(self) -> float:
        return self.state.mean[2 * self.h_mode] / 2.0

    @property
    def alpha_v(self) -> float:
        return self.state.mean[2 * self.v_mode] / 2.0

    def indices(self) -> np.ndarray:
        """Full-state row indices of (X+_H, X-_H, X+_V, X-_V)."""
        h, v = self.h_mode, self.v_mode
        return np.array([2 * h, 2 * h + 1, 2 * v, 2 * v + 1])


def same_state(beam_a: PolarizedBeam, beam_b: PolarizedBeam) -> bool:
    if beam_a.state is beam_b.state:
        return True
    return np.array_equal(beam_a.state.mean, beam_b.state.mean) and np.array_equal(
        beam_a.state.cov, beam_b.state.cov
    )


def _local_forms(theta: float):
    """The four (A_i, c_i) quadratic forms in the local (H+, H-, V+, V-) basis."""
    c, s = math.cos(theta), math.sin(theta)
    a0 = np.eye(4) / 4.0
    a1 = np.diag([1.0, 1.0, -1.0, -1.0]) / 4.0
    a2 = np.zeros((4, 4))
    a2[0, 2] = a2[2, 0] = c / 4.0
    a2[1, 3] = a2[3, 1] = c / 4.0
    a2[0, 3] = a2[3, 0] = -s / 4.0
    a2[1, 2] = a2[2, 1] = s / 4.0
    a3 = np.zeros((4, 4))
    a3[0, 3] = a3[3, 0] = c / 4.0
    a3[1, 2] = a3[2, 1] = -c / 4.0
    a3[0, 2] = a3[2, 0] = s / 4.0
    a3[1, 3] = a3[3, 1] = s / 4.0
    return [(a0, -1.0), (a1, 0.0), (a2, 0.0), (a3, 0.0)]


def stokes_quadratic_form(beam: PolarizedBeam, i: int) -> tuple:
    """Exact representation S_i = x^T A x + c over the beam's four quadratures.

    Returns ``(A, c)`` with ``A`` a symmetric 4x4 matrix in the local basis
    ``(X+_H, X-_H, X+_V, X-_V)``.
    """
    if i not in (0, 1, 2, 3):
        raise ValueError("Stokes index must be 0..3")
    return _local_forms(beam.theta)[i]


def _local_moments(beam: PolarizedBeam):
    idx = beam.indices()
    mu = beam.state.mean[idx]
    sigma = beam.state.cov[np.ix_(idx, idx)]
    return mu, sigma


_OMEGA4 = symplectic_form(2)


def _form_mean(a: np.ndarray, c: float, mu: np.ndarray, sigma: np.ndarray) -> float:
    return float(np.trace(a @ sigma) + mu @ a @ mu + c)


def _form_cov(a: np.ndarray, b: np.ndarray, mu: np.ndarray, sigma: np.ndarray) -> complex:
    """<dS dT> for two quadratic forms; real part is the symmetrized covariance."""
    m = sigma + 1j * _OMEGA4
    quartic = np.einsum("ij,kl,ik,jl->", a, b, m, m) + np.einsum("ij,kl,il,jk->", a, b, m, m)
    va = 2.0 * a @ mu
    vb = 2.0 * b @ mu
    return complex(quartic + va @ m @ vb)


def stokes_means(beam: PolarizedBeam, order: str = "exact") -> np.ndarray:
    """Expectation values (<S0>, <S1>, <S2>, <S3>).

    ``order="bright_limit"`` uses the mean-field formulas in (alpha_H, alpha_V,
    theta) alone; ``order="exact"`` adds the fluctuation corrections, e.g.
    ``<a^dag a> = alpha^2 + (Var X+ + Var X- - 2)/4`` per mode.
    """
    if order == "bright_limit":
        ah, av = beam.alpha_h, beam.alpha_v
        c, s = math.cos(beam.theta), math.sin(beam.theta)
        return np.array([ah**2 + av**2, ah**2 - av**2, 2 * c * ah * av, 2 * s * ah * av])
    if order != "exact":
        raise ValueError("order must be 'exact' or 'bright_limit'")
    mu, sigma = _local_moments(beam)
    return np.array([_form_mean(a, c, mu, sigma) for a, c in _local_forms(beam.theta)])


def stokes_lin_coeff(beam: PolarizedBeam, i: int) -> np.ndarray:
    """Full-length coefficient vector of the linearized fluctuation dS_i = v . dx.

    ``v = 2 A_i mu`` embedded at the beam's mode indices; valid to first order in
    the fluctuations around the mean field.
    """
    a, _ = stokes_quadratic_form(beam, i)
    mu, _ = _local_moments(beam)
    v = np.zeros(beam.state.mean.size)
    v[beam.indices()] = 2.0 * a @ mu
    return v


def stokes_lin_cov(beam: PolarizedBeam) -> np.ndarray:
    """4x4 linearized covariance matrix of (S0..S3) fluctuations."""
    rows = np.array([stokes_lin_coeff(beam, i) for i in range(4)])
    return rows @ beam.state.cov @ rows.T


def stokes_exact_var(beam: PolarizedBeam, i: int) -> float:
    """Exact variance of S_i from the quantum moment theorem (any Gaussian state)."""
    a, _ = stokes_quadratic_form(beam, i)
    mu, sigma = _local_moments(beam)
    return _form_cov(a, a, mu, sigma).real


def stokes_exact_cov(beam: PolarizedBeam, i: int, j: int) -> float:
    """Exact symmetrized covariance <{dS_i, dS_j}>/2 on one beam."""
    ai, _ = stokes_quadratic_form(beam, i)
    aj, _ = stokes_quadratic_form(beam, j)
    mu, sigma = _local_moments(beam)
    return _form_cov(ai, aj, mu, sigma).real


def stokes_commutator_exact(beam: PolarizedBeam, i: int, j: int) -> float:
    """|<[S_i, S_j]>| evaluated through the independent D-matrix route.

    ``[x^T A x, x^T B x] = 4i x^T (A Omega B - B Omega A) x`` for symmetric A, B,
    so the magnitude is ``4 |tr(D Sigma) + mu^T D mu|``.  By the operator algebra
    this equals ``2 |<S_k>|`` with exact means; the equality is what the
    commutator self-tests assert.
    """
    ai, _ = stokes_quadratic_form(beam, i)
    aj, _ = stokes_quadratic_form(beam, j)
    d = ai @ _OMEGA4 @ aj - aj @ _OMEGA4 @ ai
    mu, sigma = _local_moments(beam)
    return 4.0 * abs(float(np.trace(d @ sigma) + mu @ d @ mu))


def stokes_commutators_lin(beam: PolarizedBeam) -> dict:
    """Linearized commutator magnitudes |<[dS_i, dS_j]>| = |v_i^T 2 Omega v_j|.

    Consistent with :func:`stokes_lin_cov`; equals twice the bright-limit
    |<S_k>| of the complementary operator.
    """
    omega = symplectic_form(beam.state.n_modes)
    coeffs = {i: stokes_lin_coeff(beam, i) for i in (1, 2, 3)}
    return {
        (i, j): abs(2.0 * coeffs[i] @ omega @ coeffs[j]) for i, j in STOKES_PAIRS
    }


def correlation_functions(beam: PolarizedBeam) -> dict:
    """Squared symmetrized correlation functions |<{dS_i, dS_j}>|^2, linearized.

    The symmetrized moment is twice the linearized covariance, so each entry is
    ``(2 * lin_cov[i, j])**2``.
    """
    cov = stokes_lin_cov(beam)
    return {(i, j): float((2.0 * cov[i, j]) ** 2) for i, j in STOKES_PAIRS}


def poincare_radius(beam: PolarizedBeam) -> float:
    """Radius <S0^2 + 2 S0>^(1/2) of the beam on the Poincare sphere, exact."""
    mean0 = stokes_means(beam)[0]
    var0 = stokes_exact_var(beam, 0)
    return math.sqrt(max(var0 + mean0**2 + 2.0 * mean0, 0.0))


@dataclass(frozen=True)
class StokesStats:
    """Bundle of Stokes statistics for one beam.

    ``means`` are exact expectations and ``means_bright`` the mean-field values;
    ``commutators`` are the exact magnitudes |<[S_i, S_j]>|, equal to twice the
    exact |<S_k>| of the complementary operator.  ``lin_cov`` and ``corr_funcs``
    form a mutually consistent linearized set (their commutator counterpart is
    :func:`stokes_commutators_lin`).  ``degenerate`` flags beams without a mean
    field, whose linearized entries are all zero rather than an error.
    """

    means: np.ndarray
    means_bright: np.ndarray
    lin_cov: np.ndarray
    commutators: dict
    corr_funcs: dict
    poincare_radius: float
    degenerate: bool


def stokes_stats(beam: PolarizedBeam) -> StokesStats:
    bright = stokes_means(beam, "bright_limit")
    return StokesStats(
        means=stokes_means(beam, "exact"),
        means_bright=bright,
        lin_cov=stokes_lin_cov(beam),
        commutators={(i, j): stokes_commutator_exact(beam, i, j) for i, j in STOKES_PAIRS},
        corr_funcs=correlation_functions(beam),
        poincare_radius=poincare_radius(beam),
        degenerate=bool(bright[0] < DEGENERACY_EPS),
    )


@dataclass(frozen=True)
class NoiseBall:
    """Noise ellipsoid of (S1, S2, S3) around the mean Stokes vector.

    ``axes`` columns are the principal unit vectors, ``stds`` the matching
    standard deviations, and ``shot_radius = sqrt(<S0>)`` is the isotropic shot
    noise of a coherent beam with the same power.
    """

    mean: np.ndarray
    cov: np.ndarray
    axes: np.ndarray
    stds: np.ndarray
    shot_radius: float
    degenerate: bool


def _ball_from(mean3: np.ndarray, cov3: np.ndarray, s0: float) -> NoiseBall:
    evals, evecs = np.linalg.eigh(cov3)
    stds = np.sqrt(np.clip(evals, 0.0, None))
    degenerate = bool(s0 < DEGENERACY_EPS or np.all(stds < DEGENERACY_EPS))
    return NoiseBall(mean3, cov3, evecs, stds, math.sqrt(max(s0, 0.0)), degenerate)


def noise_ball(beam: PolarizedBeam) -> NoiseBall:
    """Geometry record of the beam's linearized Stokes noise ellipsoid."""
    stats = stokes_stats(beam)
    return _ball_from(stats.means[1:], stats.lin_cov[1:, 1:], stats.means[0])


def conditional_noise_ball(beam_x: PolarizedBeam, beam_y: PolarizedBeam, conditioned_on: int) -> NoiseBall:
    """Noise ellipsoid of beam x given a measurement of S_i on beam y.

    Linear conditioning on the scalar S_i(y): the covariance block shrinks by
    ``outer(c, c) / var_y`` with ``c_a = cov(S_a(x), S_i(y))``.  The mean is left
    at the unconditional Stokes vector; only the uncertainty region changes.
    """
    if conditioned_on not in (1, 2, 3):
        raise ValueError("condition on S1, S2 or S3")
    if not same_state(beam_x, beam_y):
        raise ValueError("beams must live on the same underlying state")
    sigma = beam_x.state.cov
    vx = [stokes_lin_coeff(beam_x, a) for a in (1, 2, 3)]
    vy = stokes_lin_coeff(beam_y, conditioned_on)
    var_y = float(vy @ sigma @ vy)
    cov3 = stokes_lin_cov(beam_x)[1:, 1:].copy()
    if var_y > DEGENERACY_EPS:
        c = np.array([float(v @ sigma @ vy) for v in vx])
        cov3 -= np.outer(c, c) / var_y
    means = stokes_means(beam_x)
    return _ball_from(means[1:], cov3, means[0])
