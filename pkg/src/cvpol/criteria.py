"""Nonseparability and EPR criteria for two beams.

All criteria consume second moments of observables measured on two beams
(x and y) together with the commutator magnitude |<[A, B]>| that sets the
uncertainty bound, and are normalized so that 1 is the boundary: a sum or
product inseparability below 1 certifies entanglement, and a conditional
variance product below 1 certifies an EPR paradox.  For the conjugate
quadrature pair the commutator magnitude is the constant 2; for a Stokes pair
(S_i, S_j) it is 2 |<S_k>| with S_k completing the triple, evaluated from the
bright mean fields and averaged over the beams.

A degenerate commutator makes the bound carry no information; such results
are reported as unverifiable instead of returning huge finite values.  The
correlation-function variant keeps a nonzero denominator in that situation,
which is exactly why it is not a valid witness (see inseparability_corr).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .gaussian import GaussianState, QuadratureRef, quadrature_moments
from .stokes import (
    COMPLEMENT,
    STOKES_PAIRS,
    PolarizedBeam,
    correlation_functions,
    same_state,
    stokes_lin_coeff,
    stokes_lin_cov,
    stokes_means,
)

__all__ = [
    "BeamPairStats",
    "CriterionResult",
    "QUADRATURE_COMMUTATOR",
    "COMMUTATOR_FLOOR",
    "sum_diff_variance",
    "variance_at_gain",
    "conditional_variance",
    "inseparability",
    "epr_degree",
    "quadrature_pair_stats",
    "stokes_pair_stats",
    "stokes_criterion",
    "inseparability_corr",
]

# |<[X+, X-]>| in shot-noise units, state independent
QUADRATURE_COMMUTATOR = 2.0
COMMUTATOR_FLOOR = 1e-6  # relative to <S0>; below this the bound is meaningless
_COV_SLACK = 1e-9


@dataclass(frozen=True)
class BeamPairStats:
    """Second moments of one observable O measured on beams x and y."""

    var_x: float
    var_y: float
    cov_xy: float
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.var_x < 0 or self.var_y < 0:
            raise ValueError("variances must be non-negative")
        bound = math.sqrt(self.var_x * self.var_y) + _COV_SLACK
        if abs(self.cov_xy) > bound:
            raise ValueError(
                f"|cov| = {abs(self.cov_xy):.6g} exceeds Cauchy-Schwarz bound {bound:.6g}"
            )


@dataclass(frozen=True)
class CriterionResult:
    """Outcome of one criterion evaluation, normalized to threshold 1.

    ``status`` is "entangled" when the value is below 1 with a usable
    denominator, "not_demonstrated" otherwise, and "unverifiable" when the
    commutator bound is degenerate.  ``details`` records the chosen sum/diff
    signs or optimal gains and the denominator actually used.
    """

    value: float
    threshold: float
    status: str
    form: str
    details: dict = field(default_factory=dict, compare=False)

    def __bool__(self):
        return self.status == "entangled"


def sum_diff_variance(stats: BeamPairStats):
    """Two-beam variance min over sign, Delta^2_{x +/- y} O, with the sign.

    Returns ``(value, sign)``; a tie (cov = 0) reports the difference.
    """
    if stats.cov_xy < 0:
        return stats.var_x + stats.var_y + 2.0 * stats.cov_xy, "+"
    return stats.var_x + stats.var_y - 2.0 * stats.cov_xy, "-"


def variance_at_gain(stats: BeamPairStats, gain: float) -> float:
    """Variance of O_x + gain * O_y."""
    return stats.var_x + gain**2 * stats.var_y + 2.0 * gain * stats.cov_xy


def conditional_variance(stats: BeamPairStats):
    """Minimum over the gain of :func:`variance_at_gain`, with its optimum.

    Returns ``(value, gain)``.  With no usable readout variance on beam y the
    gain is pinned to 0 and the unconditional variance is returned.
    """
    if stats.var_y <= _COV_SLACK**2:
        return stats.var_x, 0.0
    gain = -stats.cov_xy / stats.var_y
    return stats.var_x - stats.cov_xy**2 / stats.var_y, gain


def _result(value, status, form, details):
    return CriterionResult(value, 1.0, status, form, details)


def _status_of(value: float) -> str:
    return "entangled" if value < 1.0 else "not_demonstrated"


def inseparability(a_stats: BeamPairStats, b_stats: BeamPairStats,
                   commutator_mag: float, form: str = "sum") -> CriterionResult:
    """Inseparability of a conjugate observable pair (A, B) across two beams.

    sum form: (Delta^2_{x,y} A + Delta^2_{x,y} B) / (2 |<[A, B]>|);
    product form: Delta^2_{x,y} A * Delta^2_{x,y} B / <[A, B]>^2.
    Each variance independently takes the tighter of the sum and difference
    combinations.  Below 1 the beams cannot be separable.
    """
    if commutator_mag < 0:
        raise ValueError("commutator magnitude must be non-negative")
    da, sa = sum_diff_variance(a_stats)
    db, sb = sum_diff_variance(b_stats)
    details = {
        "sum_diff": (da, db),
        "signs": (sa, sb),
        "commutator": commutator_mag,
        "labels": (a_stats.label, b_stats.label),
    }
    if form == "sum":
        denominator = 2.0 * commutator_mag
    elif form == "product":
        denominator = commutator_mag**2
    else:
        raise ValueError("form must be 'sum' or 'product'")
    details["denominator"] = denominator
    if denominator <= 0:
        return _result(math.inf, "unverifiable", form, details)
    value = (da + db) / denominator if form == "sum" else da * db / denominator
    return _result(value, _status_of(value), form, details)


def epr_degree(a_stats: BeamPairStats, b_stats: BeamPairStats,
               commutator_mag: float) -> CriterionResult:
    """EPR paradox degree 4 V(A_x|A_y) V(B_x|B_y) / <[A, B]>^2, threshold 1.

    The conditional variances use the optimal linear gains, reported in
    ``details["gains"]``.
    """
    if commutator_mag < 0:
        raise ValueError("commutator magnitude must be non-negative")
    cva, ga = conditional_variance(a_stats)
    cvb, gb = conditional_variance(b_stats)
    details = {
        "conditional": (cva, cvb),
        "gains": (ga, gb),
        "commutator": commutator_mag,
        "denominator": commutator_mag**2,
        "labels": (a_stats.label, b_stats.label),
    }
    if commutator_mag <= 0:
        return _result(math.inf, "unverifiable", "epr", details)
    value = 4.0 * cva * cvb / commutator_mag**2
    return _result(value, _status_of(value), "epr", details)


def quadrature_pair_stats(state: GaussianState, ref_x: QuadratureRef, ref_y: QuadratureRef,
                          label: str = "") -> BeamPairStats:
    """Pair stats of one rotated quadrature on two modes of a state."""
    if ref_x.mode == ref_y.mode:
        raise ValueError("x and y quadratures must target different modes")
    _, cov = quadrature_moments(state, [ref_x, ref_y])
    return BeamPairStats(float(cov[0, 0]), float(cov[1, 1]), float(cov[0, 1]), label)


def _check_pair(pair):
    pair = (int(pair[0]), int(pair[1]))
    if pair not in STOKES_PAIRS:
        raise ValueError("Stokes pair must be one of (1,2), (1,3), (2,3)")
    return pair


def _check_interchangeable(beam_x: PolarizedBeam, beam_y: PolarizedBeam):
    """Warn when the beams are distinguishable; the criteria assume symmetry."""
    problems = []
    scale = max(abs(beam_x.alpha_h), abs(beam_x.alpha_v), 1e-300)
    if abs(beam_x.alpha_h - beam_y.alpha_h) > 1e-6 * scale:
        problems.append("alpha_H differs between beams")
    if abs(beam_x.alpha_v - beam_y.alpha_v) > 1e-6 * scale:
        problems.append("alpha_V differs between beams")
    residual = min(
        abs(math.remainder(beam_x.theta - s * beam_y.theta, math.pi)) for s in (1.0, -1.0)
    )
    if residual > 1e-6:
        problems.append("theta_x and theta_y violate theta_x = +/-theta_y + m*pi")
    # correlation functions of interchangeable beams must agree; beams with
    # mirrored theta flip the covariance sign, so compare magnitudes, floored
    # by the variance scale so exact zeros do not trip on rounding dust
    covx = stokes_lin_cov(beam_x)
    covy = stokes_lin_cov(beam_y)
    for i, j in STOKES_PAIRS:
        floor = 1e-6 * max(
            math.sqrt(covx[i, i] * covx[j, j]), math.sqrt(covy[i, i] * covy[j, j]), 1e-300
        )
        if abs(abs(covx[i, j]) - abs(covy[i, j])) > floor:
            problems.append(f"correlation functions differ between beams for pair ({i}, {j})")
            break
    if problems:
        warnings.warn(
            "beams are not interchangeable (" + "; ".join(problems) + "); "
            "criteria normalization averages over beams and may be ambiguous",
            stacklevel=3,
        )


def stokes_pair_stats(beam_x: PolarizedBeam, beam_y: PolarizedBeam, pair):
    """Linearized cross-beam stats of (S_i, S_j) plus their commutator bound.

    Returns ``(stats_i, stats_j, commutator_mag)``.  Covariances are computed
    on the joint Gaussian state, not assumed zero; the commutator magnitude
    2 |<S_k>| uses bright means averaged over the two beams.
    """
    i, j = _check_pair(pair)
    if not same_state(beam_x, beam_y):
        raise ValueError("beams must live on the same underlying state")
    if {beam_x.h_mode, beam_x.v_mode} & {beam_y.h_mode, beam_y.v_mode}:
        raise ValueError("beams x and y must occupy disjoint modes")
    _check_interchangeable(beam_x, beam_y)
    k = COMPLEMENT[(i, j)]
    mx = stokes_means(beam_x, "bright_limit")[k]
    my = stokes_means(beam_y, "bright_limit")[k]
    comm = abs(mx) + abs(my)  # 2 * mean of per-beam |<S_k>|
    sigma = beam_x.state.cov
    stats = []
    for idx in (i, j):
        vx = stokes_lin_coeff(beam_x, idx)
        vy = stokes_lin_coeff(beam_y, idx)
        stats.append(
            BeamPairStats(
                float(vx @ sigma @ vx),
                float(vy @ sigma @ vy),
                float(vx @ sigma @ vy),
                f"S{idx}",
            )
        )
    return stats[0], stats[1], comm


def _commutator_degenerate(beam_x, beam_y, pair) -> bool:
    k = COMPLEMENT[pair]
    for beam in (beam_x, beam_y):
        bright = stokes_means(beam, "bright_limit")
        if abs(bright[k]) < COMMUTATOR_FLOOR * max(bright[0], 1e-300):
            return True
    return False


def stokes_criterion(beam_x: PolarizedBeam, beam_y: PolarizedBeam, pair,
                     kind: str = "inseparability", form: str = "sum") -> CriterionResult:
    """Entanglement criterion on the Stokes pair (S_i, S_j) of two beams.

    ``kind`` selects inseparability (with ``form`` "sum" or "product") or
    "epr".  When the complementary mean <S_k> is degenerate on either beam
    (below 1e-6 of <S0>: theta = m*pi for (1,2), theta = (m+1/2)*pi for
    (1,3), |alpha_H| = |alpha_V| for (2,3), or a vanishing amplitude) the
    result is unverifiable.
    """
    pair = _check_pair(pair)
    stats_i, stats_j, comm = stokes_pair_stats(beam_x, beam_y, pair)
    if _commutator_degenerate(beam_x, beam_y, pair):
        comm = 0.0
    if kind == "inseparability":
        return inseparability(stats_i, stats_j, comm, form)
    if kind == "epr":
        return epr_degree(stats_i, stats_j, comm)
    raise ValueError("kind must be 'inseparability' or 'epr'")


def inseparability_corr(beam_x: PolarizedBeam, beam_y: PolarizedBeam, pair) -> CriterionResult:
    """Sum inseparability with the correlation function kept in the bound.

    The denominator becomes ``2 sqrt(comm^2 + corr_func / 4)`` with the
    squared symmetrized correlation function averaged over the two beams; it
    reduces to the plain sum form when the correlation vanishes.  This is NOT
    a valid entanglement witness: correlated classical noise can inflate the
    single-beam correlation function without entangling anything, driving the
    value below 1 for separable states.  Provided for demonstrating exactly
    that failure; ``details["witness_valid"]`` is always False.
    """
    pair = _check_pair(pair)
    stats_i, stats_j, comm = stokes_pair_stats(beam_x, beam_y, pair)
    corr = 0.5 * (correlation_functions(beam_x)[pair] + correlation_functions(beam_y)[pair])
    da, sa = sum_diff_variance(stats_i)
    db, sb = sum_diff_variance(stats_j)
    denominator = 2.0 * math.sqrt(comm**2 + corr / 4.0)
    details = {
        "sum_diff": (da, db),
        "signs": (sa, sb),
        "commutator": comm,
        "corr_func": corr,
        "denominator": denominator,
        "witness_valid": False,
        "labels": (f"S{pair[0]}", f"S{pair[1]}"),
    }
    # both the commutator and the correlation can vanish (up to rounding);
    # then neither term bounds anything
    if denominator <= 1e-12 * max(da + db, 1.0):
        return _result(math.inf, "unverifiable", "corr", details)
    value = (da + db) / denominator
    return _result(value, _status_of(value), "corr", details)
