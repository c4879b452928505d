"""Self-contained oracle and property checks, runnable without test tooling.

Each check exercises one load-bearing identity of the package against an
independent route (closed forms, operator algebra, round trips).  The CLI
``validate`` subcommand prints one line per check and fails if any check
fails.  The set intentionally overlaps the test suite: it is the part that
can run in a deployed environment with no dev dependencies.
"""

from __future__ import annotations

import math
import os
import tempfile

import numpy as np

from .gaussian import (
    QuadratureRef,
    beam_splitter,
    displace,
    loss,
    phase_shift,
    physicality_check,
    squeeze,
    symplectic_form,
    vacuum_state,
)
from .stokes import (
    PolarizedBeam,
    STOKES_PAIRS,
    noise_ball,
    poincare_radius,
    stokes_commutator_exact,
    stokes_commutators_lin,
    stokes_lin_cov,
    stokes_means,
    stokes_quadratic_form,
)
from .criteria import (
    QUADRATURE_COMMUTATOR,
    epr_degree,
    inseparability,
    quadrature_pair_stats,
    stokes_criterion,
)
from .experiment import (
    ExperimentConfig,
    ThreeStokesConfig,
    build_quad_entangler,
    build_three_stokes,
)
from .spectra import MeasuredSpectrum, SeriesBundle, Spectrum, calibrate, criteria_from_spectra
from .export import read_spectrum_csv, write_spectrum_csv

__all__ = ["run_checks", "format_report"]


def _random_bright_state(rng, n_modes=2):
    state = vacuum_state(n_modes)
    for mode in range(n_modes):
        state = squeeze(state, mode, float(rng.uniform(0.2, 1.0)), float(rng.uniform(0, math.pi)))
        state = phase_shift(state, mode, float(rng.uniform(0, 2 * math.pi)))
    if n_modes >= 2 and rng.uniform() < 0.7:
        state = beam_splitter(state, 0, 1, float(rng.uniform(0.2, 0.8)), float(rng.uniform(0, 2 * math.pi)))
    for mode in range(n_modes):
        if rng.uniform() < 0.4:
            state = loss(state, mode, float(rng.uniform(0.5, 1.0)))
        state = displace(state, mode, float(rng.uniform(5.0, 40.0)), 0.0)
    return state


def _random_beam(rng):
    state = _random_bright_state(rng, 2)
    return PolarizedBeam(state, 0, 1, float(rng.uniform(0, 2 * math.pi)))


def _check_symplectic(rng):
    for _ in range(20):
        state = _random_bright_state(rng, 2)
        ok, margin = physicality_check(state)
        if not ok:
            return False, f"random circuit produced unphysical state (margin {margin:.3g})"
    return True, "20 random circuits physical"


def _check_entangler(rng):
    vs, va = 0.1, 10.0
    state = build_quad_entangler(ExperimentConfig.ideal(vs, antisqueezed_variance=va))
    pair_p = quadrature_pair_stats(state, QuadratureRef(0, 0.0), QuadratureRef(1, 0.0))
    pair_m = quadrature_pair_stats(state, QuadratureRef(0, math.pi / 2), QuadratureRef(1, math.pi / 2))
    insep = inseparability(pair_p, pair_m, QUADRATURE_COMMUTATOR)
    epr = epr_degree(pair_p, pair_m, QUADRATURE_COMMUTATOR)
    want_epr = (2 * vs * va / (vs + va)) ** 2
    ok = abs(insep.value - vs) < 1e-9 and abs(epr.value - want_epr) < 1e-9
    return ok, f"I = {insep.value:.9f} (want {vs}), E = {epr.value:.9f} (want {want_epr:.9f})"


def _check_coherent_boundary(rng):
    state = displace(displace(vacuum_state(2), 0, 8.0, 0.0), 1, 6.0, 0.0)
    pair_p = quadrature_pair_stats(state, QuadratureRef(0, 0.0), QuadratureRef(1, 0.0))
    pair_m = quadrature_pair_stats(state, QuadratureRef(0, math.pi / 2), QuadratureRef(1, math.pi / 2))
    i_val = inseparability(pair_p, pair_m, QUADRATURE_COMMUTATOR).value
    e_val = epr_degree(pair_p, pair_m, QUADRATURE_COMMUTATOR).value
    ok = abs(i_val - 1.0) < 1e-9 and abs(e_val - 1.0) < 1e-9
    return ok, f"I = {i_val:.12f}, E = {e_val:.12f}"


def _check_stokes_algebra(rng):
    beam = _random_beam(rng)
    omega = symplectic_form(2)
    worst = 0.0
    for (i, j), k in (((1, 2), 3), ((2, 3), 1), ((3, 1), 2)):
        ai, _ = stokes_quadratic_form(beam, i)
        aj, _ = stokes_quadratic_form(beam, j)
        ak, _ = stokes_quadratic_form(beam, k)
        d = ai @ omega @ aj - aj @ omega @ ai
        worst = max(worst, float(np.max(np.abs(2.0 * d - ak))))
    for _ in range(10):
        beam = _random_beam(rng)
        means = stokes_means(beam)
        for (i, j), k in (((1, 2), 3), ((2, 3), 1), ((3, 1), 2)):
            lhs = stokes_commutator_exact(beam, i, j)
            rhs = 2.0 * abs(means[k])
            scale = max(rhs, 1.0)
            worst = max(worst, abs(lhs - rhs) / scale)
    return worst < 1e-9, f"matrix identity and commutator residual {worst:.3g}"


def _check_uncertainty(rng):
    worst = math.inf
    for _ in range(50):
        beam = _random_beam(rng)
        cov = stokes_lin_cov(beam)
        comms = stokes_commutators_lin(beam)
        for i, j in STOKES_PAIRS:
            lhs = cov[i, i] * cov[j, j]
            rhs = (comms[(i, j)] / 2.0) ** 2
            scale = max(lhs, rhs, 1.0)
            worst = min(worst, (lhs - rhs) / scale)
    return worst >= -1e-6, f"minimum uncertainty-product slack {worst:.3g}"


def _check_three_stokes(rng):
    vs = 0.1
    _, bx, by = build_three_stokes(ThreeStokesConfig.pure(vs, alpha_sq=400.0))
    values = [stokes_criterion(bx, by, pair).value for pair in STOKES_PAIRS]
    want = math.sqrt(3.0) * vs
    worst = max(abs(v - want) for v in values)
    return worst < 1e-6, f"criteria {values[0]:.7f}/{values[1]:.7f}/{values[2]:.7f}, want {want:.7f}"


def _check_calibration(rng):
    m = MeasuredSpectrum([1e6], [2.0], [0.5], [1.5])
    value = calibrate(m).value[0]
    again = calibrate(MeasuredSpectrum([1e6], [value], [0.0], [1.0])).value[0]
    ok = abs(value - 1.5) < 1e-12 and abs(again - value) < 1e-12
    return ok, f"(2-0.5)/(1.5-0.5) = {value:.6f}, idempotent re-run {again:.6f}"


def _check_roundtrip(rng):
    freq = np.linspace(2e6, 10e6, 5)
    spec = Spectrum(
        freq,
        {"a": rng.uniform(0.1, 3.0, 5), "b": rng.normal(0.0, 1.0, 5)},
        {"status_a": np.array(["entangled"] * 5, dtype=object)},
        {"config_hash": "deadbeef"},
    )
    with tempfile.TemporaryDirectory() as tmp:
        target = os.path.join(tmp, "spec.csv")
        write_spectrum_csv(spec, target)
        back = read_spectrum_csv(target)
    worst = 0.0
    for name in spec.series:
        for a, b in zip(spec.series[name], back.series[name]):
            scale = max(abs(a), 1e-300)
            worst = max(worst, abs(a - b) / scale)
    ok = worst < 1e-8 and back.provenance.get("config_hash") == "deadbeef"
    return ok, f"worst relative round-trip error {worst:.3g}"


def _check_path_equivalence(rng):
    from .criteria import stokes_pair_stats, sum_diff_variance, conditional_variance

    _, bx, by = build_three_stokes(ThreeStokesConfig.pure(0.25, alpha_sq=300.0))
    i, j = 2, 3
    pair_i, pair_j, comm = stokes_pair_stats(bx, by, (i, j))
    direct_i = stokes_criterion(bx, by, (i, j), "inseparability", "sum").value
    direct_e = stokes_criterion(bx, by, (i, j), "epr").value
    s0 = stokes_means(bx, "bright_limit")[0]
    bundle = SeriesBundle(
        [1e6],
        {
            i: [sum_diff_variance(pair_i)[0] / (2 * s0)],
            j: [sum_diff_variance(pair_j)[0] / (2 * s0)],
        },
        alpha_h=bx.alpha_h,
        alpha_v=bx.alpha_v,
        theta=bx.theta,
        conditional={
            i: [conditional_variance(pair_i)[0] / s0],
            j: [conditional_variance(pair_j)[0] / s0],
        },
    )
    spec = criteria_from_spectra(bundle, (i, j))
    got_i = spec.series[f"inseparability_s{i}s{j}"][0]
    got_e = spec.series[f"epr_s{i}s{j}"][0]
    worst = max(abs(got_i - direct_i), abs(got_e - direct_e))
    return worst < 1e-9, f"ingestion vs direct criteria residual {worst:.3g}"


def _check_poincare(rng):
    worst = 0.0
    for n in (1.0, 10.0, 100.0):
        alpha = math.sqrt(n / 2.0)
        state = displace(displace(vacuum_state(2), 0, 2 * alpha, 0.0), 1, 2 * alpha, 0.0)
        beam = PolarizedBeam(state, 0, 1, 0.0)
        want = math.sqrt(n**2 + 3 * n)
        worst = max(worst, abs(poincare_radius(beam) - want) / want)
        ball = noise_ball(beam)
        worst = max(worst, abs(ball.shot_radius - math.sqrt(n)) / math.sqrt(n))
    return worst < 1e-6, f"worst relative radius error {worst:.3g}"


CHECKS = [
    ("random circuits stay physical", _check_symplectic),
    ("entangler closed forms", _check_entangler),
    ("coherent boundary I = E = 1", _check_coherent_boundary),
    ("stokes commutator algebra", _check_stokes_algebra),
    ("uncertainty products hold", _check_uncertainty),
    ("three-stokes symmetry", _check_three_stokes),
    ("calibration arithmetic", _check_calibration),
    ("spectrum export round trip", _check_roundtrip),
    ("ingestion path equivalence", _check_path_equivalence),
    ("poincare radius closed form", _check_poincare),
]


def run_checks(seed: int = 20240229):
    """Run every check; returns (all_ok, [(name, ok, detail), ...])."""
    rng = np.random.default_rng(seed)
    results = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn(rng)
        except Exception as exc:  # a crash is a failure, not an abort
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append((name, bool(ok), detail))
    return all(ok for _, ok, _ in results), results


def format_report(results) -> str:
    width = max(len(name) for name, _, _ in results)
    lines = []
    for name, ok, detail in results:
        lines.append(f"{'PASS' if ok else 'FAIL'}  {name.ljust(width)}  {detail}")
    return "\n".join(lines)
