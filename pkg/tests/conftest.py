import numpy as np
import pytest

from cvpol.gaussian import (
    beam_splitter,
    displace,
    loss,
    phase_shift,
    squeeze,
    vacuum_state,
)
from cvpol.stokes import PolarizedBeam


@pytest.fixture
def rng():
    return np.random.default_rng(20260815)


def random_bright_state(rng, n_modes=2, amp_range=(5.0, 40.0)):
    """Random physical state with real non-negative mean amplitudes on every mode.

    Squeezing, rotations, mixing and loss happen before the displacements, so
    the means stay on the X+ axis and the beam convention audit passes.
    """
    state = vacuum_state(n_modes)
    for mode in range(n_modes):
        state = squeeze(state, mode, float(rng.uniform(0.2, 1.0)), float(rng.uniform(0, np.pi)))
        state = phase_shift(state, mode, float(rng.uniform(0, 2 * np.pi)))
    if n_modes >= 2 and rng.uniform() < 0.7:
        state = beam_splitter(
            state, 0, 1, float(rng.uniform(0.2, 0.8)), float(rng.uniform(0, 2 * np.pi))
        )
    for mode in range(n_modes):
        if rng.uniform() < 0.4:
            state = loss(state, mode, float(rng.uniform(0.5, 1.0)))
        state = displace(state, mode, float(rng.uniform(*amp_range)), 0.0)
    return state


def random_beam(rng, theta=None):
    state = random_bright_state(rng, 2)
    if theta is None:
        theta = float(rng.uniform(0, 2 * np.pi))
    return PolarizedBeam(state, 0, 1, theta)
