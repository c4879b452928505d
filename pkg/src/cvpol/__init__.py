"""Continuous-variable polarization entanglement toolkit.

Gaussian states of optical modes in shot-noise units, Stokes-operator
statistics on polarized beam pairs, inseparability / EPR criteria, and the
simulation plus data-ingestion tooling of a squeezed-light polarization
entanglement experiment.
"""

from .gaussian import (
    GaussianState,
    QuadratureRef,
    add_classical_noise,
    attach_vacuum,
    beam_splitter,
    displace,
    loss,
    phase_shift,
    physicality_check,
    quadrature_moments,
    squeeze,
    symplectic_form,
    vacuum_state,
)
from .stokes import (
    BeamConventionError,
    NoiseBall,
    PolarizedBeam,
    StokesStats,
    conditional_noise_ball,
    correlation_functions,
    noise_ball,
    poincare_radius,
    stokes_commutator_exact,
    stokes_commutators_lin,
    stokes_exact_cov,
    stokes_exact_var,
    stokes_lin_cov,
    stokes_means,
    stokes_stats,
)
from .criteria import (
    QUADRATURE_COMMUTATOR,
    BeamPairStats,
    CriterionResult,
    conditional_variance,
    epr_degree,
    inseparability,
    inseparability_corr,
    quadrature_pair_stats,
    stokes_criterion,
    stokes_pair_stats,
    sum_diff_variance,
    variance_at_gain,
)
from .experiment import (
    AuditReport,
    ExperimentConfig,
    SqueezerSpec,
    ThreeStokesConfig,
    apply_detection_chain,
    assumption_audit,
    build_polarization_pair,
    build_quad_entangler,
    build_three_stokes,
    simulate_measured_series,
    sweep_spectrum,
)
from .spectra import (
    CalibratedSeries,
    MeasuredSpectrum,
    SeriesBundle,
    Spectrum,
    calibrate,
    criteria_from_spectra,
)
from .config import AnalysisSettings, ConfigError, LoadedConfig, load_config, load_params

__version__ = "0.1.0"
