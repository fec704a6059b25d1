"""Coherent states for anharmonic oscillators.

Builds the state family labeled by classical phase-space points over any
discrete spectrum, and verifies its claimed properties numerically: exact
evolution by relabeling, the Poisson peak at the classically quantized
level, resolution of the identity under Cesaro angle averaging, minimal
uncertainty asymptotics, and recovery of the potential from the classical
period function.
"""
from ._kernels import BACKEND
from .coherent import (
    CoherentState,
    ExpectationReport,
    RecurrenceReport,
    TruncationError,
    almost_periodic_scan,
    build_state,
    evolve_state,
    expectation_report,
    minimal_dim,
    overlap,
    poisson_amplitudes,
)
from .identity import (
    CesaroPlan,
    QuadratureError,
    ResolutionReport,
    default_plan,
    exact_theta_average,
    measure_identity_check,
    radial_resolution,
    resolution_report,
    theta_average,
)
from .inversion import (
    InversionError,
    PeriodFunction,
    PotentialTable,
    invert_periods,
    momentum_from_energy,
    period_from_potential,
    periods_closed_form,
    periods_from_spectrum,
    tau_chart,
)
from .phasespace import (
    PhasePoint,
    bohr_action,
    chart_convert,
    classical_evolve,
    point_htau,
    point_pq,
    point_rtheta,
)
from .shooting import numerov_levels
from .spectrum import (
    EnergySpectrum,
    ModelParams,
    NormalOrderCoeffs,
    OperatorMatrix,
    SpectrumConvergenceError,
    build_operator,
    eigenbasis_operator,
    normal_order_coeffs,
    reconstruct_levels,
    solve_spectrum,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CesaroPlan",
    "CoherentState",
    "EnergySpectrum",
    "ExpectationReport",
    "InversionError",
    "ModelParams",
    "NormalOrderCoeffs",
    "OperatorMatrix",
    "PeriodFunction",
    "PhasePoint",
    "PotentialTable",
    "QuadratureError",
    "RecurrenceReport",
    "ResolutionReport",
    "SpectrumConvergenceError",
    "TruncationError",
    "almost_periodic_scan",
    "bohr_action",
    "build_operator",
    "build_state",
    "chart_convert",
    "classical_evolve",
    "default_plan",
    "eigenbasis_operator",
    "evolve_state",
    "exact_theta_average",
    "expectation_report",
    "invert_periods",
    "measure_identity_check",
    "minimal_dim",
    "momentum_from_energy",
    "normal_order_coeffs",
    "numerov_levels",
    "overlap",
    "period_from_potential",
    "periods_closed_form",
    "periods_from_spectrum",
    "point_htau",
    "point_pq",
    "point_rtheta",
    "poisson_amplitudes",
    "radial_resolution",
    "reconstruct_levels",
    "resolution_report",
    "solve_spectrum",
    "tau_chart",
    "theta_average",
    "__version__",
]
