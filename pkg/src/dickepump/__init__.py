"""Collectively pumped superradiant ensembles on the symmetric Dicke ladder.

The package models ``N`` two-level atoms with collective decay ``gamma``
and collective incoherent pumping ``w``.  Submodules:

``core``
    Parameters, population states and the closed-form steady state.
``spectrum``
    Sector-resolved Liouvillian spectra and the dissipative gap.
``dynamics``
    Rate-equation integration, pump sweeps, hysteresis and correlations.
``metrology``
    Pump-rate sensitivity and the repeated-scan time budget.
``fitting``
    Power-law fits and finite-size collapse of hysteresis widths.
``oracle``
    Three-level reference model and adiabatic elimination.
"""
from .core import (
    LadderRates,
    ModelParams,
    PopulationState,
    inversion_variance,
    ladder_rates,
    mean_inversion,
    mean_inversion_asymptotic,
    partition_function,
    steady_state,
)
from .dynamics import (
    HysteresisLoop,
    IntegratorOptions,
    SweepProtocol,
    adiabatic_boundaries,
    correlation_zz,
    evolve,
    hysteresis_width,
    relaxation_rate_cumulant,
    sweep,
)
from .fitting import collapse_metric, fit_power_law
from .metrology import ProtocolBudget, steady_sensitivity, total_sensitivity
from .oracle import ThreeLevelParams, adiabatic_eliminate, build_blocks, simulate_three_level
from .spectrum import build_sector, liouvillian_gap, sector_spectrum

__version__ = "0.1.0"

__all__ = [
    "HysteresisLoop",
    "IntegratorOptions",
    "LadderRates",
    "ModelParams",
    "PopulationState",
    "ProtocolBudget",
    "SweepProtocol",
    "ThreeLevelParams",
    "adiabatic_boundaries",
    "adiabatic_eliminate",
    "build_blocks",
    "build_sector",
    "collapse_metric",
    "correlation_zz",
    "evolve",
    "fit_power_law",
    "hysteresis_width",
    "inversion_variance",
    "ladder_rates",
    "liouvillian_gap",
    "mean_inversion",
    "mean_inversion_asymptotic",
    "partition_function",
    "relaxation_rate_cumulant",
    "sector_spectrum",
    "simulate_three_level",
    "steady_sensitivity",
    "steady_state",
    "sweep",
    "total_sensitivity",
    "__version__",
]
