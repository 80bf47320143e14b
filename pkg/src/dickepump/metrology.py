"""Critical-point sensitivity of pump-rate estimation.

The steady state is a one-parameter exponential family in ``beta``, so the
classical Fisher information of a ``J_z`` measurement equals the quantum
one and both equal ``Var[J_z]``.  Error propagation from the mean
inversion saturates the resulting Cramer-Rao bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import ModelParams, m_values, steady_state

DEFAULT_ETA = 0.6


class BudgetInfeasible(ValueError):
    """Fewer than one independent scan fits into the experiment time."""


@dataclass(frozen=True)
class SensitivityReport:
    """Single-scan steady-state sensitivity at one pump value.

    Attributes
    ----------
    delta_w_single : float
        Error-propagation uncertainty of ``w`` (same units as ``gamma``).
    delta_beta : float
        Error-propagation uncertainty of ``beta``,
        ``sqrt(Var) / |d<J_z>/dbeta|``.
    fisher_beta : float
        Fisher information ``I_beta`` of a ``J_z`` measurement.
    cramer_rao_beta : float
        ``1 / sqrt(I_beta)``.
    saturation_ratio : float
        ``delta_beta / cramer_rao_beta``; never below one.
    """

    delta_w_single: float
    delta_beta: float
    fisher_beta: float
    cramer_rao_beta: float
    saturation_ratio: float


def fisher_information_beta(p: ModelParams) -> float:
    """``sum_m p_m (d ln p_m / dbeta)^2`` for the Boltzmann populations."""
    probs = steady_state(p).probs
    m = m_values(p.n_atoms)
    mean = math.fsum(m * probs)
    # d ln p_m / dbeta = -(m - <J_z>)
    score = -(m - mean)
    return math.fsum(probs * score**2)


def mean_inversion_slope(p: ModelParams) -> float:
    """``d<J_z>/dbeta = sum_m m dp_m/dbeta`` with ``dp_m/dbeta = -p_m (m - <J_z>)``."""
    probs = steady_state(p).probs
    m = m_values(p.n_atoms)
    mean = math.fsum(m * probs)
    # sum_m dp_m/dbeta = 0, so m may be measured from <J_z>; this avoids
    # cancelling O(N^2) terms when the distribution sits near an edge
    centred = m - mean
    return -math.fsum(centred * probs * centred)


def steady_sensitivity(p: ModelParams) -> SensitivityReport:
    """Error-propagation sensitivity of the steady-state inversion.

    ``beta`` is converted to ``w`` with the exact Jacobian
    ``|dw/dbeta| = w``, which equals ``gamma`` at the critical point.
    Variance, slope and Fisher information are all summed from the same
    stationary populations so that their exact identity survives rounding.
    """
    probs = steady_state(p).probs
    centred = m_values(p.n_atoms) - math.fsum(m_values(p.n_atoms) * probs)
    var = math.fsum(probs * centred**2)
    slope = mean_inversion_slope(p)
    delta_beta = math.sqrt(var) / abs(slope)
    fisher = fisher_information_beta(p)
    bound = 1.0 / math.sqrt(fisher)
    return SensitivityReport(
        delta_w_single=p.pump * delta_beta,
        delta_beta=delta_beta,
        fisher_beta=fisher,
        cramer_rao_beta=bound,
        saturation_ratio=delta_beta / bound,
    )


@dataclass(frozen=True)
class ProtocolBudget:
    """Repeated-scan budget for a fixed total experiment time.

    The inputs are ``total_time``, ``scan_constant`` (``C > 1``, scan range
    in units of the single-scan uncertainty), ``rate_r`` and the hysteresis
    exponent ``eta``.  The remaining fields are filled in by
    :func:`total_sensitivity`.
    """

    total_time: float
    scan_constant: float
    rate_r: float
    eta: float = DEFAULT_ETA
    delta_w_single: float | None = None
    scan_range: float | None = None
    n_scans: float | None = None
    delta_w_total: float | None = None
    slow_branch: float | None = None
    fast_branch: float | None = None
    crossover_rate: float | None = None

    def __post_init__(self):
        if not self.total_time > 0:
            raise ValueError("total_time must be positive")
        if not self.scan_constant > 1:
            raise ValueError("scan_constant must exceed 1")
        if not self.rate_r > 0:
            raise ValueError("rate_r must be positive")
        if not self.eta > 0:
            raise ValueError("eta must be positive")


def total_sensitivity(p: ModelParams, budget: ProtocolBudget) -> ProtocolBudget:
    """Complete a budget: scan range, number of scans and combined sensitivity.

    The single-scan uncertainty grows with the hysteresis as
    ``dw_1 = dw_ss * max(1, (r/gamma)^eta)``; each scan covers
    ``C * dw_1`` at speed ``2 gamma r / N``, so ``T`` allows
    ``N_s = wdot T / (2 C dw_1)`` independent scans and
    ``dw_total = dw_1 / sqrt(N_s)``.  The two power-law branches
    ``(gamma/N) sqrt(C/(gamma T)) (r/gamma)^{-1/2}`` and
    ``... (r/gamma)^{(3 eta - 1)/2}`` are reported alongside; they meet at
    ``r = gamma``.
    """
    g, n = p.gamma, p.n_atoms
    r, eta = budget.rate_r, budget.eta
    dw_ss = steady_sensitivity(p.with_pump(g)).delta_w_single
    widening = max(1.0, (r / g) ** eta)
    dw_1 = dw_ss * widening
    scan_range = budget.scan_constant * dw_1
    wdot = 2.0 * g * r / n
    n_scans = wdot * budget.total_time / (2.0 * scan_range)
    if n_scans < 1:
        raise BudgetInfeasible(
            f"only {n_scans:.3g} scans fit in T={budget.total_time}; increase T or r"
        )
    prefactor = (g / n) * math.sqrt(budget.scan_constant / (g * budget.total_time))
    return replace(
        budget,
        delta_w_single=dw_1,
        scan_range=scan_range,
        n_scans=n_scans,
        delta_w_total=dw_1 / math.sqrt(n_scans),
        slow_branch=prefactor * (r / g) ** -0.5,
        fast_branch=prefactor * (r / g) ** ((3 * eta - 1) / 2),
        crossover_rate=g,
    )


def total_sensitivity_curve(p: ModelParams, rates, total_time, scan_constant, eta=DEFAULT_ETA):
    """``delta_w_total`` along a grid of scan rates."""
    out = []
    for r in rates:
        b = total_sensitivity(p, ProtocolBudget(total_time, scan_constant, float(r), eta))
        out.append(b.delta_w_total)
    return np.array(out)
