"""Model definition and exact steady-state thermodynamics of the collectively
pumped Dicke ladder.

The ensemble of ``N`` two-level atoms is confined to the symmetric Dicke
manifold ``j = N/2``.  Collective decay at rate ``gamma`` and collective
pumping at rate ``pump`` turn the diagonal of the density matrix into a
birth-death chain whose stationary law is a Boltzmann distribution in
``J_z`` at inverse temperature ``beta = -ln(pump / gamma)``.

Index convention (fixed throughout the package): the Dicke state with
inversion ``m`` is stored at position ``k = m + N/2``, so every population
vector runs from ``m = -N/2`` upward.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_ATOMS = 10_000

# below this |beta| the sinh ratio is replaced by the explicit geometric sum
_BETA_SERIES = 1e-4


@dataclass(frozen=True)
class ModelParams:
    """One instance of the collective decay / collective pumping model.

    Parameters
    ----------
    n_atoms : int
        Number of atoms ``N`` (``1 <= N <= MAX_ATOMS``).
    gamma : float
        Collective decay rate, ``> 0``.
    pump : float
        Collective pumping rate ``w``, ``>= 0``.
    """

    n_atoms: int
    gamma: float = 1.0
    pump: float = 1.0

    def __post_init__(self):
        n = self.n_atoms
        if isinstance(n, bool) or int(n) != n:
            raise TypeError(f"n_atoms must be an integer, got {n!r}")
        object.__setattr__(self, "n_atoms", int(n))
        if self.n_atoms < 1:
            raise ValueError(f"n_atoms must be >= 1, got {n}")
        if self.n_atoms > MAX_ATOMS:
            raise ValueError(f"n_atoms={n} exceeds the supported maximum {MAX_ATOMS}")
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError(f"gamma must be finite and > 0, got {self.gamma}")
        if not (np.isfinite(self.pump) and self.pump >= 0):
            raise ValueError(f"pump must be finite and >= 0, got {self.pump}")

    @property
    def j(self) -> float:
        return self.n_atoms / 2

    @property
    def beta(self) -> float:
        """Effective inverse temperature ``-ln(w/gamma)``; undefined at ``w = 0``."""
        if self.pump == 0:
            raise ValueError("beta is infinite for pump = 0")
        return -math.log(self.pump / self.gamma)

    @property
    def pump_ratio(self) -> float:
        return self.pump / self.gamma

    def with_pump(self, pump: float) -> "ModelParams":
        return ModelParams(self.n_atoms, self.gamma, pump)

    def m_values(self) -> np.ndarray:
        return m_values(self.n_atoms)


def m_values(n_atoms: int) -> np.ndarray:
    """Inversion quantum numbers ``m = -N/2, ..., N/2`` in storage order."""
    return np.arange(n_atoms + 1) - n_atoms / 2


def index_of(m: float, n_atoms: int) -> int:
    """Storage index ``k = m + N/2`` of the Dicke state ``|m>``."""
    k = m + n_atoms / 2
    if k != int(k) or not 0 <= k <= n_atoms:
        raise ValueError(f"m={m} is not a Dicke level for N={n_atoms}")
    return int(k)


def m_of(k: int, n_atoms: int) -> float:
    """Inverse of :func:`index_of`."""
    if not 0 <= k <= n_atoms:
        raise ValueError(f"index {k} out of range for N={n_atoms}")
    return k - n_atoms / 2


class PopulationState:
    """Probability vector over the Dicke ladder.

    Small negative entries (down to ``-1e-12``) produced by integrator
    drift are clamped to zero on construction; anything more negative, or a
    vector whose total differs from one by more than ``1e-9``, is rejected.
    """

    NEG_TOL = 1e-12
    NORM_TOL = 1e-9

    __slots__ = ("_probs",)

    def __init__(self, probs, *, check: bool = True):
        p = np.array(probs, dtype=np.float64)
        if p.ndim != 1 or p.size < 2:
            raise ValueError("a population vector needs at least two entries")
        if check:
            if p.min() < -self.NEG_TOL:
                raise ValueError(f"negative population {p.min():.3e}")
            total = p.sum()
            if abs(total - 1.0) > self.NORM_TOL:
                raise ValueError(f"populations sum to {total!r}, not 1")
        np.clip(p, 0.0, None, out=p)
        p.setflags(write=False)
        self._probs = p

    @property
    def probs(self) -> np.ndarray:
        return self._probs

    @property
    def n_atoms(self) -> int:
        return self._probs.size - 1

    def __len__(self):
        return self._probs.size

    def __repr__(self):
        return f"PopulationState(N={self.n_atoms}, <Jz>={self.mean_inversion():.6g})"

    def mean_inversion(self) -> float:
        return float(m_values(self.n_atoms) @ self._probs)

    def inversion_variance(self) -> float:
        m = m_values(self.n_atoms)
        mu = m @ self._probs
        return float(((m - mu) ** 2) @ self._probs)

    @classmethod
    def ground(cls, n_atoms: int) -> "PopulationState":
        p = np.zeros(n_atoms + 1)
        p[0] = 1.0
        return cls(p)

    @classmethod
    def excited(cls, n_atoms: int) -> "PopulationState":
        p = np.zeros(n_atoms + 1)
        p[-1] = 1.0
        return cls(p)


@dataclass(frozen=True)
class LadderRates:
    """Transition rates along the ladder, one entry per bond.

    ``down[k]`` is the rate of ``m_{k+1} -> m_k`` (collective emission out of
    the upper level of bond ``k``) and ``up[k]`` the rate of
    ``m_k -> m_{k+1}`` (collective pumping out of the lower level).
    """

    down: np.ndarray
    up: np.ndarray


def ladder_rates(p: ModelParams) -> LadderRates:
    j = p.j
    m = m_values(p.n_atoms)
    lower, upper = m[:-1], m[1:]
    down = p.gamma * (j + upper) * (j - upper + 1)
    up = p.pump * (j - lower) * (j + lower + 1)
    return LadderRates(down=down, up=up)


def steady_state(p: ModelParams) -> PopulationState:
    """Boltzmann populations ``p_m ~ exp(-beta m)``; the ground state for ``w = 0``."""
    if p.pump == 0:
        return PopulationState.ground(p.n_atoms)
    beta = p.beta
    m = m_values(p.n_atoms)
    m_star = m[0] if beta >= 0 else m[-1]
    weights = np.exp(-beta * (m - m_star))
    return PopulationState(weights / math.fsum(weights))


def log_partition_function(beta: float, n_atoms: int) -> float:
    """``ln Z(beta)``, finite for any real ``beta``."""
    if abs(beta) <= _BETA_SERIES:
        return math.log(_geometric_sum(beta, n_atoms))
    b = abs(beta)
    return (
        b * n_atoms / 2
        + math.log(-math.expm1(-b * (n_atoms + 1)))
        - math.log(-math.expm1(-b))
    )


def partition_function(beta: float, n_atoms: int) -> float:
    """``Z(beta) = sinh((N+1) beta/2) / sinh(beta/2)``.

    Near the critical point the ratio is a 0/0 form, so for
    ``|beta| <= 1e-4`` the sum over levels is evaluated directly; far from
    it the logarithmic form avoids overflow of the hyperbolic sines.
    """
    if n_atoms < 1:
        raise ValueError("n_atoms must be >= 1")
    if abs(beta) <= _BETA_SERIES:
        return _geometric_sum(beta, n_atoms)
    x = (n_atoms + 1) * abs(beta) / 2
    if x < 700:
        return math.sinh((n_atoms + 1) * beta / 2) / math.sinh(beta / 2)
    return math.exp(log_partition_function(beta, n_atoms))


def _geometric_sum(beta: float, n_atoms: int) -> float:
    return math.fsum(math.exp(-beta * m) for m in m_values(n_atoms))


def _coth(x: float) -> float:
    return 1.0 / math.tanh(x)


def _csch2(x: float) -> float:
    # 1/sinh(x)^2 written so that large |x| underflows gracefully instead of overflowing
    t = math.exp(-2.0 * abs(x))
    return 4.0 * t / math.expm1(-2.0 * abs(x)) ** 2


def _small_beta(beta: float, n_atoms: int) -> bool:
    # the closed-form cumulants cancel catastrophically once (N+1)|beta| << 1
    return abs(beta) * (n_atoms + 1) < 1.0


def _moments(beta: float, n_atoms: int) -> tuple[float, float]:
    m = m_values(n_atoms)
    weights = np.exp(-beta * (m - m[-1 if beta < 0 else 0]))
    z = math.fsum(weights)
    mean = math.fsum(m * weights) / z
    var = math.fsum((m - mean) ** 2 * weights) / z
    return mean, var


def mean_inversion_beta(beta: float, n_atoms: int) -> float:
    """``<J_z> = -d/dbeta ln Z`` as a function of ``beta``."""
    if beta == 0:
        return 0.0
    if _small_beta(beta, n_atoms):
        return _moments(beta, n_atoms)[0]
    return 0.5 * _coth(beta / 2) - (n_atoms + 1) / 2 * _coth((n_atoms + 1) * beta / 2)


def inversion_variance_beta(beta: float, n_atoms: int) -> float:
    """``Var[J_z] = d^2/dbeta^2 ln Z`` as a function of ``beta``."""
    if _small_beta(beta, n_atoms):
        return _moments(beta, n_atoms)[1]
    a = (n_atoms + 1) / 2
    return max(0.25 * _csch2(beta / 2) - a * a * _csch2(a * beta), 0.0)


def mean_inversion(p: ModelParams) -> float:
    """Exact finite-``N`` steady-state inversion ``<J_z>``.

    Equivalent to ``(N+1)/2 (x^{N+1}+1)/(x^{N+1}-1) - (x+1)/(2(x-1))`` with
    ``x = w/gamma``.
    """
    if p.pump == 0:
        return -p.n_atoms / 2
    return mean_inversion_beta(p.beta, p.n_atoms)


def mean_inversion_asymptotic(p: ModelParams) -> float:
    """Large-``N`` form ``(N/2)/tanh(N(x-1)/2) - 1/(x-1)`` with ``x = w/gamma``.

    The removable singularity at ``x = 1`` is handled with the series
    ``N^2 (x-1)/12 + ...``.
    """
    if p.pump == 0:
        raise ValueError("the asymptotic inversion needs pump > 0")
    n = p.n_atoms
    eps = p.pump_ratio - 1.0
    u = n * eps / 2
    if abs(u) < 1e-4:
        # (N/2) coth(u) - 1/eps  = (N/2)(u/3 - u^3/45) + ...
        return (n / 2) * (u / 3 - u**3 / 45)
    return (n / 2) / math.tanh(u) - 1.0 / eps


def inversion_variance(p: ModelParams) -> float:
    """Exact steady-state variance of ``J_z``."""
    if p.pump == 0:
        return 0.0
    return inversion_variance_beta(p.beta, p.n_atoms)
