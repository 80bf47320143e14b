"""Population dynamics under static and swept pumping.

Only the diagonal of the density matrix is needed for ``<J_z>``; it obeys
a birth-death master equation whose generator is linear in the pump,
``L(w) = L_decay + w * L_pump``.  Everything here integrates that equation:
fixed-``w`` relaxation, linear pump ramps and the resulting hysteresis
loops, and the steady-state autocorrelation of ``J_z`` via the regression
theorem.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import sparse
from scipy.integrate import solve_ivp, trapezoid
from scipy.optimize import brentq

from .core import (
    ModelParams,
    PopulationState,
    ladder_rates,
    m_values,
    mean_inversion_asymptotic,
    steady_state,
)

EXPLICIT_METHODS = ("RK45", "RK23", "DOP853")


class IntegratorFailure(RuntimeError):
    """The ODE integrator gave up; ``time`` is where it stopped."""

    def __init__(self, message: str, time: float):
        super().__init__(f"{message} (t = {time:.6g})")
        self.time = time


class HysteresisError(RuntimeError):
    pass


class FitWindowError(ValueError):
    pass


@dataclass(frozen=True)
class IntegratorOptions:
    """Settings handed to :func:`scipy.integrate.solve_ivp`.

    The default is the implicit ``BDF`` scheme.  For the explicit embedded
    Runge-Kutta pairs the step is additionally capped at ``0.5 / rho`` with
    ``rho = max_k |L_kk|``, unless ``max_step`` is given explicitly.
    """

    method: str = "BDF"
    rtol: float = 1e-8
    atol: float = 1e-10
    max_step: float | None = None

    def refined(self, factor: float = 0.1) -> "IntegratorOptions":
        """Same scheme with tolerances (and any step cap) tightened by ``factor``."""
        return IntegratorOptions(
            self.method,
            self.rtol * factor,
            self.atol * factor,
            None if self.max_step is None else self.max_step * factor,
        )


def _generator_parts(n_atoms: int, gamma: float):
    """Sparse ``(L_decay, L_pump)`` with ``L(w) = L_decay + w * L_pump``."""
    rates = ladder_rates(ModelParams(n_atoms, gamma, 1.0))
    down, up = rates.down, rates.up
    zero = np.zeros(1)
    l_decay = sparse.diags(
        [down, -np.concatenate([zero, down])], [1, 0], format="csr"
    )
    l_pump = sparse.diags([up, -np.concatenate([up, zero])], [-1, 0], format="csr")
    return l_decay, l_pump


def rate_matrix(p: ModelParams) -> sparse.csr_matrix:
    """Generator of the population master equation ``dp/dt = L p``."""
    l_decay, l_pump = _generator_parts(p.n_atoms, p.gamma)
    return (l_decay + p.pump * l_pump).tocsr()


def _spectral_radius_bound(L) -> float:
    return float(np.max(np.abs(L.diagonal())))


def _solve(fun, jac, y0, t_span, t_eval, options, rho):
    kwargs = {}
    if options.method in EXPLICIT_METHODS:
        kwargs["max_step"] = options.max_step if options.max_step else 0.5 / rho
    else:
        kwargs["jac"] = jac
        if options.max_step:
            kwargs["max_step"] = options.max_step
    sol = solve_ivp(
        fun,
        t_span,
        y0,
        method=options.method,
        t_eval=t_eval,
        rtol=options.rtol,
        atol=options.atol,
        **kwargs,
    )
    if sol.status != 0:
        t_fail = float(sol.t[-1]) if sol.t.size else float(t_span[0])
        raise IntegratorFailure(sol.message, t_fail)
    return sol


def evolve(
    p: ModelParams,
    initial: PopulationState,
    t_final: float,
    options: IntegratorOptions | None = None,
) -> PopulationState:
    """Populations at ``t_final`` under the fixed-pump generator."""
    options = options or IntegratorOptions()
    if initial.n_atoms != p.n_atoms:
        raise ValueError("initial state has the wrong number of atoms")
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    if t_final == 0:
        return initial
    L = rate_matrix(p)
    sol = _solve(
        lambda t, y: L @ y,
        lambda t, y: L,
        initial.probs,
        (0.0, t_final),
        [t_final],
        options,
        _spectral_radius_bound(L),
    )
    return PopulationState(sol.y[:, -1])


def propagate(p: ModelParams, vector, times, options: IntegratorOptions | None = None):
    """Integrate ``dv/dt = L v`` for an arbitrary real vector.

    Returns an array of shape ``(len(vector), len(times))``.
    """
    options = options or IntegratorOptions()
    times = np.asarray(times, dtype=float)
    L = rate_matrix(p)
    sol = _solve(
        lambda t, y: L @ y,
        lambda t, y: L,
        np.asarray(vector, dtype=float),
        (0.0, float(times[-1])),
        times,
        options,
        _spectral_radius_bound(L),
    )
    return sol.y


# --------------------------------------------------------------------------
# pump sweeps


def default_sweep_range(n_atoms: int, rate_r: float, gamma: float = 1.0, widen: float = 1.0):
    """Pump endpoints ``(w_lo, w_hi)`` bracketing the transition.

    The relative half-width ``h = (2/N) max(10, 5 sqrt(max(r/gamma, 1)))``
    covers both the static transition width and the expected loop width with
    a wide margin.  The endpoints are placed at ``gamma * exp(-+h)``; for small
    ``h`` this is ``gamma (1 -+ h)``, and it keeps ``w_lo > 0`` for fast scans.
    """
    h = widen * (2.0 / n_atoms) * max(10.0, 5.0 * math.sqrt(max(rate_r / gamma, 1.0)))
    return gamma * math.exp(-h), gamma * math.exp(h)


@dataclass(frozen=True)
class SweepProtocol:
    """A linear pump ramp ``w(t) = w_start + wdot t`` with ``|wdot| = 2 gamma r / N``."""

    rate_r: float
    w_start: float
    w_end: float
    n_samples: int = 801
    options: IntegratorOptions = field(default_factory=IntegratorOptions)

    def __post_init__(self):
        if not self.rate_r > 0:
            raise ValueError("rate_r must be positive")
        if not (self.w_start > 0 and self.w_end > 0):
            raise ValueError("pump endpoints must be positive")
        if self.w_start == self.w_end:
            raise ValueError("pump endpoints coincide")
        if self.n_samples < 400:
            raise ValueError("a sweep needs at least 400 samples")

    @property
    def direction(self) -> str:
        return "up" if self.w_end > self.w_start else "down"

    @classmethod
    def default(cls, n_atoms, rate_r, direction="up", gamma=1.0, widen=1.0, **kwargs):
        lo, hi = default_sweep_range(n_atoms, rate_r, gamma, widen)
        if direction not in ("up", "down"):
            raise ValueError(f"direction must be 'up' or 'down', got {direction!r}")
        start, end = (lo, hi) if direction == "up" else (hi, lo)
        return cls(rate_r, start, end, **kwargs)


@dataclass(frozen=True)
class SweepResult:
    t: np.ndarray
    w: np.ndarray
    inversion: np.ndarray
    direction: str
    max_norm_error: float = 0.0

    def crossing(self) -> float:
        """Pump value where ``<J_z>`` first changes sign."""
        return zero_crossing(self.w, self.inversion)


def zero_crossing(x, y) -> float:
    """Linear interpolation of the first sign change of ``y`` along ``x``.

    Raises ``HysteresisError`` if ``y`` never changes sign.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    hit = np.flatnonzero(y == 0)
    flips = np.flatnonzero(np.sign(y[:-1]) * np.sign(y[1:]) < 0)
    candidates = []
    if hit.size:
        candidates.append((hit[0], x[hit[0]]))
    if flips.size:
        i = flips[0]
        candidates.append((i, x[i] - y[i] * (x[i + 1] - x[i]) / (y[i + 1] - y[i])))
    if not candidates:
        raise HysteresisError("no zero crossing of <J_z> in the sampled range")
    return float(min(candidates)[1])


def sweep(p_base: ModelParams, proto: SweepProtocol) -> SweepResult:
    """Integrate the population equation along a linear pump ramp.

    ``p_base`` supplies ``N`` and ``gamma`` (its pump is ignored).  The run
    starts from the exact steady state at ``w_start`` and records
    ``<J_z>`` on a uniform grid of ``proto.n_samples`` pump values.
    """
    n, gamma = p_base.n_atoms, p_base.gamma
    l_decay, l_pump = _generator_parts(n, gamma)
    sign = 1.0 if proto.direction == "up" else -1.0
    wdot = sign * 2.0 * gamma * proto.rate_r / n
    w0 = proto.w_start
    duration = (proto.w_end - w0) / wdot
    w_samples = np.linspace(w0, proto.w_end, proto.n_samples)
    t_samples = np.clip((w_samples - w0) / wdot, 0.0, duration)
    t_samples[-1] = duration

    def fun(t, y):
        return l_decay @ y + (w0 + wdot * t) * (l_pump @ y)

    def jac(t, y):
        return l_decay + (w0 + wdot * t) * l_pump

    rho = max(_spectral_radius_bound(l_decay + max(w0, proto.w_end) * l_pump), 1e-300)
    p0 = steady_state(ModelParams(n, gamma, w0)).probs
    sol = _solve(fun, jac, p0, (0.0, duration), t_samples, proto.options, rho)
    probs = sol.y
    norm_err = float(np.max(np.abs(probs.sum(axis=0) - 1.0)))
    inversion = m_values(n) @ probs
    return SweepResult(
        t=sol.t,
        w=w_samples,
        inversion=inversion,
        direction=proto.direction,
        max_norm_error=norm_err,
    )


@dataclass(frozen=True)
class HysteresisLoop:
    up: SweepResult
    down: SweepResult
    w_plus: float
    w_minus: float

    @property
    def width(self) -> float:
        return abs(self.w_plus - self.w_minus)

    def scaled_width(self, n_atoms: int, gamma: float = 1.0) -> float:
        """Width in units of the static transition width ``2 gamma / N``."""
        return self.width * n_atoms / (2.0 * gamma)

    @property
    def area(self) -> float:
        """Area enclosed between the down and up branches in the ``(w, <J_z>)`` plane."""
        w = self.up.w
        down = np.interp(w, self.down.w[::-1], self.down.inversion[::-1])
        return float(trapezoid(down - self.up.inversion, w))


def hysteresis_width(
    p_base: ModelParams,
    rate_r: float,
    n_samples: int = 801,
    options: IntegratorOptions | None = None,
) -> HysteresisLoop:
    """Paired up/down sweeps and the separation of their ``<J_z> = 0`` crossings.

    If a branch never crosses zero the range is widened fourfold and the
    pair is rerun once before giving up.
    """
    if not rate_r > 0:
        raise ValueError("rate_r must be positive")
    options = options or IntegratorOptions()
    n, gamma = p_base.n_atoms, p_base.gamma
    last_error = None
    for widen in (1.0, 4.0):
        up = sweep(p_base, SweepProtocol.default(n, rate_r, "up", gamma, widen, n_samples=n_samples, options=options))
        down = sweep(p_base, SweepProtocol.default(n, rate_r, "down", gamma, widen, n_samples=n_samples, options=options))
        try:
            return HysteresisLoop(up, down, up.crossing(), down.crossing())
        except HysteresisError as exc:
            last_error = exc
    raise HysteresisError(f"r={rate_r}: {last_error} even after widening the range")


def _scaled_width_job(args):
    n, gamma, r, n_samples = args
    loop = hysteresis_width(ModelParams(n, gamma, gamma), r, n_samples=n_samples)
    return loop.scaled_width(n, gamma)


def default_workers() -> int:
    env = os.environ.get("DICKEPUMP_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def scaled_widths(n_atoms: int, rates, gamma: float = 1.0, n_samples: int = 801, workers: int | None = None):
    """``(N / 2 gamma) * Delta w_H`` for each scan rate, in input order."""
    jobs = [(n_atoms, gamma, float(r), n_samples) for r in rates]
    workers = default_workers() if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return np.array(list(pool.map(_scaled_width_job, jobs)))
    return np.array([_scaled_width_job(job) for job in jobs])


# --------------------------------------------------------------------------
# relaxation rates


def relaxation_rate_cumulant(p: ModelParams) -> float:
    """Second-order cumulant estimate ``lambda = w + gamma + 2 (w - gamma) <J_z>``.

    ``<J_z>`` is taken from the large-``N`` tanh form, so the result reduces
    to ``2 gamma`` at the critical point and to ``N |w - gamma|`` far from it.
    """
    g, w = p.gamma, p.pump
    if w == g:
        return 2.0 * g
    return w + g + 2.0 * (w - g) * mean_inversion_asymptotic(p)


def relaxation_rate_closed_form(p: ModelParams) -> float:
    """``N (w - gamma) / tanh(N (w/gamma - 1) / 2)``."""
    n, g = p.n_atoms, p.gamma
    u = n * (p.pump / g - 1.0) / 2
    if abs(u) < 1e-8:
        return 2.0 * g * (1.0 + u * u / 3)
    return n * (p.pump - g) / math.tanh(u)


@dataclass(frozen=True)
class CorrelationSeries:
    taus: np.ndarray
    values: np.ndarray
    fitted_rate: float
    window: tuple[float, float]
    monotone_tail: bool


def correlation_zz(
    p: ModelParams,
    tau_max: float | None = None,
    n_samples: int = 2001,
    options: IntegratorOptions | None = None,
) -> CorrelationSeries:
    """Steady-state ``C_zz(tau)`` and the decay rate of its tail.

    By the regression theorem the perturbation ``(m - <J_z>) p_m`` evolves
    under the population generator, and ``C_zz(tau) = sum_m m v_m(tau)``.
    The rate is the least-squares log-slope over the window where ``C_zz``
    falls from ``1e-1`` to ``1e-3`` of its initial value.
    """
    if p.pump <= 0:
        raise ValueError("correlations need pump > 0")
    if tau_max is None:
        tau_max = 12.0 / min(p.gamma + p.pump, relaxation_rate_cumulant(p))
    ss = steady_state(p)
    m = m_values(p.n_atoms)
    v0 = (m - ss.mean_inversion()) * ss.probs
    scale = float(np.max(np.abs(v0)))
    options = options or IntegratorOptions(rtol=1e-10, atol=1e-14 * scale)
    taus = np.linspace(0.0, tau_max, n_samples)
    values = m @ propagate(p, v0, taus, options)
    return _fit_tail(taus, values)


def _fit_tail(taus, values, hi=1e-1, lo=1e-3, min_points=5):
    c0 = values[0]
    rel = values / c0
    start = np.flatnonzero(rel <= hi)
    if not start.size:
        raise FitWindowError("C_zz never fell below 10% of its initial value")
    i0 = start[0]
    below = np.flatnonzero(rel[i0:] < lo)
    if not below.size:
        raise FitWindowError("C_zz did not reach 1e-3 of its initial value; increase tau_max")
    i1 = i0 + below[0]
    seg_t, seg_c = taus[i0:i1], values[i0:i1]
    if seg_t.size < min_points:
        raise FitWindowError(f"only {seg_t.size} samples in the tail window; increase n_samples")
    if np.any(seg_c <= 0):
        raise FitWindowError("C_zz hit the numerical floor inside the tail window")
    slope = np.polyfit(seg_t, np.log(seg_c), 1)[0]
    monotone = bool(np.all(np.diff(seg_c) < 0))
    return CorrelationSeries(taus, values, float(-slope), (float(seg_t[0]), float(seg_t[-1])), monotone)


# --------------------------------------------------------------------------
# adiabaticity boundaries


class AdiabaticBoundaries(NamedTuple):
    w_minus: float
    w_plus: float

    @property
    def width(self) -> float:
        return self.w_plus - self.w_minus


def adiabatic_boundaries(p_base: ModelParams, rate_r: float) -> AdiabaticBoundaries:
    """Freezing and thawing points where ``wdot / |w - gamma| = lambda(w)``.

    ``lambda`` is :func:`relaxation_rate_cumulant` and ``wdot = 2 gamma r / N``.
    """
    if not rate_r > 0:
        raise ValueError("no root bracket exists for rate_r <= 0")
    n, g = p_base.n_atoms, p_base.gamma
    wdot = 2.0 * g * rate_r / n

    def f(w):
        return wdot / abs(w - g) - relaxation_rate_cumulant(ModelParams(n, g, w))

    # above the critical point: f -> +inf at w -> gamma+, negative far out
    lo = g * (1 + 1e-12)
    hi = g * (1 + 1.0 / n)
    for _ in range(200):
        if f(hi) < 0:
            break
        hi = g + 2 * (hi - g)
    else:
        raise ValueError("could not bracket the upper adiabatic boundary")
    w_plus = brentq(f, lo, hi, xtol=1e-14 * g, rtol=1e-13)

    lo_w = g * 1e-12
    if f(lo_w) > 0:
        raise ValueError("could not bracket the lower adiabatic boundary; scan rate too fast")
    w_minus = brentq(f, lo_w, g * (1 - 1e-12), xtol=1e-14 * g, rtol=1e-13)
    return AdiabaticBoundaries(w_minus, w_plus)


def predicted_width(n_atoms: int, rate_r: float, gamma: float = 1.0) -> tuple[float, float]:
    """Limiting forms of the hysteresis width: ``(2 gamma/N) r/gamma`` and ``(2 gamma/N) sqrt(2 r/gamma)``."""
    unit = 2.0 * gamma / n_atoms
    return unit * rate_r / gamma, unit * math.sqrt(2.0 * rate_r / gamma)
