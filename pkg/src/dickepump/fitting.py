"""Log-log regression of hysteresis widths and the finite-size collapse test."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LOW_RATE_WINDOW = (0.01, 0.3)
HIGH_RATE_WINDOW = (4.0, 256.0)
POINTS_PER_DECADE = 8


@dataclass(frozen=True)
class PowerLawFit:
    """``y = prefactor * x**exponent`` fitted by OLS on ``(ln x, ln y)``."""

    exponent: float
    prefactor: float
    window: tuple[float, float]
    residual_rms: float
    n_points: int

    def __call__(self, x):
        return self.prefactor * np.asarray(x, float) ** self.exponent


def fit_power_law(points, window=None, min_points: int = 5) -> PowerLawFit:
    """Fit a power law to the points whose ``x`` lies inside ``window``.

    Parameters
    ----------
    points : array_like, shape (n, 2)
        ``(x, y)`` pairs, both strictly positive.
    window : (float, float), optional
        Inclusive ``x`` range; all points are used when omitted.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must have shape (n, 2)")
    if window is None:
        window = (float(pts[:, 0].min()), float(pts[:, 0].max()))
    x_lo, x_hi = window
    sel = pts[(pts[:, 0] >= x_lo) & (pts[:, 0] <= x_hi)]
    if sel.shape[0] < min_points:
        raise ValueError(f"need at least {min_points} points in {window}, got {sel.shape[0]}")
    if np.any(sel <= 0):
        raise ValueError("power-law fits need positive x and y")
    lx, ly = np.log(sel[:, 0]), np.log(sel[:, 1])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    return PowerLawFit(
        exponent=float(slope),
        prefactor=float(np.exp(intercept)),
        window=(float(x_lo), float(x_hi)),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        n_points=int(sel.shape[0]),
    )


def log_grid(lo: float, hi: float, per_decade: int = POINTS_PER_DECADE) -> np.ndarray:
    """Log-spaced grid with both endpoints and about ``per_decade`` points per decade."""
    n = int(round(per_decade * np.log10(hi / lo))) + 1
    return np.geomspace(lo, hi, max(n, 2))


def collapse_metric(curves, gamma: float = 1.0, rescale: bool = True, n_grid: int = 50) -> float:
    """Largest relative spread between hysteresis-width curves of different ``N``.

    Each curve ``N -> (r, Delta w_H)`` is rescaled to ``(N / 2 gamma) Delta w_H``
    (unless ``rescale`` is False), interpolated linearly in ``(ln r, ln y)``
    onto a common log grid over the overlap of the ``r`` ranges, and the
    spread ``max_N y / min_N y - 1`` is maximized over that grid.
    """
    if len(curves) < 2:
        raise ValueError("need curves for at least two values of N")
    prepared = []
    for n, data in curves.items():
        arr = np.asarray(data, dtype=float)
        arr = arr[np.argsort(arr[:, 0])]
        y = arr[:, 1] * (n / (2.0 * gamma) if rescale else 1.0)
        prepared.append((np.log(arr[:, 0]), np.log(y)))
    lo = max(lr[0] for lr, _ in prepared)
    hi = min(lr[-1] for lr, _ in prepared)
    if not hi > lo:
        raise ValueError("the curves have no overlapping r range")
    grid = np.linspace(lo, hi, n_grid)
    stack = np.exp(np.array([np.interp(grid, lr, ly) for lr, ly in prepared]))
    spread = stack.max(axis=0) / stack.min(axis=0) - 1.0
    return float(spread.max())
