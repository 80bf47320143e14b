"""Sector-resolved Liouvillian spectra.

The Lindbladian ``gamma D[J-] + w D[J+]`` maps ``|m><m+q|`` into the span
of ``|m-1><m+q-1|``, ``|m><m+q|`` and ``|m+1><m+q+1|``, so it is a direct
sum of tridiagonal blocks, one per off-diagonal index ``q``.  Each block is
real with non-negative off-diagonal products and can be symmetrized by a
diagonal similarity, which gives a provably real spectrum from a symmetric
tridiagonal eigensolver.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .core import ModelParams

ZERO_MODE_RTOL = 1e-9


@dataclass(frozen=True)
class SectorLiouvillian:
    """Tridiagonal generator acting on the coefficients of ``|m><m+q|``.

    The basis is ordered by increasing ``m``.  ``sub[i]`` is the matrix
    element ``L[i+1, i]`` (flow ``m -> m+1``, pumping) and ``sup[i]`` is
    ``L[i, i+1]`` (flow ``m+1 -> m``, emission).
    """

    q: int
    n_atoms: int
    diag: np.ndarray
    sub: np.ndarray
    sup: np.ndarray

    @property
    def dim(self) -> int:
        return self.diag.size

    @property
    def m(self) -> np.ndarray:
        """Row index ``m`` of each basis element ``|m><m+q|``."""
        j = self.n_atoms / 2
        return np.arange(-j, j - abs(self.q) + 1) + (0 if self.q >= 0 else -self.q)

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.diag))) if self.dim else 0.0

    def to_dense(self) -> np.ndarray:
        out = np.diag(self.diag)
        if self.dim > 1:
            out += np.diag(self.sub, -1) + np.diag(self.sup, 1)
        return out

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.diag * x
        y[1:] += self.sub * x[:-1]
        y[:-1] += self.sup * x[1:]
        return y


def build_sector(p: ModelParams, q: int) -> SectorLiouvillian:
    """Restriction of the Lindbladian to ``Diag^(q) = span{|m><m+q|}``.

    With ``a_m^2 = (j+m)(j-m+1)`` and ``b_m^2 = (j-m)(j+m+1)``::

        L|m><n| = gamma a_m a_n |m-1><n-1| + w b_m b_n |m+1><n+1|
                  - (gamma (a_m^2 + a_n^2) + w (b_m^2 + b_n^2)) / 2 |m><n|
    """
    n = p.n_atoms
    q = int(q)
    if abs(q) > n:
        raise ValueError(f"sector q={q} does not exist for N={n}")
    j = n / 2
    m = np.arange(-j, j - abs(q) + 1) + max(0, -q)
    col = m + q

    def a2(x):
        return (j + x) * (j - x + 1)

    def b2(x):
        return (j - x) * (j + x + 1)

    g, w = p.gamma, p.pump
    diag = -0.5 * g * (a2(m) + a2(col)) - 0.5 * w * (b2(m) + b2(col))
    sub = w * np.sqrt(b2(m[:-1]) * b2(col[:-1]))
    sup = g * np.sqrt(a2(m[1:]) * a2(col[1:]))
    return SectorLiouvillian(q=q, n_atoms=n, diag=diag, sub=sub, sup=sup)


@dataclass(frozen=True)
class SectorSpectrum:
    """Eigenvalues of one sector, sorted by increasing ``|lambda|``.

    ``gap`` is the smallest ``|lambda|`` that is not a zero mode (a mode with
    ``|lambda| < 1e-9 * max|diag|``).  ``symmetrized`` is False when the
    dense fallback solver had to be used.
    """

    q: int
    eigenvalues: np.ndarray
    gap: float
    n_zero_modes: int
    symmetrized: bool = True
    eigenvectors: np.ndarray | None = field(default=None, repr=False)

    @property
    def decay_rates(self) -> np.ndarray:
        return -np.real(self.eigenvalues)


def _blocks(sub, sup):
    # split wherever a coupling product vanishes; the matrix is then block
    # triangular and its spectrum is the union of the diagonal blocks
    cuts = np.flatnonzero(sub * sup == 0) + 1
    edges = np.concatenate(([0], cuts, [sub.size + 1]))
    return list(zip(edges[:-1], edges[1:]))


def sector_spectrum(L: SectorLiouvillian, vectors: bool = False) -> SectorSpectrum:
    """Full spectrum of a sector generator.

    Parameters
    ----------
    L : SectorLiouvillian
    vectors : bool
        Also return right eigenvectors (columns, same order as the
        eigenvalues).  Only available on the symmetrized path without block
        splitting.
    """
    scale = L.scale
    prod = L.sub * L.sup
    if np.any(prod < 0):
        warnings.warn(
            f"sector q={L.q} is not symmetrizable; using the dense eigensolver",
            RuntimeWarning,
            stacklevel=2,
        )
        ev = np.linalg.eigvals(L.to_dense())
        return _finish(L.q, ev, scale, symmetrized=False)

    if L.dim == 1:
        return _finish(L.q, L.diag.copy(), scale, vecs=np.ones((1, 1)) if vectors else None)

    blocks = _blocks(L.sub, L.sup)
    off = np.sqrt(prod)
    if not vectors:
        ev = np.concatenate(
            [
                eigh_tridiagonal(L.diag[a:b], off[a : b - 1], eigvals_only=True)
                if b - a > 1
                else L.diag[a:b]
                for a, b in blocks
            ]
        )
        return _finish(L.q, ev, scale)

    if len(blocks) > 1:
        raise ValueError("eigenvectors are unavailable when a coupling vanishes")
    ev, v = eigh_tridiagonal(L.diag, off)
    # right eigenvectors of L are D^{-1} v with d_{i+1}/d_i = sqrt(sup_i/sub_i)
    log_d = np.concatenate(([0.0], np.cumsum(0.5 * (np.log(L.sup) - np.log(L.sub)))))
    inv_d = np.exp(-(log_d - log_d.min()))
    u = inv_d[:, None] * v
    u /= np.linalg.norm(u, axis=0)
    return _finish(L.q, ev, scale, vecs=u)


def _finish(q, ev, scale, symmetrized=True, vecs=None):
    order = np.argsort(np.abs(ev), kind="stable")
    ev = ev[order]
    zero = np.abs(ev) < ZERO_MODE_RTOL * max(scale, np.finfo(float).tiny)
    nonzero = np.abs(ev[~zero])
    gap = float(nonzero[0]) if nonzero.size else float("nan")
    return SectorSpectrum(
        q=q,
        eigenvalues=ev,
        gap=gap,
        n_zero_modes=int(zero.sum()),
        symmetrized=symmetrized,
        eigenvectors=None if vecs is None else vecs[:, order],
    )


def liouvillian_gap(p: ModelParams, q: int = 0) -> float:
    return sector_spectrum(build_sector(p, q)).gap


def stationary_vector(p: ModelParams) -> np.ndarray:
    """Zero mode of the ``q = 0`` sector, normalized to unit sum."""
    spec = sector_spectrum(build_sector(p, 0), vectors=True)
    if spec.n_zero_modes != 1:
        raise RuntimeError(f"expected one zero mode, found {spec.n_zero_modes}")
    v = np.abs(spec.eigenvectors[:, 0])
    return v / v.sum()


def default_gap_grid(p_base: ModelParams, points: int = 401, half_width: float = 10.0):
    """``points`` values of ``w`` spanning ``gamma * [1 - h/N, 1 + h/N]``.

    For very small ``N`` the relative half width is capped at 0.9 so that
    every grid point stays positive.
    """
    h = min(half_width / p_base.n_atoms, 0.9)
    return p_base.gamma * np.linspace(1 - h, 1 + h, points)


def gap_curve(p_base: ModelParams, w_grid=None) -> np.ndarray:
    """``Diag^(0)`` gap along a pump grid.

    Returns an array of shape ``(len(w_grid), 2)`` with columns ``(w, gap)``.
    """
    w_grid = default_gap_grid(p_base) if w_grid is None else np.asarray(w_grid, float)
    if np.any(w_grid <= 0):
        raise ValueError("pump values must be positive")
    gaps = [liouvillian_gap(p_base.with_pump(w)) for w in w_grid]
    return np.column_stack([w_grid, gaps])


def sector_decay_rates(p: ModelParams, q: int, n_modes: int | None = None) -> np.ndarray:
    """Decay rates ``-lambda`` of sector ``q`` in increasing order."""
    rates = sector_spectrum(build_sector(p, q)).decay_rates
    return rates if n_modes is None else rates[:n_modes]


__all__ = [
    "SectorLiouvillian",
    "SectorSpectrum",
    "build_sector",
    "sector_spectrum",
    "liouvillian_gap",
    "stationary_vector",
    "gap_curve",
    "default_gap_grid",
    "sector_decay_rates",
]
