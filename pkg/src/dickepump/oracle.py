"""Three-level reference model and adiabatic elimination of the ``r`` manifold.

Each atom has levels ``g``, ``e`` and ``r``.  A laser drives ``g <-> r``
(Rabi frequency ``omega``, detuning ``delta``), ``r`` decays collectively to
``e`` at ``gamma_r`` and ``e`` decays collectively to ``g`` at ``gamma``::

    dR/dt = -i[-delta J_rr + omega (J_rg + J_gr), R]
            + gamma D[J_ge] R + gamma_r D[J_er] R

Eliminating the weakly populated ``r`` manifold leaves collective pumping
``g -> e`` at ``w = gamma_r (omega/delta)^2``, i.e. the two-level model of
:mod:`dickepump.core`.  This module integrates the full model for a handful
of atoms and implements the block-matrix elimination that yields the
effective operators.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import sparse
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .core import ModelParams, PopulationState, m_values
from .dynamics import propagate

LEVELS = {"g": 0, "e": 1, "r": 2}
DEFAULT_MAX_ATOMS = 6
HARD_MAX_ATOMS = 8


@dataclass(frozen=True)
class ThreeLevelParams:
    n_atoms: int
    omega: float
    delta: float
    gamma_r: float
    gamma: float
    allow_large: bool = False

    def __post_init__(self):
        cap = HARD_MAX_ATOMS if self.allow_large else DEFAULT_MAX_ATOMS
        if not 1 <= self.n_atoms <= cap:
            raise ValueError(
                f"n_atoms={self.n_atoms} outside 1..{cap}"
                + ("" if self.allow_large else " (pass allow_large=True for up to 8)")
            )
        if self.omega < 0:
            raise ValueError("omega must be non-negative")
        for name in ("delta", "gamma_r", "gamma"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def pump_rate(self) -> float:
        """Effective collective pumping ``gamma_r (omega/delta)^2``."""
        return self.gamma_r * (self.omega / self.delta) ** 2

    def effective_params(self) -> ModelParams:
        return ModelParams(self.n_atoms, self.gamma, self.pump_rate)

    def validity_ratios(self) -> dict[str, float]:
        """How far ``delta`` exceeds each scale it must dominate."""
        n = self.n_atoms
        drive = math.sqrt(n) * self.omega
        return {
            "sqrt_n_omega": self.delta / drive if drive else math.inf,
            "n_gamma_r": self.delta / (n * self.gamma_r),
            "n2_gamma": self.delta / (n * n * self.gamma),
        }

    def is_valid(self, factor: float = 20.0) -> bool:
        return all(v >= factor for v in self.validity_ratios().values())


# --------------------------------------------------------------------------
# operators on the tensor-product space


def collective_operator(n_atoms: int, mu: str, nu: str) -> sparse.csr_matrix:
    """``J_{mu nu} = sum_n |mu_n><nu_n|`` on ``(C^3)^{otimes N}``."""
    single = sparse.csr_matrix(([1.0], ([LEVELS[mu]], [LEVELS[nu]])), shape=(3, 3))
    eye = sparse.identity(3, format="csr")
    total = sparse.csr_matrix((3**n_atoms, 3**n_atoms))
    for site in range(n_atoms):
        term = sparse.identity(1, format="csr")
        for k in range(n_atoms):
            term = sparse.kron(term, single if k == site else eye, format="csr")
        total = total + term
    return total.tocsr()


@lru_cache(maxsize=None)
def symmetric_basis(n_atoms: int):
    """Isometry onto the permutation-symmetric subspace.

    Returns ``(P, labels)`` where ``P`` is a sparse ``3^N x d`` matrix with
    orthonormal columns and ``labels[i] = (n_g, n_e, n_r)`` names column ``i``.
    Each column is the uniform superposition of all product states with the
    given occupations.
    """
    groups: dict[tuple[int, int, int], list[int]] = {}
    for idx, digits in enumerate(itertools.product(range(3), repeat=n_atoms)):
        counts = (digits.count(0), digits.count(1), digits.count(2))
        groups.setdefault(counts, []).append(idx)
    labels = sorted(groups, key=lambda c: (c[2], c[1]))
    rows, cols, vals = [], [], []
    for col, lab in enumerate(labels):
        members = groups[lab]
        amp = 1.0 / math.sqrt(len(members))
        rows.extend(members)
        cols.extend([col] * len(members))
        vals.extend([amp] * len(members))
    P = sparse.csr_matrix((vals, (rows, cols)), shape=(3**n_atoms, len(labels)))
    return P, tuple(labels)


@dataclass(frozen=True)
class ThreeLevelOperators:
    hamiltonian: np.ndarray
    jumps: tuple[np.ndarray, ...]
    inversion: np.ndarray
    r_number: np.ndarray
    initial: np.ndarray
    basis: str


def three_level_operators(p: ThreeLevelParams, basis: str = "symmetric") -> ThreeLevelOperators:
    """Hamiltonian, jump operators and observables as dense matrices.

    ``basis="full"`` keeps the ``3^N``-dimensional tensor-product space;
    ``basis="symmetric"`` compresses every operator onto the symmetric
    subspace, which the collective dynamics never leave when started from
    ``|g...g>``.
    """
    n = p.n_atoms
    J = {(a, b): collective_operator(n, a, b) for a in "ger" for b in "ger"}
    H = -p.delta * J["r", "r"] + p.omega * (J["r", "g"] + J["g", "r"])
    jumps = [math.sqrt(p.gamma) * J["g", "e"], math.sqrt(p.gamma_r) * J["e", "r"]]
    jz = 0.5 * (J["e", "e"] - J["g", "g"])
    nr = J["r", "r"]
    if basis == "full":
        dim = 3**n
        rho0 = np.zeros((dim, dim), dtype=complex)
        rho0[0, 0] = 1.0
        dense = lambda A: A.toarray()
    elif basis == "symmetric":
        P, labels = symmetric_basis(n)
        dim = len(labels)
        rho0 = np.zeros((dim, dim), dtype=complex)
        rho0[labels.index((n, 0, 0)), labels.index((n, 0, 0))] = 1.0
        dense = lambda A: (P.T @ A @ P).toarray()
    else:
        raise ValueError(f"unknown basis {basis!r}")
    return ThreeLevelOperators(
        hamiltonian=dense(H).astype(complex),
        jumps=tuple(dense(K).astype(complex) for K in jumps),
        inversion=dense(jz),
        r_number=dense(nr),
        initial=rho0,
        basis=basis,
    )


def lindblad_rhs(rho: np.ndarray, H: np.ndarray, jumps) -> np.ndarray:
    out = -1j * (H @ rho - rho @ H)
    for K in jumps:
        Kd = K.conj().T
        KdK = Kd @ K
        out += K @ rho @ Kd - 0.5 * (KdK @ rho + rho @ KdK)
    return out


def superoperator(H: np.ndarray, jumps) -> np.ndarray:
    """Lindbladian acting on row-major ``vec(rho)``: ``vec(A rho B) = (A kron B^T) vec(rho)``."""
    d = H.shape[0]
    eye = np.eye(d)
    L = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    for K in jumps:
        KdK = K.conj().T @ K
        L += np.kron(K, K.conj()) - 0.5 * (np.kron(KdK, eye) + np.kron(eye, KdK.T))
    return L


@dataclass(frozen=True)
class ThreeLevelTrajectory:
    times: np.ndarray
    inversion: np.ndarray
    r_population: np.ndarray
    trace_error: float
    hermiticity_error: float


def simulate_three_level(
    p: ThreeLevelParams,
    t_final: float,
    n_samples: int = 201,
    basis: str = "symmetric",
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> ThreeLevelTrajectory:
    """Integrate the three-level master equation from ``|g...g>``.

    The symmetric basis uses the exact propagator ``expm(L dt)`` between
    samples.  The full basis integrates the matrix equation directly with an
    adaptive Runge-Kutta scheme (costly beyond ``N = 4``).
    """
    if t_final <= 0:
        raise ValueError("t_final must be positive")
    ops = three_level_operators(p, basis)
    times = np.linspace(0.0, t_final, n_samples)
    d = ops.initial.shape[0]
    if basis == "symmetric":
        U = expm(superoperator(ops.hamiltonian, ops.jumps) * (times[1] - times[0]))
        x = ops.initial.reshape(-1)
        states = [x]
        for _ in range(n_samples - 1):
            x = U @ x
            states.append(x)
        rhos = [s.reshape(d, d) for s in states]
    else:
        def fun(t, y):
            return lindblad_rhs(y.reshape(d, d), ops.hamiltonian, ops.jumps).reshape(-1)

        sol = solve_ivp(
            fun, (0.0, t_final), ops.initial.reshape(-1), method="DOP853",
            t_eval=times, rtol=rtol, atol=atol,
        )
        if sol.status != 0:
            raise RuntimeError(f"three-level integration failed: {sol.message}")
        rhos = [sol.y[:, i].reshape(d, d) for i in range(n_samples)]
    inv = np.array([np.trace(ops.inversion @ r).real for r in rhos])
    nr = np.array([np.trace(ops.r_number @ r).real for r in rhos])
    trace_err = max(abs(np.trace(r) - 1.0) for r in rhos)
    herm_err = max(np.max(np.abs(r - r.conj().T)) for r in rhos)
    return ThreeLevelTrajectory(times, inv, nr, float(trace_err), float(herm_err))


def three_level_steady_state(p: ThreeLevelParams, basis: str = "symmetric") -> np.ndarray:
    """Stationary density matrix from the kernel of the Lindbladian.

    Only the symmetric basis is accepted: on the full tensor-product space
    every permutation sector carries its own stationary state, so the kernel
    is degenerate.
    """
    if basis != "symmetric":
        raise ValueError("the stationary state is unique only in the symmetric basis")
    ops = three_level_operators(p, basis)
    d = ops.hamiltonian.shape[0]
    L = superoperator(ops.hamiltonian, ops.jumps)
    # the trace functional annihilates L from the left, so one row is redundant;
    # replace the equation for rho_00 by the normalization
    A = L.copy()
    A[0, :] = np.eye(d).reshape(-1)
    b = np.zeros(d * d, dtype=complex)
    b[0] = 1.0
    rho = np.linalg.solve(A, b).reshape(d, d)
    return 0.5 * (rho + rho.conj().T)


def steady_inversion(p: ThreeLevelParams, basis: str = "symmetric") -> tuple[float, float]:
    """``(<J_z>, <J_rr>)`` in the stationary state of the full model."""
    ops = three_level_operators(p, basis)
    rho = three_level_steady_state(p, basis)
    return float(np.trace(ops.inversion @ rho).real), float(np.trace(ops.r_number @ rho).real)


def effective_inversion_trajectory(p: ThreeLevelParams, times) -> np.ndarray:
    """``<J_z>(t)`` of the two-level model with ``w = gamma_r (omega/delta)^2`` from the ground state."""
    eff = p.effective_params()
    probs = propagate(eff, PopulationState.ground(p.n_atoms).probs, times)
    return m_values(p.n_atoms) @ probs


@dataclass(frozen=True)
class OracleComparison:
    times: np.ndarray
    full: np.ndarray
    effective: np.ndarray
    r_population: np.ndarray

    @property
    def max_discrepancy(self) -> float:
        return float(np.max(np.abs(self.full - self.effective)))


def compare_with_effective(p: ThreeLevelParams, t_final: float, n_samples: int = 201, basis="symmetric"):
    """Full versus effective ``<J_z>(t)`` on a grid no finer than ``10/delta``."""
    n_samples = min(n_samples, int(t_final * p.delta / 10.0) + 1)
    if n_samples < 2:
        raise ValueError("t_final is shorter than the coarse-graining time 10/delta")
    traj = simulate_three_level(p, t_final, n_samples, basis)
    eff = effective_inversion_trajectory(p, traj.times)
    return OracleComparison(traj.times, traj.inversion, eff, traj.r_population)


# --------------------------------------------------------------------------
# adiabatic elimination


@dataclass(frozen=True)
class BlockSystem:
    """Operators split between the ground manifold ``|m>`` and ``|m+>``.

    ``|m>`` are the ``N+1`` Dicke states of ``{g, e}`` and
    ``|m+> ~ J_rg |m>`` (``m < N/2``) the ``N`` states with one ``r``
    excitation.  Rows/columns are ordered by increasing ``m``.
    """

    h_ee: np.ndarray
    v_eg: np.ndarray
    v_ge: np.ndarray
    k_ge: np.ndarray
    l_ee: np.ndarray
    l_gg: np.ndarray


def build_blocks(p: ThreeLevelParams) -> BlockSystem:
    n = p.n_atoms
    half = n / 2
    m_g = m_values(n)
    m_e = m_g[:-1]
    h_ee = -p.delta * np.eye(n)
    v_eg = np.zeros((n, n + 1))
    v_eg[np.arange(n), np.arange(n)] = p.omega * np.sqrt(half - m_e)
    # <m| sqrt(gamma) J_ge |m+1>
    l_gg = np.diag(np.sqrt(p.gamma * (half - m_g[1:] + 1) * (half + m_g[1:])), 1)
    # <n+1| sqrt(gamma_r) J_er |n+>
    k_ge = np.zeros((n + 1, n))
    k_ge[np.arange(1, n + 1), np.arange(n)] = np.sqrt(p.gamma_r * (half + m_e + 1))
    # <(m-1)+| sqrt(gamma) J_ge |m+>
    l_ee = np.diag(np.sqrt(p.gamma * (half - m_e[1:]) * (half + m_e[1:])), 1) if n > 1 else np.zeros((1, 1))
    return BlockSystem(
        h_ee=h_ee.astype(complex),
        v_eg=v_eg.astype(complex),
        v_ge=v_eg.T.astype(complex),
        k_ge=k_ge.astype(complex),
        l_ee=l_ee.astype(complex),
        l_gg=l_gg.astype(complex),
    )


@dataclass(frozen=True)
class EffectiveOperators:
    h_eff: np.ndarray
    k_eff: np.ndarray
    h_nh: np.ndarray


def adiabatic_eliminate(blocks: BlockSystem, cond_limit: float = 1e12) -> EffectiveOperators:
    """Effective ground-manifold Hamiltonian and jump operator.

    ``H_nh = H_EE - (i/2) K_EG K_GE``, ``K_eff = -K_GE H_nh^-1 V_EG`` and
    ``H_eff = -V_GE (H_nh^-1 + H_nh^-1^dagger)/2 V_EG``.
    """
    k_eg = blocks.k_ge.conj().T
    h_nh = blocks.h_ee - 0.5j * (k_eg @ blocks.k_ge)
    if np.linalg.cond(h_nh) > cond_limit:
        raise np.linalg.LinAlgError("non-Hermitian excited-manifold Hamiltonian is singular")
    inv = np.linalg.inv(h_nh)
    k_eff = -blocks.k_ge @ inv @ blocks.v_eg
    h_eff = -blocks.v_ge @ (0.5 * (inv + inv.conj().T)) @ blocks.v_eg
    return EffectiveOperators(h_eff=h_eff, k_eff=k_eff, h_nh=h_nh)


def closed_form_effective(p: ThreeLevelParams) -> EffectiveOperators:
    """Matrix elements of the effective operators written out explicitly.

    ``<n+1|K_eff|n> = (omega/delta) sqrt(gamma_r (N/2-n)(N/2+n+1)) / (1 + i gamma_r (N/2+n+1)/(2 delta))``
    and ``<m|H_eff|m> = (omega^2/delta) (N/2-m) / (1 + gamma_r^2 (N/2+m+1)^2 / (4 delta^2))``.
    """
    n = p.n_atoms
    half = n / 2
    m = m_values(n)
    lower = m[:-1]
    k_eff = np.zeros((n + 1, n + 1), dtype=complex)
    k_eff[np.arange(1, n + 1), np.arange(n)] = (
        (p.omega / p.delta)
        * np.sqrt(p.gamma_r * (half - lower) * (half + lower + 1))
        / (1 + 1j * p.gamma_r * (half + lower + 1) / (2 * p.delta))
    )
    h_diag = (p.omega**2 / p.delta) * (half - m) / (
        1 + p.gamma_r**2 * (half + m + 1) ** 2 / (4 * p.delta**2)
    )
    h_nh = np.diag(-p.delta - 0.5j * p.gamma_r * (half + lower + 1))
    return EffectiveOperators(h_eff=np.diag(h_diag).astype(complex), k_eff=k_eff, h_nh=h_nh)


def raising_operator(n_atoms: int) -> np.ndarray:
    """``J_+`` on the Dicke ladder (rows/cols ordered by increasing ``m``)."""
    j = n_atoms / 2
    lower = m_values(n_atoms)[:-1]
    return np.diag(np.sqrt((j - lower) * (j + lower + 1)), -1)


def high_detuning_limit(p: ThreeLevelParams) -> EffectiveOperators:
    """``K_eff -> sqrt(w) J_+`` and ``H_eff -> (omega^2/delta)(N/2 - J_z)`` for ``delta >> N gamma_r``."""
    n = p.n_atoms
    k = math.sqrt(p.pump_rate) * raising_operator(n)
    h = (p.omega**2 / p.delta) * np.diag(n / 2 - m_values(n))
    return EffectiveOperators(h_eff=h.astype(complex), k_eff=k.astype(complex), h_nh=p.delta * np.eye(n))


def pumping_rates_intuitive(p: ThreeLevelParams) -> np.ndarray:
    """Per-level pumping rates ``w_m = p_{m,1} (N_e + 1) gamma_r``.

    ``p_{m,1} = N_g omega^2 / (delta^2 + gamma_r^2 (N_e+1)^2 / 4)`` is the
    quasi-stationary population of the singly ``r``-excited state, with
    ``N_g = N/2 - m`` and ``N_e = N/2 + m``.  One entry per ``m``; the rate
    out of ``m = N/2`` is zero.
    """
    n = p.n_atoms
    m = m_values(n)
    n_g = n / 2 - m
    n_e = n / 2 + m
    pop = n_g * p.omega**2 / (p.delta**2 + p.gamma_r**2 * (n_e + 1) ** 2 / 4)
    return pop * (n_e + 1) * p.gamma_r
