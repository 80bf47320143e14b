import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dickepump.core import mean_inversion
from dickepump.oracle import (
    ThreeLevelParams,
    adiabatic_eliminate,
    build_blocks,
    closed_form_effective,
    collective_operator,
    compare_with_effective,
    high_detuning_limit,
    pumping_rates_intuitive,
    raising_operator,
    simulate_three_level,
    steady_inversion,
    symmetric_basis,
    three_level_steady_state,
)


def _state(n, n_g, n_e, n_r):
    P, labels = symmetric_basis(n)
    return P[:, labels.index((n_g, n_e, n_r))].toarray().ravel()


def _ground(n, m):
    return _state(n, int(n / 2 - m), int(n / 2 + m), 0)


def _excited(n, m):
    return _state(n, int(n / 2 - m - 1), int(n / 2 + m), 1)


def _element(bra, op, ket):
    return float(bra @ (op @ ket))


class TestOperators:
    def test_collective_commutator(self):
        a = collective_operator(2, "g", "e")
        b = collective_operator(2, "e", "g")
        comm = (a @ b - b @ a).toarray()
        expected = (collective_operator(2, "g", "g") - collective_operator(2, "e", "e")).toarray()
        np.testing.assert_allclose(comm, expected)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_symmetric_basis_is_isometry_and_invariant(self, n):
        P, labels = symmetric_basis(n)
        assert len(labels) == (n + 1) * (n + 2) // 2
        np.testing.assert_allclose((P.T @ P).toarray(), np.eye(len(labels)), atol=1e-14)
        proj = (P @ P.T).toarray()
        for mu, nu in (("g", "e"), ("e", "r"), ("r", "g")):
            J = collective_operator(n, mu, nu).toarray()
            np.testing.assert_allclose(proj @ J @ proj, J @ proj, atol=1e-12)

    def test_excited_state_definition(self):
        # |m+> is the normalized J_rg |m>
        n, m = 4, -1.0
        v = collective_operator(n, "r", "g") @ _ground(n, m)
        np.testing.assert_allclose(v / np.linalg.norm(v), _excited(n, m), atol=1e-14)


class TestBlocks:
    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_blocks_match_projected_operators(self, n):
        p = ThreeLevelParams(n, omega=0.7, delta=5.0, gamma_r=1.3, gamma=0.4)
        b = build_blocks(p)
        m_g = np.arange(n + 1) - n / 2
        m_e = m_g[:-1]
        H = (-p.delta * collective_operator(n, "r", "r")
             + p.omega * (collective_operator(n, "r", "g") + collective_operator(n, "g", "r")))
        Kr = math.sqrt(p.gamma_r) * collective_operator(n, "e", "r")
        Kg = math.sqrt(p.gamma) * collective_operator(n, "g", "e")
        G = [_ground(n, m) for m in m_g]
        E = [_excited(n, m) for m in m_e]
        for i, ei in enumerate(E):
            for j, ej in enumerate(E):
                assert b.h_ee[i, j] == pytest.approx(_element(ei, H, ej), abs=1e-12)
                assert b.l_ee[i, j] == pytest.approx(_element(ei, Kg, ej), abs=1e-12)
            for j, gj in enumerate(G):
                assert b.v_eg[i, j] == pytest.approx(_element(ei, H, gj), abs=1e-12)
        for i, gi in enumerate(G):
            for j, gj in enumerate(G):
                assert b.l_gg[i, j] == pytest.approx(_element(gi, Kg, gj), abs=1e-12)
            for j, ej in enumerate(E):
                assert b.k_ge[i, j] == pytest.approx(_element(gi, Kr, ej), abs=1e-12)

    def test_documented_elements(self):
        p = ThreeLevelParams(2, omega=3.0, delta=50.0, gamma_r=2.0, gamma=0.1)
        b = build_blocks(p)
        # ground index of m=0 is 1, excited index of 0+ is 1
        assert b.v_eg[1, 1] == pytest.approx(3.0)
        # <1|K_GE|0+>
        assert b.k_ge[2, 1] == pytest.approx(math.sqrt(2 * 2.0))
        np.testing.assert_array_equal(np.diag(b.h_ee), -50.0)
        np.testing.assert_array_equal(b.v_ge, b.v_eg.conj().T)
        assert b.h_ee.shape == (2, 2) and b.l_gg.shape == (3, 3)


class TestElimination:
    @given(
        n=st.integers(1, 6),
        omega=st.floats(0.01, 10.0),
        delta=st.floats(1.0, 1e4),
        gamma_r=st.floats(0.01, 100.0),
    )
    def test_matches_closed_form(self, n, omega, delta, gamma_r):
        p = ThreeLevelParams(n, omega, delta, gamma_r, 0.1)
        ops = adiabatic_eliminate(build_blocks(p))
        ref = closed_form_effective(p)
        scale_k = max(np.abs(ref.k_eff).max(), 1e-300)
        scale_h = max(np.abs(ref.h_eff).max(), 1e-300)
        assert np.abs(ops.k_eff - ref.k_eff).max() <= 1e-10 * scale_k
        assert np.abs(ops.h_eff - ref.h_eff).max() <= 1e-10 * scale_h
        assert np.abs(ops.h_eff - ops.h_eff.conj().T).max() <= 1e-12 * max(scale_h, 1.0)

    def test_high_detuning_limit(self):
        n, gamma_r = 3, 1.0
        p = ThreeLevelParams(n, omega=5.0, delta=1e4 * n * gamma_r, gamma_r=gamma_r, gamma=1e-3)
        ops = adiabatic_eliminate(build_blocks(p))
        lim = high_detuning_limit(p)
        nz = np.abs(lim.k_eff) > 0
        assert np.max(np.abs(ops.k_eff[nz] / lim.k_eff[nz] - 1)) < 1e-3
        np.testing.assert_allclose(lim.k_eff, math.sqrt(p.pump_rate) * raising_operator(n))
        # diagonal energy shift (omega^2/delta)(N/2 - m)
        h, h_lim = np.diag(ops.h_eff).real, np.diag(lim.h_eff).real
        assert np.max(np.abs(h - h_lim)) < 1e-3 * np.max(np.abs(h_lim))

    def test_no_drive_gives_zero_operators(self):
        p = ThreeLevelParams(3, omega=0.0, delta=100.0, gamma_r=1.0, gamma=0.1)
        ops = adiabatic_eliminate(build_blocks(p))
        assert np.all(ops.k_eff == 0) and np.all(ops.h_eff == 0)

    def test_singular_non_hermitian_hamiltonian(self):
        from dataclasses import replace

        b = build_blocks(ThreeLevelParams(2, 1.0, 10.0, 1.0, 0.1))
        b = replace(b, h_ee=np.zeros_like(b.h_ee), k_ge=np.zeros_like(b.k_ge))
        with pytest.raises(np.linalg.LinAlgError):
            adiabatic_eliminate(b)


class TestIntuitiveRates:
    def test_top_level_is_not_pumped(self):
        p = ThreeLevelParams(4, 1.0, 100.0, 1.0, 0.01)
        assert pumping_rates_intuitive(p)[-1] == 0.0

    def test_high_detuning_ratio(self):
        n = 4
        p = ThreeLevelParams(n, 1.0, 1e6, 1.0, 0.01)
        m = np.arange(n + 1) - n / 2
        rates = pumping_rates_intuitive(p)[:-1]
        ladder = ((n / 2 - m) * (n / 2 + m + 1))[:-1]
        np.testing.assert_allclose(rates / ladder, p.pump_rate, rtol=1e-10)

    def test_finite_detuning_reduces_rates(self):
        n = 4
        p = ThreeLevelParams(n, 1.0, 10.0 * n * 1.0, 1.0, 0.01)
        m = np.arange(n + 1) - n / 2
        high = p.pump_rate * (n / 2 - m) * (n / 2 + m + 1)
        assert np.all(pumping_rates_intuitive(p)[:-1] < high[:-1])

    @given(n=st.integers(1, 6), delta=st.floats(50.0, 1e4), gamma_r=st.floats(0.1, 2.0))
    def test_agree_with_effective_jump_operator(self, n, delta, gamma_r):
        p = ThreeLevelParams(n, 1.0, delta, gamma_r, 0.01)
        k = adiabatic_eliminate(build_blocks(p)).k_eff
        from_k = np.abs(np.diag(k, -1)) ** 2
        np.testing.assert_allclose(from_k, pumping_rates_intuitive(p)[:-1], rtol=1e-2)


class TestSimulation:
    def test_no_drive_stays_in_ground_state(self):
        traj = simulate_three_level(ThreeLevelParams(3, 0.0, 100.0, 1.0, 0.1), 5.0, 11)
        np.testing.assert_array_equal(traj.inversion, -1.5)
        np.testing.assert_array_equal(traj.r_population, 0.0)

    @pytest.mark.parametrize("n", [2, 3])
    def test_symmetric_and_full_bases_agree(self, n):
        p = ThreeLevelParams(n, 2.0, 40.0, 1.0, 0.3)
        a = simulate_three_level(p, 3.0, 7, basis="symmetric")
        b = simulate_three_level(p, 3.0, 7, basis="full")
        np.testing.assert_allclose(a.inversion, b.inversion, atol=1e-8)
        np.testing.assert_allclose(a.r_population, b.r_population, atol=1e-8)
        assert b.trace_error < 1e-8 and b.hermiticity_error < 1e-10
        assert a.trace_error < 1e-8 and a.hermiticity_error < 1e-10

    def test_effective_model_tracks_full_model(self):
        p = ThreeLevelParams(4, omega=10.0, delta=200.0, gamma_r=1.0, gamma=0.01)
        cmp = compare_with_effective(p, 600.0, 121)
        assert cmp.max_discrepancy < 0.05 * 2
        assert np.min(np.diff(cmp.times)) >= 10 / p.delta

    def test_r_population_is_small(self):
        p = ThreeLevelParams(4, omega=10.0, delta=200.0, gamma_r=1.0, gamma=0.01)
        traj = simulate_three_level(p, 100.0, 51)
        assert traj.r_population.max() < 4 * 4 * p.omega**2 / p.delta**2

    def test_steady_state_converges_with_detuning(self):
        gaps = []
        for scale in (1e2, 1e3, 1e4):
            delta = scale * 3
            omega = 30.0 * math.sqrt(delta / 300.0)
            p = ThreeLevelParams(3, omega, delta, 1.0, 0.5 * (omega / delta) ** 2)
            gaps.append(abs(steady_inversion(p)[0] - mean_inversion(p.effective_params())))
        assert gaps[0] > gaps[1] > gaps[2]

    def test_steady_state_is_a_density_matrix(self):
        rho = three_level_steady_state(ThreeLevelParams(3, 2.0, 40.0, 1.0, 0.3))
        assert abs(np.trace(rho) - 1) < 1e-10
        assert np.linalg.eigvalsh(rho).min() > -1e-10
        with pytest.raises(ValueError):
            three_level_steady_state(ThreeLevelParams(2, 2.0, 40.0, 1.0, 0.3), basis="full")

    def test_coarse_graining_guard(self):
        with pytest.raises(ValueError):
            compare_with_effective(ThreeLevelParams(2, 1.0, 10.0, 1.0, 0.1), 0.5)


class TestParams:
    def test_atom_cap(self):
        with pytest.raises(ValueError):
            ThreeLevelParams(7, 1.0, 100.0, 1.0, 0.1)
        assert ThreeLevelParams(7, 1.0, 100.0, 1.0, 0.1, allow_large=True).n_atoms == 7
        with pytest.raises(ValueError):
            ThreeLevelParams(9, 1.0, 100.0, 1.0, 0.1, allow_large=True)

    @pytest.mark.parametrize("field", ["delta", "gamma_r", "gamma"])
    def test_positive_rates(self, field):
        kwargs = dict(n_atoms=2, omega=1.0, delta=10.0, gamma_r=1.0, gamma=0.1)
        kwargs[field] = 0.0
        with pytest.raises(ValueError):
            ThreeLevelParams(**kwargs)

    def test_validity_flag(self):
        good = ThreeLevelParams(3, omega=1.0, delta=1e4, gamma_r=1.0, gamma=0.01)
        bad = ThreeLevelParams(3, omega=100.0, delta=1e3, gamma_r=1.0, gamma=0.01)
        assert good.is_valid() and not bad.is_valid()
        assert bad.is_valid(factor=5.0)
        assert good.pump_rate == pytest.approx(1e-8)
        assert good.effective_params().pump == good.pump_rate
