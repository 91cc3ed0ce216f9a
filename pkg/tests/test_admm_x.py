import numpy as np
import pytest
from dataclasses import replace

from ofdm_mismatch import kernels
from ofdm_mismatch.admm_x import (
    AdmmConfig,
    AdmmState,
    FilterQuadratic,
    augmented_lagrangian,
    bcd_coefficient,
    bcd_update_symbol,
    scalar_objective,
    solve_first_coordinate,
    solve_x_subproblem,
    stationarity_residual,
    u_update,
    x_update,
    y_unconstrained,
    y_update,
)
from ofdm_mismatch.exceptions import DegenerateDenominatorError
from ofdm_mismatch.numerics import dft, idft_matrix
from ofdm_mismatch.waveform import FrequencySymbols, SpectralMask, isl, synthesize
from oracles import grid_minimum, h_sl_matrix, random_complex


def make_state(rng, n, nulls=(), rho0=10.0, noise=0.3):
    mask = SpectralMask(n, tuple(nulls))
    sym = FrequencySymbols.random(mask, rng)
    x = np.asarray(synthesize(sym))
    y = x + noise * np.abs(x).mean() * random_complex(rng, n)
    u = 0.1 * np.abs(x).mean() * random_complex(rng, n)
    return AdmmState(sym, x, y, u, rho0)


def xstep_objective(state, h, s):
    """Objective of the x-step as a function of the symbols, from the metric ops."""
    F = idft_matrix(len(s))
    x = F @ s
    c = abs(np.vdot(state.y, h)) ** 2
    r = x - state.y + state.u
    return isl(x, h) / c + 0.5 * state.rho0 * np.vdot(r, r).real


class TestAugmentedLagrangian:
    def test_ones(self):
        mask = SpectralMask(2)
        sym = FrequencySymbols(mask, [1, 1])  # x = [1, 0]
        st = AdmmState(sym, np.array([1.0, 1.0]), np.array([1.0, 1.0]), np.zeros(2), 10.0)
        assert augmented_lagrangian(st, [1, 1]) == pytest.approx(0.5)

    def test_penalty_only(self):
        mask = SpectralMask(3)
        sym = FrequencySymbols(mask, np.ones(3))
        e1 = np.array([1.0, 0, 0])
        st = AdmmState(sym, e1, e1, e1, 10.0)  # ISL(e1, e1) = 0
        assert augmented_lagrangian(st, e1) == pytest.approx(5.0)

    def test_component_oracle(self, rng):
        st = make_state(rng, 8)
        h = random_complex(rng, 8)
        want = isl(st.x, h) / abs(np.vdot(st.y, h)) ** 2 + 5.0 * np.linalg.norm(st.x - st.y + st.u) ** 2
        assert augmented_lagrangian(st, h) == pytest.approx(want, rel=1e-12)

    def test_zero_denominator(self):
        sym = FrequencySymbols(SpectralMask(2), [1, 1])
        st = AdmmState(sym, np.array([1.0, 0]), np.zeros(2), np.zeros(2), 10.0)
        with pytest.raises(DegenerateDenominatorError):
            augmented_lagrangian(st, [1, 0])


class TestBcdCoefficient:
    def test_vanishes_for_single_symbol_without_penalty_pull(self, rng):
        mask = SpectralMask(4, (2, 3, 4))
        sym = FrequencySymbols(mask, [1, 0, 0, 0])
        y = random_complex(rng, 4)
        st = AdmmState(sym, np.asarray(synthesize(sym)), y, y.copy(), 10.0)
        assert abs(bcd_coefficient(0, st, random_complex(rng, 4))) < 1e-14

    def test_literal_expression(self, rng):
        n = 8
        st = make_state(rng, n, nulls=(3,))
        h = random_complex(rng, n)
        F = idft_matrix(n)
        H = h_sl_matrix(h)
        c = abs(np.vdot(st.y, h)) ** 2
        for k in (0, 4, 7):
            sbar = np.array(st.symbols.s)
            sbar[k] = 0
            e = np.eye(n)[k]
            d = 2 * (sbar.conj() @ F.conj().T @ H.conj().T @ H @ F @ e) / c + st.rho0 * np.vdot(
                F @ sbar - st.y + st.u, F @ e
            )
            assert bcd_coefficient(k, st, h) == pytest.approx(d, rel=1e-10, abs=1e-12)

    def test_two_point_probe(self, rng):
        st = make_state(rng, 8)
        h = random_complex(rng, 8)
        for k in range(8):
            d = bcd_coefficient(k, st, h)
            for phi, phi2 in rng.uniform(0, 2 * np.pi, size=(5, 2)):
                s1 = np.array(st.symbols.s)
                s2 = s1.copy()
                s1[k], s2[k] = np.exp(1j * phi), np.exp(1j * phi2)
                lhs = xstep_objective(st, h, s1) - xstep_objective(st, h, s2)
                rhs = ((np.exp(1j * phi) - np.exp(1j * phi2)) * d).real
                assert lhs == pytest.approx(rhs, abs=1e-10)

    def test_n2_hand_instance(self):
        # s = [1, 1], coordinate 2, h = [1, 0], y = [1, 0], u = 0, rho0 = 0:
        # the objective over the phase of s_2 must be const + Re{s_2 d}.
        mask = SpectralMask(2)
        sym = FrequencySymbols(mask, [1, 1])
        st = AdmmState(sym, np.asarray(synthesize(sym)), np.array([1.0, 0]), np.zeros(2), 0.0)
        h = np.array([1.0, 0])
        d = bcd_coefficient(1, st, h)
        phis = np.linspace(0, 2 * np.pi, 721)
        vals = np.array([xstep_objective(st, h, np.array([1, np.exp(1j * p)])) for p in phis])
        model = (np.exp(1j * phis) * d).real
        offset = vals - model
        assert np.ptp(offset) < 1e-12
        # ISL(s_2) = |x_2|^2 with x = [(1+s_2)/2, (1-s_2)/2], so d = -1/2
        assert d == pytest.approx(-0.5)

    def test_zero_denominator(self):
        sym = FrequencySymbols(SpectralMask(2), [1, 1])
        st = AdmmState(sym, np.array([1.0, 0]), np.zeros(2), np.zeros(2), 10.0)
        with pytest.raises(DegenerateDenominatorError):
            bcd_coefficient(0, st, [1, 0])


class TestBcdUpdateSymbol:
    def test_real(self):
        assert bcd_update_symbol(1.0) == pytest.approx(-1.0)

    def test_imag(self):
        assert bcd_update_symbol(1j) == pytest.approx(1j)

    def test_zero_tie_break(self):
        assert bcd_update_symbol(0) == -1

    def test_grid_oracle(self, rng):
        grid = np.exp(1j * np.linspace(0, 2 * np.pi, 3600, endpoint=False))
        for d in random_complex(rng, 50):
            s = bcd_update_symbol(d)
            assert abs(abs(s) - 1) < 1e-15
            assert (s * d).real <= np.min((grid * d).real) + 1e-12


class TestXUpdate:
    def test_zero_sweeps(self, rng):
        st = make_state(rng, 8)
        assert x_update(st, random_complex(rng, 8), sweeps=0) is st

    def test_coordinatewise_monotone_and_matches_kernel(self, rng):
        st = make_state(rng, 16, nulls=(5, 6, 7))
        h = random_complex(rng, 16)
        s = np.array(st.symbols.s)
        obj = xstep_objective(st, h, s)
        cur = st
        for k in st.symbols.mask.available_index:
            d = bcd_coefficient(k, cur, h)
            s[k] = bcd_update_symbol(d)
            new = xstep_objective(st, h, s)
            assert new <= obj + 1e-9
            obj = new
            sym = FrequencySymbols(st.symbols.mask, s)
            cur = replace(cur, symbols=sym, x=np.asarray(synthesize(sym)))
        swept = x_update(st, h, sweeps=1)
        np.testing.assert_allclose(swept.symbols.s, s, atol=1e-9)

    def test_repeated_sweeps_monotone(self, rng):
        st = make_state(rng, 12, nulls=(4,))
        h = random_complex(rng, 12)
        vals = [xstep_objective(st, h, st.symbols.s)]
        for _ in range(1000):
            st = x_update(st, h, sweeps=1)
            vals.append(xstep_objective(st, h, st.symbols.s))
        steps = np.diff(vals)
        assert np.all(steps <= 1e-9)
        # cyclic phase updates creep; require the per-sweep decrease to have died out
        assert abs(steps[-1]) < 1e-6 * abs(vals[-1])
        assert abs(steps[-1]) < 1e-6 * abs(steps[0])

    def test_keeps_spectral_constraint(self, rng):
        st = make_state(rng, 16, nulls=(2, 9, 10))
        out = x_update(st, random_complex(rng, 16), sweeps=3)
        s = dft(out.x)
        m = out.symbols.mask
        assert np.max(np.abs(np.abs(s[m.available_index]) - 1)) < 1e-10
        assert np.max(np.abs(s[m.nulled_index])) < 1e-10

    def test_numpy_and_numba_kernels_agree(self, rng):
        st = make_state(rng, 24, nulls=(3, 4))
        h = random_complex(rng, 24)
        quad = FilterQuadratic(h)
        c = abs(np.vdot(st.y, h)) ** 2
        pen = -st.rho0 * np.conj(np.fft.fft(st.y - st.u) / 24)
        free = st.symbols.mask.available_index
        s1, s2 = np.array(st.symbols.s), np.array(st.symbols.s)
        ms1, ms2 = quad.m @ s1, quad.m @ s2
        kernels.bcd_sweep_numpy(s1, free, quad.m, ms1, 2 / c, pen)
        kernels.bcd_sweep_numba(s2, free, quad.m, ms2, 2 / c, pen)
        np.testing.assert_allclose(s1, s2, atol=1e-12)
        np.testing.assert_allclose(ms1, ms2, atol=1e-10)


class TestFirstCoordinate:
    def test_case1_zero_q(self):
        assert solve_first_coordinate(0j, 4.0) == pytest.approx(np.sqrt(2.0))

    def test_case2_real_q(self):
        y1 = solve_first_coordinate(1 + 0j, 1.0)
        assert y1.imag == 0
        assert y1.real == pytest.approx(1.3802775690976141, abs=1e-10)

    def test_case3_imag_q(self):
        y1 = solve_first_coordinate(1j, 1.0)
        assert y1.real == 0
        assert y1.imag == pytest.approx(1.3802775690976141, abs=1e-10)

    def test_case4_proportional(self, rng):
        for q1 in random_complex(rng, 20):
            p = float(rng.uniform(0.01, 5))
            y1 = solve_first_coordinate(q1, p)
            assert y1.imag == pytest.approx(q1.imag * y1.real / q1.real, rel=1e-10)
            assert max(stationarity_residual(y1, q1, p)) <= 1e-6

    def test_zero_p_returns_q(self):
        assert solve_first_coordinate(1 + 2j, 0.0) == 1 + 2j

    @pytest.mark.parametrize("q1", [0j, 1.5 + 0j, -0.7 + 0j, 2j, -0.3j, 0.4 - 1.1j, -2 + 0.01j])
    def test_grid_minimum(self, q1):
        p = 0.8
        y1 = solve_first_coordinate(q1, p)
        best, _ = grid_minimum(
            lambda r, i: p / (r**2 + i**2) + (r - q1.real) ** 2 + (i - q1.imag) ** 2,
            0j,
            1.5 * (abs(q1) + p**0.25),
        )
        assert scalar_objective(y1, q1, p) <= best + 1e-6


class TestYUnconstrained:
    def test_matches_dense_rotation(self, rng):
        from ofdm_mismatch.numerics import unitary_completion

        n = 10
        x, u, h = random_complex(rng, n), random_complex(rng, n), random_complex(rng, n)
        y = y_unconstrained(x, u, h, 10.0)
        U = unitary_completion(h / np.linalg.norm(h))
        q = U.conj().T @ (x + u)
        yt = U.conj().T @ y
        np.testing.assert_allclose(yt[1:], q[1:], atol=1e-12)
        p = 2 * isl(x, h) / (10.0 * np.linalg.norm(h) ** 2)
        assert max(stationarity_residual(yt[0], q[0], p)) <= 1e-6

    def test_minimizes_full_objective_locally(self, rng):
        n = 6
        x, u, h = random_complex(rng, n), random_complex(rng, n), random_complex(rng, n)
        rho0 = 3.0
        sl = isl(x, h)

        def f(y):
            return sl / abs(np.vdot(y, h)) ** 2 + 0.5 * rho0 * np.linalg.norm(x - y + u) ** 2

        y = y_unconstrained(x, u, h, rho0)
        base = f(y)
        for _ in range(200):
            assert f(y + 1e-4 * random_complex(rng, n)) >= base - 1e-12

    def test_forced_zero_q1(self, rng):
        n = 8
        x, h = random_complex(rng, n), random_complex(rng, n)
        z = random_complex(rng, n)
        z -= np.vdot(h, z) / np.vdot(h, h) * h
        u = -x + z
        y = y_unconstrained(x, u, h, 10.0)
        p = 2 * isl(x, h) / (10.0 * np.linalg.norm(h) ** 2)
        v = h / np.linalg.norm(h)
        assert abs(np.vdot(v, y)) ** 2 == pytest.approx(np.sqrt(p), rel=1e-9)

    def test_zero_filter(self, rng):
        with pytest.raises(ValueError):
            y_unconstrained(random_complex(rng, 4), np.zeros(4), np.zeros(4), 10.0)


class TestYUpdate:
    def test_clip(self):
        np.testing.assert_allclose(y_update([2, 0.5], 1.0, 1.0), [1, 0.5])

    def test_phase_preserved(self):
        np.testing.assert_allclose(y_update([2j], 1.0, 1.0), [1j])

    def test_random(self, rng):
        for _ in range(20):
            y = random_complex(rng, 16)
            rho, P = 1.0 + rng.uniform(0, 2), rng.uniform(0.1, 1)
            out = y_update(y, rho, P)
            assert np.max(np.abs(out) ** 2) <= rho * P
            keep = np.abs(y) ** 2 <= rho * P
            np.testing.assert_array_equal(out[keep], y[keep])
            np.testing.assert_allclose(np.angle(out), np.angle(y), atol=1e-12)


class TestUUpdate:
    def _state(self, x, y, u):
        sym = FrequencySymbols(SpectralMask(len(x)), np.ones(len(x)))
        return AdmmState(sym, np.asarray(x, complex), np.asarray(y, complex), np.asarray(u, complex))

    def test_stays_zero(self):
        np.testing.assert_array_equal(u_update(self._state([1, 2], [1, 2], [0, 0])), [0, 0])

    def test_step(self):
        np.testing.assert_array_equal(u_update(self._state([2, 1], [1, 1], [0, 0])), [1, 0])

    def test_random(self, rng):
        x, y, u = (random_complex(rng, 5) for _ in range(3))
        np.testing.assert_allclose(u_update(self._state(x, y, u)), u + x - y)


class TestSolveXSubproblem:
    def test_fixed_point(self):
        # one active subcarrier: x is constant modulus and y clips straight back to x
        mask = SpectralMask(4, (2, 3, 4))
        sym = FrequencySymbols(mask, [np.exp(0.3j), 0, 0, 0])
        st = AdmmState.from_symbols(sym)
        h = st.x / np.linalg.norm(st.x)
        cfg = AdmmConfig(papr_level=1.0, avg_power=mask.avg_power)
        res = solve_x_subproblem(st, h, cfg)
        assert res.converged
        assert len(res.trace) == 1
        np.testing.assert_allclose(res.x, st.x, atol=1e-15)

    def test_convergence_n16(self, rng):
        mask = SpectralMask(16)
        st = AdmmState.from_symbols(FrequencySymbols.random(mask, rng))
        h = st.x / np.linalg.norm(st.x)
        cfg = AdmmConfig(papr_level=2.0, avg_power=mask.avg_power, max_iters=500, primal_tol=1e-3)
        res = solve_x_subproblem(st, h, cfg)
        assert res.converged
        assert res.trace[-1].primal_residual <= 1e-3
        assert len(res.trace) <= 500

    def test_output_feasibility(self, rng):
        mask = SpectralMask.from_ranges(32, [(12, 16)])
        st = AdmmState.from_symbols(FrequencySymbols.random(mask, rng))
        h = random_complex(rng, 32)
        cfg = AdmmConfig(papr_level=1.5, avg_power=mask.avg_power, max_iters=20)
        res = solve_x_subproblem(st, h, cfg)
        s = dft(res.x)
        assert np.max(np.abs(s[mask.nulled_index])) < 1e-10
        assert np.max(np.abs(np.abs(s[mask.available_index]) - 1)) < 1e-10
        assert np.max(np.abs(res.state.y) ** 2) <= 1.5 * mask.avg_power

    def test_config_validation(self, rng):
        mask = SpectralMask(8)
        st = AdmmState.from_symbols(FrequencySymbols.random(mask, rng))
        with pytest.raises(ValueError):
            solve_x_subproblem(st, st.x, AdmmConfig())
        with pytest.raises(ValueError):
            solve_x_subproblem(st, st.x, AdmmConfig(papr_level=0.5, avg_power=1.0))
