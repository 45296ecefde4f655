import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oamfiber.noise import NoiseProfile
from oamfiber.propagation import (Placement, ScheduleMismatchError, ScheduleSpec, Scheme,
                                  cumulative_phases, dove_prism_pulse, ensemble_density,
                                  ensemble_from_phases, net_phases, propagate, pulse_positions,
                                  segment_operator, signed_weights, trial_fidelities)
from oamfiber.qstate import StateVector2, density_from_state, fidelity, make_superposition_state

X = np.array([[0, 1], [1, 0]])


def profile(deltas, trial=0):
    return NoiseProfile(np.asarray(deltas, dtype=float), trial, 0)


def oracle_signed_phase(deltas, pulse_fracs, l, upto=None):
    """Brute-force signed sum: split every segment at the pulses inside it."""
    n = len(deltas)
    upto = n if upto is None else upto
    cuts = sorted(f * n for f in pulse_fracs)
    total = 0.0
    for j in range(upto):
        edges = [j] + [c for c in cuts if j < c < j + 1] + [j + 1]
        for a, b in zip(edges, edges[1:]):
            flips = sum(1 for c in cuts if c <= a)
            total += (-1) ** flips * l * deltas[j] * (b - a)
    return total


def cpmg_fracs(n_pulses):
    return [(2 * k - 1) / (2 * n_pulses) for k in range(1, n_pulses + 1)]


class TestOperators:
    def test_identity_at_zero(self):
        for l in (1, 5, -3):
            assert np.array_equal(segment_operator(0.0, l), np.eye(2))

    def test_pi_l1(self):
        np.testing.assert_allclose(segment_operator(math.pi, 1), np.diag([1j, -1j]), atol=1e-15)

    @given(st.floats(-10, 10), st.floats(-10, 10), st.integers(-50, 50))
    def test_composition(self, a, b, l):
        np.testing.assert_allclose(segment_operator(a, l) @ segment_operator(b, l),
                                   segment_operator(a + b, l), atol=1e-12)

    @given(st.floats(-100, 100), st.integers(-100, 100))
    def test_unitary_det_one(self, d, l):
        m = segment_operator(d, l)
        np.testing.assert_allclose(m @ m.conj().T, np.eye(2), atol=1e-14)
        assert abs(np.linalg.det(m) - 1) < 1e-14

    def test_dove_prism(self):
        x = dove_prism_pulse()
        np.testing.assert_array_equal(x @ np.array([1, 0]), [0, 1])
        np.testing.assert_array_equal(x @ x, np.eye(2))
        assert abs(abs(np.linalg.det(x)) - 1) == 0

    @given(st.floats(-10, 10), st.integers(-20, 20))
    def test_refocusing_identity(self, phi, l):
        x = dove_prism_pulse()
        np.testing.assert_allclose(x @ segment_operator(phi, l) @ x,
                                   segment_operator(-phi, l), atol=1e-15)


class TestSchedule:
    def test_validation(self):
        with pytest.raises(ValueError):
            ScheduleSpec(Scheme.FREE, 2)
        for n in (0, 1, 3):
            with pytest.raises(ValueError):
                ScheduleSpec(Scheme.CPMG, n)

    def test_cpmg_positions(self):
        np.testing.assert_allclose(pulse_positions(ScheduleSpec.cpmg(4), 80), [10, 30, 50, 70])

    def test_nearest_boundary(self):
        s = ScheduleSpec.cpmg(2, Placement.NEAREST_BOUNDARY)
        np.testing.assert_array_equal(pulse_positions(s, 7), [2, 5])

    @given(st.integers(1, 30).map(lambda k: 2 * k), st.integers(0, 200))
    def test_nearest_boundary_distinct(self, n_pulses, extra):
        s = ScheduleSpec.cpmg(n_pulses, Placement.NEAREST_BOUNDARY)
        b = pulse_positions(s, n_pulses + extra)
        assert np.all(np.diff(b) >= 1) and b[0] >= 0 and b[-1] <= n_pulses + extra

    def test_boundary_mismatch(self):
        s = ScheduleSpec.cpmg(4, Placement.NEAREST_BOUNDARY)
        with pytest.raises(ScheduleMismatchError):
            pulse_positions(s, 3)

    def test_too_many_pulses(self):
        with pytest.raises(ScheduleMismatchError):
            propagate(make_superposition_state(1, 0), profile(np.zeros(3)), 1,
                      ScheduleSpec.cpmg(4))

    def test_weights_free(self):
        np.testing.assert_array_equal(signed_weights(ScheduleSpec.free(), 5, upto=3),
                                      [1, 1, 1, 0, 0])

    @given(st.integers(1, 20).map(lambda k: 2 * k), st.integers(0, 300))
    def test_weights_sum_zero(self, n_pulses, extra):
        w = signed_weights(ScheduleSpec.cpmg(n_pulses), n_pulses + extra)
        assert abs(w.sum()) < 1e-12
        assert np.all(np.abs(w) <= 1 + 1e-15)


class TestPropagate:
    def test_free_constant(self):
        n, l, c = 37, 3, 0.041
        psi = make_superposition_state(l, 0.2)
        res = propagate(psi, profile(np.full(n, c)), l, ScheduleSpec.free())
        assert res.accumulated_phase == pytest.approx(n * l * c, rel=1e-13)
        f = fidelity(psi, density_from_state(res.final_state))
        assert f == pytest.approx(0.5 * (1 + math.cos(n * l * c)), abs=1e-12)

    def test_cpmg_two_pulses_constant(self):
        psi = make_superposition_state(2, 0.3)
        res = propagate(psi, profile(np.full(100, 0.37)), 2, ScheduleSpec.cpmg(2))
        assert abs(res.accumulated_phase) < 1e-12
        assert fidelity(psi, density_from_state(res.final_state)) == pytest.approx(1, abs=1e-12)

    def test_ramp_matches_signed_sum_oracle(self):
        g = 1e-3
        deltas = g * np.arange(1, 101)
        res = propagate(make_superposition_state(1, 0), profile(deltas), 1, ScheduleSpec.cpmg(2))
        oracle = oracle_signed_phase(deltas, cpmg_fracs(2), 1)
        # +sum(1..25) - sum(26..75) + sum(76..100): a linear ramp refocuses
        assert oracle == pytest.approx(g * (325 - 2525 + 2200), abs=1e-12)
        assert abs(res.accumulated_phase - oracle) < 1e-12

    def test_quadratic_ramp_residual(self):
        g = 1e-4
        j = np.arange(1, 101)
        deltas = g * j ** 2
        res = propagate(make_superposition_state(1, 0), profile(deltas), 1, ScheduleSpec.cpmg(2))
        sign = np.where((j <= 25) | (j > 75), 1, -1)
        assert abs(res.accumulated_phase - g * np.sum(sign * j ** 2)) < 1e-12
        assert abs(res.accumulated_phase - oracle_signed_phase(deltas, cpmg_fracs(2), 1)) < 1e-12

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.integers(1, 8), st.integers(0, 60),
           st.integers(-30, 30).filter(bool))
    def test_bookkeeping_random(self, seed, half, extra, l):
        rng = np.random.default_rng(seed)
        n_pulses = 2 * half
        n = n_pulses + extra
        deltas = rng.normal(scale=0.3, size=n)
        upto = int(rng.integers(0, n + 1))
        res = propagate(make_superposition_state(l, 0.1), profile(deltas), l,
                        ScheduleSpec.cpmg(n_pulses), upto=upto)
        oracle = oracle_signed_phase(deltas, cpmg_fracs(n_pulses), l, upto)
        assert abs(res.accumulated_phase - oracle) < 1e-12
        # vectorized path agrees
        fast = net_phases(deltas, l, ScheduleSpec.cpmg(n_pulses), upto)[0]
        assert abs(fast - oracle) < 1e-12

    def test_nearest_boundary_oracle(self):
        rng = np.random.default_rng(1)
        deltas = rng.normal(size=50)
        s = ScheduleSpec.cpmg(6, Placement.NEAREST_BOUNDARY)
        fracs = [b / 50 for b in pulse_positions(s, 50)]
        res = propagate(make_superposition_state(1, 0), profile(deltas), 1, s)
        assert abs(res.accumulated_phase - oracle_signed_phase(deltas, fracs, 1)) < 1e-12

    def test_state_matches_phase(self):
        rng = np.random.default_rng(4)
        for trial in range(20):
            deltas = rng.normal(scale=0.2, size=40)
            l = int(rng.integers(1, 12))
            psi = make_superposition_state(l, rng.uniform(0, 3))
            upto = int(rng.integers(0, 41))
            res = propagate(psi, profile(deltas), l, ScheduleSpec.cpmg(6), upto=upto)
            h = 0.5 * res.accumulated_phase
            expected = psi.as_array() * np.exp([1j * h, -1j * h])
            np.testing.assert_allclose(res.final_state.as_array(), expected, atol=1e-12)

    def test_odd_prefix_is_reframed(self):
        psi = StateVector2(1, 0)
        res = propagate(psi, profile(np.zeros(40)), 1, ScheduleSpec.cpmg(4), upto=15)
        assert res.pulses_applied == 1
        np.testing.assert_allclose(res.final_state.as_array(), [1, 0])

    @pytest.mark.parametrize("l", [1, 4, 17])
    def test_l_scaling(self, l):
        deltas = np.random.default_rng(l).normal(size=(3, 200))
        base = net_phases(deltas, 1, ScheduleSpec.free())
        assert np.array_equal(net_phases(deltas, l, ScheduleSpec.free()), l * base)
        lit = propagate(make_superposition_state(l, 0), profile(deltas[0]), l, ScheduleSpec.free())
        lit1 = propagate(make_superposition_state(1, 0), profile(deltas[0]), 1, ScheduleSpec.free())
        assert lit.accumulated_phase == pytest.approx(l * lit1.accumulated_phase, rel=1e-12)

    def test_norm_drift_long_chain(self):
        deltas = np.random.default_rng(8).uniform(-3, 3, size=200_000)
        res = propagate(make_superposition_state(7, 0.4), profile(deltas), 7,
                        ScheduleSpec.cpmg(1000))
        assert abs(res.final_state.norm - 1) < 1e-9


class TestEnsemble:
    def test_single_profile_is_pure(self):
        psi = make_superposition_state(3, 0.2)
        rho = ensemble_density(psi, [profile(np.full(10, 0.1))], 3, ScheduleSpec.free())
        assert rho.purity == pytest.approx(1.0, abs=1e-12)

    def test_two_profiles(self):
        a, l, n = 0.23, 3, 10
        mean = 0.05
        profs = [profile(np.full(n, mean + a / n), 0), profile(np.full(n, mean - a / n), 1)]
        rho = ensemble_density(make_superposition_state(l, 0), profs, l, ScheduleSpec.free())
        assert rho.coherence == pytest.approx(abs(math.cos(l * a)) / 2, abs=1e-12)

    def test_empty(self):
        with pytest.raises(ValueError):
            ensemble_density(make_superposition_state(1, 0), [], 1, ScheduleSpec.free())

    def test_gaussian_correlated_matches_closed_form(self):
        n, l, dphi2, trials = 50, 2, 2e-5, 10_000
        rng = np.random.default_rng(12)
        devs = rng.normal(scale=math.sqrt(dphi2), size=trials)
        profs = [profile(np.full(n, d), t) for t, d in enumerate(devs)]
        psi = make_superposition_state(l, 0)
        rho = ensemble_density(psi, profs, l, ScheduleSpec.free())
        phases = l * n * devs
        se = np.std(np.cos(phases), ddof=1) / math.sqrt(trials) / 2
        assert abs(rho.coherence - 0.5 * math.exp(-0.5 * n * n * l * l * dphi2)) < 3 * se

    def test_fidelity_consistency(self):
        rng = np.random.default_rng(2)
        deltas = rng.normal(scale=0.05, size=(300, 64))
        psi = make_superposition_state(5, 0.3)
        s = ScheduleSpec.cpmg(8)
        phases = net_phases(deltas, 5, s)
        rho = ensemble_from_phases(psi, phases)
        assert fidelity(psi, rho) == pytest.approx(trial_fidelities(psi, phases).mean(), abs=1e-12)
        profs = [profile(d, t) for t, d in enumerate(deltas)]
        lit = [density_from_state(propagate(psi, p, 5, s).final_state) for p in profs]
        rho01 = np.mean([r.rho01 for r in lit])
        assert abs(rho.rho01 - rho01) < 1e-12

    def test_trial_order_fixed(self):
        rng = np.random.default_rng(3)
        profs = [profile(rng.normal(size=20), t) for t in range(50)]
        psi = make_superposition_state(2, 0)
        a = ensemble_density(psi, profs, 2, ScheduleSpec.free())
        b = ensemble_density(psi, profs[::-1], 2, ScheduleSpec.free())
        assert a == b

    def test_cumulative_matches_prefix(self):
        deltas = np.random.default_rng(5).normal(size=(4, 30))
        s = ScheduleSpec.cpmg(4)
        cum = cumulative_phases(deltas, s)
        for m in (1, 7, 16, 30):
            np.testing.assert_allclose(cum[:, m - 1], net_phases(deltas, 1, s, m), atol=1e-13)

    @pytest.mark.parametrize("trials", [1, 2, 17, 1000])
    def test_trace_and_psd(self, trials):
        deltas = np.random.default_rng(trials).normal(scale=2, size=(trials, 30))
        rho = ensemble_from_phases(StateVector2.normalized(0.3, 0.9j), net_phases(deltas, 9, ScheduleSpec.free()))
        assert abs(rho.trace - 1) < 1e-12
        assert rho.min_eigenvalue >= -1e-12
