import cmath
import math

import numpy as np
import pytest

from qphase import grover as gr
from qphase import noise
from qphase import statevec as sv
from qphase.errors import InvalidArgument
from conftest import random_state_vector


def dense_grover_amplitudes(n_states, marked, k):
    """Brute-force evolution with the dense oracle and diffusion matrices."""
    oracle = np.eye(n_states)
    oracle[marked, marked] = -1
    step = gr.diffusion_matrix(n_states) @ oracle
    psi = np.full(n_states, 1 / math.sqrt(n_states))
    out = [psi]
    for _ in range(k):
        psi = step @ psi
        out.append(psi)
    return out


class TestOracle:
    def test_sign_flip(self):
        out = gr.oracle_apply(sv.uniform_state(2), 2)
        np.testing.assert_array_equal(out.amps, [0.5, 0.5, -0.5, 0.5])

    def test_involution(self, rng):
        psi = sv.from_amplitudes(random_state_vector(rng, 3))
        twice = gr.oracle_apply(gr.oracle_apply(psi, 5), 5)
        np.testing.assert_array_equal(twice.amps, psi.amps)

    def test_phase_error(self):
        out = gr.oracle_apply(sv.uniform_state(2), 0, 0.01)
        assert out.amps[0] == pytest.approx(0.5 * cmath.exp(1j * (math.pi + 0.01)), abs=1e-15)
        np.testing.assert_array_equal(out.amps[1:], 0.5)

    def test_out_of_range(self):
        with pytest.raises(InvalidArgument):
            gr.oracle_apply(sv.uniform_state(2), 4)


class TestDiffusion:
    def test_two_states_swap(self):
        np.testing.assert_array_equal(gr.diffusion_matrix(2), [[0, 1], [1, 0]])
        out = gr.diffusion_apply(sv.from_amplitudes([0.6, 0.8]))
        np.testing.assert_allclose(out.amps, [0.8, 0.6], atol=1e-16)

    def test_uniform_fixed(self):
        for n in (1, 4, 7, 10, 13):
            psi = sv.uniform_state(n)
            np.testing.assert_array_equal(gr.diffusion_apply(psi).amps, psi.amps)

    def test_single_step_exact_find_at_four(self):
        x = np.array([-0.5, 0.5, 0.5, 0.5])
        out = gr.diffusion_apply(sv.from_amplitudes(x))
        np.testing.assert_allclose(gr.diffusion_matrix(4) @ x, [1, 0, 0, 0], atol=1e-15)
        np.testing.assert_allclose(out.amps, [1, 0, 0, 0], atol=1e-15)

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
    def test_mean_form_matches_dense(self, rng, n):
        x = random_state_vector(rng, n)
        np.testing.assert_allclose(gr.diffusion_apply(sv.from_amplitudes(x)).amps, gr.diffusion_matrix(1 << n) @ x, atol=1e-14)

    def test_dense_matrix_unitary_involution(self):
        d = gr.diffusion_matrix(32)
        np.testing.assert_allclose(d @ d, np.eye(32), atol=1e-14)
        np.testing.assert_allclose(d, d.T)


class TestGroverRun:
    @pytest.mark.parametrize("n", [2, 3, 4, 6])
    def test_closed_form_and_brute_force(self, n):
        N = 1 << n
        plan = gr.GroverPlan(n, marked_index=N - 1)
        trace = gr.grover_run(plan)
        dense = dense_grover_amplitudes(N, N - 1, plan.iterations)
        for step, psi in zip(trace, dense):
            closed = gr.clean_marked_amplitude(N, step.iteration)
            assert step.marked_amplitude.real == pytest.approx(closed, abs=1e-10)
            assert step.success_prob == pytest.approx(psi[N - 1] ** 2, abs=1e-12)
            assert step.success_prob == pytest.approx(gr.clean_success_probability(N, step.iteration), abs=1e-12)

    def test_eight_states_two_rounds(self):
        trace = gr.grover_run(gr.GroverPlan(3))
        assert trace.final.iteration == 2
        assert trace.final.success_prob == pytest.approx(0.9453125, abs=1e-12)

    def test_four_states_one_round_exact(self):
        trace = gr.grover_run(gr.GroverPlan(2, iterations=1))
        assert trace.final.success_prob == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("N,k", [(4, 2), (8, 2), (16, 3), (64, 6), (256, 13), (1024, 25)])
    def test_nominal_iterations(self, N, k):
        assert gr.nominal_iterations(N) == k

    def test_trace_starts_at_initial_state(self):
        trace = gr.grover_run(gr.GroverPlan(4, iterations=0))
        assert len(trace) == 1 and trace[0].success_prob == pytest.approx(1 / 16)

    def test_random_init_phases_break_amplification(self):
        plan = gr.GroverPlan(6)
        gnoise = gr.GroverNoise(init=noise.InitPhaseNoise("per_basis_state", uniform=True))
        ss = np.random.SeedSequence(99)
        noisy = np.mean([gr.grover_run(plan, gnoise, np.random.default_rng(s)).final.success_prob for s in ss.spawn(100)])
        clean = gr.grover_run(plan).final.success_prob
        assert noisy < 0.5 * clean

    def test_gate_phases_leave_probabilities_bit_exact(self, rng):
        plan = gr.GroverPlan(5)
        clean = gr.grover_run(plan)
        noisy = gr.grover_run(plan, gr.GroverNoise(gate_phase_sigma=0.7), rng)
        assert [s.success_prob for s in noisy] == [s.success_prob for s in clean]
        assert noisy.final.marked_amplitude != clean.final.marked_amplitude

    def test_dephasing_reduces_success(self, rng):
        plan = gr.GroverPlan(6)
        gnoise = gr.GroverNoise(decoherence=noise.DecoherenceModel(t_d=1.0), dt=0.05)
        noisy = np.mean([gr.grover_run(plan, gnoise, rng).final.success_prob for _ in range(50)])
        assert noisy < gr.grover_run(plan).final.success_prob - 0.01

    def test_noisy_run_needs_rng(self):
        with pytest.raises(InvalidArgument):
            gr.grover_run(gr.GroverPlan(3), gr.GroverNoise(walk=noise.PhaseWalkModel(0.1, 1)))

    def test_plan_validation(self):
        with pytest.raises(InvalidArgument):
            gr.GroverPlan(3, marked_index=8)
        with pytest.raises(InvalidArgument):
            gr.GroverPlan(3, iterations=-1)


class TestAmplitudeError:
    def test_four_states(self):
        res = gr.amplitude_error_one_step(2, 0.01)
        assert res.formula_delta == pytest.approx(-0.0025, abs=1e-15)
        assert res.simulated_delta == pytest.approx(-0.0025, abs=1e-4)

    def test_zero_eps(self):
        assert gr.amplitude_error_one_step(5, 0.0) == (0.0, 0.0)

    def test_large_register(self):
        res = gr.amplitude_error_one_step(10, 0.01)
        assert res.formula_delta == pytest.approx(-0.01 / 32, rel=0.01)
        assert res.simulated_delta == pytest.approx(res.formula_delta, abs=1e-6)

    @pytest.mark.parametrize("n", [2, 4, 6, 9])
    @pytest.mark.parametrize("eps", [1e-3, 0.05, -0.2])
    def test_deviation_matches_hand_derivation(self, n, eps):
        N = 1 << n
        expected = (N - 2) * (cmath.exp(1j * eps) - 1) / (N * math.sqrt(N))
        dev = gr.one_step_deviation(n, eps)
        assert dev.deviation == pytest.approx(expected, abs=1e-14)

    def test_first_order_agreement_at_64(self):
        coeffs = []
        for eps in (1e-3, 3e-3, 1e-2):
            sim, formula = gr.amplitude_error_one_step(6, eps)
            coeffs.append(abs(sim - formula) / eps**2)
            assert abs(sim - formula) <= 5 * eps**2
        print(f"fitted C = {max(coeffs):.3e}")

    def test_fidelity_reported(self):
        dev = gr.one_step_deviation(6, 0.01)
        assert 0.999 < dev.fidelity < 1.0


def test_late_stage_sensitivity_nondecreasing():
    plan = gr.GroverPlan(8)
    gnoise = gr.GroverNoise(walk=noise.PhaseWalkModel(0.02, 1))
    ss = np.random.SeedSequence(2024)
    curve = gr.sensitivity_curve(plan, gnoise, [np.random.default_rng(s) for s in ss.spawn(200)])
    start = plan.iterations - plan.iterations // 4
    tail = curve.relative_loss[start:]
    assert np.all(np.diff(tail) >= 0), tail
