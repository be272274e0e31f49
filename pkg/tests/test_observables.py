"""Conditional entropies, coherent information, convergence time."""

import numpy as np
import pytest

from cliffordlab.circuit import (CircuitConfig, brick_wall_layer,
                                 init_bell_pairs, run_trajectory)
from cliffordlab.observables import (coherent_information, conditional_entropy,
                                     convergence_time, entropy_report)


class TestConditionalEntropy:
    def test_bell_init_system(self):
        st = init_bell_pairs(3 * 2 // 2 * 2)  # L = 6
        assert conditional_entropy(st, st.system_qubits()) == 6

    def test_bell_init_full(self):
        st = init_bell_pairs(4)
        assert conditional_entropy(st, range(8)) == 0

    def test_rejects_ancilla_columns(self):
        st = init_bell_pairs(2, mode="full_ancilla")
        st.apply_qe(0)
        with pytest.raises(ValueError):
            conditional_entropy(st, [4])

    def test_negative_conditional_entropy_after_qe(self):
        # a swapped-out Bell member makes S(SR|A) negative
        st = init_bell_pairs(2, mode="full_ancilla")
        st.apply_qe(0)
        assert conditional_entropy(st, range(4)) == -1


class TestCoherentInformation:
    def test_identity_channel(self):
        st = init_bell_pairs(6)
        assert coherent_information(st) == 6

    def test_all_measured(self):
        cfg = CircuitConfig(L=4, p=1.0, q_t=0.0, steps=2, seed=1)
        assert run_trajectory(cfg).final_ic == 0

    def test_all_reset(self):
        cfg = CircuitConfig(L=4, p=0.0, q_t=1.0, q=1.0, noise_kind="reset",
                            steps=1, with_unitaries=False, seed=1)
        assert run_trajectory(cfg).final_ic == -4

    def test_invariant_under_unitary_layers(self):
        cfg = CircuitConfig(L=6, p=0.4, q_t=0.3, q=0.5, noise_kind="depolarize",
                            steps=6, seed=12)
        t = run_trajectory(cfg)
        before = coherent_information(t.state)
        rng = np.random.default_rng(0)
        for tt in range(5):
            brick_wall_layer(t.state, tt, rng)
        assert coherent_information(t.state) == before

    def test_report_consistency(self):
        cfg = CircuitConfig(L=4, p=0.2, q_t=0.3, q=0.5, noise_kind="dephase",
                            steps=8, seed=3)
        t = run_trajectory(cfg)
        rep = entropy_report(t.state)
        assert rep.i_c == rep.s_S_given_A - rep.s_SR_given_A == t.final_ic
        assert -4 <= rep.i_c <= 4


class TestConvergenceTime:
    def test_constant_series(self):
        assert convergence_time([2.0] * 10) == 0

    def test_example_series(self):
        assert convergence_time([5, 3, 1, 0.04, 0, 0]) == 3

    def test_threshold_parameter(self):
        assert convergence_time([5, 3, 1, 0.04, 0, 0], threshold=1.5) == 2

    def test_empty_series_rejected(self):
        with pytest.raises(ValueError):
            convergence_time([])

    def test_final_point_always_qualifies(self):
        rng = np.random.default_rng(0)
        s = rng.normal(size=30)
        assert 0 <= convergence_time(s) <= 29
