"""Dense oracle unit tests."""

import numpy as np
import pytest

from cliffordlab.dense import CNOT_MAT, H_MAT, SWAP_MAT, PureState
from cliffordlab.stabilizer import MeasurementContradiction

from test_stabilizer import random_stabilizer_state


class TestApplyUnitary:
    def test_h_on_zero(self):
        st = PureState.product(["0"])
        st.apply_unitary(H_MAT, [0])
        assert np.allclose(st.amps, [1 / np.sqrt(2), 1 / np.sqrt(2)])

    def test_cnot_on_10(self):
        st = PureState.product(["1", "0"])
        st.apply_unitary(CNOT_MAT, [0, 1])
        assert np.allclose(st.amps, [0, 0, 0, 1])

    def test_rejects_non_unitary(self):
        st = PureState.product(["0"])
        with pytest.raises(ValueError):
            st.apply_unitary(np.array([[1, 0], [0, 2]], dtype=complex), [0])

    def test_rejects_duplicate_targets(self):
        st = PureState.product(["0", "0"])
        with pytest.raises(ValueError):
            st.apply_unitary(SWAP_MAT, [0, 0])

    def test_matches_stabilizer_measurement_statistics(self):
        # random stabilizer state built identically in both simulators
        rng = np.random.default_rng(5)
        g, psi = random_stabilizer_state(rng, 4)
        st = PureState(psi, ["S"] * 4)
        for q in range(4):
            gq = g.copy()
            from cliffordlab.paulis import PauliOperator
            r = gq.measure_pauli(PauliOperator.single(4, q, "Z"), forced=None,
                                 rng=np.random.default_rng(0))
            p1 = st.prob_one(q)
            if r.was_random:
                assert abs(p1 - 0.5) < 1e-10
            else:
                assert abs(p1 - r.outcome) < 1e-10


class TestBornMeasure:
    def test_deterministic_zero(self):
        st = PureState.product(["0"])
        r = st.born_measure_z(0, rng=np.random.default_rng(0))
        assert (r.outcome, r.was_random) == (0, False)

    def test_plus_state_is_fair(self):
        rng = np.random.default_rng(1)
        outs = []
        for _ in range(400):
            st = PureState.product(["+"])
            outs.append(st.born_measure_z(0, rng=rng).outcome)
        assert 140 < sum(outs) < 260

    def test_forced_contradiction(self):
        st = PureState.product(["0"])
        with pytest.raises(MeasurementContradiction):
            st.born_measure_z(0, forced=1)

    def test_branch_probabilities_sum_to_one(self):
        # 3-qubit, 2-step toy circuit: enumerate forced branches exhaustively
        def run(bits):
            st = PureState.product(["+", "0", "1"])
            prob = 1.0
            st.apply_unitary(CNOT_MAT, [0, 1])
            for step in range(2):
                for q, b in zip((0, 1, 2), bits[3 * step: 3 * step + 3]):
                    p1 = st.prob_one(q)
                    p = p1 if b else 1 - p1
                    if p <= 1e-12:
                        return 0.0
                    st.born_measure_z(q, forced=b)
                    prob *= p
                st.apply_unitary(SWAP_MAT, [1, 2])
            return prob
        total = sum(run([(m >> i) & 1 for i in range(6)]) for m in range(64))
        assert abs(total - 1.0) < 1e-10


class TestEntropies:
    def test_bell_pair(self):
        st = PureState.bell_pairs(1)
        assert abs(st.reduced_entropy([0]) - 1.0) < 1e-12

    def test_ghz(self):
        st = PureState.product(["0", "0", "0"])
        st.apply_unitary(H_MAT, [0])
        st.apply_unitary(CNOT_MAT, [0, 1])
        st.apply_unitary(CNOT_MAT, [1, 2])
        assert abs(st.reduced_entropy([1]) - 1.0) < 1e-12

    def test_complement_symmetry(self):
        rng = np.random.default_rng(3)
        _, psi = random_stabilizer_state(rng, 5)
        st = PureState(psi, ["S"] * 5)
        for m in ([0], [1, 3], [0, 2, 4]):
            comp = [q for q in range(5) if q not in m]
            assert abs(st.reduced_entropy(m) - st.reduced_entropy(comp)) < 1e-10

    def test_matches_stabilizer_entropy(self):
        rng = np.random.default_rng(4)
        g, psi = random_stabilizer_state(rng, 6)
        st = PureState(psi, ["S"] * 6)
        for _ in range(20):
            k = int(rng.integers(1, 6))
            m = sorted(rng.choice(6, size=k, replace=False).tolist())
            assert abs(st.reduced_entropy(m) - g.subsystem_entropy(m)) < 1e-9


class TestConditionalIC:
    def test_bell_init_gives_L(self):
        st = PureState.bell_pairs(2)
        assert abs(st.conditional_ic() - 2.0) < 1e-10

    def test_every_qubit_reset_gives_minus_L(self):
        # swap each system qubit with a fresh |0> environment qubit
        st = PureState.bell_pairs(2)
        for q in range(2):
            e = st.add_qubit("E")
            st.apply_unitary(SWAP_MAT, [q, e])
        assert abs(st.conditional_ic() - (-2.0)) < 1e-10

    def test_qe_preserves_ic(self):
        st = PureState.bell_pairs(2)
        a = st.add_qubit("A")
        st.apply_unitary(SWAP_MAT, [0, a])
        assert abs(st.conditional_ic() - 2.0) < 1e-10
        # and S(S|A) dropped by one
        s = st.qubits_with_role("S")
        assert abs(st.conditional_entropy(s) - 1.0) < 1e-10

    def test_norm_guard(self):
        st = PureState.bell_pairs(1)
        st.amps = st.amps * 1.5
        with pytest.raises(AssertionError):
            st._check_norm()
