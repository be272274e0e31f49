"""Generator-set operations against dense and GF(2) oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cliffordlab.paulis import CliffordGate, PauliOperator, random_two_qubit_clifford
from cliffordlab.stabilizer import (GeneratorSet, MeasurementContradiction)

from test_paulis import random_pauli


def gf2_rank(rows, n_cols):
    """Plain int-bitmask elimination (independent oracle)."""
    work = list(rows)
    rank = 0
    row_idx = 0
    for col in range(n_cols):
        piv = None
        for r in range(row_idx, len(work)):
            if (work[r] >> col) & 1:
                piv = r
                break
        if piv is None:
            continue
        work[row_idx], work[piv] = work[piv], work[row_idx]
        for r in range(len(work)):
            if r != row_idx and ((work[r] >> col) & 1):
                work[r] ^= work[row_idx]
        rank += 1
        row_idx += 1
    return rank


def mask_of(op):
    m = 0
    for q in range(op.n):
        m |= op.get_x(q) << (2 * q)
        m |= op.get_z(q) << (2 * q + 1)
    return m


def span_equal(ops_a, ops_b, n):
    ra = [mask_of(o) for o in ops_a]
    rb = [mask_of(o) for o in ops_b]
    joint = gf2_rank(ra + rb, 2 * n)
    return joint == gf2_rank(ra, 2 * n) == gf2_rank(rb, 2 * n)


def random_stabilizer_state(rng, n, depth=None):
    """|0..0> scrambled by random two-qubit Cliffords (mirrors to a matrix)."""
    g = GeneratorSet.from_paulis(
        [PauliOperator.single(n, q, "Z") for q in range(n)])
    u = np.eye(2 ** n, dtype=complex)
    for _ in range(depth if depth is not None else 3 * n):
        a = int(rng.integers(0, n - 1))
        gate = random_two_qubit_clifford(rng)
        from cliffordlab.paulis import two_qubit_clifford_matrix
        m = two_qubit_clifford_matrix(gate.cls_index, gate.sign_bits)
        g.apply_gate(gate, (a, a + 1))
        full = np.kron(np.eye(2 ** a), np.kron(m, np.eye(2 ** (n - a - 2))))
        u = full @ u
    psi = u[:, 0]
    return g, psi


def dense_subsystem_entropy(psi, n, subset):
    subset = sorted(subset)
    rest = [q for q in range(n) if q not in set(subset)]
    t = psi.reshape((2,) * n).transpose(subset + rest)
    lam = np.linalg.svd(t.reshape(2 ** len(subset), -1), compute_uv=False) ** 2
    lam = lam[lam > 1e-14]
    return float(-(lam * np.log2(lam)).sum())


class TestApplyGate:
    def test_h_on_z(self):
        g = GeneratorSet.from_paulis([PauliOperator.from_string("Z")])
        g.apply_gate(CliffordGate.h(), (0,))
        assert g.row(0).to_string() == "+X"

    def test_cnot_spreads_x(self):
        g = GeneratorSet.from_paulis([PauliOperator.from_string("XI")])
        g.apply_gate(CliffordGate.cnot(), (0, 1))
        assert g.row(0).to_string() == "+XX"

    def test_phase_gate_x_to_y(self):
        g = GeneratorSet.from_paulis([PauliOperator.from_string("X")])
        g.apply_gate(CliffordGate.s(), (0,))
        assert g.row(0).to_string() == "+Y"

    def test_out_of_range_target(self):
        g = GeneratorSet.from_paulis([PauliOperator.from_string("Z")])
        with pytest.raises(ValueError):
            g.apply_gate(CliffordGate.h(), (1,))

    def test_preserves_commutation_and_independence(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            g, _ = random_stabilizer_state(rng, 4, depth=6)
            g.validate()


class TestMeasure:
    def test_deterministic_plus_z(self):
        g = GeneratorSet.from_paulis([PauliOperator.from_string("Z")])
        r = g.measure_pauli(PauliOperator.from_string("Z"))
        assert (r.outcome, r.was_random) == (0, False)

    def test_random_on_plus_state(self):
        rng = np.random.default_rng(0)
        outs = []
        for _ in range(40):
            g = GeneratorSet.from_paulis([PauliOperator.from_string("X")])
            r = g.measure_pauli(PauliOperator.from_string("Z"), rng=rng)
            assert r.was_random
            assert g.row(0).to_string() in ("+Z", "-Z")
            outs.append(r.outcome)
        assert 5 < sum(outs) < 35

    def test_bell_xx_deterministic_zero(self):
        g = GeneratorSet.from_paulis([PauliOperator.from_string("XX"),
                                      PauliOperator.from_string("ZZ")])
        r = g.measure_pauli(PauliOperator.from_string("XX"))
        assert (r.outcome, r.was_random) == (0, False)

    def test_commuting_not_in_group_appends(self):
        g = GeneratorSet.from_paulis([PauliOperator.from_string("ZI")])
        r = g.measure_pauli(PauliOperator.from_string("IZ"), forced=1)
        assert r.was_random and g.n_rows == 2
        assert g.row(1).to_string() == "-IZ"

    def test_contradiction(self):
        g = GeneratorSet.from_paulis([PauliOperator.from_string("-Z")])
        with pytest.raises(MeasurementContradiction):
            g.measure_pauli(PauliOperator.from_string("Z"), forced=0)

    def test_non_hermitian_rejected(self):
        g = GeneratorSet.from_paulis([PauliOperator.from_string("Z")])
        with pytest.raises(ValueError):
            g.measure_pauli(PauliOperator.from_string("+iZ"))

    def test_random_outcome_without_rng_rejected(self):
        g = GeneratorSet.from_paulis([PauliOperator.from_string("X")])
        with pytest.raises(ValueError, match="rng"):
            g.measure_pauli(PauliOperator.from_string("Z"))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2 ** 30 - 1))
    def test_idempotent(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 5))
        g, _ = random_stabilizer_state(rng, n, depth=2 * n)
        op = random_pauli(rng, n, with_phase=False)
        if op.is_identity():
            op = PauliOperator.single(n, 0, "Z")
        r1 = g.measure_pauli(op, rng=rng)
        r2 = g.measure_pauli(op, rng=rng)
        assert not r2.was_random
        assert r2.outcome == r1.outcome


class TestGaussianEliminate:
    def test_already_reduced_unchanged(self):
        g = GeneratorSet.from_paulis([PauliOperator.from_string("XI"),
                                      PauliOperator.from_string("IX")])
        before = [r.to_string() for r in g.rows()]
        g.gaussian_eliminate()
        assert [r.to_string() for r in g.rows()] == before

    def test_span_preserved(self):
        rng = np.random.default_rng(4)
        for _ in range(25):
            g, _ = random_stabilizer_state(rng, 4, depth=8)
            rows_before = g.rows()
            g.gaussian_eliminate(qubit_order=[1, 0, 3, 2])
            assert g.n_rows == len(rows_before)
            assert span_equal(rows_before, g.rows(), 4)

    def test_duplicate_row_removed(self):
        g = GeneratorSet.from_paulis(
            [PauliOperator.from_string("XX"), PauliOperator.from_string("XX")],
            mode="truncated")
        g.gaussian_eliminate()
        assert g.n_rows == 1


class TestTraceOutAndEntropy:
    def test_bell_trace_is_maximally_mixed(self):
        g = GeneratorSet.from_paulis([PauliOperator.from_string("XX"),
                                      PauliOperator.from_string("ZZ")])
        t = g.trace_out([1])
        assert t.n_qubits == 1 and t.n_rows == 0

    def test_product_trace_keeps_local_row(self):
        g = GeneratorSet.from_paulis([PauliOperator.from_string("ZI"),
                                      PauliOperator.from_string("IZ")])
        t = g.trace_out([1])
        assert [r.to_string() for r in t.rows()] == ["+Z"]

    def test_bell_entropy(self):
        g = GeneratorSet.from_paulis([PauliOperator.from_string("XX"),
                                      PauliOperator.from_string("ZZ")])
        assert g.subsystem_entropy({0}) == 1

    def test_computational_state_zero_entropy(self):
        n = 5
        g = GeneratorSet.from_paulis(
            [PauliOperator.single(n, q, "Z") for q in range(n)])
        rng = np.random.default_rng(1)
        for _ in range(10):
            m = [q for q in range(n) if rng.random() < 0.5]
            assert g.subsystem_entropy(m) == 0

    def test_trace_out_entropy_matches_dense(self):
        rng = np.random.default_rng(8)
        for _ in range(12):
            g, psi = random_stabilizer_state(rng, 6)
            keep = sorted(rng.choice(6, size=3, replace=False).tolist())
            discard = [q for q in range(6) if q not in keep]
            t = g.trace_out(discard)
            t.validate()
            s_stab = len(keep) - t.n_rows
            assert abs(dense_subsystem_entropy(psi, 6, keep) - s_stab) < 1e-9

    def test_entropy_matches_dense_100_subsets(self):
        rng = np.random.default_rng(9)
        g, psi = random_stabilizer_state(rng, 8)
        for _ in range(100):
            k = int(rng.integers(1, 8))
            m = sorted(rng.choice(8, size=k, replace=False).tolist())
            s = g.subsystem_entropy(m)
            assert isinstance(s, int)
            assert abs(dense_subsystem_entropy(psi, 8, m) - s) < 1e-9

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2 ** 30 - 1))
    def test_entropy_bounds_and_complement(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 7))
        g, _ = random_stabilizer_state(rng, n, depth=2 * n)
        k = int(rng.integers(1, n))
        m = sorted(rng.choice(n, size=k, replace=False).tolist())
        s = g.subsystem_entropy(m)
        assert 0 <= s <= len(m)
        comp = [q for q in range(n) if q not in m]
        assert s == g.subsystem_entropy(comp)  # pure state
