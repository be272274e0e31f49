"""Pauli algebra against dense matrix oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cliffordlab.paulis import (CliffordGate, PauliOperator, class_tables,
                                commutes, pack_bits, pauli_product,
                                random_two_qubit_clifford, symplectic_classes,
                                two_qubit_clifford_matrix, unpack_bits)


def random_pauli(rng, n, with_phase=True):
    p = PauliOperator(n)
    for q in range(n):
        k = rng.integers(0, 4)
        p.set_x(q, k & 1)
        p.set_z(q, (k >> 1) & 1)
    if with_phase:
        p.phase = int(rng.integers(0, 4))
    return p


def all_mask_paulis(n):
    for code in range(4 ** n):
        p = PauliOperator(n)
        for q in range(n):
            k = (code >> (2 * q)) & 3
            p.set_x(q, k & 1)
            p.set_z(q, (k >> 1) & 1)
        yield p


class TestProduct:
    def test_x_times_z_is_minus_i_y(self):
        r = pauli_product(PauliOperator.from_string("X"),
                          PauliOperator.from_string("Z"))
        assert r.to_string() == "-iY"

    def test_involution(self):
        x = PauliOperator.from_string("X")
        assert pauli_product(x, x).to_string() == "+I"

    def test_two_qubit_example_vs_matrix(self):
        # (X o Z) * (Z o Z) -> -i (Y o I), checked by 4x4 multiplication
        a = PauliOperator.from_string("XZ")
        b = PauliOperator.from_string("ZZ")
        c = pauli_product(a, b)
        assert np.allclose(a.to_matrix() @ b.to_matrix(), c.to_matrix())
        assert c.to_string() == "-iYI"

    def test_width_mismatch(self):
        with pytest.raises(ValueError):
            pauli_product(PauliOperator(1), PauliOperator(2))

    def test_random_products_vs_matrix_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            n = int(rng.integers(1, 4))
            a, b = random_pauli(rng, n), random_pauli(rng, n)
            c = pauli_product(a, b)
            assert np.allclose(a.to_matrix() @ b.to_matrix(), c.to_matrix())

    def test_associativity_exhaustive_two_qubits(self):
        ops = list(all_mask_paulis(2))
        for a in ops:
            for b in ops:
                ab = pauli_product(a, b)
                for c in ops[::5]:
                    assert pauli_product(ab, c) == pauli_product(a, pauli_product(b, c))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2 ** 30 - 1))
    def test_associativity_three_qubits(self, seed):
        rng = np.random.default_rng(seed)
        a, b, c = (random_pauli(rng, 3) for _ in range(3))
        assert pauli_product(pauli_product(a, b), c) == \
            pauli_product(a, pauli_product(b, c))

    def test_associativity_three_qubits_exhaustive(self):
        # all 64^3 mask triples at once, on the raw phase-accumulation rule
        n = 3
        codes = np.arange(4 ** n, dtype=np.int64)
        popc = np.array([bin(i).count("1") for i in range(64)], np.int64)
        x = np.zeros_like(codes)
        z = np.zeros_like(codes)
        for q in range(n):
            k = (codes >> (2 * q)) & 3
            x |= (k & 1) << q
            z |= ((k >> 1) & 1) << q

        def g(i, j):  # phase exponent of product i*j over index grids
            xa, za, xb, zb = x[i], z[i], x[j], z[j]
            return (popc[xa & za] + popc[xb & zb] + 2 * popc[za & xb]
                    - popc[(xa ^ xb) & (za ^ zb)]) % 4

        idx = np.arange(4 ** n)
        a, b, c = np.meshgrid(idx, idx, idx, indexing="ij", sparse=True)
        xab = x[a] ^ x[b]
        zab = z[a] ^ z[b]
        xbc = x[b] ^ x[c]
        zbc = z[b] ^ z[c]
        left = g(a, b) + (popc[xab & zab] + popc[x[c] & z[c]]
                          + 2 * popc[zab & x[c]]
                          - popc[(xab ^ x[c]) & (zab ^ z[c])])
        right = g(b, c) + (popc[x[a] & z[a]] + popc[xbc & zbc]
                           + 2 * popc[z[a] & xbc]
                           - popc[(x[a] ^ xbc) & (z[a] ^ zbc)])
        assert np.all((left - right) % 4 == 0)


class TestCommutes:
    def test_x_z_anticommute(self):
        assert not commutes(PauliOperator.from_string("X"),
                            PauliOperator.from_string("Z"))

    def test_xx_zz_commute(self):
        assert commutes(PauliOperator.from_string("XX"),
                        PauliOperator.from_string("ZZ"))

    def test_exhaustive_two_qubits_vs_matrix(self):
        ops = list(all_mask_paulis(2))
        for a in ops:
            for b in ops:
                ma, mb = a.to_matrix(), b.to_matrix()
                assert commutes(a, b) == np.allclose(ma @ mb, mb @ ma)

    def test_500_random_pairs_vs_matrix(self):
        rng = np.random.default_rng(7)
        for _ in range(500):
            n = int(rng.integers(1, 7))
            a, b = random_pauli(rng, n), random_pauli(rng, n)
            ma, mb = a.to_matrix(), b.to_matrix()
            assert commutes(a, b) == np.allclose(ma @ mb, mb @ ma)


class TestStrings:
    @pytest.mark.parametrize("s", ["+XIZY", "-Z", "+iXY", "-iY", "+IIII"])
    def test_roundtrip(self, s):
        assert PauliOperator.from_string(s).to_string() == s

    def test_support_and_bits(self):
        p = PauliOperator.from_string("XIZY")
        assert p.support() == [0, 2, 3]
        assert list(p.x_bits()) == [1, 0, 0, 1]
        assert list(p.z_bits()) == [0, 0, 1, 1]

    def test_pack_unpack_roundtrip(self):
        rng = np.random.default_rng(0)
        for n in (1, 63, 64, 65, 130):
            bits = rng.integers(0, 2, n).astype(np.uint8)
            assert np.array_equal(unpack_bits(pack_bits(bits), n), bits)


class TestCliffordGates:
    def test_symplectic_violation_rejected(self):
        with pytest.raises(ValueError):
            CliffordGate([PauliOperator.from_string("X"),
                          PauliOperator.from_string("X")])

    def test_non_hermitian_image_rejected(self):
        with pytest.raises(ValueError):
            CliffordGate([PauliOperator.from_string("+iX"),
                          PauliOperator.from_string("Z")])

    def test_named_gate_tables_vs_matrices(self):
        mats = {
            "h": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
            "s": np.array([[1, 0], [0, 1j]], dtype=complex),
            "cnot": np.array([[1, 0, 0, 0], [0, 1, 0, 0],
                              [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
            "swap": np.array([[1, 0, 0, 0], [0, 0, 1, 0],
                              [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
        }
        for name, u in mats.items():
            gate = getattr(CliffordGate, name)()
            out_mask, delta = gate.conjugation_table()
            k = 2 * gate.arity
            for idx in range(1 << k):
                p = PauliOperator(gate.arity)
                for j in range(k):
                    if (idx >> j) & 1:
                        (p.set_x if j % 2 == 0 else p.set_z)(j // 2, 1)
                q = PauliOperator(gate.arity, phase=int(delta[idx]))
                m = int(out_mask[idx])
                for j in range(k):
                    if (m >> j) & 1:
                        (q.set_x if j % 2 == 0 else q.set_z)(j // 2, 1)
                assert np.allclose(u @ p.to_matrix() @ u.conj().T, q.to_matrix())

    def test_random_two_qubit_classes_vs_dense(self):
        rng = np.random.default_rng(3)
        for _ in range(15):
            gate = random_two_qubit_clifford(rng)
            u = two_qubit_clifford_matrix(gate.cls_index, gate.sign_bits)
            for i, base in enumerate(("XI", "ZI", "IX", "IZ")):
                b = PauliOperator.from_string(base)
                conj = u @ b.to_matrix() @ u.conj().T
                assert np.allclose(conj, gate.images[i].to_matrix())


class TestUniformSampling:
    def test_symplectic_group_order(self):
        assert symplectic_classes().shape == (720, 4)

    def test_class_tables_shapes(self):
        symrows, danf = class_tables()
        assert symrows.shape == (720, 4) and danf.shape == (720,)

    def test_class_frequency_uniform(self):
        # 10^6 draws over the 720 symplectic classes, 5 sigma Poisson band
        rng = np.random.default_rng(12345)
        n = 1_000_000
        cls = rng.integers(0, 720, n)
        counts = np.bincount(cls, minlength=720)
        mu = n / 720
        assert np.all(np.abs(counts - mu) < 5 * np.sqrt(mu))

    def test_every_sample_is_valid_gate(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            gate = random_two_qubit_clifford(rng)  # ctor enforces symplectic
            assert gate.arity == 2

    def test_fixed_seed_reproducible(self):
        a = [random_two_qubit_clifford(np.random.default_rng(9)) for _ in range(10)]
        b = [random_two_qubit_clifford(np.random.default_rng(9)) for _ in range(10)]
        assert [(g.cls_index, g.sign_bits) for g in a] == \
            [(g.cls_index, g.sign_bits) for g in b]
