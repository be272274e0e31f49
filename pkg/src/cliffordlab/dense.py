"""Brute-force statevector reference simulator (<= 14 qubits).

Keeps every environment and ancilla qubit explicit, so trajectories can be
compared exactly against the stabilizer pipeline. Qubit 0 is the leftmost
tensor factor (most significant bit of the flat amplitude index), matching
PauliOperator.to_matrix.
"""

from __future__ import annotations

import numpy as np

from .stabilizer import MeasurementContradiction, MeasurementResult

MAX_QUBITS = 14
_ATOL = 1e-10

STATE_VECTORS = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "-": np.array([1, -1], dtype=complex) / np.sqrt(2),
    "i": np.array([1, 1j], dtype=complex) / np.sqrt(2),
    "-i": np.array([1, -1j], dtype=complex) / np.sqrt(2),
}


class PureState:
    __slots__ = ("n", "amps", "roles")

    def __init__(self, amps: np.ndarray, roles: list[str]):
        self.amps = np.asarray(amps, complex).ravel()
        self.roles = list(roles)
        self.n = len(self.roles)
        if self.amps.size != 2 ** self.n:
            raise ValueError("amplitude length does not match qubit count")
        if self.n > MAX_QUBITS:
            raise ValueError(f"more than {MAX_QUBITS} qubits")
        self._check_norm()

    # -- constructors --------------------------------------------------------
    @classmethod
    def bell_pairs(cls, L: int) -> "PureState":
        """L system qubits (0..L-1), each Bell-paired with reference L+i."""
        if 2 * L > MAX_QUBITS:
            raise ValueError("too many qubits for the dense oracle")
        amps = np.array([1], dtype=complex)
        for _ in range(L):
            amps = np.kron(amps, np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2))
        # amps above pairs neighbours (2i, 2i+1); permute to [S..., R...]
        order = [2 * i for i in range(L)] + [2 * i + 1 for i in range(L)]
        psi = amps.reshape((2,) * (2 * L)).transpose(order)
        return cls(np.ascontiguousarray(psi).ravel(), ["S"] * L + ["R"] * L)

    @classmethod
    def product(cls, tags: list[str], roles: list[str] | None = None) -> "PureState":
        amps = np.array([1], dtype=complex)
        for t in tags:
            amps = np.kron(amps, STATE_VECTORS[t])
        return cls(amps, roles if roles is not None else ["S"] * len(tags))

    def _check_norm(self) -> None:
        nrm = float(np.vdot(self.amps, self.amps).real)
        if abs(nrm - 1.0) > _ATOL:
            raise AssertionError(f"norm drifted to {nrm}")

    # -- structure -----------------------------------------------------------
    def add_qubit(self, role: str, amp0: complex = 1.0, amp1: complex = 0.0) -> int:
        if self.n + 1 > MAX_QUBITS:
            raise ValueError("dense oracle qubit budget exceeded")
        vec = np.array([amp0, amp1], dtype=complex)
        vec = vec / np.linalg.norm(vec)
        self.amps = np.kron(self.amps, vec)
        self.roles.append(role)
        self.n += 1
        return self.n - 1

    def qubits_with_role(self, role: str) -> list[int]:
        return [q for q, r in enumerate(self.roles) if r == role]

    # -- operations ------------------------------------------------------------
    def apply_unitary(self, matrix: np.ndarray, targets) -> None:
        targets = list(targets)
        k = len(targets)
        m = np.asarray(matrix, complex)
        if m.shape != (2 ** k, 2 ** k):
            raise ValueError("matrix size does not match target count")
        if len(set(targets)) != k:
            raise ValueError("targets must be distinct")
        if not np.allclose(m @ m.conj().T, np.eye(2 ** k), atol=_ATOL):
            raise ValueError("matrix is not unitary")
        rest = [q for q in range(self.n) if q not in targets]
        psi = self.amps.reshape((2,) * self.n)
        psi = psi.transpose(targets + rest).reshape(2 ** k, -1)
        psi = m @ psi
        psi = psi.reshape([2] * self.n).transpose(np.argsort(targets + rest))
        self.amps = np.ascontiguousarray(psi).ravel()
        self._check_norm()

    def prob_one(self, qubit: int) -> float:
        psi = self.amps.reshape((2,) * self.n)
        psi = np.moveaxis(psi, qubit, 0)
        return float(np.sum(np.abs(psi[1]) ** 2))

    def born_measure_z(self, qubit: int, forced: int | None = None,
                       rng: np.random.Generator | None = None) -> MeasurementResult:
        p1 = self.prob_one(qubit)
        probs = (1.0 - p1, p1)
        was_random = probs[0] > 1e-12 and probs[1] > 1e-12
        if forced is None:
            if was_random:
                outcome = int(rng.random() < p1)
            else:
                outcome = int(probs[1] > 0.5)
        else:
            outcome = int(forced)
            if probs[outcome] <= 1e-12:
                raise MeasurementContradiction(
                    f"forced branch {outcome} has probability {probs[outcome]}")
        psi = self.amps.reshape((2,) * self.n)
        psi = np.moveaxis(psi, qubit, 0).copy()
        psi[1 - outcome] = 0.0
        psi /= np.sqrt(probs[outcome])
        self.amps = np.ascontiguousarray(np.moveaxis(psi, 0, qubit)).ravel()
        self._check_norm()
        return MeasurementResult(outcome, was_random)

    # -- entropies -------------------------------------------------------------
    def reduced_entropy(self, subset) -> float:
        """Von Neumann entropy (base 2) of the reduced state on `subset`."""
        subset = sorted(set(subset))
        if not subset or len(subset) == self.n:
            return 0.0
        rest = [q for q in range(self.n) if q not in set(subset)]
        psi = self.amps.reshape((2,) * self.n)
        psi = psi.transpose(subset + rest).reshape(2 ** len(subset), -1)
        lam = np.linalg.svd(psi, compute_uv=False) ** 2
        lam = lam[lam > 1e-14]
        return float(-(lam * np.log2(lam)).sum())

    def reduced_density(self, subset) -> np.ndarray:
        subset = sorted(set(subset))
        rest = [q for q in range(self.n) if q not in set(subset)]
        psi = self.amps.reshape((2,) * self.n)
        psi = psi.transpose(subset + rest).reshape(2 ** len(subset), -1)
        return psi @ psi.conj().T

    def conditional_ic(self) -> float:
        """S(S|A) - S(SR|A) = S(S u A) - S(S u R u A) on the purification."""
        s = self.qubits_with_role("S")
        r = self.qubits_with_role("R")
        a = self.qubits_with_role("A")
        return self.reduced_entropy(s + a) - self.reduced_entropy(s + r + a)

    def conditional_entropy(self, subset) -> float:
        """S(M|A) = S(M u A) - S(A) for M inside S u R."""
        a = self.qubits_with_role("A")
        return self.reduced_entropy(sorted(set(subset)) + a) - self.reduced_entropy(a)


# convenience matrices -------------------------------------------------------

H_MAT = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT_MAT = np.array([[1, 0, 0, 0], [0, 1, 0, 0],
                     [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
SWAP_MAT = np.array([[1, 0, 0, 0], [0, 0, 1, 0],
                     [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
