"""Stabilizer generator sets: Clifford conjugation, Pauli measurement,
GF(2) elimination, partial trace and subsystem entropy.

A GeneratorSet holds independent Pauli generators over bit-packed column
planes (see _kernels). `exact` sets are pairwise commuting and represent a
(possibly mixed) stabilizer state; `truncated` sets arise from erasing
ancilla support and give up commutation and trustworthy phases, but keep
every support-based observable intact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .paulis import CliffordGate, PauliOperator, n_words, pack_bits


class MeasurementContradiction(Exception):
    """Forced outcome contradicts a deterministic measurement."""


@dataclass
class MeasurementResult:
    outcome: int
    was_random: bool


class GeneratorSet:
    __slots__ = ("n_qubits", "mode", "n_rows", "_xc", "_zc", "_p0", "_p1")

    def __init__(self, n_qubits: int, mode: str = "exact",
                 cap_rows: int | None = None):
        if mode not in ("exact", "truncated"):
            raise ValueError(f"unknown mode {mode!r}")
        self.n_qubits = n_qubits
        self.mode = mode
        self.n_rows = 0
        nw = max(1, n_words(cap_rows if cap_rows else 2 * n_qubits + 2))
        self._xc = np.zeros((max(n_qubits, 1), nw), np.uint64)
        self._zc = np.zeros((max(n_qubits, 1), nw), np.uint64)
        self._p0 = np.zeros(nw, np.uint64)
        self._p1 = np.zeros(nw, np.uint64)

    # -- construction -------------------------------------------------------
    @classmethod
    def from_paulis(cls, ops: list[PauliOperator], mode: str = "exact") -> "GeneratorSet":
        if not ops:
            raise ValueError("need at least one generator (or use GeneratorSet(n))")
        g = cls(ops[0].n, mode=mode)
        for op in ops:
            g.add_row(op)
        return g

    @property
    def cap_rows(self) -> int:
        return 64 * self._xc.shape[1]

    def _ensure_capacity(self, extra: int = 1) -> None:
        if self.n_rows + extra + 2 <= self.cap_rows:
            return
        nw_new = n_words(2 * self.cap_rows)
        for name in ("_xc", "_zc"):
            old = getattr(self, name)
            new = np.zeros((old.shape[0], nw_new), np.uint64)
            new[:, : old.shape[1]] = old
            setattr(self, name, new)
        for name in ("_p0", "_p1"):
            old = getattr(self, name)
            new = np.zeros(nw_new, np.uint64)
            new[: old.shape[0]] = old
            setattr(self, name, new)

    def add_row(self, op: PauliOperator) -> None:
        if op.n != self.n_qubits:
            raise ValueError("operator width mismatch")
        if not op.is_hermitian():
            raise ValueError("generators must carry phase +1 or -1")
        self._ensure_capacity()
        cols, bx, bz = _target_arrays(op)
        self.n_rows = K.append_row(self._xc, self._zc, self._p0, self._p1,
                                   self.n_qubits, self.n_rows, cols, bx, bz,
                                   op.phase)

    # -- row access ----------------------------------------------------------
    def row(self, i: int) -> PauliOperator:
        if not (0 <= i < self.n_rows):
            raise IndexError(i)
        w, b = i // 64, np.uint64(i % 64)
        one = np.uint64(1)
        xb = ((self._xc[: self.n_qubits, w] >> b) & one).astype(np.uint8)
        zb = ((self._zc[: self.n_qubits, w] >> b) & one).astype(np.uint8)
        op = PauliOperator(self.n_qubits, pack_bits(xb), pack_bits(zb),
                           K.phase_of_row(self._p0, self._p1, i))
        return op

    def rows(self) -> list[PauliOperator]:
        return [self.row(i) for i in range(self.n_rows)]

    def copy(self) -> "GeneratorSet":
        g = GeneratorSet.__new__(GeneratorSet)
        g.n_qubits = self.n_qubits
        g.mode = self.mode
        g.n_rows = self.n_rows
        g._xc = self._xc.copy()
        g._zc = self._zc.copy()
        g._p0 = self._p0.copy()
        g._p1 = self._p1.copy()
        return g

    # -- operations ----------------------------------------------------------
    def apply_gate(self, gate: CliffordGate, targets: tuple[int, ...] | list[int]) -> None:
        targets = tuple(targets)
        if len(targets) != gate.arity:
            raise ValueError("target count does not match gate arity")
        if len(set(targets)) != len(targets):
            raise ValueError("targets must be distinct")
        for t in targets:
            if not (0 <= t < self.n_qubits):
                raise ValueError(f"target {t} out of range")
        out_mask, delta = gate.conjugation_table()
        K.apply_table_gate(self._xc, self._zc, self._p0, self._p1,
                           self._xc.shape[1], self.n_rows,
                           np.asarray(targets, np.int64), out_mask, delta)

    def measure_pauli(self, op: PauliOperator, forced: int | None = None,
                      rng: np.random.Generator | None = None,
                      strict: bool = True) -> MeasurementResult:
        if op.n != self.n_qubits:
            raise ValueError("operator width mismatch")
        if not op.is_hermitian():
            raise ValueError("measured operator must carry phase +1 or -1")
        self._ensure_capacity()
        cols, bx, bz = _target_arrays(op)
        if forced is None:
            rand_bit = int(rng.integers(0, 2)) if rng is not None else 0
            f = -1
        else:
            rand_bit = 0
            f = int(forced)
        outcome, was_random, status, self.n_rows = K.measure_target(
            self._xc, self._zc, self._p0, self._p1, self.n_rows,
            self.n_qubits, self._xc.shape[1],
            cols, bx, bz, op.phase, np.int64(f), np.int64(rand_bit),
            True, strict)
        if status == K.STATUS_CONTRADICTION:
            raise MeasurementContradiction(
                f"forced outcome {forced} contradicts deterministic measurement")
        if was_random and forced is None and rng is None:
            raise ValueError("random measurement outcome requires an rng")
        return MeasurementResult(int(outcome), bool(was_random))

    def gaussian_eliminate(self, qubit_order: list[int] | None = None) -> None:
        """Row-reduce in place (X block before Z block); identity rows removed."""
        order_q = list(range(self.n_qubits)) if qubit_order is None else list(qubit_order)
        planes = np.array([2 * q for q in order_q] + [2 * q + 1 for q in order_q],
                          np.int64)
        n_piv, used = K.rref_planes(self._xc, self._zc, self._p0, self._p1,
                                    self.n_rows, self.n_qubits,
                                    self._xc.shape[1], planes, True)
        if n_piv < self.n_rows:
            self.n_rows = K.compact_rows(self._xc, self._zc, self._p0, self._p1,
                                         self.n_qubits, self.n_rows, used)

    def trace_out(self, discard) -> "GeneratorSet":
        """Partial trace: eliminate on the discarded columns, drop rows with
        residual support there, restrict survivors to the remaining qubits."""
        discard = sorted(set(discard))
        for q in discard:
            if not (0 <= q < self.n_qubits):
                raise ValueError(f"qubit {q} out of range")
        keep = [q for q in range(self.n_qubits) if q not in set(discard)]
        work = self.copy()
        planes = np.array([2 * q for q in discard] + [2 * q + 1 for q in discard],
                          np.int64)
        if planes.size:
            K.rref_planes(work._xc, work._zc, work._p0, work._p1,
                          work.n_rows, work.n_qubits, work._xc.shape[1],
                          planes, True)
        out = GeneratorSet(len(keep), mode="exact",
                           cap_rows=max(2 * len(keep) + 2, work.n_rows + 2))
        nw = out._xc.shape[1]
        keep_rows = []
        for r in range(work.n_rows):
            if all(not K.bget(work._xc[q], r) and not K.bget(work._zc[q], r)
                   for q in discard):
                keep_rows.append(r)
        for new_r, r in enumerate(keep_rows):
            for new_c, c in enumerate(keep):
                if K.bget(work._xc[c], r):
                    K.bset(out._xc[new_c], new_r)
                if K.bget(work._zc[c], r):
                    K.bset(out._zc[new_c], new_r)
            K.set_row_phase(out._p0, out._p1, new_r,
                            K.phase_of_row(work._p0, work._p1, r))
        out.n_rows = len(keep_rows)
        assert out.n_rows <= 64 * nw
        return out

    # -- observables ---------------------------------------------------------
    def rank(self, qubits=None) -> int:
        cols = np.arange(self.n_qubits, dtype=np.int64) if qubits is None \
            else np.asarray(sorted(qubits), np.int64)
        if cols.size == 0:
            return 0
        return int(K.masked_rank(self._xc, self._zc, self.n_rows,
                                 self._xc.shape[1], cols))

    def subsystem_entropy(self, subset) -> int:
        """|M| minus the number of independent generators supported inside M."""
        subset = sorted(set(subset))
        comp = [q for q in range(self.n_qubits) if q not in set(subset)]
        inside = self.n_rows - self.rank(comp)
        return len(subset) - inside

    # -- diagnostics ----------------------------------------------------------
    def validate(self) -> None:
        nw = self._xc.shape[1]
        stale = np.zeros(nw, np.uint64)
        for r in range(self.n_rows, 64 * nw):
            K.bset(stale, r)
        for c in range(self.n_qubits):
            assert not (self._xc[c] & stale).any(), "stale X bits"
            assert not (self._zc[c] & stale).any(), "stale Z bits"
        assert not (self._p0 & stale).any() and not (self._p1 & stale).any()
        assert self.rank() == self.n_rows, "rows are GF(2)-dependent"
        if self.mode == "exact":
            assert self.n_rows <= self.n_qubits
            rows = self.rows()
            for i in range(len(rows)):
                assert rows[i].is_hermitian()
                for j in range(i + 1, len(rows)):
                    assert rows[i].commutes_with(rows[j]), "exact rows must commute"

    def __repr__(self) -> str:
        inner = ", ".join(self.row(i).to_string() for i in range(min(self.n_rows, 8)))
        if self.n_rows > 8:
            inner += ", ..."
        return f"GeneratorSet(n={self.n_qubits}, mode={self.mode}, rows=[{inner}])"


def _target_arrays(op: PauliOperator):
    xb = op.x_bits()
    zb = op.z_bits()
    cols = np.nonzero(xb | zb)[0].astype(np.int64)
    return cols, xb[cols], zb[cols]


# Spec-level functional aliases ------------------------------------------------

def apply_gate(gens: GeneratorSet, gate: CliffordGate, targets) -> GeneratorSet:
    gens.apply_gate(gate, targets)
    return gens


def measure_pauli(gens: GeneratorSet, op: PauliOperator, forced=None, rng=None):
    return gens, gens.measure_pauli(op, forced=forced, rng=rng)


def gaussian_eliminate(gens: GeneratorSet, qubit_order=None) -> GeneratorSet:
    gens.gaussian_eliminate(qubit_order)
    return gens


def trace_out(gens: GeneratorSet, discard) -> GeneratorSet:
    return gens.trace_out(discard)


def subsystem_entropy(gens: GeneratorSet, subset) -> int:
    return gens.subsystem_entropy(subset)
