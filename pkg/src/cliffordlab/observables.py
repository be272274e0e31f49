"""Conditional entropies, coherent information, and the convergence time of
its relaxation curve."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import SimState


@dataclass
class EntropyReport:
    s_S_given_A: int
    s_SR_given_A: int
    i_c: int


@dataclass
class ConvergencePoint:
    q: float
    L: int
    t_c: int


def conditional_entropy(state: SimState, subset) -> int:
    """S(M|A) for M inside S u R.

    Computed as |M| - rank(rows on S u R columns) + rank(rows on M-complement
    columns). With independent stored rows this equals the |M| - y count of
    non-identity rows surviving a trace-out of the complement; the rank form
    additionally tolerates rows that have become dependent through ancilla
    truncation (such rows stand for discarded ancilla-only generators, which
    cancel out of every conditional entropy).
    """
    subset = sorted(set(subset))
    n_sr = state.base_cols
    for q in subset:
        if not (0 <= q < n_sr):
            raise ValueError(f"qubit {q} is not in S u R")
    comp = [q for q in range(n_sr) if q not in set(subset)]
    return len(subset) - state.rank_sr() + state.rank_cols(comp)


def coherent_information(state: SimState) -> int:
    """S(S|A) - S(SR|A); equals rank of the reference-restricted rows minus L."""
    if not state.has_R:
        raise ValueError("coherent information needs the reference register")
    s = conditional_entropy(state, state.system_qubits())
    sr = conditional_entropy(state, range(state.base_cols))
    return s - sr


def entropy_report(state: SimState) -> EntropyReport:
    s = conditional_entropy(state, state.system_qubits())
    sr = conditional_entropy(state, range(state.base_cols))
    return EntropyReport(s_S_given_A=s, s_SR_given_A=sr, i_c=s - sr)


def convergence_time(mean_series, threshold: float = 0.05) -> int:
    """Smallest t with |series(t) - series(T)| below the threshold.

    The series is the realization-averaged coherent-information curve,
    indexed 0..T with the final entry as the reference value.
    """
    series = np.asarray(mean_series, dtype=float)
    if series.size == 0:
        raise ValueError("empty series")
    final = series[-1]
    hits = np.nonzero(np.abs(series - final) < threshold)[0]
    return int(hits[0])
