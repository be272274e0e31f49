"""Cross-simulator validation: replay engine records on the dense statevector
oracle and compare conditional entropies, determinism flags, and replay
indicators on enumerable instances."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .chi import ChiConfig, InitialStateSpec, classical_replay, device_run
from .circuit import (CircuitConfig, EventRecord, replay_record, rng_stream,
                      run_trajectory)
from .dense import CNOT_MAT, H_MAT, SWAP_MAT, PureState
from .observables import entropy_report
from .paulis import two_qubit_clifford_matrix
from .stabilizer import MeasurementContradiction

NOISE_QUBIT_COST = {"reset": 1, "depolarize": 2, "dephase": 1}


def oracle_qubit_cost(record: EventRecord) -> int:
    """Environment + ancilla qubits the dense replay will allocate."""
    n_noise = int((record.event_kind == K.EVENT_NOISE).sum())
    n_qe = record.n_qe
    return n_noise * NOISE_QUBIT_COST[record.noise_kind] + n_qe


def run_record_dense(record: EventRecord, initial_tags: list[str] | None = None):
    """Replay a record on the dense oracle with outcomes forced.

    Returns (state, prob, was_random) where prob is the Born probability of
    the forced trajectory and was_random maps (t, q) -> flag. A zero-probability
    branch returns (None, 0.0, flags-so-far).
    """
    if initial_tags is None:
        if not record.has_R:
            raise ValueError("record has no reference register; pass initial_tags")
        state = PureState.bell_pairs(record.L)
    else:
        state = PureState.product(initial_tags)
    prob = 1.0
    flags = {}
    for t in range(record.T):
        for g in range(record.gate_cls.shape[1]):
            a = 2 * g + (t & 1)
            if record.gate_cls[t, g] >= 0 and a + 1 < record.L:
                u = two_qubit_clifford_matrix(int(record.gate_cls[t, g]),
                                              int(record.gate_sgn[t, g]))
                state.apply_unitary(u, [a, a + 1])
        for q in range(record.L):
            if record.meas_mask[t, q]:
                p1 = state.prob_one(q)
                forced = int(record.outcomes[t, q])
                p_branch = p1 if forced else 1.0 - p1
                try:
                    res = state.born_measure_z(q, forced=forced)
                except MeasurementContradiction:
                    return None, 0.0, flags
                prob *= p_branch
                flags[(t, q)] = res.was_random
        for q in range(record.L):
            ev = record.event_kind[t, q]
            if ev == K.EVENT_NOISE:
                if record.noise_kind == "reset":
                    e = state.add_qubit("E")
                    state.apply_unitary(SWAP_MAT, [q, e])
                elif record.noise_kind == "depolarize":
                    e1 = state.add_qubit("E")
                    e2 = state.add_qubit("E")
                    state.apply_unitary(H_MAT, [e1])
                    state.apply_unitary(CNOT_MAT, [e1, e2])
                    state.apply_unitary(SWAP_MAT, [q, e1])
                else:
                    e = state.add_qubit("E")
                    state.apply_unitary(CNOT_MAT, [q, e])
            elif ev == K.EVENT_QE:
                a = state.add_qubit("A")
                state.apply_unitary(SWAP_MAT, [q, a])
    return state, prob, flags


@dataclass
class OracleReport:
    n_cases: int = 0
    n_pass: int = 0
    n_chi_cases: int = 0
    n_chi_pass: int = 0
    failures: list[str] = field(default_factory=list)
    cases: list[tuple[int, str, bool]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def _sample_case_config(rng: np.random.Generator, kind: str, seed: int,
                        max_qubits: int) -> CircuitConfig:
    L = int(rng.choice([2, 4, 6]))
    T = int(rng.integers(1, 11))
    p = float(rng.uniform(0.0, 0.6))
    q = float(rng.uniform(0.0, 1.0))
    budget = max_qubits - 2 * L
    scale = budget / (2.0 * T * L)
    q_t = float(rng.uniform(0.0, min(1.0, scale)))
    return CircuitConfig(L=L, p=p, q_t=q_t, q=q, noise_kind=kind,
                         steps=T, mode="full_ancilla", seed=seed)


def check_entropy_case(config: CircuitConfig, max_qubits: int = 14,
                       corrupt: bool = False):
    """One randomized cross-check; returns (ok, message, config_hash).

    Mints the record in full_ancilla mode (exact outcomes), replays it in
    compressed mode, replays it on the dense oracle, and requires S(S|A),
    S(SR|A) and the coherent information to agree exactly across all three
    (the oracle within 1e-6 of the integer). Determinism flags must agree
    between the exact engine and the oracle. When the qubit budget is
    exceeded by sampled events, returns (None, 'skip', hash).
    """
    traj = run_trajectory(config, realization=0, keep_record=True,
                          track_phases=True)
    rec = traj.record
    if 2 * config.L + oracle_qubit_cost(rec) > max_qubits:
        return None, "skip", config.config_hash()
    full_rep = entropy_report(traj.state)
    comp = replay_record(rec, mode="compressed", strict=False)
    comp_rep = entropy_report(comp.state)
    dense_state, prob, flags = run_record_dense(rec)
    if dense_state is None:
        return False, "dense replay hit probability zero", config.config_hash()
    s_qubits = list(range(config.L))
    sr_qubits = list(range(2 * config.L))
    d_s = dense_state.conditional_entropy(s_qubits)
    d_sr = dense_state.conditional_entropy(sr_qubits)
    d_ic = dense_state.conditional_ic()
    stab_ic = full_rep.i_c + (1 if corrupt else 0)
    checks = [
        ("full S(S|A)", full_rep.s_S_given_A, d_s),
        ("full S(SR|A)", full_rep.s_SR_given_A, d_sr),
        ("full ic", stab_ic, d_ic),
        ("compressed S(S|A)", comp_rep.s_S_given_A, d_s),
        ("compressed S(SR|A)", comp_rep.s_SR_given_A, d_sr),
        ("compressed ic", comp_rep.i_c, d_ic),
    ]
    for name, stab, dense_val in checks:
        if abs(dense_val - stab) > 1e-6:
            return False, f"{name}: stabilizer {stab} vs oracle {dense_val}", \
                config.config_hash()
    if full_rep.i_c != traj.final_ic:
        return False, "reference-rank shortcut disagrees with entropy route", \
            config.config_hash()
    for (t, q), flag in flags.items():
        if bool(rec.was_random[t, q]) != bool(flag):
            return False, f"determinism flag mismatch at t={t} q={q}", \
                config.config_hash()
    return True, "ok", config.config_hash()


def check_chi_indicator_case(seed: int, max_qubits: int = 14):
    """Tiny-instance identity: the replay indicator must equal the replayed
    trajectory probability divided by 2^-N_rand (a 0/1 number)."""
    rng = rng_stream(seed, 91)
    L = 2
    T = int(rng.integers(1, 4))
    p = float(rng.uniform(0.2, 0.8))
    q_t = float(rng.uniform(0.1, 0.6))
    q = float(rng.uniform(0.0, 1.0))
    kind = ["reset", "depolarize", "dephase"][seed % 3]
    circ = CircuitConfig(L=L, p=p, q_t=q_t, q=q, noise_kind=kind, steps=T,
                         mode="full_ancilla", seed=seed)
    cfg = ChiConfig(circuit=circ, rho=InitialStateSpec.plus_then_zero(L),
                    sigma=InitialStateSpec.all_zero(L), encode_depth=2, runs=1)
    record, _ = device_run(cfg, 0)
    if record.L + oracle_qubit_cost(record) > max_qubits:
        return None, "skip"
    indicator, _, n_rand = classical_replay(cfg.sigma, record)
    dense_state, p_sigma, _ = run_record_dense(
        record, initial_tags=list(cfg.sigma.tags))
    expected = p_sigma * (2.0 ** n_rand)
    if abs(expected - indicator) > 1e-9:
        return False, (f"indicator {indicator} but p_sigma*2^N_rand = {expected}"
                       f" (p_sigma={p_sigma}, n_rand={n_rand})")
    return True, "ok"


def run_oracle_check(n_cases: int = 200, max_qubits: int = 14, seed: int = 0,
                     n_chi_cases: int = 40, corrupt: bool = False) -> OracleReport:
    """Randomized end-to-end validation sweep; used by `oracle-check`."""
    report = OracleReport()
    case = 0
    attempt = 0
    while case < n_cases:
        kind = ("reset", "depolarize", "dephase")[case % 3]
        rng = rng_stream(seed, 90, attempt)
        config = _sample_case_config(rng, kind, seed * 100003 + attempt, max_qubits)
        attempt += 1
        ok, msg, chash = check_entropy_case(config, max_qubits=max_qubits,
                                            corrupt=corrupt)
        if ok is None:
            continue
        report.n_cases += 1
        report.cases.append((case, chash, bool(ok)))
        if ok:
            report.n_pass += 1
        else:
            report.failures.append(f"case {case} [{chash}]: {msg}")
        case += 1
    chi_case = 0
    chi_attempt = 0
    while chi_case < n_chi_cases:
        ok, msg = check_chi_indicator_case(seed * 7919 + chi_attempt,
                                           max_qubits=max_qubits)
        chi_attempt += 1
        if ok is None:
            continue
        report.n_chi_cases += 1
        if ok:
            report.n_chi_pass += 1
        else:
            report.failures.append(f"chi case {chi_case}: {msg}")
        chi_case += 1
    return report
