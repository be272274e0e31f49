"""Post-selection-free probe: device run with input rho, classical replay
with input sigma, consistency indicator, and ancilla-generator measurement.

Every circuit execution counts: the replay either exposes an inconsistency
(indicator 0) or yields the generators of the replayed ancilla state, which
are then measured on the device state; the success fraction over runs
estimates the probe value chi (0 deep in the recoverable phase, 1 deep in the
irrecoverable phase).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels as K
from .circuit import (CircuitConfig, EventRecord, SimState, _run_kernel,
                      init_product, replay_record, rng_stream)
from .paulis import PauliOperator, random_gate_draws, unpack_bits
from .stabilizer import _target_arrays

# spawn-key domains for the per-run substreams
_DOM_REALIZATION = 11
_DOM_OUTCOMES = 12
_DOM_ANCILLA_MEAS = 13


@dataclass(frozen=True)
class InitialStateSpec:
    """Per-qubit single-qubit stabilizer states, tags in {0,1,+,-,i,-i}."""
    tags: tuple[str, ...]

    def __post_init__(self):
        for t in self.tags:
            if t not in ("0", "1", "+", "-", "i", "-i"):
                raise ValueError(f"unknown state tag {t!r}")

    @classmethod
    def plus_then_zero(cls, L: int) -> "InitialStateSpec":
        return cls(tuple(["+"] * (L // 2) + ["0"] * (L - L // 2)))

    @classmethod
    def all_zero(cls, L: int) -> "InitialStateSpec":
        return cls(tuple(["0"] * L))

    def __len__(self):
        return len(self.tags)


@dataclass
class ChiConfig:
    circuit: CircuitConfig
    rho: InitialStateSpec
    sigma: InitialStateSpec
    encode_depth: int | None = None      # default: L brick-wall layers
    runs: int = 1
    fresh_realizations: bool = True      # False: one realization, fresh outcomes

    def __post_init__(self):
        if self.circuit.mode != "full_ancilla":
            self.circuit = replace(self.circuit, mode="full_ancilla")
        if len(self.rho) != self.circuit.L or len(self.sigma) != self.circuit.L:
            raise ValueError("state specs must have length L")
        if self.runs < 1:
            raise ValueError("need at least one run")

    @property
    def depth(self) -> int:
        return self.encode_depth if self.encode_depth is not None else self.circuit.L


@dataclass
class ChiRunLog:
    realization_key: str
    indicator: int
    n_rand: int
    l_sigma: int
    success: int


@dataclass
class ChiEstimate:
    chi_hat: float
    stderr: float
    n_runs: int
    n_indicator_pass: int
    runs: list[ChiRunLog] = field(default_factory=list)


def _chi_structure(config: ChiConfig, realization_rng, outcome_rng):
    """Realization arrays for encode_depth + T steps.

    Gates, measurement sites and event placements come from the realization
    stream; measurement outcome bits come from the outcome stream. The first
    encode_depth steps are unitary-only.
    """
    circ = config.circuit
    L, T, D = circ.L, circ.resolved_steps, config.depth
    total = D + T
    n_pairs = max(L // 2, 1)
    cls, sgn = random_gate_draws(realization_rng, (total, n_pairs))
    cls[1::2, n_pairs - 1] = -1
    sgn[1::2, n_pairs - 1] = 0
    if not circ.with_unitaries:
        cls[D:] = -1
        sgn[D:] = 0
    meas_mask = np.zeros((total, L), np.uint8)
    event_kind = np.zeros((total, L), np.int8)
    if circ.p > 0:
        meas_mask[D:] = (realization_rng.random((T, L)) < circ.p).astype(np.uint8)
    if circ.q_t > 0:
        u = realization_rng.random((T, L))
        block = event_kind[D:]
        block[u < circ.q * circ.q_t] = K.EVENT_NOISE
        block[(u >= circ.q * circ.q_t) & (u < circ.q_t)] = K.EVENT_QE
    meas_bits = outcome_rng.integers(0, 2, (total, L), dtype=np.uint8)
    return cls, sgn, meas_mask, meas_bits, event_kind


def encode(spec: InitialStateSpec, rng: np.random.Generator, depth: int):
    """Product state evolved by `depth` unitary-only brick-wall layers.

    Returns (SimState, gate_cls, gate_sgn); the recorded gates are what a
    replay with a different input state must reuse.
    """
    L = len(spec)
    n_pairs = max(L // 2, 1)
    cls, sgn = random_gate_draws(rng, (depth, n_pairs))
    if depth:
        cls[1::2, n_pairs - 1] = -1
        sgn[1::2, n_pairs - 1] = 0
    state = init_product(list(spec.tags), mode="full_ancilla")
    zeros_m = np.zeros((depth, L), np.uint8)
    zeros_e = np.zeros((depth, L), np.int8)
    _run_kernel(state, depth, cls, sgn, zeros_m, zeros_m.copy(), zeros_e,
                "reset", True, 0, None, False, False)
    return state, cls, sgn


def device_run(config: ChiConfig, run_index: int = 0):
    """Encode rho, run the monitored circuit sampling outcomes by Born's rule.

    Returns (record, device_state). The record covers encoding and circuit
    steps; there is no reference register in this protocol.
    """
    circ = config.circuit
    if config.fresh_realizations:
        real_rng = rng_stream(circ.seed, _DOM_REALIZATION, run_index)
    else:
        real_rng = rng_stream(circ.seed, _DOM_REALIZATION, 0)
    out_rng = rng_stream(circ.seed, _DOM_OUTCOMES, run_index)
    cls, sgn, meas_mask, meas_bits, event_kind = _chi_structure(
        config, real_rng, out_rng)
    n_qe = int((event_kind == K.EVENT_QE).sum())
    state = init_product(list(config.rho.tags), mode="full_ancilla",
                         n_qe_capacity=n_qe, track_phases=True)
    total = config.depth + circ.resolved_steps
    outcomes, was_random, _, _, _, _ = _run_kernel(
        state, total, cls, sgn, meas_mask, meas_bits, event_kind,
        circ.noise_kind, True, 0, None, False, False)
    record = EventRecord(
        L=circ.L, T=total, noise_kind=circ.noise_kind,
        with_unitaries=True, mode="full_ancilla", has_R=False,
        gate_cls=cls, gate_sgn=sgn, meas_mask=meas_mask,
        event_kind=event_kind, outcomes=outcomes, was_random=was_random,
        seed_key=f"seed:{circ.seed}/run:{run_index}"
                 f"{'' if config.fresh_realizations else '/pinned'}",
        config_hash=circ.config_hash())
    return record, state


def classical_replay(sigma: InitialStateSpec, record: EventRecord):
    """Replay the record on input sigma, forcing every recorded outcome.

    Returns (indicator, generators, n_rand): indicator is 0 on a deterministic
    contradiction (the replayed trajectory has probability 0), else 1, in
    which case `generators` holds the stabilizer generators of the replayed
    ancilla state (full stored width, support on ancilla columns only) and
    n_rand counts the genuinely random forced measurements.
    """
    res = replay_record(record, initial_tags=list(sigma.tags),
                        mode="full_ancilla", strict=True)
    if not res.ok:
        return 0, [], res.n_rand
    gens = ancilla_generators(res.state)
    return 1, gens, res.n_rand


def ancilla_generators(state: SimState) -> list[PauliOperator]:
    """Generators of the reduced ancilla state: eliminate the system columns
    and keep the rows with no system support."""
    gs = state.generator_set()
    system = list(range(state.L))
    planes = np.array([2 * q for q in system] + [2 * q + 1 for q in system],
                      np.int64)
    K.rref_planes(gs._xc, gs._zc, gs._p0, gs._p1, gs.n_rows, gs.n_qubits,
                  gs._xc.shape[1], planes, True)
    acc = np.zeros(gs._xc.shape[1], np.uint64)
    for q in system:
        acc |= gs._xc[q] | gs._zc[q]
    s_support = unpack_bits(acc, gs.n_rows)
    out = []
    for r in np.nonzero(s_support == 0)[0]:
        op = gs.row(int(r))
        if not op.is_identity():
            out.append(op)
    return out


def measure_ancilla_generators(device_state: SimState,
                               generators: list[PauliOperator],
                               rng: np.random.Generator) -> bool:
    """Measure each generator on the device state; success iff every outcome
    is the +1 eigenvalue. Mutates the device state."""
    n_sys = device_state.L
    for g in generators:
        if any(qq < n_sys for qq in g.support()):
            raise ValueError("generator has support outside the ancilla register")
    for g in generators:
        res = _measure_general(device_state, g, rng)
        if res != 0:
            return False
    return True


def _measure_general(state: SimState, op: PauliOperator,
                     rng: np.random.Generator) -> int:
    state._ensure_rows()
    cols, bx, bz = _target_arrays(op)
    rand_bit = int(rng.integers(0, 2))
    outcome, _, _, state.n_rows = K.measure_target(
        state._xc, state._zc, state._p0, state._p1, state.n_rows,
        state.stored_cols, state.nw, cols, bx, bz, op.phase,
        np.int64(-1), np.int64(rand_bit), True, False)
    return int(outcome)


def chi_run(config: ChiConfig, run_index: int) -> ChiRunLog:
    record, device_state = device_run(config, run_index)
    indicator, gens, n_rand = classical_replay(config.sigma, record)
    key = record.seed_key
    if indicator == 0:
        return ChiRunLog(key, 0, n_rand, 0, 0)
    meas_rng = rng_stream(config.circuit.seed, _DOM_ANCILLA_MEAS, run_index)
    ok = measure_ancilla_generators(device_state, gens, meas_rng)
    return ChiRunLog(key, 1, n_rand, len(gens), int(ok))


def estimate_chi(config: ChiConfig, keep_runs: bool = False) -> ChiEstimate:
    """Monte Carlo estimate: fraction of successful runs among all runs."""
    n = config.runs
    successes = 0
    passes = 0
    logs = []
    for i in range(n):
        log = chi_run(config, i)
        successes += log.success
        passes += log.indicator
        if keep_runs:
            logs.append(log)
    chi_hat = successes / n
    stderr = float(np.sqrt(chi_hat * (1.0 - chi_hat) / n))
    return ChiEstimate(chi_hat=chi_hat, stderr=stderr, n_runs=n,
                       n_indicator_pass=passes, runs=logs)
