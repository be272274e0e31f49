"""Monitored-circuit engine: brick-wall random Cliffords, rate-p Z
measurements, noise and swap-in ancilla (QE) events.

Each trajectory is driven by an explicit event structure (which gates, which
qubits measured, which qubits hit by noise/QE) sampled up front from a
per-realization stream; the jitted kernel then executes it. Replaying the
resulting EventRecord with forced outcomes reproduces the final state
bit-for-bit, and the same record can be fed to the dense oracle.
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .paulis import class_tables, random_gate_draws
from .stabilizer import GeneratorSet, MeasurementContradiction, MeasurementResult

NOISE_KINDS = ("reset", "depolarize", "dephase")
NOISE_CODE = {"reset": K.NOISE_RESET, "depolarize": K.NOISE_DEPOLARIZE,
              "dephase": K.NOISE_DEPHASE}
MODES = ("compressed", "full_ancilla")

PRODUCT_TAGS = {
    "0": (0, 1, 0), "1": (0, 1, 2),
    "+": (1, 0, 0), "-": (1, 0, 2),
    "i": (1, 1, 0), "-i": (1, 1, 2),
}


def rng_stream(master_seed: int, *key: int) -> np.random.Generator:
    """Independent substream: SeedSequence(master_seed) split by spawn_key.

    Streams for distinct keys are pairwise independent by construction, so
    results never depend on thread count or scheduling order.
    """
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(key))
    return np.random.default_rng(ss)


@dataclass
class CircuitConfig:
    L: int
    p: float = 0.0
    q_t: float = 0.0
    q: float = 0.5
    noise_kind: str = "reset"
    steps: int | None = None          # default 5*L
    mode: str = "compressed"
    with_unitaries: bool = True
    record_time_series: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.L < 2 or self.L % 2 != 0:
            raise ValueError("L must be even and >= 2")
        for name in ("p", "q_t", "q"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.noise_kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise_kind {self.noise_kind!r}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.steps is not None and self.steps < 1:
            raise ValueError("steps must be >= 1")

    @property
    def resolved_steps(self) -> int:
        return self.steps if self.steps is not None else 5 * self.L

    def canonical_text(self) -> str:
        pairs = [("L", self.L), ("p", repr(float(self.p))),
                 ("q_t", repr(float(self.q_t))), ("q", repr(float(self.q))),
                 ("noise_kind", self.noise_kind), ("steps", self.resolved_steps),
                 ("mode", self.mode), ("with_unitaries", int(self.with_unitaries)),
                 ("record_time_series", int(self.record_time_series)),
                 ("seed", self.seed)]
        return "\n".join(f"{k}={v}" for k, v in pairs)

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()[:12]


@dataclass
class EventRecord:
    """Replayable realization: gate choices plus noise/QE/measurement
    locations, and the sampled outcome bits."""
    L: int
    T: int
    noise_kind: str
    with_unitaries: bool
    mode: str
    has_R: bool
    gate_cls: np.ndarray      # (T, n_pairs) int32, -1 = no gate
    gate_sgn: np.ndarray      # (T, n_pairs) uint8
    meas_mask: np.ndarray     # (T, L) uint8
    event_kind: np.ndarray    # (T, L) int8: 0 none, 1 noise, 2 QE
    outcomes: np.ndarray      # (T, L) int8, -1 = not measured
    was_random: np.ndarray    # (T, L) int8
    seed_key: str = ""
    config_hash: str = ""

    @property
    def n_qe(self) -> int:
        return int((self.event_kind == K.EVENT_QE).sum())

    def qe_ancilla_indices(self) -> dict[tuple[int, int], int]:
        """Ancilla ordinal per QE event, allocated in (t, qubit) order."""
        out = {}
        k = 0
        for t in range(self.T):
            for q in range(self.L):
                if self.event_kind[t, q] == K.EVENT_QE:
                    out[(t, q)] = k
                    k += 1
        return out

    def to_text(self) -> str:
        """One step per line: `step t | U a b cls sgn ; ... | M q out rnd ;
        ... | N q ; ... | Q q ; ...` with empty sections omitted."""
        buf = io.StringIO()
        buf.write("#cliffordlab-record v1\n")
        buf.write(f"L={self.L} T={self.T} noise_kind={self.noise_kind} "
                  f"with_unitaries={int(self.with_unitaries)} mode={self.mode} "
                  f"has_R={int(self.has_R)}\n")
        buf.write(f"config_hash={self.config_hash} seed_key={self.seed_key}\n")
        for t in range(self.T):
            sections = [f"step {t}"]
            gates = []
            for g in range(self.gate_cls.shape[1]):
                a = 2 * g + (t & 1)
                if self.gate_cls[t, g] >= 0 and a + 1 < self.L:
                    gates.append(f"U {a} {a + 1} {self.gate_cls[t, g]} "
                                 f"{self.gate_sgn[t, g]}")
            meas = [f"M {q} {self.outcomes[t, q]} {self.was_random[t, q]}"
                    for q in range(self.L) if self.meas_mask[t, q]]
            noise = [f"N {q}" for q in range(self.L)
                     if self.event_kind[t, q] == K.EVENT_NOISE]
            qe = [f"Q {q}" for q in range(self.L)
                  if self.event_kind[t, q] == K.EVENT_QE]
            for sec in (gates, meas, noise, qe):
                if sec:
                    sections.append(" ; ".join(sec))
            buf.write(" | ".join(sections) + "\n")
        buf.write("end\n")
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "EventRecord":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("#cliffordlab-record"):
            raise ValueError("not a cliffordlab record")
        hdr = dict(kv.split("=", 1) for kv in lines[1].split())
        meta = dict(kv.split("=", 1) for kv in lines[2].split())
        L = int(hdr["L"])
        T = int(hdr["T"])
        n_pairs = max(L // 2, 1)
        rec = cls(L=L, T=T, noise_kind=hdr["noise_kind"],
                  with_unitaries=bool(int(hdr["with_unitaries"])),
                  mode=hdr["mode"], has_R=bool(int(hdr["has_R"])),
                  gate_cls=np.full((T, n_pairs), -1, np.int32),
                  gate_sgn=np.zeros((T, n_pairs), np.uint8),
                  meas_mask=np.zeros((T, L), np.uint8),
                  event_kind=np.zeros((T, L), np.int8),
                  outcomes=np.full((T, L), -1, np.int8),
                  was_random=np.zeros((T, L), np.int8),
                  seed_key=meta.get("seed_key", ""),
                  config_hash=meta.get("config_hash", ""))
        for ln in lines[3:]:
            if ln == "end":
                break
            t = -1
            for entry in (e.strip() for sec in ln.split("|")
                          for e in sec.split(";")):
                parts = entry.split()
                if not parts:
                    continue
                if parts[0] == "step":
                    t = int(parts[1])
                elif parts[0] == "U":
                    a, c, s = int(parts[1]), int(parts[3]), int(parts[4])
                    g = (a - (t & 1)) // 2
                    rec.gate_cls[t, g] = c
                    rec.gate_sgn[t, g] = s
                elif parts[0] == "M":
                    q = int(parts[1])
                    rec.meas_mask[t, q] = 1
                    rec.outcomes[t, q] = int(parts[2])
                    rec.was_random[t, q] = int(parts[3])
                elif parts[0] == "N":
                    rec.event_kind[t, int(parts[1])] = K.EVENT_NOISE
                elif parts[0] == "Q":
                    rec.event_kind[t, int(parts[1])] = K.EVENT_QE
                else:
                    raise ValueError(f"bad record entry: {entry!r}")
            if t < 0:
                raise ValueError(f"record line without step index: {ln!r}")
        return rec


class SimState:
    """Generator set over [S | R? | A...] columns plus the discarded count x."""

    def __init__(self, L: int, has_R: bool, mode: str, n_qe_capacity: int = 0,
                 track_phases: bool = True):
        self.L = L
        self.has_R = has_R
        self.mode = mode
        self.track_phases = track_phases
        self.base_cols = L * (2 if has_R else 1)
        self.x = 0
        self.ancilla_count = 0
        self.n_rows = 0
        full = mode == "full_ancilla"
        col_cap = self.base_cols + (n_qe_capacity if full else 0)
        if full:
            cap_rows = col_cap + 18
        else:
            cap_rows = 2 * self.base_cols + 98
        self._col_cap = col_cap
        nw = max(1, (cap_rows + 63) // 64)
        self._xc = np.zeros((col_cap, nw), np.uint64)
        self._zc = np.zeros((col_cap, nw), np.uint64)
        self._p0 = np.zeros(nw, np.uint64)
        self._p1 = np.zeros(nw, np.uint64)

    # -- registers ----------------------------------------------------------
    @property
    def full_mode(self) -> bool:
        return self.mode == "full_ancilla"

    @property
    def stored_cols(self) -> int:
        return self.base_cols + (self.ancilla_count if self.full_mode else 0)

    def system_qubits(self) -> list[int]:
        return list(range(self.L))

    def reference_qubits(self) -> list[int]:
        return list(range(self.L, 2 * self.L)) if self.has_R else []

    def ancilla_qubits(self) -> list[int]:
        if not self.full_mode:
            return []
        return list(range(self.base_cols, self.base_cols + self.ancilla_count))

    @property
    def nw(self) -> int:
        return self._xc.shape[1]

    @property
    def cap_rows(self) -> int:
        return 64 * self.nw

    def _ensure_cols(self, needed: int) -> None:
        if needed <= self._col_cap:
            return
        extra = max(needed - self._col_cap, 8)
        pad = np.zeros((extra, self.nw), np.uint64)
        self._xc = np.vstack([self._xc, pad])
        self._zc = np.vstack([self._zc, pad.copy()])
        self._col_cap += extra

    def _ensure_rows(self) -> None:
        if self.n_rows + 4 <= self.cap_rows:
            return
        nw_new = 2 * self.nw
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

    # -- initialization -----------------------------------------------------
    def _append(self, cols, bxs, bzs, ph) -> None:
        self._ensure_rows()
        self.n_rows = K.append_row(self._xc, self._zc, self._p0, self._p1,
                                   self.stored_cols, self.n_rows,
                                   np.asarray(cols, np.int64),
                                   np.asarray(bxs, np.uint8),
                                   np.asarray(bzs, np.uint8), ph)

    def seed_bell_pairs(self) -> None:
        assert self.has_R and self.n_rows == 0
        for i in range(self.L):
            self._append([i, self.L + i], [1, 1], [0, 0], 0)
            self._append([i, self.L + i], [0, 0], [1, 1], 0)

    def seed_product(self, tags: list[str]) -> None:
        assert not self.has_R and self.n_rows == 0
        if len(tags) != self.L:
            raise ValueError("need one state tag per system qubit")
        for qq, tag in enumerate(tags):
            bx, bz, ph = PRODUCT_TAGS[tag]
            self._append([qq], [bx], [bz], ph)

    # -- per-event API (unit-test surface; the sweep path uses run_steps) ----
    def measure_z(self, qubit: int, forced: int | None = None,
                  rng: np.random.Generator | None = None,
                  strict: bool = True) -> MeasurementResult:
        self._ensure_rows()
        rand_bit = 0
        if forced is None and rng is not None:
            rand_bit = int(rng.integers(0, 2))
        outcome, was_random, status, self.n_rows = K.measure_z(
            self._xc, self._zc, self._p0, self._p1, self.n_rows,
            self.stored_cols, self.nw, qubit,
            np.int64(-1 if forced is None else forced), np.int64(rand_bit),
            self.track_phases, strict)
        if status == K.STATUS_CONTRADICTION:
            raise MeasurementContradiction(
                f"forced outcome {forced} contradicts deterministic Z on {qubit}")
        return MeasurementResult(int(outcome), bool(was_random))

    def apply_noise(self, qubit: int, kind: str) -> None:
        if not (0 <= qubit < self.L):
            raise ValueError("noise must target a system qubit")
        code = NOISE_CODE[kind]
        self._ensure_rows()
        args = (self._xc, self._zc, self._p0, self._p1, self.n_rows,
                self.stored_cols, self.nw, qubit, self.track_phases)
        if code == K.NOISE_RESET:
            self.n_rows = K.apply_reset(*args)
        elif code == K.NOISE_DEPOLARIZE:
            self.n_rows = K.apply_depolarize(*args)
        else:
            self.n_rows = K.apply_dephase(*args)

    def apply_qe(self, qubit: int) -> None:
        if not (0 <= qubit < self.L):
            raise ValueError("QE must target a system qubit")
        self._ensure_rows()
        if self.full_mode:
            self._ensure_cols(self.stored_cols + 1)
            anc_col = self.base_cols + self.ancilla_count
            self.n_rows = K.apply_qe_full(self._xc, self._zc, self._p0, self._p1,
                                          self.n_rows, self.stored_cols + 1,
                                          self.nw, qubit, anc_col)
            self.ancilla_count += 1
        else:
            self.n_rows, dropped = K.apply_qe_compressed(
                self._xc, self._zc, self._p0, self._p1, self.n_rows,
                self.stored_cols, self.nw, qubit, self.track_phases)
            self.x += dropped
            self.ancilla_count += 1
            if self.n_rows + 4 >= self.cap_rows:
                self.purge()

    def purge(self) -> int:
        """Drop rows that became GF(2)-dependent on the stored columns; they
        stand for generators living only on truncated ancilla tails."""
        self.n_rows, dropped = K.purge_dependent_rows(
            self._xc, self._zc, self._p0, self._p1, self.n_rows,
            self.stored_cols, self.nw, self.track_phases)
        self.x += dropped
        return dropped

    # -- observable plumbing --------------------------------------------------
    def rank_all(self) -> int:
        cols = np.arange(self.stored_cols, dtype=np.int64)
        return int(K.masked_rank(self._xc, self._zc, self.n_rows, self.nw, cols))

    def rank_cols(self, cols) -> int:
        cols = np.asarray(sorted(cols), np.int64)
        if cols.size == 0:
            return 0
        return int(K.masked_rank(self._xc, self._zc, self.n_rows, self.nw, cols))

    def rank_sr(self) -> int:
        return self.rank_cols(range(self.base_cols))

    def generator_set(self) -> GeneratorSet:
        g = GeneratorSet(self.stored_cols,
                         mode="truncated" if self.mode == "compressed" else "exact",
                         cap_rows=self.cap_rows)
        nw = min(g._xc.shape[1], self.nw)
        g._xc[:, :nw] = self._xc[: self.stored_cols, :nw]
        g._zc[:, :nw] = self._zc[: self.stored_cols, :nw]
        g._p0[:nw] = self._p0[:nw]
        g._p1[:nw] = self._p1[:nw]
        g.n_rows = self.n_rows
        return g

    def copy(self) -> "SimState":
        st = SimState.__new__(SimState)
        for name in ("L", "has_R", "mode", "track_phases", "base_cols", "x",
                     "ancilla_count", "n_rows", "_col_cap"):
            setattr(st, name, getattr(self, name))
        for name in ("_xc", "_zc", "_p0", "_p1"):
            setattr(st, name, getattr(self, name).copy())
        return st


def init_bell_pairs(L: int, mode: str = "compressed", n_qe_capacity: int = 0,
                    track_phases: bool = True) -> SimState:
    if L % 2 != 0 or L < 2:
        raise ValueError("L must be even and >= 2")
    st = SimState(L, has_R=True, mode=mode, n_qe_capacity=n_qe_capacity,
                  track_phases=track_phases)
    st.seed_bell_pairs()
    return st


def init_product(tags: list[str], mode: str = "full_ancilla",
                 n_qe_capacity: int = 0, track_phases: bool = True) -> SimState:
    st = SimState(len(tags), has_R=False, mode=mode,
                  n_qe_capacity=n_qe_capacity, track_phases=track_phases)
    st.seed_product(tags)
    return st


# ---------------------------------------------------------------------------
# Layer API (per-event path; mirrors the kernel trajectory order)

def brick_wall_layer(state: SimState, t: int, rng: np.random.Generator):
    """Random two-qubit Cliffords on (0,1),(2,3).. at even t, (1,2),(3,4).. at
    odd t; open boundary. Returns the applied (a, b, cls, sign) tuples."""
    L = state.L
    shift = t & 1
    n_pairs = max(L // 2, 1)
    cls, sgn = random_gate_draws(rng, n_pairs)
    symrows, danf = class_tables()
    qa = np.empty(n_pairs, np.int64)
    qb = np.empty(n_pairs, np.int64)
    out = []
    for g in range(n_pairs):
        a = 2 * g + shift
        if a + 1 < L:
            qa[g] = a
            qb[g] = a + 1
            out.append((a, a + 1, int(cls[g]), int(sgn[g])))
        else:
            qa[g] = -1
            qb[g] = -1
    K.apply_gate_layer(state._xc, state._zc, state._p0, state._p1, state.nw,
                       qa, qb, cls.astype(np.int32), sgn, symrows, danf,
                       K.SIGN_LIN, state.track_phases)
    return out


def measurement_layer(state: SimState, rng: np.random.Generator, p: float):
    """Each system qubit measured in Z independently with probability p.

    One outcome bit is pre-drawn per selected qubit (ascending order) and is
    consumed only when the outcome is random, matching the kernel path.
    """
    selected = rng.random(state.L) < p
    out = []
    for q in range(state.L):
        if selected[q]:
            bit = int(rng.integers(0, 2))
            state._ensure_rows()
            outcome, was_random, _, state.n_rows = K.measure_z(
                state._xc, state._zc, state._p0, state._p1, state.n_rows,
                state.stored_cols, state.nw, q, np.int64(-1), np.int64(bit),
                state.track_phases, False)
            out.append((q, int(outcome), bool(was_random)))
    return out


def noise_qe_layer(state: SimState, rng: np.random.Generator, q: float,
                   q_t: float, kind: str):
    """Per qubit: noise with probability q*q_t, QE with probability (1-q)*q_t,
    mutually exclusive, processed in ascending qubit order."""
    u = rng.random(state.L)
    out = []
    for qq in range(state.L):
        if u[qq] < q * q_t:
            state.apply_noise(qq, kind)
            out.append((qq, "noise"))
        elif u[qq] < q_t:
            state.apply_qe(qq)
            out.append((qq, "qe"))
    return out


# ---------------------------------------------------------------------------
# Trajectory driver (kernel path)

@dataclass
class TrajectoryResult:
    state: SimState
    record: EventRecord | None
    ic_series: np.ndarray | None
    final_ic: int
    n_rand: int


@dataclass
class ReplayResult:
    state: SimState
    ok: bool
    n_rand: int
    abort_step: int


def _sample_structure(config: CircuitConfig, rng: np.random.Generator):
    """Draw the full realization: gates, measurement sites and bits, events.

    Draw order (fixed for reproducibility): gate classes+signs, measurement
    mask, measurement bits, event uniforms.
    """
    L, T = config.L, config.resolved_steps
    n_pairs = max(L // 2, 1)
    if config.with_unitaries:
        cls, sgn = random_gate_draws(rng, (T, n_pairs))
        # the last slot of every odd (shifted) layer has no partner qubit
        cls[1::2, n_pairs - 1] = -1
        sgn[1::2, n_pairs - 1] = 0
    else:
        cls = np.full((T, n_pairs), -1, np.int32)
        sgn = np.zeros((T, n_pairs), np.uint8)
    if config.p > 0:
        meas_mask = (rng.random((T, L)) < config.p).astype(np.uint8)
        meas_bits = rng.integers(0, 2, (T, L), dtype=np.uint8)
    else:
        meas_mask = np.zeros((T, L), np.uint8)
        meas_bits = np.zeros((T, L), np.uint8)
    event_kind = np.zeros((T, L), np.int8)
    if config.q_t > 0:
        u = rng.random((T, L))
        event_kind[u < config.q * config.q_t] = K.EVENT_NOISE
        event_kind[(u >= config.q * config.q_t) & (u < config.q_t)] = K.EVENT_QE
    return cls, sgn, meas_mask, meas_bits, event_kind


def _run_kernel(state: SimState, T: int, cls, sgn, meas_mask, meas_bits,
                event_kind, noise_kind: str, with_unitaries: bool,
                replay: int, forced_out, strict: bool, want_series: bool):
    L = state.L
    outcomes = np.full((T, L), -1, np.int8)
    was_random = np.zeros((T, L), np.int8)
    series = np.zeros(T + 1, np.int64) if want_series else np.zeros(1, np.int64)
    symrows, danf = class_tables()
    if forced_out is None:
        forced_out = np.full((T, L), -1, np.int8)
    n_rows, x, anc, status, abort_t, n_rand = K.run_steps(
        state._xc, state._zc, state._p0, state._p1, state.n_rows,
        L, state.base_cols, state.nw, state.cap_rows,
        state.full_mode, state.has_R, with_unitaries, state.track_phases,
        cls, sgn, meas_mask, meas_bits, event_kind,
        NOISE_CODE[noise_kind], replay, forced_out, strict,
        symrows, danf, K.SIGN_LIN,
        outcomes, was_random, want_series, series,
        state.x, state.ancilla_count)
    state.n_rows = n_rows
    state.x = x
    state.ancilla_count = anc
    if status == K.STATUS_CAPACITY:
        raise RuntimeError("row capacity exhausted (internal sizing bug)")
    return outcomes, was_random, series, status, abort_t, n_rand


def run_trajectory(config: CircuitConfig, realization: int = 0, *,
                   initial_tags: list[str] | None = None,
                   rng: np.random.Generator | None = None,
                   keep_record: bool = True,
                   want_series: bool | None = None,
                   track_phases: bool | None = None) -> TrajectoryResult:
    """One full realization of the circuit in Fig-style ordering:
    unitary layer -> measurement layer -> noise/QE layer, T times."""
    if rng is None:
        rng = rng_stream(config.seed, realization)
    if want_series is None:
        want_series = config.record_time_series
    if track_phases is None:
        track_phases = True
    T = config.resolved_steps
    cls, sgn, meas_mask, meas_bits, event_kind = _sample_structure(config, rng)
    n_qe = int((event_kind == K.EVENT_QE).sum())
    has_R = initial_tags is None
    if has_R:
        state = init_bell_pairs(config.L, mode=config.mode,
                                n_qe_capacity=n_qe, track_phases=track_phases)
    else:
        state = init_product(initial_tags, mode=config.mode,
                             n_qe_capacity=n_qe, track_phases=track_phases)
    outcomes, was_random, series, _, _, n_rand = _run_kernel(
        state, T, cls, sgn, meas_mask, meas_bits, event_kind,
        config.noise_kind, config.with_unitaries, 0, None, False, want_series)
    if not state.full_mode:
        state.purge()
    record = None
    if keep_record:
        record = EventRecord(
            L=config.L, T=T, noise_kind=config.noise_kind,
            with_unitaries=config.with_unitaries, mode=config.mode, has_R=has_R,
            gate_cls=cls, gate_sgn=sgn, meas_mask=meas_mask,
            event_kind=event_kind, outcomes=outcomes, was_random=was_random,
            seed_key=f"seed:{config.seed}/realization:{realization}",
            config_hash=config.config_hash())
    final_ic = (state.rank_cols(state.reference_qubits()) - config.L) if has_R else 0
    return TrajectoryResult(state=state, record=record,
                            ic_series=series if want_series else None,
                            final_ic=final_ic, n_rand=n_rand)


def replay_record(record: EventRecord, *, initial_tags: list[str] | None = None,
                  mode: str | None = None, strict: bool | None = None,
                  track_phases: bool = True,
                  want_series: bool = False) -> ReplayResult:
    """Re-run a record with every measurement forced to its recorded outcome.

    strict defaults to True in full_ancilla mode (a deterministic contradiction
    aborts, used by the chi protocol) and False in compressed mode (truncation
    makes compressed determinism flags unreliable; entropies are unaffected).
    """
    mode = mode or record.mode
    if strict is None:
        strict = mode == "full_ancilla"
    has_R = record.has_R if initial_tags is None else False
    if has_R:
        state = init_bell_pairs(record.L, mode=mode, n_qe_capacity=record.n_qe,
                                track_phases=track_phases)
    else:
        state = init_product(initial_tags, mode=mode, n_qe_capacity=record.n_qe,
                             track_phases=track_phases)
    meas_bits = np.zeros((record.T, record.L), np.uint8)
    outcomes, was_random, series, status, abort_t, n_rand = _run_kernel(
        state, record.T, record.gate_cls, record.gate_sgn, record.meas_mask,
        meas_bits, record.event_kind, record.noise_kind, record.with_unitaries,
        1, record.outcomes, strict, want_series)
    ok = status == K.STATUS_OK
    if ok and not state.full_mode:
        state.purge()
    return ReplayResult(state=state, ok=ok, n_rand=n_rand, abort_step=abort_t)
