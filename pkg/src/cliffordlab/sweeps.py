"""Reproducible experiment orchestration: parameter sweeps, parallel
realizations on deterministic substreams, and byte-stable CSV output.

Determinism contract: every output is a pure function of (spec, master seed).
Realization (point_index, realization_index) always uses the substream
SeedSequence(master_seed, spawn_key=(domain, point_index, realization_index)),
and aggregation runs in realization order, so --threads never changes bytes.
"""

from __future__ import annotations

import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .chi import ChiConfig, ChiRunLog, InitialStateSpec, chi_run
from .circuit import (NOISE_KINDS, CircuitConfig, rng_stream, run_trajectory)
from .collapse import DataPoint
from .observables import convergence_time

_DOM_SWEEP = 21
_DOM_CHI_POINT = 22

RESULT_HEADER = "noise_kind,p,q_t,q,L,T,N,mean,stderr,observable"
CURVE_HEADER = "noise_kind,p,q_t,q,L,t,mean_ic"
CHI_RUN_HEADER = "realization_key,indicator,n_rand,l_sigma,success"

OBSERVABLES = ("ic", "chi", "tc")


def fmt9(x: float) -> str:
    """Floats at 9 significant digits (byte-stable output contract)."""
    return f"{float(x):.9g}"


def derive_seed(master_seed: int, *key: int) -> int:
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(key))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class Manifest:
    master_seed: int
    config_hash: str
    code_version: str = __version__

    def header_lines(self) -> list[str]:
        return [
            "# cliffordlab v1",
            f"# master_seed={self.master_seed}",
            f"# config_hash={self.config_hash}",
            f"# code_version={self.code_version}",
        ]


@dataclass
class ResultRow:
    noise_kind: str
    p: float
    q_t: float
    q: float
    L: int
    T: int
    N: int
    mean: float
    stderr: float
    observable: str

    def to_csv(self) -> str:
        return ",".join([
            self.noise_kind, fmt9(self.p), fmt9(self.q_t), fmt9(self.q),
            str(self.L), str(self.T), str(self.N), fmt9(self.mean),
            fmt9(self.stderr), self.observable])


@dataclass
class SweepSpec:
    noise_kind: str = "reset"
    p: float = 0.0
    q_t: float = 0.1
    q_start: float = 0.44
    q_stop: float = 0.56
    q_step: float = 0.01
    L: tuple[int, ...] = (16, 32, 64, 128)
    realizations: int = 1000
    steps: int | None = None
    mode: str = "compressed"
    with_unitaries: bool = True
    seed: int = 0
    out: str = "sweep.csv"
    # chi-only fields
    rho: str = "plus_zero"
    sigma: str = "all_zero"
    encode_depth: int | None = None

    def __post_init__(self):
        if self.noise_kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise_kind {self.noise_kind!r}")
        if self.q_step <= 0 or self.q_stop < self.q_start:
            raise ValueError("bad q grid")
        if not self.L:
            raise ValueError("empty L list")
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")

    def q_grid(self) -> list[float]:
        n = int(round((self.q_stop - self.q_start) / self.q_step)) + 1
        return [round(self.q_start + i * self.q_step, 12) for i in range(n)]

    def points(self) -> list[tuple[float, int]]:
        return [(q, L) for L in self.L for q in self.q_grid()]

    def circuit_config(self, q: float, L: int, *, seed: int,
                       record_time_series: bool = False) -> CircuitConfig:
        return CircuitConfig(L=L, p=self.p, q_t=self.q_t, q=q,
                             noise_kind=self.noise_kind, steps=self.steps,
                             mode=self.mode, with_unitaries=self.with_unitaries,
                             record_time_series=record_time_series, seed=seed)

    def canonical_text(self) -> str:
        parts = [f"noise_kind={self.noise_kind}", f"p={fmt9(self.p)}",
                 f"q_t={fmt9(self.q_t)}", f"q_start={fmt9(self.q_start)}",
                 f"q_stop={fmt9(self.q_stop)}", f"q_step={fmt9(self.q_step)}",
                 f"L={','.join(str(x) for x in self.L)}",
                 f"realizations={self.realizations}",
                 f"steps={self.steps if self.steps is not None else 'auto'}",
                 f"mode={self.mode}", f"with_unitaries={int(self.with_unitaries)}",
                 f"rho={self.rho}", f"sigma={self.sigma}",
                 f"encode_depth={self.encode_depth if self.encode_depth is not None else 'auto'}"]
        return "\n".join(parts)

    def config_hash(self) -> str:
        import hashlib
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()[:12]


# ---------------------------------------------------------------------------
# config-file parsing (flat key = value)

_BOOL_KEYS = {"with_unitaries", "record_time_series"}
_INT_KEYS = {"realizations", "seed", "steps", "encode_depth"}
_FLOAT_KEYS = {"p", "q_t", "q_start", "q_stop", "q_step"}


def parse_config_text(text: str) -> dict:
    out = {}
    for ln_no, raw in enumerate(text.splitlines(), 1):
        ln = raw.split("#", 1)[0].strip()
        if not ln:
            continue
        if "=" not in ln:
            raise ValueError(f"line {ln_no}: expected key = value")
        k, v = (s.strip() for s in ln.split("=", 1))
        if k == "L":
            out[k] = tuple(int(s) for s in v.replace(",", " ").split())
        elif k in _BOOL_KEYS:
            out[k] = bool(int(v))
        elif k in _INT_KEYS:
            out[k] = int(v)
        elif k in _FLOAT_KEYS:
            out[k] = float(v)
        else:
            out[k] = v
    return out


def spec_from_dict(d: dict) -> SweepSpec:
    d = dict(d)
    d.pop("record_time_series", None)
    unknown = set(d) - set(SweepSpec.__dataclass_fields__)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return SweepSpec(**d)


# ---------------------------------------------------------------------------
# parallel map over realizations (deterministic reduce)

def _parallel_point(fn, n_real: int, threads: int):
    """fn(i) for i in range(n_real), results returned in index order."""
    if threads <= 1:
        return [fn(i) for i in range(n_real)]
    out = [None] * n_real
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for i, val in zip(range(n_real), pool.map(fn, range(n_real), chunksize=8)):
            out[i] = val
    return out


def run_ic_sweep(spec: SweepSpec, master_seed: int, threads: int = 1,
                 log=lambda msg: None) -> list[ResultRow]:
    """Mean final coherent information per (q, L) over N realizations."""
    rows = []
    for p_idx, (q, L) in enumerate(spec.points()):
        def one(i, q=q, L=L, p_idx=p_idx):
            rng = rng_stream(master_seed, _DOM_SWEEP, p_idx, i)
            cfg = spec.circuit_config(q, L, seed=0)
            t = run_trajectory(cfg, i, rng=rng, keep_record=False,
                               track_phases=False, want_series=False)
            return t.final_ic
        vals = np.array(_parallel_point(one, spec.realizations, threads), float)
        stderr = float(vals.std(ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0
        cfg = spec.circuit_config(q, L, seed=0)
        rows.append(ResultRow(spec.noise_kind, spec.p, spec.q_t, q, L,
                              cfg.resolved_steps, spec.realizations,
                              float(vals.mean()), stderr, "ic"))
        log(f"ic point q={q} L={L} mean={vals.mean():.4f}")
    return rows


def run_slowdown(spec: SweepSpec, master_seed: int, threads: int = 1,
                 threshold: float = 0.05, log=lambda msg: None):
    """Averaged coherent-information curves and their convergence times."""
    curve_rows = []
    tc_rows = []
    for p_idx, (q, L) in enumerate(spec.points()):
        cfg = spec.circuit_config(q, L, seed=0, record_time_series=True)
        T = cfg.resolved_steps

        def one(i, q=q, L=L, p_idx=p_idx, cfg=cfg):
            rng = rng_stream(master_seed, _DOM_SWEEP, p_idx, i)
            t = run_trajectory(cfg, i, rng=rng, keep_record=False,
                               track_phases=False, want_series=True)
            return t.ic_series
        series = np.array(_parallel_point(one, spec.realizations, threads), float)
        mean_curve = series.mean(axis=0)
        t_c = convergence_time(mean_curve, threshold=threshold)
        for t in range(T + 1):
            curve_rows.append((spec.noise_kind, spec.p, spec.q_t, q, L, t,
                               mean_curve[t]))
        tc_rows.append(ResultRow(spec.noise_kind, spec.p, spec.q_t, q, L, T,
                                 spec.realizations, float(t_c), 0.0, "tc"))
        log(f"slowdown point q={q} L={L} t_c={t_c}")
    return curve_rows, tc_rows


def run_chi_sweep(spec: SweepSpec, master_seed: int, threads: int = 1,
                  keep_runs: bool = False, log=lambda msg: None):
    """Success fraction of the replay probe per (q, L)."""
    rows = []
    run_logs: list[ChiRunLog] = []
    for p_idx, (q, L) in enumerate(spec.points()):
        point_seed = derive_seed(master_seed, _DOM_CHI_POINT, p_idx)
        circ = spec.circuit_config(q, L, seed=point_seed)
        cfg = ChiConfig(circuit=circ, rho=_state_spec(spec.rho, L),
                        sigma=_state_spec(spec.sigma, L),
                        encode_depth=spec.encode_depth, runs=spec.realizations)

        def one(i, cfg=cfg):
            return chi_run(cfg, i)
        logs = _parallel_point(one, spec.realizations, threads)
        succ = sum(lg.success for lg in logs)
        n = spec.realizations
        chi_hat = succ / n
        stderr = float(np.sqrt(chi_hat * (1 - chi_hat) / n))
        rows.append(ResultRow(spec.noise_kind, spec.p, spec.q_t, q, L,
                              circ.resolved_steps, n, chi_hat, stderr, "chi"))
        if keep_runs:
            run_logs.extend(logs)
        log(f"chi point q={q} L={L} chi={chi_hat:.4f}")
    return rows, run_logs


def _state_spec(name: str, L: int) -> InitialStateSpec:
    if name == "plus_zero":
        return InitialStateSpec.plus_then_zero(L)
    if name == "all_zero":
        return InitialStateSpec.all_zero(L)
    return InitialStateSpec(tuple(name.replace(",", " ").split()))


# ---------------------------------------------------------------------------
# CSV io

def write_result_csv(path: str, rows: list[ResultRow], manifest: Manifest) -> None:
    lines = manifest.header_lines() + [RESULT_HEADER]
    lines += [r.to_csv() for r in rows]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_curve_csv(path: str, curve_rows, manifest: Manifest) -> None:
    lines = manifest.header_lines() + [CURVE_HEADER]
    for (kind, p, q_t, q, L, t, val) in curve_rows:
        lines.append(",".join([kind, fmt9(p), fmt9(q_t), fmt9(q), str(L),
                               str(t), fmt9(val)]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_chi_runs_csv(path: str, logs: list[ChiRunLog], manifest: Manifest) -> None:
    lines = manifest.header_lines() + [CHI_RUN_HEADER]
    for lg in logs:
        lines.append(",".join([lg.realization_key, str(lg.indicator),
                               str(lg.n_rand), str(lg.l_sigma), str(lg.success)]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_result_csv(path: str) -> tuple[dict, list[ResultRow]]:
    meta = {}
    rows = []
    with open(path) as fh:
        lines = fh.read().splitlines()
    body = []
    for ln in lines:
        if ln.startswith("#"):
            if "=" in ln:
                k, v = ln.lstrip("# ").split("=", 1)
                meta[k] = v
            continue
        if ln.strip():
            body.append(ln)
    if not body or body[0] != RESULT_HEADER:
        raise ValueError(f"{path}: missing result header {RESULT_HEADER!r}")
    for ln in body[1:]:
        parts = ln.split(",")
        if len(parts) != 10:
            raise ValueError(f"{path}: malformed row {ln!r}")
        rows.append(ResultRow(parts[0], float(parts[1]), float(parts[2]),
                              float(parts[3]), int(parts[4]), int(parts[5]),
                              int(parts[6]), float(parts[7]), float(parts[8]),
                              parts[9]))
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return meta, rows


def rows_to_points(rows: list[ResultRow], observable: str = "ic") -> list[DataPoint]:
    pts = [DataPoint(q=r.q, L=r.L, y=r.mean, sigma_y=r.stderr)
           for r in rows if r.observable == observable]
    if not pts:
        raise ValueError(f"no rows with observable {observable!r}")
    return pts


def crossing_location(rows: list[ResultRow], L: int, level: float = 0.0,
                      observable: str = "ic") -> float | None:
    """Linear-interpolated q where the mean first crosses `level` for size L."""
    pts = sorted((r.q, r.mean) for r in rows
                 if r.L == L and r.observable == observable)
    for (q0, y0), (q1, y1) in zip(pts, pts[1:]):
        if (y0 - level) == 0:
            return q0
        if (y0 - level) * (y1 - level) < 0:
            return q0 + (q1 - q0) * (level - y0) / (y1 - y0)
    return None


def elapsed_log(t0: float, stream=sys.stderr) -> None:
    print(f"[cliffordlab] wall time: {time.time() - t0:.1f}s", file=stream)
