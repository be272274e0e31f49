"""Registry of the desk-scale experiments behind the acceptance suite.

Every entry is a pure function of its spec and master seed; outputs carry a
manifest header, so cached CSVs are reused only when both match. Generating
everything from scratch takes on the order of two hours single-threaded
(scripts/run_acceptance_sweeps.py, --threads to parallelize).
"""

from __future__ import annotations

import os

from .sweeps import (Manifest, SweepSpec, read_result_csv, run_chi_sweep,
                     run_ic_sweep, run_slowdown, write_curve_csv,
                     write_result_csv)

DEFAULT_RESULTS_DIR = os.path.join(os.path.dirname(__file__), "..", "..",
                                   "results")

# name -> (master_seed, kind, spec fields)
ACCEPTANCE_JOBS: dict[str, tuple[int, str, dict]] = {
    "reset_p0.csv": (101, "ic", dict(
        noise_kind="reset", p=0.0, q_t=0.1,
        q_start=0.44, q_stop=0.56, q_step=0.01,
        L=(16, 32, 64, 128), realizations=1000)),
    "depolarize_p0.csv": (102, "ic", dict(
        noise_kind="depolarize", p=0.0, q_t=0.1,
        q_start=0.30, q_stop=0.42, q_step=0.01,
        L=(16, 32, 64, 128), realizations=1000)),
    "dephase_p0.csv": (103, "ic", dict(
        noise_kind="dephase", p=0.0, q_t=0.1,
        q_start=0.44, q_stop=0.56, q_step=0.01,
        L=(16, 32, 64, 128), realizations=1000)),
    "reset_qt07.csv": (104, "ic", dict(
        noise_kind="reset", p=0.0, q_t=0.7,
        q_start=0.44, q_stop=0.56, q_step=0.01,
        L=(16, 32, 64, 128), realizations=1000)),
    "nounitary_L128.csv": (105, "ic", dict(
        noise_kind="reset", p=0.0, q_t=1.0,
        q_start=0.49, q_stop=0.51, q_step=0.02,
        L=(128,), realizations=1000, with_unitaries=False)),
    "slowdown_on.csv": (106, "slowdown", dict(
        noise_kind="reset", p=0.0, q_t=0.1,
        q_start=0.5, q_stop=0.5, q_step=0.01,
        L=(32, 64, 128), realizations=2000)),
    "slowdown_off.csv": (107, "slowdown", dict(
        noise_kind="reset", p=0.0, q_t=0.1,
        q_start=0.5, q_stop=0.5, q_step=0.01,
        L=(32, 64, 128), realizations=2000, with_unitaries=False)),
    "chi_depolarize_p0.csv": (108, "chi", dict(
        noise_kind="depolarize", p=0.0, q_t=0.1,
        q_start=0.30, q_stop=0.42, q_step=0.01,
        L=(8, 12, 16), realizations=3000, mode="full_ancilla")),
    "depolarize_p01.csv": (109, "ic", dict(
        noise_kind="depolarize", p=0.1, q_t=0.1,
        q_start=0.315, q_stop=0.435, q_step=0.01,
        L=(16, 32, 64, 128), realizations=1000)),
    "chi_depolarize_p01.csv": (110, "chi", dict(
        noise_kind="depolarize", p=0.1, q_t=0.1,
        q_start=0.315, q_stop=0.435, q_step=0.01,
        L=(8, 12, 16), realizations=3000, mode="full_ancilla")),
}


def job_spec(name: str, results_dir: str | None = None):
    seed, kind, fields = ACCEPTANCE_JOBS[name]
    results_dir = results_dir or DEFAULT_RESULTS_DIR
    path = os.path.join(results_dir, name)
    spec = SweepSpec(seed=seed, out=path, **fields)
    manifest = Manifest(master_seed=seed, config_hash=spec.config_hash())
    return spec, manifest, kind


def is_up_to_date(name: str, results_dir: str | None = None) -> bool:
    spec, manifest, _ = job_spec(name, results_dir)
    if not os.path.exists(spec.out):
        return False
    try:
        meta, _ = read_result_csv(spec.out)
    except ValueError:
        return False
    return (meta.get("master_seed") == str(manifest.master_seed)
            and meta.get("config_hash") == manifest.config_hash)


def generate(name: str, results_dir: str | None = None, threads: int = 1,
             log=lambda msg: None) -> str:
    spec, manifest, kind = job_spec(name, results_dir)
    os.makedirs(os.path.dirname(spec.out), exist_ok=True)
    if kind == "ic":
        rows = run_ic_sweep(spec, manifest.master_seed, threads=threads, log=log)
        write_result_csv(spec.out, rows, manifest)
    elif kind == "slowdown":
        curves, tc_rows = run_slowdown(spec, manifest.master_seed,
                                       threads=threads, log=log)
        write_result_csv(spec.out, tc_rows, manifest)
        write_curve_csv(spec.out + ".curves.csv", curves, manifest)
    elif kind == "chi":
        rows, _ = run_chi_sweep(spec, manifest.master_seed, threads=threads,
                                log=log)
        write_result_csv(spec.out, rows, manifest)
    else:
        raise ValueError(f"unknown job kind {kind!r}")
    return spec.out


def ensure_results(name: str, results_dir: str | None = None,
                   threads: int = 1, log=lambda msg: None) -> str:
    """Path to the job's CSV, generating it first when missing or stale."""
    spec, _, _ = job_spec(name, results_dir)
    if not is_up_to_date(name, results_dir):
        generate(name, results_dir, threads=threads, log=log)
    return spec.out
