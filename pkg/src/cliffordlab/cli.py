"""Command-line entry points: sweep, slowdown, chi, collapse, oracle-check.

Exit codes: 0 success, 1 invalid input, 2 oracle-check failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import __version__
from .collapse import CollapseParams, collapse, rescale
from .oracle_check import run_oracle_check
from .sweeps import (Manifest, OBSERVABLES, SweepSpec, elapsed_log, fmt9, parse_config_text,
                     read_result_csv, rows_to_points, run_chi_sweep,
                     run_ic_sweep, run_slowdown, spec_from_dict,
                     write_chi_runs_csv, write_curve_csv, write_result_csv)

PROFILES = {
    # desk scale: afternoon on a workstation
    "desk": {"realizations": 1000, "L": (16, 32, 64, 128)},
    # paper scale: high-accuracy figures (L up to 256, 6000 realizations)
    "paper": {"realizations": 6000, "L": (32, 64, 128, 256)},
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _load_spec(args) -> SweepSpec:
    d = {}
    if args.profile:
        d.update(PROFILES[args.profile])
    if args.config:
        with open(args.config) as fh:
            d.update(parse_config_text(fh.read()))
    if args.seed is not None:
        d["seed"] = args.seed
    if args.out is not None:
        d["out"] = args.out
    return spec_from_dict(d)


def _add_common(sub):
    sub.add_argument("--config", help="flat key=value config file")
    sub.add_argument("--profile", choices=sorted(PROFILES),
                     help="bundled defaults (config file overrides them)")
    sub.add_argument("--seed", type=int, default=None, help="master seed")
    sub.add_argument("--threads", type=int, default=1)
    sub.add_argument("--out", default=None, help="output CSV path")


def main(argv=None) -> int:
    parser = _Parser(prog="cliffordlab")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="cmd", required=True)

    for name in ("sweep", "slowdown", "chi"):
        sp = subs.add_parser(name, parents=[], description=f"run the {name} experiment")
        _add_common(sp)
        if name == "chi":
            sp.add_argument("--runs-log", default=None,
                            help="also write one CSV line per run")

    cp = subs.add_parser("collapse", description="finite-size-scaling collapse")
    cp.add_argument("--in", dest="input", required=True, help="result CSV")
    cp.add_argument("--observable", default="ic", choices=OBSERVABLES)
    cp.add_argument("--q-c0", type=float, default=None, help="initial q_c")
    cp.add_argument("--nu0", type=float, default=1.0, help="initial nu")
    cp.add_argument("--weighted", action="store_true",
                    help="weight the fit by 1/stderr^2")
    cp.add_argument("--x-window", type=float, default=None,
                    help="drop rescaled points with |x| above this")
    cp.add_argument("--out", default=None, help="JSON report path (default stdout)")
    cp.add_argument("--rescaled", default=None, help="write x,y,L,q table here")

    op = subs.add_parser("oracle-check", description="stabilizer-vs-dense validation")
    op.add_argument("--cases", type=int, default=200)
    op.add_argument("--chi-cases", type=int, default=40)
    op.add_argument("--max-qubits", type=int, default=14)
    op.add_argument("--seed", type=int, default=0)

    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        if args.cmd == "sweep":
            return _cmd_sweep(args)
        if args.cmd == "slowdown":
            return _cmd_slowdown(args)
        if args.cmd == "chi":
            return _cmd_chi(args)
        if args.cmd == "collapse":
            return _cmd_collapse(args)
        if args.cmd == "oracle-check":
            return _cmd_oracle_check(args)
    except (ValueError, OSError) as exc:
        print(f"cliffordlab: {exc}", file=sys.stderr)
        return 1
    return 0


def _progress(msg: str) -> None:
    print(f"[cliffordlab] {msg}", file=sys.stderr)


def _cmd_sweep(args) -> int:
    t0 = time.time()
    spec = _load_spec(args)
    manifest = Manifest(master_seed=spec.seed, config_hash=spec.config_hash())
    rows = run_ic_sweep(spec, spec.seed, threads=args.threads, log=_progress)
    write_result_csv(spec.out, rows, manifest)
    elapsed_log(t0)
    print(spec.out)
    return 0


def _cmd_slowdown(args) -> int:
    t0 = time.time()
    spec = _load_spec(args)
    manifest = Manifest(master_seed=spec.seed, config_hash=spec.config_hash())
    curves, tc_rows = run_slowdown(spec, spec.seed, threads=args.threads,
                                   log=_progress)
    write_result_csv(spec.out, tc_rows, manifest)
    write_curve_csv(spec.out + ".curves.csv", curves, manifest)
    elapsed_log(t0)
    print(spec.out)
    return 0


def _cmd_chi(args) -> int:
    t0 = time.time()
    spec = _load_spec(args)
    spec.mode = "full_ancilla"
    manifest = Manifest(master_seed=spec.seed, config_hash=spec.config_hash())
    rows, logs = run_chi_sweep(spec, spec.seed, threads=args.threads,
                               keep_runs=args.runs_log is not None,
                               log=_progress)
    write_result_csv(spec.out, rows, manifest)
    if args.runs_log:
        write_chi_runs_csv(args.runs_log, logs, manifest)
    elapsed_log(t0)
    print(spec.out)
    return 0


def _cmd_collapse(args) -> int:
    meta, rows = read_result_csv(args.input)
    points = rows_to_points(rows, observable=args.observable)
    qs = sorted({p.q for p in points})
    q0 = args.q_c0 if args.q_c0 is not None else 0.5 * (qs[0] + qs[-1])
    out = collapse(points, CollapseParams(q_c=q0, nu=args.nu0),
                   weighted=args.weighted, x_window=args.x_window)
    report = {
        "observable": args.observable,
        "source": args.input,
        "source_config_hash": meta.get("config_hash", ""),
        "code_version": __version__,
        "n_points": out.n_points,
        "q_c": float(fmt9(out.q_c)),
        "nu": float(fmt9(out.nu)),
        "epsilon_min": float(fmt9(out.epsilon_min)),
        "q_c_interval": [float(fmt9(out.q_c_interval[0])),
                         float(fmt9(out.q_c_interval[1]))],
        "nu_interval": [float(fmt9(out.nu_interval[0])),
                        float(fmt9(out.nu_interval[1]))],
    }
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.rescaled:
        xy = rescale(points, CollapseParams(out.q_c, out.nu))
        lines = [f"# cliffordlab v1 rescaled table",
                 f"# source={args.input} source_config_hash={meta.get('config_hash', '')}",
                 f"# code_version={__version__} q_c={fmt9(out.q_c)} nu={fmt9(out.nu)}",
                 "# x y L q"]
        for (x, y), pt in zip(xy, points):
            lines.append(f"{fmt9(x)} {fmt9(y)} {pt.L} {fmt9(pt.q)}")
        with open(args.rescaled, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    return 0


def _cmd_oracle_check(args) -> int:
    rep = run_oracle_check(n_cases=args.cases, max_qubits=args.max_qubits,
                           seed=args.seed, n_chi_cases=args.chi_cases)
    print(f"entropy cases: {rep.n_pass}/{rep.n_cases} pass")
    print(f"chi indicator cases: {rep.n_chi_pass}/{rep.n_chi_cases} pass")
    for f in rep.failures:
        print(f"FAIL {f}")
    return 0 if rep.ok else 2


if __name__ == "__main__":
    sys.exit(main())
