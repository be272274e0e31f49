#!/usr/bin/env python3
"""Five-minute tour: a small coherent-information sweep, its scaling
collapse, and a small replay-probe sweep, all through the public API."""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from cliffordlab.collapse import CollapseParams, collapse
from cliffordlab.sweeps import (SweepSpec, crossing_location, rows_to_points,
                                run_chi_sweep, run_ic_sweep)


def main() -> int:
    spec = SweepSpec(noise_kind="reset", p=0.0, q_t=0.1,
                     q_start=0.44, q_stop=0.56, q_step=0.02,
                     L=(16, 32), realizations=200, seed=1)
    print("running a reduced resetting-noise sweep (L = 16, 32) ...")
    rows = run_ic_sweep(spec, spec.seed)
    for L in spec.L:
        print(f"  mean coherent information crosses zero near "
              f"q = {crossing_location(rows, L):.3f} at L = {L}")
    out = collapse(rows_to_points(rows), CollapseParams(0.5, 1.0))
    print(f"  collapse: q_c = {out.q_c:.3f}, nu = {out.nu:.2f} "
          f"(residue {out.epsilon_min:.3g})")

    chi_spec = SweepSpec(noise_kind="depolarize", p=0.0, q_t=0.1,
                         q_start=0.30, q_stop=0.42, q_step=0.04,
                         L=(8,), realizations=300, mode="full_ancilla", seed=2)
    print("running a reduced replay-probe sweep (L = 8) ...")
    chi_rows, _ = run_chi_sweep(chi_spec, chi_spec.seed)
    for r in chi_rows:
        print(f"  q = {r.q:.2f}: chi = {r.mean:.3f} +- {r.stderr:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
