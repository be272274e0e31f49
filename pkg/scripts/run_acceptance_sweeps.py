#!/usr/bin/env python3
"""Generate the desk-scale experiment data consumed by the acceptance suite.

Existing outputs with a matching manifest are skipped; use --force to rebuild.
Roughly two hours single-threaded; pass --threads on a multicore box.
"""

import argparse
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from cliffordlab.experiments import (ACCEPTANCE_JOBS, generate, is_up_to_date)


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--force", action="store_true")
    ap.add_argument("--only", default=None, help="comma list of file names")
    args = ap.parse_args()
    only = set(args.only.split(",")) if args.only else None
    for name in ACCEPTANCE_JOBS:
        if only and name not in only:
            continue
        if not args.force and is_up_to_date(name):
            print(f"[skip] {name} (manifest matches)")
            continue
        t0 = time.time()
        print(f"[run ] {name} ...", flush=True)
        generate(name, threads=args.threads,
                 log=lambda msg, name=name: print(f"    {name}: {msg}", flush=True))
        print(f"[done] {name} in {time.time() - t0:.0f}s", flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
