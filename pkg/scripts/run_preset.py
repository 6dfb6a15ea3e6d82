#!/usr/bin/env python3
"""Run one named benchmark preset and summarize the CSV it writes.

Example:
    python scripts/run_preset.py default --out-dir results
    python scripts/run_preset.py --list
"""

import argparse
import os
import statistics
import sys
from collections import defaultdict

from multitrip import preset_configs, run_experiment


def summarize(rows):
    """Mean completion time per (n, solver), printed as a small table."""
    cells = defaultdict(list)
    for row in rows:
        if row.ct_min is not None:
            cells[(row.n, row.solver)].append(row.ct_min)
    solvers = sorted({s for _, s in cells})
    ns = sorted({n for n, _ in cells})
    width = max(len(s) for s in solvers) if solvers else 8
    header = "n".rjust(6) + "".join(s.rjust(width + 2) for s in solvers)
    print(header)
    for n in ns:
        line = str(n).rjust(6)
        for s in solvers:
            vals = cells.get((n, s))
            line += (f"{statistics.mean(vals):.1f}" if vals else "-").rjust(width + 2)
        print(line)


def main() -> int:
    presets = preset_configs()
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("preset", nargs="?", help="preset name")
    parser.add_argument("--out-dir", default="results")
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--list", action="store_true", help="list presets and exit")
    args = parser.parse_args()

    if args.list or args.preset is None:
        for name, cfg in sorted(presets.items()):
            cells = len(cfg.ns) * len(cfg.seeds)
            print(f"{name:16s} {cells:4d} cells x {len(cfg.solvers)} solvers, "
                  f"n in {list(cfg.ns)}")
        return 0
    if args.preset not in presets:
        print(f"unknown preset {args.preset!r}; use --list", file=sys.stderr)
        return 2

    config = presets[args.preset]
    if args.workers is not None:
        config = type(config).from_dict({**config.to_dict(), "workers": args.workers})
    os.makedirs(args.out_dir, exist_ok=True)
    csv_path = os.path.join(args.out_dir, f"{config.name}.csv")
    rows = run_experiment(config, csv_path)
    bad = [r for r in rows if r.status.startswith("error") or r.status == "invalid"]
    print(f"wrote {csv_path} ({len(rows)} rows, {len(bad)} problematic)")
    summarize(rows)
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
