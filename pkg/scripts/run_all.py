#!/usr/bin/env python3
"""Run every verification suite at desk scale and fold the verdicts.

Writes CSVs and JSON verdicts under --out (default out/) and exits with the
number of failed suites.  Use --fast for a quick smoke pass.
"""

import argparse
import sys

from ballwalk.cli import SUITES, main as cli


def run(out: str, seed: int, fast: bool) -> int:
    overrides = {
        "reflection": ["--paths", "2000" if fast else "10000", "--dt", "1e-4" if fast else "1e-5"],
        "exit-dist": ["--paths", "4000" if fast else "20000"],
        "scaling": ["--paths", "2000" if fast else "10000", "--dt", "5e-4" if fast else "1e-4"],
        "continuity": ["--paths", "2000" if fast else "10000"],
        "martingale": ["--paths", "5000" if fast else "20000"],
        "hardy-limit": ["--paths", "2000" if fast else "10000"],
        "tightness": ["--paths", "4000" if fast else "10000", "--dt", "1e-3"],
    }
    for suite in SUITES:
        args = [suite, "--out", out, "--seed", str(seed)] + overrides.get(suite, [])
        code = cli(args)
        if code not in (0, 1):
            return code
    return cli(["report", "--out", out])


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out")
    ap.add_argument("--seed", type=int, default=20260809)
    ap.add_argument("--fast", action="store_true", help="smaller paths / coarser dt")
    ns = ap.parse_args()
    sys.exit(run(ns.out, ns.seed, ns.fast))
