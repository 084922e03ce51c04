#!/usr/bin/env python3
"""Regenerate the full artifact tree with the packaged CLI.

Runs every command with the shipped presets into artifacts/<name>/ and
prints one line per run. --fast shrinks the ensembles for a smoke pass
(about a minute); the full pass is desk scale (several minutes).
"""

import argparse
import os
import sys
import time

from quarticbath.cli import run

HERE = os.path.dirname(os.path.abspath(__file__))
CONFIGS = os.path.join(HERE, "..", "configs")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="artifacts")
    ap.add_argument("--fast", action="store_true",
                    help="small ensembles; smoke test the pipeline")
    ap.add_argument("--workers", type=int, default=1)
    ns = ap.parse_args()

    w = ["--workers", str(ns.workers)]
    fast = ns.fast

    def preset(name):
        return os.path.join(CONFIGS, name)

    jobs = [
        ("classify", ["classify", "--alpha", "1", "--beta", "1",
                      "--omega", "1", "--epsilon", "0.5"]),
        ("grid", ["bifurcation-grid", "--omega", "1", "--epsilon", "0.5",
                  "--n-alpha", "81" if not fast else "21",
                  "--n-beta", "81" if not fast else "21"]),
        ("contours", ["contours", "--epsilon", "0.5", "--level", "0.01",
                      "--resolution", "512" if not fast else "128"]),
        ("upo", ["upo", "--epsilon", "0.5", "--delta-e", "0.05"]),
        ("ds", ["ds-sample", "--epsilon", "0.5", "--delta-e", "0.05",
                "--n", "5000" if not fast else "200"]),
        ("gaptime", ["gaptime", "--config", preset("gaptime_coupled.yaml")]
         + (["--n", "200", "--cutoff", "20"] if fast else [])),
        ("flux", ["flux", "--config", preset("flux_sweep.yaml")]
         + (["--delta-e-list", "0.01,0.05,0.1"] if fast else [])),
        ("manifolds", ["manifolds", "--epsilon", "0.5", "--delta-e", "0.01",
                       "--t-prop", "30" if not fast else "5"]),
    ]
    for tag in ("a", "b", "c", "d"):
        extra = ["--n", "10", "--t-max", "60"] if fast else []
        jobs.append((f"poincare_{tag}",
                     ["poincare", "--config",
                      preset(f"poincare_panel_{tag}.yaml")] + extra))

    failures = 0
    for name, argv in jobs:
        out = os.path.join(ns.out, name)
        t0 = time.perf_counter()
        rc = run(argv + w + ["--output", out])
        dt = time.perf_counter() - t0
        status = "ok" if rc == 0 else f"EXIT {rc}"
        print(f"{name:12s} {status:8s} {dt:7.1f}s  {out}")
        failures += rc != 0
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
