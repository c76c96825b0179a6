"""Timing comparison of the two GF(2) elimination kernels.

Runs the same workloads twice in subprocesses, once with the compiled
extension and once with KHBN_FORCE_PURE_KERNEL=1, and prints a table.
Workloads: dense random eliminations at a few sizes, then a full
homology computation so the numbers reflect real call patterns.

    python3 scripts/bench_kernel.py
"""

import json
import os
import random
import subprocess
import sys
import time


def run_worker() -> None:
    from khbn.ringalg import KERNEL, F2Mat, f2_rank
    from khbn.linkdiag import from_braid
    from khbn.khcube import build_complex
    from khbn.homology import bigraded_homology

    results = {"kernel": KERNEL}

    rng = random.Random(20240811)
    for size in (128, 256, 512):
        rows = [rng.getrandbits(size) for _ in range(size)]
        mats = [F2Mat(size, size, list(rows)) for _ in range(5)]
        t0 = time.perf_counter()
        ranks = [f2_rank(m).rank for m in mats]
        results[f"rref_{size}"] = (time.perf_counter() - t0) / len(mats)
        results[f"rank_{size}"] = ranks[0]

    D = from_braid([1, -2, 1, -2], 3)
    t0 = time.perf_counter()
    M = bigraded_homology(build_complex(D, 2))
    results["homology_4x"] = time.perf_counter() - t0
    results["homology_dim"] = M.total_dimension()

    print(json.dumps(results))


def run_driver() -> None:
    here = os.path.abspath(__file__)
    outs = []
    for forced in (False, True):
        env = dict(os.environ)
        env.pop("KHBN_FORCE_PURE_KERNEL", None)
        if forced:
            env["KHBN_FORCE_PURE_KERNEL"] = "1"
        proc = subprocess.run([sys.executable, here, "--worker"],
                              env=env, capture_output=True, text=True)
        if proc.returncode != 0:
            sys.stderr.write(proc.stderr)
            sys.exit(proc.returncode)
        outs.append(json.loads(proc.stdout))

    fast, pure = outs
    if fast["kernel"] == pure["kernel"]:
        print(f"note: both runs used the {fast['kernel']} kernel"
              " (extension not built?)")
    for key in ("rank_128", "rank_256", "rank_512", "homology_dim"):
        if fast[key] != pure[key]:
            raise SystemExit(f"kernels disagree on {key}: "
                             f"{fast[key]} vs {pure[key]}")

    print(f"{'workload':<16} {fast['kernel']:>12} {pure['kernel']:>14} {'speedup':>9}")
    for label, key in [("rref 128x128", "rref_128"),
                       ("rref 256x256", "rref_256"),
                       ("rref 512x512", "rref_512"),
                       ("homology 4x", "homology_4x")]:
        a, b = fast[key], pure[key]
        print(f"{label:<16} {a * 1e3:>10.2f}ms {b * 1e3:>12.2f}ms {b / a:>8.1f}x")


if __name__ == "__main__":
    if "--worker" in sys.argv:
        run_worker()
    else:
        run_driver()
