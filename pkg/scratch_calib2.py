import sys
import time

import numpy as np

from peelclust import *
from peelclust.peeling import PeelOptions, Schedule, recover_full, recover_partial
from peelclust.solver import Consts, SolveOpts

SOLVER = SolveOpts(tol=1e-4, max_iter=800, stall_window=3)


def show(tag, report, gt):
    rows = []
    for r in report.rounds:
        names = []
        for c in r.clusters:
            m = match_to_ground_truth(
                __import__("peelclust").detect.PartialClustering(gt.n, (c,)), gt
            )
            names.append(f"V{m[0]+1}" if m else f"?{len(c)}")
        rows.append((r.step, round(r.knob, 3), r.nodes_before, "+".join(names), r.attempts))
    print(f"  {tag}: rounds={rows} leftover={len(report.leftover)}", flush=True)


which = sys.argv[1] if len(sys.argv) > 1 else "all"

if which in ("all", "1"):
    print("=== experiment 1 ===", flush=True)
    gt = make_ground_truth([800, 200, 80, 20])
    for w in (0.7, 0.8, 1.0, 1.2):
        for seed in (0, 1, 2):
            t0 = time.time()
            A = sample_full(gt, 0.5, 0.2, seed)
            opts = PeelOptions(consts=Consts(w_scale=w), solver=SOLVER)
            _, rep = recover_full(A, 0.5, 0.2, opts)
            show(f"w={w} seed={seed} ({time.time()-t0:.0f}s)", rep, gt)

if which in ("all", "2"):
    print("=== experiment 2 (fixed rate 0.3) ===", flush=True)
    gt = make_ground_truth([800, 200, 50, 50])
    for w in (0.6, 0.8, 1.0, 1.3):
        for seed in (0, 1, 2):
            t0 = time.time()
            oracle = make_oracle(gt, 0.7, 0.1, seed)
            opts = PeelOptions(consts=Consts(w_scale=w), solver=SOLVER,
                               rate_fixed=0.3, k0=4)
            _, rep = recover_partial(oracle, 4, opts)
            show(f"w={w} seed={seed} ({time.time()-t0:.0f}s)", rep, gt)

if which in ("all", "3"):
    print("=== experiment 3 (incremental) ===", flush=True)
    gt = make_ground_truth([800, 200, 50, 50])
    for w in (1.0, 1.4, 1.8):
        for seed in (0, 1):
            t0 = time.time()
            oracle = make_oracle(gt, 0.7, 0.3, seed)
            opts = PeelOptions(consts=Consts(w_scale=w), solver=SOLVER, k0=4)
            _, rep = recover_partial(oracle, 4, opts)
            show(f"w={w} seed={seed} ({time.time()-t0:.0f}s)", rep, gt)
