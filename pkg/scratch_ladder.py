import sys
import time

import numpy as np

from peelclust import *
from peelclust.solver import Consts, PartialConsts, SolveOpts, params_partial, solve

gt = make_ground_truth([800, 200, 50, 50])
w = float(sys.argv[1]) if len(sys.argv) > 1 else 1.4
seed = int(sys.argv[2]) if len(sys.argv) > 2 else 0
cap = int(sys.argv[3]) if len(sys.argv) > 3 else 250
warm = len(sys.argv) <= 4

pcst = PartialConsts.from_probs(0.7, 0.3, Consts(w_scale=w))
oracle = make_oracle(gt, 0.7, 0.3, seed=seed)
print(f"w={w} seed={seed} cap={cap} warm={warm}", flush=True)
prev = None
t_all = time.time()
for step in range(1, 21):
    rate = step * 0.025
    po = oracle.sample_to_rate(rate, np.arange(1100))
    A, mask = zero_fill(po)
    params = params_partial(1100, rate, 0.7, 0.3, pcst)
    t0 = time.time()
    sol = solve(A, mask, params, SolveOpts(tol=1e-4, max_iter=cap, stall_window=3),
                init=prev if warm else None)
    prev = sol
    pc = detect_partial_clustering(sol.K)
    det = None if pc is None else [len(c) for c in pc.clusters]
    mid = float(np.mean((sol.K > 0.1) & (sol.K < 0.9)))
    print(f" rate={rate:.3f}: it={sol.iterations} conv={sol.converged} {time.time()-t0:.0f}s "
          f"det={det} mid={mid:.4f}", flush=True)
    if det:
        break
print(f"total {time.time()-t_all:.0f}s", flush=True)
