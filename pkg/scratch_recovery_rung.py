import time

import numpy as np

from peelclust import *
from peelclust.solver import Consts, PartialConsts, SolveOpts, params_partial, solve

gt = make_ground_truth([800, 200, 50, 50])
pcst = PartialConsts.from_probs(0.7, 0.3, Consts(w_scale=1.4))
oracle = make_oracle(gt, 0.7, 0.3, seed=0)

for rate in (0.2, 0.225, 0.25, 0.275, 0.3):
    po = oracle.sample_to_rate(rate, np.arange(1100))
    A, mask = zero_fill(po)
    params = params_partial(1100, rate, 0.7, 0.3, pcst)
    for cap in (120, 200, 350):
        t0 = time.time()
        sol = solve(A, mask, params, SolveOpts(tol=1e-4, max_iter=cap, stall_window=3))
        pc = detect_partial_clustering(sol.K)
        det = None if pc is None else [len(c) for c in pc.clusters]
        print(f" rate={rate:.3f} cap={cap}: it={sol.iterations} conv={sol.converged} "
              f"{time.time()-t0:.0f}s det={det}", flush=True)
        if sol.converged:
            break
