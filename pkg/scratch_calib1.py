import numpy as np, time
from peelclust import *
from peelclust.solver import SolveOpts, Consts, PartialConsts, params_partial, solve

opts = SolveOpts(tol=1e-5, max_iter=2500, stall_window=3)

print("=== exp 4 precise: blocks V1(:500), V3(650:720), V4(720:750) ===", flush=True)
gt = make_ground_truth([500, 150, 70, 30])
for w in (1.4, 1.5, 1.6):
    for seed in range(5):
        t0 = time.time()
        oracle = make_oracle(gt, 0.8, 0.2, seed)
        po = oracle.sample_to_rate(0.12)
        A, mask = zero_fill(po)
        pcst = PartialConsts.from_probs(0.8, 0.2, Consts(w_scale=w))
        params = params_partial(750, 0.12, 0.8, 0.2, pcst)
        sol = solve(A, mask, params, opts)
        K = sol.K
        v1 = K[:500, :500]
        v3 = K[650:720, 650:720]
        v4 = K[720:, 720:]
        ok = v1.min() >= 0.95 and v3.max() <= 0.05 and v4.max() <= 0.05
        print(f" w={w} seed={seed}: it={sol.iterations} conv={sol.converged} {time.time()-t0:.0f}s "
              f"V1min={v1.min():.3f} V3max={v3.max():.3f} V4max={v4.max():.3f} -> {'PASS' if ok else 'fail'}",
              flush=True)

print("=== exp 3 round 3: two 50s, p'=.7 q'=.3, high rate ===", flush=True)
gt3 = make_ground_truth([800, 200, 50, 50])
for w in (1.5, 2.0, 2.5, 3.0):
    for seed in range(3):
        oracle = make_oracle(gt3, 0.7, 0.3, seed)
        ids = np.arange(1000, 1100)
        hits = []
        for rate in (0.85, 0.9, 0.95, 1.0):
            po = oracle.sample_to_rate(rate, ids)
            A, mask = zero_fill(po)
            pcst = PartialConsts.from_probs(0.7, 0.3, Consts(w_scale=w))
            params = params_partial(100, rate, 0.7, 0.3, pcst)
            sol = solve(A, mask, params, opts)
            pc = detect_partial_clustering(sol.K)
            if pc is not None and pc.clusters:
                hits.append((rate, [len(c) for c in pc.clusters]))
        print(f" w={w} seed={seed}: recoveries {hits}", flush=True)
