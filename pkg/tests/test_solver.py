import math

import numpy as np
import pytest

from peelclust.planted import make_ground_truth, make_oracle, sample_full, zero_fill
from peelclust.solver import (
    Consts,
    PartialConsts,
    SolveOpts,
    diagnostics_csv,
    objective,
    params_full,
    params_partial,
    solve,
)


class TestParamsFull:
    def test_default_mix_low_end(self):
        params = params_full(100, 0.5, 0.2)
        assert params.mix == pytest.approx(0.25 * 0.5 + 0.75 * 0.2)

    def test_weight_product_invariant(self):
        # w_edge * w_nonedge == (w_scale / (scale * sqrt(n log n)))^2
        for n, p, q, scale in [(50, 0.9, 0.1, 1.0), (1100, 0.5, 0.2, 2.5)]:
            params = params_full(n, p, q, scale=scale, consts=Consts(w_scale=0.7))
            expected = (0.7 / (scale * math.sqrt(n * math.log(n)))) ** 2
            assert params.w_edge * params.w_nonedge == pytest.approx(expected, rel=1e-12)

    def test_weight_ratio_is_mix_odds(self):
        params = params_full(200, 0.6, 0.1, mix=0.3)
        assert params.w_nonedge / params.w_edge == pytest.approx(0.3 / 0.7, rel=1e-12)

    def test_cutoff_ratio_is_log_squared_gap(self):
        params = params_full(400, 0.5, 0.2, consts=Consts(big_scale=2.0, small_scale=0.5))
        gap = (2.0 / 0.5) * math.log(400) ** 2
        assert params.big_cutoff / params.small_cutoff == pytest.approx(gap, rel=1e-9)

    def test_mix_range_enforced(self):
        with pytest.raises(ValueError, match="mix"):
            params_full(100, 0.5, 0.2, mix=0.6)

    def test_scale_below_one_rejected(self):
        with pytest.raises(ValueError, match="scale"):
            params_full(100, 0.5, 0.2, scale=0.9)


class TestParamsPartial:
    def test_rate_one_reduces_to_full(self):
        p, q = 0.7, 0.1
        consts = PartialConsts.from_probs(p, q, Consts(w_scale=0.8))
        part = params_partial(1100, 1.0, p, q, consts)
        full = params_full(1100, p, q, consts=Consts(w_scale=0.8))
        assert part.p == pytest.approx(full.p)
        assert part.q == pytest.approx(full.q)
        assert part.mix == pytest.approx(full.mix, rel=1e-12)
        assert part.w_edge == pytest.approx(full.w_edge, rel=1e-12)
        assert part.w_nonedge == pytest.approx(full.w_nonedge, rel=1e-12)
        assert part.big_cutoff == pytest.approx(full.big_cutoff, rel=1e-12)
        assert part.small_cutoff == pytest.approx(full.small_cutoff, rel=1e-12)

    def test_big_cutoff_scales_inverse_sqrt_rate(self):
        consts = PartialConsts.from_probs(0.7, 0.1)
        a = params_partial(1000, 0.4, 0.7, 0.1, consts)
        b = params_partial(1000, 0.2, 0.7, 0.1, consts)
        assert b.big_cutoff / a.big_cutoff == pytest.approx(math.sqrt(2.0), rel=1e-12)

    def test_experiment_two_configuration(self):
        params = params_partial(1100, 0.3, 0.7, 0.1)
        assert params.p == pytest.approx(0.3 * 0.7)
        assert params.q == pytest.approx(0.3 * 0.1)
        assert params.mix == pytest.approx(0.3 * (0.7 / 4 + 3 * 0.1 / 4))
        assert params.scale == 1.0

    def test_weight_ratio_matches_mix(self):
        params = params_partial(500, 0.25, 0.8, 0.2)
        assert params.w_nonedge / params.w_edge == pytest.approx(
            params.mix / (1 - params.mix), rel=1e-12
        )

    def test_zero_rate_rejected(self):
        with pytest.raises(ValueError):
            params_partial(100, 0.0, 0.7, 0.1)


def _solve_instance(sizes, p, q, seed, w=1.0, **opt_fields):
    gt = make_ground_truth(sizes)
    A = sample_full(gt, p, q, seed=seed)
    params = params_full(gt.n, p, q, consts=Consts(w_scale=w))
    opts = SolveOpts(**opt_fields) if opt_fields else SolveOpts()
    return gt, A, params, solve(A, A.astype(bool), params, opts)


class TestSolve:
    def test_noiseless_single_cluster_exact(self):
        gt, A, params, sol = _solve_instance([4], 1.0, 0.0, seed=0)
        assert sol.converged
        assert np.abs(sol.K - gt.clustering_matrix()).max() < 1e-6

    def test_identity_instance_prefers_zero(self):
        A = np.eye(6)
        params = params_full(6, 0.5, 0.2)
        sol = solve(A, A.astype(bool), params)
        cand_eye = objective(A, np.eye(6), params)
        cand_zero = objective(A, np.zeros((6, 6)), params)
        assert cand_zero < cand_eye
        assert sol.objective <= cand_zero + 1e-8
        assert np.abs(sol.K).max() < 1e-6

    def test_constraint_and_box_exact(self):
        gt, A, params, sol = _solve_instance([12, 8], 0.8, 0.1, seed=2)
        assert np.array_equal(sol.B, A - sol.K)
        assert sol.K.min() >= 0.0 and sol.K.max() <= 1.0
        assert np.array_equal(sol.K, sol.K.T)

    def test_input_validation(self):
        params = params_full(4, 0.5, 0.2)
        A = np.eye(4) * 0.5
        with pytest.raises(ValueError, match="0/1"):
            solve(A, A.astype(bool), params)
        A = np.eye(4)
        with pytest.raises(ValueError, match="support"):
            solve(A, np.zeros((4, 4), bool), params)

    def test_nonconvergence_reported_not_raised(self):
        gt, A, params, sol = _solve_instance([10, 6], 0.7, 0.2, seed=1, max_iter=3)
        assert not sol.converged
        assert sol.iterations == 3

    def test_primal_residual_window_monotone(self):
        # non-increasing over any 50-iteration window, allowing growth jumps
        gt, A, params, sol = _solve_instance(
            [20, 12], 0.8, 0.15, seed=5, track=True, tol=1e-9, max_iter=400
        )
        primal = [row[2] for row in sol.diagnostics]
        for i in range(len(primal) - 50):
            assert primal[i + 50] <= primal[i] * (1 + 1e-9) + 1e-12

    def test_diagnostics_csv_shape(self):
        gt, A, params, sol = _solve_instance([8, 5], 0.9, 0.1, seed=3, track=True)
        text = diagnostics_csv(sol.diagnostics)
        lines = text.strip().splitlines()
        assert lines[0] == "iteration,objective,primal_residual,dual_residual,mu"
        assert len(lines) == sol.iterations + 1

    @pytest.mark.parametrize("seed", range(10))
    def test_reference_run_cross_check(self, seed):
        # fast vs high-precision solves agree on K within 1e-4 Frobenius
        gt = make_ground_truth([12, 10, 8])
        A = sample_full(gt, 0.85, 0.1, seed=seed)
        params = params_full(30, 0.85, 0.1)
        fast = solve(A, A.astype(bool), params, SolveOpts(tol=1e-6))
        ref = solve(A, A.astype(bool), params, SolveOpts(tol=1e-9, max_iter=20000))
        assert fast.converged and ref.converged
        assert np.linalg.norm(fast.K - ref.K) < 1e-4

    def test_warm_start_reaches_same_solution(self):
        gt = make_ground_truth([15, 10])
        A = sample_full(gt, 0.9, 0.05, seed=4)
        params = params_full(25, 0.9, 0.05)
        cold = solve(A, A.astype(bool), params, SolveOpts(tol=1e-8, max_iter=5000))
        warm = solve(A, A.astype(bool), params, SolveOpts(tol=1e-8, max_iter=5000),
                     init=cold)
        assert warm.iterations <= cold.iterations
        assert np.linalg.norm(warm.K - cold.K) < 1e-5


class TestObjective:
    def test_noiseless_block_value(self):
        # single all-ones block of size m: nuclear norm m, no disagreement
        gt = make_ground_truth([7])
        A = sample_full(gt, 1.0, 0.0, seed=0)
        params = params_full(7, 1.0, 0.0)
        assert objective(A, A, params) == pytest.approx(7.0)

    def test_zero_solution_pays_edge_weight(self):
        gt = make_ground_truth([6, 4])
        A = sample_full(gt, 0.8, 0.2, seed=1)
        params = params_full(10, 0.8, 0.2)
        assert objective(A, np.zeros((10, 10)), params) == pytest.approx(
            params.w_edge * A.sum()
        )

    def test_matches_direct_recomputation(self):
        rng = np.random.default_rng(0)
        gt = make_ground_truth([12, 8])
        A = sample_full(gt, 0.7, 0.2, seed=2)
        params = params_full(20, 0.7, 0.2)
        K = rng.random((20, 20))
        K = (K + K.T) / 2
        edges = A != 0
        B = A - K
        direct = (
            np.abs(np.linalg.eigvalsh(K)).sum()
            + params.w_edge * np.abs(B[edges]).sum()
            + params.w_nonedge * np.abs(B[~edges]).sum()
        )
        assert objective(A, K, params) == pytest.approx(direct, rel=1e-12)
