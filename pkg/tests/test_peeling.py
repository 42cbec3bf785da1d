import numpy as np
import pytest

from peelclust.detect import match_to_ground_truth
from peelclust.peeling import (
    PeelOptions,
    Schedule,
    recover_big_full,
    recover_big_partial,
    recover_full,
    recover_partial,
    report_csv,
)
from peelclust.planted import make_ground_truth, make_oracle, sample_full
from peelclust.solver import Consts, SolveOpts

FAST = SolveOpts(tol=1e-5, max_iter=800, stall_window=3)


def simplified(**kw):
    kw.setdefault("solver", FAST)
    return PeelOptions(schedule=Schedule.SIMPLIFIED, **kw)


def theoretical(**kw):
    kw.setdefault("solver", FAST)
    return PeelOptions(schedule=Schedule.THEORETICAL, **kw)


def clusters_as_sets(clusters):
    return sorted(tuple(sorted(c)) for c in clusters)


class TestRecoverBigFull:
    def test_noiseless_single_cluster_first_knob(self):
        gt = make_ground_truth([12])
        A = sample_full(gt, 1.0, 0.0, seed=0)
        out = recover_big_full(A, 1.0, 0.0, simplified())
        assert out.clusters == (tuple(range(12)),)
        assert out.knob == 1.0
        assert out.attempts == 1

    def test_strong_planted_instance(self):
        gt = make_ground_truth([20, 15])
        A = sample_full(gt, 0.95, 0.02, seed=1)
        out = recover_big_full(A, 0.95, 0.02, simplified())
        assert clusters_as_sets(out.clusters) == [
            tuple(range(20)), tuple(range(20, 35))
        ]

    def test_all_singletons_exhausts_schedule(self):
        gt = make_ground_truth([1] * 30)
        for seed in (0, 1):
            A = sample_full(gt, 0.9, 0.1, seed=seed)
            out = recover_big_full(A, 0.9, 0.1, simplified())
            assert out.clusters == ()
            assert out.attempts >= 2

    def test_theoretical_schedule_on_noiseless(self):
        gt = make_ground_truth([16, 3])
        A = sample_full(gt, 1.0, 0.0, seed=0)
        opts = theoretical(k0=2, sound_k=0.05, sound_spec=0.05)
        out = recover_big_full(A, 1.0, 0.0, opts)
        assert out.clusters and set(out.clusters[0]) == set(range(16))
        assert out.sigma_ok


class TestRecoverFull:
    def test_single_cluster_no_leftover(self):
        gt = make_ground_truth([14])
        A = sample_full(gt, 1.0, 0.0, seed=0)
        clusters, report = recover_full(A, 1.0, 0.0, simplified())
        assert len(report.rounds) == 1
        assert report.leftover == ()
        assert match_to_ground_truth(
            _pc(gt.n, clusters), gt
        ) is not None

    def test_two_scale_peel(self):
        # a large and a small cluster: the small one is recovered only
        # after the large one is removed
        gt = make_ground_truth([40, 6])
        A = sample_full(gt, 1.0, 0.0, seed=0)
        clusters, report = recover_full(A, 0.99, 0.01, simplified())
        assert clusters_as_sets(clusters) == [tuple(range(40)), tuple(range(40, 46))]
        assert [r.nodes_before for r in report.rounds][0] == 46

    def test_empty_input(self):
        clusters, report = recover_full(np.zeros((0, 0)), 0.9, 0.1, simplified(),
                                        nodes=[])
        assert clusters == [] and report.rounds == ()

    def test_ground_truth_purity(self):
        gt = make_ground_truth([25, 18, 10])
        A = sample_full(gt, 0.95, 0.02, seed=3)
        clusters, report = recover_full(A, 0.95, 0.02, simplified())
        for c in clusters:
            assert match_to_ground_truth(_pc(gt.n, [c]), gt) is not None

    def test_monotone_progress(self):
        gt = make_ground_truth([25, 18, 10])
        A = sample_full(gt, 0.95, 0.02, seed=4)
        _, report = recover_full(A, 0.95, 0.02, simplified())
        sizes = [r.nodes_before for r in report.rounds]
        assert sizes == sorted(sizes, reverse=True)
        assert len(set(sizes)) == len(sizes)


class TestRecoverBigPartial:
    def test_noiseless_oracle_recovers_early(self):
        gt = make_ground_truth([16])
        oracle = make_oracle(gt, 1.0, 0.0, seed=0)
        out = recover_big_partial(oracle, np.arange(16), 1, simplified(rate_step=0.1))
        assert out.clusters == (tuple(range(16)),)
        assert out.knob <= 1.0

    def test_fixed_rate_mode_single_attempt(self):
        gt = make_ground_truth([16])
        oracle = make_oracle(gt, 1.0, 0.0, seed=0)
        out = recover_big_partial(
            oracle, np.arange(16), 1, simplified(rate_fixed=0.9)
        )
        assert out.attempts == 1
        assert out.knob == 0.9

    @pytest.mark.parametrize("seed", range(10))
    def test_single_cluster_montecarlo(self, seed):
        # strong signal: recovery at a moderate rate in most seeds
        gt = make_ground_truth([30])
        oracle = make_oracle(gt, 0.98, 0.01, seed=seed)
        out = recover_big_partial(oracle, np.arange(30), 1, simplified(rate_step=0.1))
        assert out.clusters == (tuple(range(30)),)


class TestRecoverPartial:
    def test_two_round_peel_and_query_accounting(self):
        gt = make_ground_truth([40, 8])
        oracle = make_oracle(gt, 1.0, 0.0, seed=0)
        clusters, report = recover_partial(oracle, 2, simplified(rate_step=0.1))
        assert clusters_as_sets(clusters) == [tuple(range(40)), tuple(range(40, 48))]
        assert len(report.rounds) == 2
        queries = [r.queries for r in report.rounds]
        assert queries == sorted(queries)
        assert queries[-1] == oracle.query_count
        total_pairs = 48 * 47 / 2
        assert oracle.query_count <= total_pairs

    def test_budget_decrement_stops_recursion(self):
        gt = make_ground_truth([40, 8])
        oracle = make_oracle(gt, 1.0, 0.0, seed=0)
        clusters, report = recover_partial(oracle, 1, simplified(rate_step=0.1))
        assert len(report.rounds) == 1
        assert report.leftover == tuple(range(40, 48))

    def test_queries_concentrate_on_survivors(self):
        # after round one the surviving nodes' pairs are observed at a rate
        # at least as high as the removed nodes' pairs
        gt = make_ground_truth([40, 10])
        oracle = make_oracle(gt, 0.95, 0.02, seed=1)
        clusters, report = recover_partial(oracle, 2, simplified(rate_step=0.05))
        assert len(report.rounds) >= 2
        removed = sorted(v for c in [report.rounds[0].clusters[0]] for v in c)
        survivors = sorted(set(range(50)) - set(removed))
        obs = oracle._observed
        def rate(ids):
            sub = obs[np.ix_(ids, ids)]
            m = len(ids)
            return np.triu(sub, 1).sum() / (m * (m - 1) / 2)
        assert rate(survivors) >= rate(removed) - 1e-9

    def test_bad_budget_rejected(self):
        gt = make_ground_truth([10])
        oracle = make_oracle(gt, 0.9, 0.1, seed=0)
        with pytest.raises(ValueError):
            recover_partial(oracle, 0, simplified())


class TestScheduleSoundness:
    def test_simplified_acceptance_implies_detection(self):
        # whatever SIMPLIFIED accepts must be a genuine partial clustering,
        # and the soundness margin is recorded on the round
        gt = make_ground_truth([30, 20])
        A = sample_full(gt, 0.95, 0.02, seed=7)
        out = recover_big_full(A, 0.95, 0.02, simplified())
        assert out.clusters
        assert out.sigma_ok is not None


class TestReportCsv:
    def test_columns_and_labels(self):
        gt = make_ground_truth([14, 6])
        A = sample_full(gt, 1.0, 0.0, seed=0)
        clusters, report = recover_full(A, 0.99, 0.01, simplified())
        text = report_csv(report)
        lines = text.strip().splitlines()
        assert lines[0] == "step,knob,nodes_left,clusters_recovered,queries_cumulative"
        assert lines[1].startswith("1,1,20,")


def _pc(n, clusters):
    from peelclust.detect import PartialClustering

    return PartialClustering(n=n, clusters=tuple(tuple(c) for c in clusters))
