"""Bundled benchmark experiments.

Five fixed configurations exercise the full pipeline end to end: full
observation with the multiplicative knob, fixed-rate and incremental-rate
partial observation (one of them at a scale where the smallest recovered
clusters sit below sqrt(n)), and a single mid-size solve rendered as a
heatmap.  The weight constant below was calibrated empirically on these
configurations: the recovery guarantees only assert suitable constants
exist, so the bundled runs pin one that reproduces the expected peeling
tables across seeds.
"""

from dataclasses import dataclass, field

import numpy as np

from .detect import detect_partial_clustering
from .figures import save_heatmap_png, save_peel_png, write_pgm
from .peeling import (
    PeelOptions,
    Schedule,
    recover_full,
    recover_partial,
    report_csv,
)
from .planted import make_ground_truth, make_oracle, sample_full, zero_fill
from .solver import Consts, SolveOpts, params_partial, solve

__all__ = ["ExperimentSpec", "EXPERIMENTS", "run_experiment", "table_csv"]

# Calibrated weight multiplier shared by the bundled experiments.
_WEIGHT_CONST = 0.8

# The experiment solves only need enough accuracy for the 0.1-rounding
# detector, and a short stall window keeps the penalty ramp quick.
_EXP_SOLVER = SolveOpts(tol=1e-5, max_iter=2000, stall_window=3)


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    sizes: tuple
    mode: str                  # full | fixed-rate | incremental | single-solve
    p: float
    q: float
    rate: float = None         # fixed sampling rate, or the single-solve rate
    rate_step: float = 0.025
    k0: int = None
    consts: Consts = field(default_factory=lambda: Consts(w_scale=_WEIGHT_CONST))
    solver: SolveOpts = _EXP_SOLVER
    slow: bool = False


EXPERIMENTS = {
    "1": ExperimentSpec(
        name="full observation",
        sizes=(800, 200, 80, 20),
        mode="full",
        p=0.5,
        q=0.2,
    ),
    "2": ExperimentSpec(
        name="partial observation, fixed sampling rate",
        sizes=(800, 200, 50, 50),
        mode="fixed-rate",
        p=0.7,
        q=0.1,
        rate=0.3,
        k0=4,
    ),
    "3": ExperimentSpec(
        name="partial observation, incremental sampling rate",
        sizes=(800, 200, 50, 50),
        mode="incremental",
        p=0.7,
        q=0.3,
        k0=4,
    ),
    "3a": ExperimentSpec(
        name="incremental sampling, clusters below sqrt(n)",
        sizes=(3200, 800, 200, 200, 50, 50),
        mode="incremental",
        p=0.8,
        q=0.2,
        k0=6,
        slow=True,
    ),
    "4": ExperimentSpec(
        name="mid-size cluster heatmap",
        sizes=(500, 150, 70, 30),
        mode="single-solve",
        p=0.8,
        q=0.2,
        rate=0.12,
    ),
}


def cluster_names(gt):
    """Table labels V1..Vk for the ground-truth clusters (largest first)."""
    return {
        frozenset(gt.cluster_nodes(c).tolist()): f"V{c + 1}" for c in range(gt.k)
    }


def table_csv(report, gt):
    """Peel report in the four-column table format:
    step,knob,nodes_left,clusters_recovered."""
    names = cluster_names(gt)
    lines = ["step,knob,nodes_left,clusters_recovered"]
    for rec in report.rounds:
        labels = []
        for c in rec.clusters:
            label = names.get(frozenset(c), "?")
            labels.append(f"{label}({len(c)})")
        lines.append(
            f"{rec.step},{rec.knob:g},{rec.nodes_before},{';'.join(labels)}"
        )
    return "\n".join(lines) + "\n"


def _peel_options(spec):
    common = dict(
        schedule=Schedule.SIMPLIFIED,
        consts=spec.consts,
        solver=spec.solver,
        rate_step=spec.rate_step,
        k0=spec.k0,
    )
    if spec.mode == "fixed-rate":
        common["rate_fixed"] = spec.rate
    return PeelOptions(**common)


def run_experiment(exp_id, seed, outdir=None):
    """Run one bundled experiment.

    Returns a dict with the ground truth, recovered clusters, and the peel
    report (or the solved matrix for the single-solve experiment); when
    ``outdir`` is given the standard artifacts are written there.
    """
    spec = EXPERIMENTS[str(exp_id)]
    gt = make_ground_truth(spec.sizes)

    if spec.mode == "single-solve":
        oracle = make_oracle(gt, spec.p, spec.q, seed)
        po = oracle.sample_to_rate(spec.rate)
        A, edge_mask = zero_fill(po)
        params = params_partial(gt.n, spec.rate, spec.p, spec.q,
                                _partial_consts(spec))
        sol = solve(A, edge_mask, params, spec.solver)
        pc = detect_partial_clustering(sol.K)
        if outdir is not None:
            write_pgm(sol.K, f"{outdir}/heatmap.pgm")
            save_heatmap_png(sol.K, f"{outdir}/heatmap.png",
                             title=f"experiment {exp_id}, seed {seed}")
            clusters = "" if pc is None else _label_clusters(pc, gt)
            with open(f"{outdir}/report.csv", "w") as fh:
                fh.write("step,knob,nodes_left,clusters_recovered\n")
                fh.write(f"1,{spec.rate:g},{gt.n},{clusters}\n")
        return {"gt": gt, "solution": sol, "detected": pc}

    if spec.mode == "full":
        A = sample_full(gt, spec.p, spec.q, seed)
        clusters, report = recover_full(A, spec.p, spec.q, _peel_options(spec))
        queries = None
    else:
        oracle = make_oracle(gt, spec.p, spec.q, seed)
        clusters, report = recover_partial(oracle, spec.k0, _peel_options(spec))
        queries = oracle.query_count

    if outdir is not None:
        with open(f"{outdir}/report.csv", "w") as fh:
            fh.write(table_csv(report, gt))
        with open(f"{outdir}/rounds.csv", "w") as fh:
            fh.write(report_csv(report, names=cluster_names(gt)))
        save_peel_png(report, f"{outdir}/peel.png",
                      title=f"experiment {exp_id}, seed {seed}")
    return {"gt": gt, "clusters": clusters, "report": report, "queries": queries}


def _partial_consts(spec):
    from .solver import PartialConsts

    return PartialConsts.from_probs(spec.p, spec.q, spec.consts)


def _label_clusters(pc, gt):
    names = cluster_names(gt)
    return ";".join(
        f"{names.get(frozenset(c), '?')}({len(c)})" for c in pc.clusters
    )
