"""Iterative peeling: recover big clusters, remove them, recurse.

One round scans the knob (weight scale under full observation, sampling
rate under partial observation) until the solved ``K`` is a partial
clustering matrix; the induced clusters are then removed and the next
round runs on the principal minor of the survivors.  Two knob schedules
are provided:

* THEORETICAL walks the big-cluster cutoff down from ``|V|`` by the
  multiplicative gap between the two cutoffs and enforces the soundness
  threshold on the smallest recovered cluster.
* SIMPLIFIED starts the knob at its smallest value and grows it
  (multiplicatively for the scale, additively for the rate) until a
  partial clustering appears; the soundness margin is logged but not
  enforced, since the threshold constants are configuration knobs rather
  than known values.

In partial-observation mode later rounds sample only among surviving
nodes, so queries concentrate on the smaller clusters as the big ones are
learned and removed.
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .detect import (
    detect_partial_clustering,
    min_cluster_size,
    partial_soundness_consts,
    soundness_threshold_full,
    soundness_threshold_partial,
)
from .planted import zero_fill
from .solver import Consts, PartialConsts, SolveOpts, params_full, params_partial, solve

__all__ = [
    "Schedule",
    "PeelOptions",
    "RoundRecord",
    "PeelReport",
    "recover_big_full",
    "recover_full",
    "recover_big_partial",
    "recover_partial",
    "report_csv",
]


class Schedule(Enum):
    THEORETICAL = "theoretical"
    SIMPLIFIED = "simplified"


@dataclass(frozen=True)
class PeelOptions:
    schedule: Schedule = Schedule.SIMPLIFIED
    scale_growth: float = 1.1      # multiplicative knob growth, full observation
    rate_step: float = 0.025       # additive knob growth, partial observation
    rate_fixed: float = None       # fixed sampling rate mode (no rate ladder)
    k0: int = None                 # prior bound on the number of clusters
    consts: Consts = field(default_factory=Consts)
    partial_consts: PartialConsts = None  # derived from consts and (p', q') if None
    sound_k: float = 1.0
    sound_spec: float = 1.0
    detect_tol: float = 0.1
    include_singletons: bool = False
    solver: SolveOpts = field(default_factory=SolveOpts)
    warm_ladder: bool = True       # warm start consecutive rate-ladder solves

    def __post_init__(self):
        if self.scale_growth <= 1.0:
            raise ValueError(f"scale_growth must exceed 1, got {self.scale_growth}")
        if not (0.0 < self.rate_step < 1.0) and self.rate_fixed is None:
            raise ValueError(f"rate_step must be in (0, 1), got {self.rate_step}")


@dataclass(frozen=True)
class RoundRecord:
    step: int
    knob: float
    nodes_before: int
    clusters: tuple      # tuples of global node ids
    iterations: int      # solver iterations summed over the round's attempts
    attempts: int
    queries: int = None  # cumulative oracle queries (partial mode only)
    sigma_ok: bool = None  # smallest recovered cluster cleared the soundness bar


@dataclass(frozen=True)
class PeelReport:
    rounds: tuple
    leftover: tuple


@dataclass(frozen=True)
class _RoundOutcome:
    clusters: tuple      # local indices
    knob: float
    iterations: int
    attempts: int
    sigma_ok: bool = None


_EMPTY = _RoundOutcome(clusters=(), knob=float("nan"), iterations=0, attempts=0)


def _k_bound(opts, k_recovered):
    # the true number of clusters is unknown at runtime; fall back to the
    # count recovered so far plus one when no prior bound was supplied
    return opts.k0 if opts.k0 is not None else k_recovered + 1


def recover_big_full(A, p, q, opts=None, k_recovered=0):
    """One knob-scan round on a fully observed matrix.

    Returns a :class:`_RoundOutcome` whose ``clusters`` are index tuples
    into ``A`` (empty when the schedule exhausts without an accepted
    partial clustering).
    """
    opts = opts or PeelOptions()
    n = A.shape[0]
    if n < 2:
        return _EMPTY
    edge_mask = A != 0.0
    kb = _k_bound(opts, k_recovered)

    if opts.schedule is Schedule.SIMPLIFIED:
        return _scan_scale_simplified(A, edge_mask, p, q, opts, kb)
    return _scan_scale_theoretical(A, edge_mask, p, q, opts, kb)


def _accept(sol, opts):
    pc = detect_partial_clustering(
        sol.K, opts.detect_tol, include_singletons=opts.include_singletons
    )
    if pc is None or not pc.clusters:
        return None
    return pc


def _scan_scale_simplified(A, edge_mask, p, q, opts, kb):
    n = A.shape[0]
    # past this scale the small-cluster cutoff exceeds |V|: nothing could
    # qualify as big, so the scan is over
    cap = n * (p - q) / (opts.consts.small_scale * math.sqrt(p * (1.0 - q) * n))
    scale = 1.0
    iters = 0
    attempts = 0
    while scale <= cap + 1e-12 or attempts == 0:
        params = params_full(n, p, q, scale=scale, consts=opts.consts)
        sol = solve(A, edge_mask, params, opts.solver)
        iters += sol.iterations
        attempts += 1
        pc = _accept(sol, opts)
        if pc is not None:
            thr = soundness_threshold_full(
                n, kb, p, q, scale, opts.sound_k, opts.sound_spec
            )
            return _RoundOutcome(
                clusters=pc.clusters,
                knob=scale,
                iterations=iters,
                attempts=attempts,
                sigma_ok=min_cluster_size(pc) >= thr,
            )
        scale *= opts.scale_growth
    return _RoundOutcome((), scale, iters, attempts)


def _scan_scale_theoretical(A, edge_mask, p, q, opts, kb):
    n = A.shape[0]
    ln = math.log(n)
    gap = (opts.consts.big_scale / opts.consts.small_scale) * ln * ln
    if gap <= 1.0:
        raise ValueError(f"cutoff gap {gap:g} must exceed 1 for the cutoff ladder")
    floor = soundness_threshold_full(n, kb, p, q, 1.0, opts.sound_k, opts.sound_spec)
    big = n / opts.k0 if opts.k0 else float(n)
    iters = 0
    attempts = 0
    while big >= floor:
        raw = big * (p - q) / (opts.consts.big_scale * math.sqrt(p * (1.0 - q) * n) * ln * ln)
        scale = max(raw, 1.0)  # the weight formulas require scale >= 1
        params = params_full(n, p, q, scale=scale, consts=opts.consts)
        sol = solve(A, edge_mask, params, opts.solver)
        iters += sol.iterations
        attempts += 1
        pc = _accept(sol, opts)
        if pc is not None:
            thr = max(
                big,
                soundness_threshold_full(n, kb, p, q, scale, opts.sound_k, opts.sound_spec),
            )
            if min_cluster_size(pc) >= thr:
                return _RoundOutcome(pc.clusters, scale, iters, attempts, sigma_ok=True)
        big /= gap
    return _RoundOutcome((), float("nan"), iters, attempts)


def recover_full(A, p, q, opts=None, nodes=None):
    """Full peeling on a fully observed matrix.

    Returns ``(clusters, report)`` with clusters as tuples of global node
    ids and a round-by-round report; the leftover set collects nodes never
    recovered.
    """
    opts = opts or PeelOptions()
    A = np.asarray(A, dtype=float)
    ids = np.arange(A.shape[0]) if nodes is None else np.sort(np.asarray(nodes, int))
    rounds = []
    found = []
    step = 1
    while ids.size >= 2:
        sub = A[np.ix_(ids, ids)]
        out = recover_big_full(sub, p, q, opts, k_recovered=len(found))
        if not out.clusters:
            break
        global_clusters = tuple(
            tuple(int(v) for v in ids[list(c)]) for c in out.clusters
        )
        rounds.append(
            RoundRecord(
                step=step,
                knob=out.knob,
                nodes_before=int(ids.size),
                clusters=global_clusters,
                iterations=out.iterations,
                attempts=out.attempts,
                sigma_ok=out.sigma_ok,
            )
        )
        found.extend(global_clusters)
        removed = np.concatenate([np.asarray(c) for c in global_clusters])
        ids = np.setdiff1d(ids, removed)
        step += 1
    report = PeelReport(rounds=tuple(rounds), leftover=tuple(int(v) for v in ids))
    return found, report


def _rate_ladder(opts, n, k0):
    if opts.rate_fixed is not None:
        return [float(opts.rate_fixed)]
    if opts.schedule is Schedule.SIMPLIFIED:
        values = []
        s = 1
        while True:
            r = s * opts.rate_step
            if r >= 1.0 - 1e-12:
                values.append(1.0)
                break
            values.append(r)
            s += 1
        return values
    ln = math.log(n)
    pq = opts.partial_consts
    gap = (pq.big_scale / pq.small_scale) * ln * ln
    rate0 = pq.big_scale**2 * k0**2 * ln**4 / n
    values = []
    for s in range(k0 + 1):
        r = min(rate0 * gap**s, 1.0)
        values.append(r)
        if r >= 1.0:
            break
    return values


def recover_big_partial(oracle, nodes, k0, opts=None, k_recovered=0):
    """One rate-ladder round against the observation oracle, restricted to
    ``nodes``.  Observations accumulate in the oracle across rungs and
    across rounds."""
    opts = opts or PeelOptions()
    nodes = np.sort(np.asarray(nodes, dtype=int))
    n = nodes.size
    if n < 2:
        return _EMPTY
    if opts.partial_consts is None:
        opts = _with_partial_consts(opts, oracle)
    kb = opts.k0 if opts.k0 is not None else (k0 if k0 else k_recovered + 1)
    sk, ss = partial_soundness_consts(oracle.p, oracle.q, opts.sound_k, opts.sound_spec)

    iters = 0
    attempts = 0
    prev_sol = None
    for rate in _rate_ladder(opts, n, k0):
        po = oracle.sample_to_rate(rate, nodes)
        A, edge_mask = zero_fill(po)
        params = params_partial(n, rate, oracle.p, oracle.q, opts.partial_consts)
        init = prev_sol if opts.warm_ladder else None
        sol = solve(A, edge_mask, params, opts.solver, init=init)
        prev_sol = sol
        iters += sol.iterations
        attempts += 1
        pc = _accept(sol, opts)
        if pc is not None:
            thr = soundness_threshold_partial(n, kb, rate, sk, ss)
            sigma_ok = min_cluster_size(pc) >= thr
            if opts.schedule is Schedule.THEORETICAL and not sigma_ok:
                continue
            return _RoundOutcome(pc.clusters, rate, iters, attempts, sigma_ok=sigma_ok)
    return _RoundOutcome((), float("nan"), iters, attempts)


def _with_partial_consts(opts, oracle):
    return replace(
        opts,
        partial_consts=PartialConsts.from_probs(oracle.p, oracle.q, opts.consts),
    )


def recover_partial(oracle, k0, opts=None, nodes=None):
    """Full peeling under partial observation.

    The cluster budget shrinks by the number recovered each round, and
    sampling in later rounds is restricted to surviving nodes.  Returns
    ``(clusters, report)``; round records carry the cumulative query
    count."""
    opts = opts or PeelOptions()
    if k0 < 1:
        raise ValueError(f"cluster budget k0 must be >= 1, got {k0}")
    if opts.partial_consts is None:
        opts = _with_partial_consts(opts, oracle)
    ids = np.arange(oracle.n) if nodes is None else np.sort(np.asarray(nodes, int))
    budget = k0
    rounds = []
    found = []
    step = 1
    while ids.size >= 2 and budget >= 1:
        out = recover_big_partial(oracle, ids, budget, opts, k_recovered=len(found))
        if not out.clusters:
            break
        global_clusters = tuple(
            tuple(int(v) for v in ids[list(c)]) for c in out.clusters
        )
        rounds.append(
            RoundRecord(
                step=step,
                knob=out.knob,
                nodes_before=int(ids.size),
                clusters=global_clusters,
                iterations=out.iterations,
                attempts=out.attempts,
                queries=oracle.query_count,
                sigma_ok=out.sigma_ok,
            )
        )
        found.extend(global_clusters)
        removed = np.concatenate([np.asarray(c) for c in global_clusters])
        ids = np.setdiff1d(ids, removed)
        budget -= len(global_clusters)
        step += 1
    report = PeelReport(rounds=tuple(rounds), leftover=tuple(int(v) for v in ids))
    return found, report


def _format_knob(value):
    return f"{value:g}"


def report_csv(report, names=None):
    """Serialize a peel report as CSV.

    Columns: step, knob, nodes_left, clusters_recovered, queries_cumulative.
    Clusters are rendered ``name(size)`` joined by ``;`` where ``names``
    maps a frozenset of node ids to a label (default ``c<i>`` in recovery
    order)."""
    lines = ["step,knob,nodes_left,clusters_recovered,queries_cumulative"]
    counter = 0
    for rec in report.rounds:
        labels = []
        for c in rec.clusters:
            if names is not None and frozenset(c) in names:
                label = names[frozenset(c)]
            else:
                label = f"c{counter}"
            counter += 1
            labels.append(f"{label}({len(c)})")
        queries = "" if rec.queries is None else str(rec.queries)
        lines.append(
            f"{rec.step},{_format_knob(rec.knob)},{rec.nodes_before},"
            f"{';'.join(labels)},{queries}"
        )
    return "\n".join(lines) + "\n"
