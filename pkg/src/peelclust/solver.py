"""Weight selection and the splitting solver for the penalized decomposition.

The convex program solved here splits a 0/1 adjacency matrix ``A`` into a
cluster-pattern part ``K`` and a disagreement part ``B``:

    minimize   ||K||_*  +  w_edge * ||B restricted to edges||_1
                        +  w_nonedge * ||B off the edges||_1
    subject to K + B = A,   0 <= K_ij <= 1,

where "edges" is the support of ``A``.  At the right weights the unique
optimum is exactly the pattern of the big planted clusters, with every
sufficiently small cluster suppressed; scanning the weight scale (or, under
partial observation, the sampling rate) is what drives the peeling loop.

The solver is a two-block ADMM on an auxiliary copy ``J`` of ``K``: the
``J`` update is singular value thresholding, the ``K`` update decouples
entrywise into a box-constrained weighted soft threshold with a closed
form, and the dual ascent keeps ``J = K`` in the limit.  Only the SVT step
needs an eigensolve, so one iteration costs one dense symmetric
eigendecomposition plus elementwise work.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .matcore import _eigh_descending, nuclear_norm, spectral_norm

__all__ = [
    "Consts",
    "PartialConsts",
    "SolveParams",
    "SolveOpts",
    "Solution",
    "NumericsError",
    "params_full",
    "params_partial",
    "solve",
    "objective",
    "diagnostics_csv",
]


class NumericsError(ArithmeticError):
    """The iteration produced non-finite values."""


@dataclass(frozen=True)
class Consts:
    """Tunable constants of the full-observation weight formulas.

    The recovery guarantees only assert that suitable universal values
    exist; these defaults are engineering choices and every experiment
    config may override them.
    """

    w_scale: float = 1.0      # multiplier on both entrywise weights
    big_scale: float = 1.0    # multiplier on the big-cluster size cutoff
    small_scale: float = 1.0  # multiplier on the small-cluster size cutoff


@dataclass(frozen=True)
class PartialConsts:
    """Constants of the partial-observation formulas; functions of the
    underlying edge probabilities."""

    w_scale: float
    big_scale: float
    small_scale: float
    mix_rate: float  # maps sampling rate to the weighting split point

    @classmethod
    def from_probs(cls, p, q, base=None):
        """Default mapping from the full-observation constants, chosen so
        that rate 1 reproduces ``params_full`` at scale 1 exactly."""
        base = base or Consts()
        factor = math.sqrt(p * (1.0 - q)) / (p - q)
        return cls(
            w_scale=base.w_scale,
            big_scale=base.big_scale * factor,
            small_scale=base.small_scale * factor,
            mix_rate=p / 4.0 + 3.0 * q / 4.0,
        )


@dataclass(frozen=True)
class SolveParams:
    """Effective probabilities, weighting, and the two size cutoffs."""

    n: int
    p: float            # effective within-cluster edge probability
    q: float            # effective cross-cluster edge probability
    mix: float          # weighting split point between q and p
    scale: float        # the multiplicative knob on both cutoffs
    w_edge: float       # weight on disagreements at 1-entries of A
    w_nonedge: float    # weight at 0-entries of A
    big_cutoff: float   # size at/above which a cluster counts as big
    small_cutoff: float  # size at/below which a cluster counts as small
    consts: Consts = field(default_factory=Consts)


def _mix_bounds(p, q):
    return p / 4.0 + 3.0 * q / 4.0, 3.0 * p / 4.0 + q / 4.0


def params_full(n, p, q, mix=None, scale=1.0, consts=None):
    """Weights and cutoffs for the fully observed regime.

    ``mix`` defaults to the low end of its admissible range,
    ``p/4 + 3q/4``.  ``scale`` (>= 1) multiplies both size cutoffs and
    divides both weights; growing it asks the program to keep only ever
    larger clusters.
    """
    consts = consts or Consts()
    if n < 2:
        raise ValueError(f"need at least 2 nodes, got n={n}")
    if not (0.0 <= q < p <= 1.0):
        raise ValueError(f"requires 0 <= q < p <= 1, got p={p}, q={q}")
    if scale < 1.0:
        raise ValueError(f"scale must be >= 1, got {scale}")
    lo, hi = _mix_bounds(p, q)
    if mix is None:
        mix = lo
    if not (lo - 1e-12 <= mix <= hi + 1e-12):
        raise ValueError(f"mix={mix} outside the admissible range [{lo}, {hi}]")
    ln = math.log(n)
    root = math.sqrt(p * (1.0 - q) * n) / (p - q)
    base_w = consts.w_scale / (scale * math.sqrt(n * ln))
    return SolveParams(
        n=n,
        p=p,
        q=q,
        mix=mix,
        scale=scale,
        w_edge=base_w * math.sqrt((1.0 - mix) / mix),
        w_nonedge=base_w * math.sqrt(mix / (1.0 - mix)),
        big_cutoff=consts.big_scale * scale * root * ln * ln,
        small_cutoff=consts.small_scale * scale * root,
        consts=consts,
    )


def params_partial(n, rate, p_prime, q_prime, consts=None):
    """Weights and cutoffs for the zero-filled partially observed regime.

    Observing each pair independently with probability ``rate`` and
    zero-filling emulates full observation with effective probabilities
    ``rate*p_prime`` and ``rate*q_prime``; the weighting split point
    scales accordingly (``mix = mix_rate * rate``) and the size cutoffs
    grow like ``1/sqrt(rate)``, so the rate itself becomes the knob.
    """
    if not (0.0 <= q_prime < p_prime <= 1.0):
        raise ValueError(
            f"requires 0 <= q' < p' <= 1, got p'={p_prime}, q'={q_prime}"
        )
    if not (0.0 < rate <= 1.0):
        raise ValueError(f"sampling rate must be in (0, 1], got {rate}")
    if n < 2:
        raise ValueError(f"need at least 2 nodes, got n={n}")
    consts = consts or PartialConsts.from_probs(p_prime, q_prime)
    mix = consts.mix_rate * rate
    if not (0.0 < mix < 1.0):
        raise ValueError(f"mix_rate {consts.mix_rate} gives invalid mix {mix}")
    ln = math.log(n)
    base_w = consts.w_scale / math.sqrt(n * ln)
    root = math.sqrt(n / rate)
    return SolveParams(
        n=n,
        p=rate * p_prime,
        q=rate * q_prime,
        mix=mix,
        scale=1.0,
        w_edge=base_w * math.sqrt((1.0 - mix) / mix),
        w_nonedge=base_w * math.sqrt(mix / (1.0 - mix)),
        big_cutoff=consts.big_scale * root * ln * ln,
        small_cutoff=consts.small_scale * root,
        consts=Consts(consts.w_scale, consts.big_scale, consts.small_scale),
    )


@dataclass(frozen=True)
class SolveOpts:
    """Solver knobs.  The penalty starts at ``1/||A||_2`` unless given and
    grows by ``penalty_growth`` once ``stall_window`` iterations in a row
    fail to shrink the primal residual by ``stall_ratio``."""

    tol: float = 1e-6
    max_iter: int = 2000
    penalty: float = None
    penalty_growth: float = 1.5
    stall_window: int = 10
    stall_ratio: float = 0.99
    penalty_cap: float = 1e6   # cap on mu as a multiple of its start value
    track: bool = False        # record per-iteration diagnostics


@dataclass(eq=False)
class Solution:
    """Solver output.  ``B`` is stored as ``A - K`` so the equality
    constraint holds exactly."""

    K: np.ndarray
    B: np.ndarray
    objective: float
    iterations: int
    primal_residual: float
    dual_residual: float
    converged: bool
    mu: float
    diagnostics: list = None
    _state: tuple = field(default=None, repr=False)


def _split_weights(edge_mask, params):
    return np.where(edge_mask, params.w_edge, params.w_nonedge)


def solve(A, edge_mask, params, opts=None, init=None):
    """Solve the penalized decomposition of a 0/1 matrix ``A``.

    ``edge_mask`` must equal the support of ``A``.  Returns a
    :class:`Solution` whose ``K`` is exactly symmetric and box-feasible;
    non-convergence within ``max_iter`` is reported through
    ``converged=False`` rather than raised, leaving the decision to the
    caller.  ``init`` may carry the ``_state`` of a previous solution on
    the same node set to warm start an incremental re-solve.
    """
    opts = opts or SolveOpts()
    A = np.asarray(A, dtype=float)
    edge_mask = np.asarray(edge_mask, dtype=bool)
    n = A.shape[0]
    if not ((A == 0.0) | (A == 1.0)).all():
        raise ValueError("A must be a 0/1 matrix")
    if not np.array_equal(edge_mask, A != 0.0):
        raise ValueError("edge_mask must equal the support of A")

    W = _split_weights(edge_mask, params)
    fro_A = np.linalg.norm(A)
    threshold = opts.tol * fro_A

    mu0 = opts.penalty if opts.penalty is not None else 1.0 / spectral_norm(A, 1e-3)
    mu_cap = opts.penalty_cap * mu0
    if init is not None and getattr(init, "_state", None) is not None:
        K, J, Y = (part.copy() for part in init._state[:3])
        mu = max(init._state[3], mu0)
    else:
        K = A.copy()
        J = np.zeros_like(A)
        Y = np.zeros_like(A)
        mu = mu0

    rows = [] if opts.track else None
    primal = np.inf
    dual = np.inf
    prev_primal = None
    stalled = 0
    it = 0
    converged = False
    dual_history = []
    for it in range(1, opts.max_iter + 1):
        w, V = _eigh_descending(K + Y / mu)
        shrunk = np.sign(w) * np.maximum(np.abs(w) - 1.0 / mu, 0.0)
        nz = shrunk != 0.0
        J_prev = J
        if nz.any():
            Vk = V[:, nz]
            J = (Vk * shrunk[nz]) @ Vk.T
            J = (J + J.T) / 2.0
        else:
            J = np.zeros_like(A)
        dual = mu * np.linalg.norm(J - J_prev)

        D = (J - Y / mu) - A
        K = A + np.sign(D) * np.maximum(np.abs(D) - W / mu, 0.0)
        np.clip(K, 0.0, 1.0, out=K)

        R = K - J
        primal = float(np.linalg.norm(R))
        if not np.isfinite(primal) or not np.isfinite(dual):
            raise NumericsError(f"non-finite iterate at iteration {it} (mu={mu:g})")
        Y = Y + mu * R

        if rows is not None:
            Babs = np.abs(A - K)
            obj = (
                float(np.abs(shrunk).sum())
                + params.w_edge * float(Babs[edge_mask].sum())
                + params.w_nonedge * float(Babs[~edge_mask].sum())
            )
            rows.append((it, obj, primal, dual, mu))

        # near the optimum the iterates contract linearly; dividing the dual
        # residual (one step of J-movement) by the contraction gap bounds the
        # remaining distance, so tol controls solution accuracy rather than
        # just step size
        dual_history.append(dual)
        if len(dual_history) > 6:
            dual_history.pop(0)
        rate = 0.0
        if len(dual_history) == 6 and all(d > 0 for d in dual_history):
            ratios = [b / a for a, b in zip(dual_history, dual_history[1:])]
            rate = min(max(np.median(ratios), 0.0), 0.999)
        if max(primal, dual / (1.0 - rate)) < threshold:
            converged = True
            break

        # growing mu speeds up primal feasibility but shrinks the J steps,
        # so only grow while the primal residual is the binding one
        if prev_primal is not None and primal > opts.stall_ratio * prev_primal:
            stalled += 1
            if stalled >= opts.stall_window:
                if primal >= dual:
                    mu = min(mu * opts.penalty_growth, mu_cap)
                stalled = 0
        else:
            stalled = 0
        prev_primal = primal

    K = np.clip((K + K.T) / 2.0, 0.0, 1.0)
    B = A - K
    return Solution(
        K=K,
        B=B,
        objective=objective(A, K, params, edge_mask),
        iterations=it,
        primal_residual=primal,
        dual_residual=dual,
        converged=converged,
        mu=mu,
        diagnostics=rows,
        _state=(K, J, Y, mu),
    )


def objective(A, K, params, edge_mask=None):
    """Objective value of the decomposition at ``(K, A - K)``."""
    A = np.asarray(A, dtype=float)
    K = np.asarray(K, dtype=float)
    if edge_mask is None:
        edge_mask = A != 0.0
    Babs = np.abs(A - K)
    return (
        nuclear_norm(K)
        + params.w_edge * float(Babs[edge_mask].sum())
        + params.w_nonedge * float(Babs[~edge_mask].sum())
    )


def diagnostics_csv(rows):
    """Render tracked per-iteration diagnostics as CSV text.

    The objective column is evaluated on the running split (nuclear part
    from the thresholded factor), which coincides with the true objective
    at convergence.
    """
    lines = ["iteration,objective,primal_residual,dual_residual,mu"]
    for it, obj, primal, dual, mu in rows:
        lines.append(f"{it},{obj!r},{primal!r},{dual!r},{mu!r}")
    return "\n".join(lines) + "\n"
