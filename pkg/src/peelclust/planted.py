"""Planted-partition instances and the observation oracle.

The generator plants a clustering over ``n`` nodes and draws a symmetric
0/1 adjacency matrix with within-cluster edge probability ``p`` and
cross-cluster probability ``q < p``.  The oracle variant hides the full
draw and reveals entries on demand, with query accounting, so the
active-sampling recovery loop can be simulated faithfully.

Diagonal convention: ``A(i, i) = 1`` always.  A node trivially relates to
itself, so the diagonal carries no randomness; fixing it to one keeps the
disagreement part ``A - K*`` zero on the diagonal.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "UNOBSERVED",
    "ZERO",
    "ONE",
    "GroundTruth",
    "PartialObservation",
    "ObservationOracle",
    "make_ground_truth",
    "sample_full",
    "make_oracle",
    "sample_to_rate",
    "zero_fill",
    "write_instance",
    "read_instance",
]

UNOBSERVED = -1
ZERO = 0
ONE = 1


@dataclass(frozen=True)
class GroundTruth:
    """The planted clustering: sizes in canonical (descending) order and the
    node-to-cluster assignment under the canonical contiguous ordering."""

    sizes: tuple
    assign: np.ndarray

    @property
    def n(self):
        return int(self.assign.size)

    @property
    def k(self):
        return len(self.sizes)

    def cluster_nodes(self, c):
        """Node ids of cluster ``c`` (0-based, largest cluster first)."""
        return np.flatnonzero(self.assign == c)

    def clustering_matrix(self):
        """The block-diagonal 0/1 matrix with 1 exactly on same-cluster pairs."""
        a = self.assign
        return (a[:, None] == a[None, :]).astype(float)


def make_ground_truth(sizes):
    """Plant a clustering with the given cluster sizes.

    Clusters are relabeled into canonical order: blocks contiguous, sizes
    descending, so cluster 0 is always the largest.
    """
    sizes = [int(s) for s in sizes]
    if not sizes:
        raise ValueError("at least one cluster size is required")
    if any(s < 1 for s in sizes):
        raise ValueError(f"cluster sizes must be positive, got {sizes}")
    ordered = tuple(sorted(sizes, reverse=True))
    assign = np.repeat(np.arange(len(ordered)), ordered)
    return GroundTruth(sizes=ordered, assign=assign)


def _check_probs(p, q):
    if not (0.0 <= q < p <= 1.0):
        raise ValueError(
            f"planted model requires p > q (and both in [0, 1]), got p={p}, q={q}"
        )


def sample_full(gt, p, q, seed, probs=None):
    """Draw the full adjacency matrix of a planted instance.

    Entries on the upper triangle are independent Bernoulli draws,
    probability ``p`` on same-cluster pairs and ``q`` otherwise, mirrored
    to the lower triangle; the diagonal is 1.  ``probs`` optionally
    replaces the uniform p/q rule with an explicit per-pair probability
    matrix (the heterogeneous extension); it must still dominate q on
    same-cluster pairs for the recovery theory to apply, which is not
    enforced here.
    """
    _check_probs(p, q)
    n = gt.n
    if probs is None:
        same = gt.assign[:, None] == gt.assign[None, :]
        probs = np.where(same, p, q)
    else:
        probs = np.asarray(probs, dtype=float)
        if probs.shape != (n, n):
            raise ValueError(f"probs must be {n}x{n}, got {probs.shape}")
    rng = np.random.default_rng(seed)
    u = rng.random((n, n))
    upper = np.triu(u < probs, k=1)
    A = upper.astype(float)
    A += A.T
    np.fill_diagonal(A, 1.0)
    return A


@dataclass(frozen=True)
class PartialObservation:
    """A cumulative partially observed view of an instance, restricted to a
    node subset.  ``state`` is indexed by position within ``nodes`` and
    holds ONE / ZERO / UNOBSERVED; the diagonal is always ONE by the
    package convention."""

    nodes: np.ndarray
    state: np.ndarray
    query_count: int

    @property
    def n(self):
        return int(self.nodes.size)

    @property
    def observed(self):
        return self.state != UNOBSERVED


class ObservationOracle:
    """Oracle access to a single hidden draw of a planted instance.

    The complete adjacency matrix is drawn once at construction; queries
    only ever reveal entries of this fixed draw, so repeated or overlapping
    sampling is consistent.  Each unordered pair carries a fixed uniform
    variate; a pair is revealed once the requested cumulative rate passes
    its variate, which makes interleaved sampling of nested subsets
    equivalent to one-shot sampling at the final rate.

    Stateful: callers must serialize access.
    """

    def __init__(self, gt, p, q, seed):
        _check_probs(p, q)
        self.gt = gt
        self.p = float(p)
        self.q = float(q)
        self.seed = seed
        n = gt.n
        self._full = sample_full(gt, p, q, seed)
        reveal = np.random.default_rng([seed, 1]).random((n, n), dtype=np.float32)
        upper = np.triu(reveal, k=1)
        self._reveal = upper + upper.T
        np.fill_diagonal(self._reveal, 2.0)  # diagonal is never a query
        self._observed = np.zeros((n, n), dtype=bool)
        self._rates = {}
        self.query_count = 0

    @property
    def n(self):
        return self.gt.n

    def query(self, i, j):
        """Reveal one entry.  Counts a distinct unordered pair at most once;
        the diagonal is known a priori and never counted."""
        if i == j:
            return 1
        if not self._observed[i, j]:
            self._observed[i, j] = self._observed[j, i] = True
            self.query_count += 1
        return int(self._full[i, j])

    def sample_to_rate(self, rate, subset=None):
        """Observe each unordered pair within ``subset`` with cumulative
        probability ``rate``.

        Previously observed pairs are retained.  The rate for a given
        subset may only grow across calls (observation is monotone);
        a fresh subset starts from rate 0 but inherits any observations
        its pairs already received through other subsets.
        """
        if not (0.0 <= rate <= 1.0):
            raise ValueError(f"sampling rate must be in [0, 1], got {rate}")
        if subset is None:
            subset = np.arange(self.n)
        subset = np.unique(np.asarray(subset, dtype=int))
        key = frozenset(subset.tolist())
        prev = self._rates.get(key, 0.0)
        if rate < prev - 1e-12:
            raise ValueError(
                f"sampling rate for this subset may not decrease "
                f"(previously {prev}, requested {rate})"
            )
        self._rates[key] = max(prev, rate)

        ix = np.ix_(subset, subset)
        hit = self._reveal[ix] < rate
        already = self._observed[ix]
        new_pairs = int(np.count_nonzero(np.triu(hit & ~already, k=1)))
        self.query_count += new_pairs
        self._observed[ix] = already | hit
        return self._view(subset)

    def observation_view(self, subset=None):
        """Cumulative observations restricted to ``subset``, no new queries."""
        if subset is None:
            subset = np.arange(self.n)
        subset = np.unique(np.asarray(subset, dtype=int))
        return self._view(subset)

    def _view(self, subset):
        ix = np.ix_(subset, subset)
        obs = self._observed[ix]
        vals = self._full[ix]
        state = np.where(obs, vals.astype(np.int8), np.int8(UNOBSERVED))
        np.fill_diagonal(state, ONE)
        return PartialObservation(
            nodes=subset, state=state, query_count=self.query_count
        )


def make_oracle(gt, p_prime, q_prime, seed):
    """Build an observation oracle over a fresh hidden draw with edge
    probabilities (p_prime, q_prime)."""
    return ObservationOracle(gt, p_prime, q_prime, seed)


def sample_to_rate(oracle, rate, subset=None):
    """Module-level alias for :meth:`ObservationOracle.sample_to_rate`."""
    return oracle.sample_to_rate(rate, subset)


def zero_fill(po):
    """Zero-fill a partial observation.

    Returns ``(A, edge_mask)`` where unobserved and observed-zero entries
    are both 0, observed ones are 1, the diagonal is forced to 1, and
    ``edge_mask`` marks exactly the support of A (diagonal included).
    """
    A = (po.state == ONE).astype(float)
    np.fill_diagonal(A, 1.0)
    return A, A.astype(bool)


_STATE_CHARS = {ONE: "1", ZERO: "0", UNOBSERVED: "?"}
_CHAR_STATES = {"1": ONE, "0": ZERO, "?": UNOBSERVED}


def write_instance(path, gt, state, p, q, seed):
    """Write an instance in the plain-text replay format.

    Header line ``n k seed p q``, then the cluster sizes, then n rows of
    n characters from {0, 1, ?}.
    """
    state = np.asarray(state)
    n = gt.n
    if state.shape != (n, n):
        raise ValueError(f"state must be {n}x{n}, got {state.shape}")
    with open(path, "w") as fh:
        fh.write(f"{n} {gt.k} {seed} {p!r} {q!r}\n")
        fh.write(" ".join(str(s) for s in gt.sizes) + "\n")
        for row in state.astype(int):
            fh.write("".join(_STATE_CHARS[v] for v in row) + "\n")


def read_instance(path):
    """Read an instance written by :func:`write_instance`.

    Returns ``(gt, state, p, q, seed)`` with ``state`` an int8 matrix over
    {ONE, ZERO, UNOBSERVED}.
    """
    with open(path) as fh:
        head = fh.readline().split()
        if len(head) != 5:
            raise ValueError(f"malformed instance header: {head}")
        n, k, seed = int(head[0]), int(head[1]), int(head[2])
        p, q = float(head[3]), float(head[4])
        sizes = [int(s) for s in fh.readline().split()]
        if len(sizes) != k or sum(sizes) != n:
            raise ValueError("instance sizes line does not match the header")
        state = np.empty((n, n), dtype=np.int8)
        for i in range(n):
            row = fh.readline().strip()
            if len(row) != n:
                raise ValueError(f"instance row {i} has length {len(row)}, expected {n}")
            state[i] = [_CHAR_STATES[c] for c in row]
    gt = make_ground_truth(sizes)
    return gt, state, p, q, seed
