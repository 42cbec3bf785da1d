"""Deciding whether a solved ``K`` is a partial clustering and matching it
against ground truth.

A partial clustering matrix is a 0/1 matrix that equals 1 exactly on the
pairs inside some family of pairwise disjoint node sets.  The detector
rounds a numeric ``K`` conservatively: any entry away from both 0 and 1
is treated as the unresolved mid-size pattern and rejects the whole
matrix, which simply advances the knob schedule in the peeling loop.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PartialClustering",
    "detect_partial_clustering",
    "min_cluster_size",
    "soundness_threshold_full",
    "soundness_threshold_partial",
    "partial_soundness_consts",
    "match_to_ground_truth",
    "clustering_lines",
    "parse_clustering_lines",
]


@dataclass(frozen=True)
class PartialClustering:
    """Pairwise disjoint induced clusters over ``n`` nodes; possibly none."""

    n: int
    clusters: tuple

    @property
    def r(self):
        return len(self.clusters)

    def covered(self):
        """All clustered nodes, as a sorted array."""
        if not self.clusters:
            return np.empty(0, dtype=int)
        return np.sort(np.concatenate([np.asarray(c) for c in self.clusters]))

    def matrix(self):
        """Assemble the 0/1 matrix this clustering induces."""
        K = np.zeros((self.n, self.n))
        for c in self.clusters:
            ix = np.asarray(c)
            K[np.ix_(ix, ix)] = 1.0
        return K


def detect_partial_clustering(K, round_tol=0.1, include_singletons=False):
    """Round ``K`` and extract its induced clusters, or reject.

    Entries in ``[1-round_tol, 1]`` round to 1 and ``[0, round_tol]`` to 0;
    anything else rejects (returns None).  On the rounded matrix, clustered
    nodes are those with a 1 diagonal, and every connected component of the
    1-entries must be a complete block with zeros everywhere off the block.
    Diagonal-only nodes form singleton clusters, which are excluded from
    the output by default: the box constraint plus the all-ones diagonal
    convention can produce spurious diagonal 1s on unclustered nodes.
    """
    K = np.asarray(K, dtype=float)
    n = K.shape[0]
    one = K >= 1.0 - round_tol
    zero = K <= round_tol
    if not (one | zero).all():
        return None

    diag = one.diagonal()
    # every 1-entry needs both endpoints clustered
    off = one.copy()
    np.fill_diagonal(off, False)
    if (off & ~(diag[:, None] & diag[None, :])).any():
        return None

    members = np.flatnonzero(diag)
    if members.size == 0:
        return PartialClustering(n=n, clusters=())
    sub = one[np.ix_(members, members)]
    # in a valid partial clustering each clustered node's row equals its
    # cluster's indicator, so identical rows identify the blocks and the
    # verification below rejects incomplete or leaky components
    _, inverse = np.unique(sub, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    clusters = []
    for g in range(inverse.max() + 1):
        local = np.flatnonzero(inverse == g)
        block = members[local]
        pattern = np.zeros(n, dtype=bool)
        pattern[block] = True
        if not np.array_equal(one[block[0]], pattern):
            return None
        if not sub[np.ix_(local, local)].all():
            return None
        if block.size == 1 and not include_singletons:
            continue
        clusters.append(tuple(int(i) for i in block))
    clusters.sort(key=lambda c: (-len(c), c[0]))
    return PartialClustering(n=n, clusters=tuple(clusters))


def min_cluster_size(pc):
    """Smallest induced cluster size; undefined for an empty clustering."""
    if pc.r == 0:
        raise ValueError("minimum cluster size is undefined for an empty clustering")
    return min(len(c) for c in pc.clusters)


def soundness_threshold_full(n, k_bound, p, q, scale=1.0, sound_k=1.0, sound_spec=1.0):
    """Size above which an induced cluster is guaranteed to be a true one
    (full observation)."""
    if not (p > q) or k_bound < 1:
        raise ValueError("requires p > q and k_bound >= 1")
    ln = math.log(n)
    return max(
        sound_k * k_bound * ln / (p - q) ** 2,
        sound_spec * scale * math.sqrt(p * (1.0 - q) * n * ln) / (p - q),
    )


def soundness_threshold_partial(n, k_bound, rate, sound_k=1.0, sound_spec=1.0):
    """Partial-observation counterpart of the soundness threshold."""
    if not (0.0 < rate <= 1.0):
        raise ValueError(f"rate must be in (0, 1], got {rate}")
    ln = math.log(n)
    return max(
        sound_k * k_bound * ln / rate,
        sound_spec * math.sqrt(n * ln / rate),
    )


def partial_soundness_consts(p_prime, q_prime, sound_k=1.0, sound_spec=1.0):
    """Map full-observation soundness constants to their partial-observation
    counterparts so the two thresholds agree at rate 1."""
    return (
        sound_k / (p_prime - q_prime) ** 2,
        sound_spec * math.sqrt(p_prime * (1.0 - q_prime)) / (p_prime - q_prime),
    )


def match_to_ground_truth(pc, gt):
    """Exact-set injection of induced clusters into ground-truth clusters.

    Returns a dict mapping cluster index in ``pc`` to ground-truth cluster
    index when every induced cluster equals some true cluster exactly;
    None otherwise.
    """
    if pc.n != gt.n:
        return None
    lookup = {
        frozenset(gt.cluster_nodes(c).tolist()): c for c in range(gt.k)
    }
    mapping = {}
    for i, cluster in enumerate(pc.clusters):
        target = lookup.get(frozenset(cluster))
        if target is None:
            return None
        mapping[i] = target
    return mapping


def clustering_lines(pc):
    """Serialize as ``cluster_id: node,node,...`` lines."""
    return "".join(
        f"{i}: {','.join(str(v) for v in c)}\n" for i, c in enumerate(pc.clusters)
    )


def parse_clustering_lines(text, n):
    clusters = []
    for line in text.strip().splitlines():
        if not line.strip():
            continue
        _, _, body = line.partition(":")
        clusters.append(tuple(int(v) for v in body.strip().split(",") if v))
    return PartialClustering(n=n, clusters=tuple(clusters))
