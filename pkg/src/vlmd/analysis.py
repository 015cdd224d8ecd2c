"""Hierarchical clustering of channels by connectivity or by mode shape."""

import json
from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import linkage, to_tree
from scipy.spatial.distance import squareform

from .exceptions import InvalidInput

LINKAGES = ("average", "single", "complete")


@dataclass
class Dendrogram:
    """Agglomeration history in scipy's convention.

    Leaves are ``0..N-1``; the cluster formed at merge ``i`` gets id ``N + i``.
    ``merges`` rows are ``(cluster_a, cluster_b, height, size)``.
    """

    merges: list
    leaf_labels: list
    flagged: list = None

    @property
    def n_leaves(self):
        return len(self.leaf_labels)

    @property
    def heights(self):
        return np.array([m[2] for m in self.merges])

    def linkage_matrix(self):
        return np.array(self.merges, dtype=float).reshape(-1, 4)

    def to_dict(self, max_leaves=None):
        merges = self.merges
        if max_leaves is not None and max_leaves < self.n_leaves:
            # keep only the top merges: those above the last (N - max_leaves) joins
            merges = merges[self.n_leaves - max_leaves:]
        return dict(
            leaf_labels=list(self.leaf_labels),
            merges=[dict(a=int(a), b=int(b), height=float(h), size=int(s)) for a, b, h, s in merges],
            truncated_to=max_leaves,
            flagged=list(self.flagged or []),
        )

    def to_json(self, max_leaves=None):
        return json.dumps(self.to_dict(max_leaves), indent=2)

    def to_newick(self):
        root = to_tree(self.linkage_matrix())

        def label(i):
            text = str(self.leaf_labels[i])
            return text if text.replace("_", "").isalnum() else "'" + text.replace("'", "''") + "'"

        def walk(node, parent_height):
            branch = parent_height - (node.dist if not node.is_leaf() else 0.0)
            if node.is_leaf():
                return f"{label(node.id)}:{branch:.12g}"
            inner = ",".join(walk(child, node.dist) for child in (node.left, node.right))
            return f"({inner}):{branch:.12g}"

        if self.n_leaves == 1:
            return f"{label(0)};"
        inner = ",".join(walk(child, root.dist) for child in (root.left, root.right))
        return f"({inner});"


def _labels(labels, n):
    if labels is None:
        return [str(i) for i in range(n)]
    labels = [str(v) for v in labels]
    if len(labels) != n:
        raise InvalidInput(f"{len(labels)} labels for {n} items")
    return labels


def cluster_distances(D, labels=None, method="average", flagged=None):
    """Agglomerate ``N`` items from a symmetric (N, N) distance matrix."""
    if method not in LINKAGES:
        raise InvalidInput(f"linkage must be one of {LINKAGES}, got {method!r}")
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1] or D.shape[0] < 2:
        raise InvalidInput("need a square distance matrix over at least 2 items")
    D = 0.5 * (D + D.T)
    np.fill_diagonal(D, 0.0)
    Zl = linkage(squareform(D, checks=False), method=method)
    merges = [(int(a), int(b), float(h), int(s)) for a, b, h, s in Zl]
    return Dendrogram(merges=merges, leaf_labels=_labels(labels, D.shape[0]), flagged=flagged or [])


def coefficient_distances(A):
    """Euclidean distances between the channel profiles (columns of ``A``)."""
    P = np.asarray(A, dtype=float).T
    diff = P[:, None, :] - P[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def cluster_coefficients(A, labels=None, method="average"):
    """Cluster channels by their latent-loading profiles, one per column of ``A`` (L, C)."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[1] < 2:
        raise InvalidInput("coefficient matrix must be (L, C) with C >= 2")
    return cluster_distances(coefficient_distances(A), labels, method)


def correlation_distances(U_k):
    """``1 - pearson`` between the rows of ``U_k`` (C, T); zero-variance rows sit at 1."""
    U = np.asarray(U_k, dtype=float)
    U = U - U.mean(axis=1, keepdims=True)
    norm = np.sqrt(np.sum(U * U, axis=1))
    flat = norm == 0
    Un = np.divide(U, norm[:, None], out=np.zeros_like(U), where=~flat[:, None])
    R = np.clip(Un @ Un.T, -1.0, 1.0)
    D = 1.0 - R
    D[flat, :] = 1.0
    D[:, flat] = 1.0
    np.fill_diagonal(D, 0.0)
    return D, np.flatnonzero(flat).tolist()


METRICS = ("euclidean", "correlation")


def channel_distances(features, metric="euclidean"):
    """Distances between rows of ``features`` (N, d). Returns ``(D, flagged)``."""
    if metric == "euclidean":
        F = np.asarray(features, dtype=float)
        return coefficient_distances(F.T), []
    if metric == "correlation":
        return correlation_distances(features)
    raise InvalidInput(f"metric must be one of {METRICS}, got {metric!r}")


def cluster_modes(U_k, labels=None, method="average"):
    """Cluster channels by the correlation of their mode-k signals, ``U_k`` (C, T)."""
    U_k = np.asarray(U_k, dtype=float)
    if U_k.ndim != 2 or U_k.shape[0] < 2 or U_k.shape[1] < 3:
        raise InvalidInput("mode array must be (C, T) with C >= 2 and T >= 3")
    D, flat = correlation_distances(U_k)
    lab = _labels(labels, U_k.shape[0])
    return cluster_distances(D, lab, method, flagged=[lab[i] for i in flat])
