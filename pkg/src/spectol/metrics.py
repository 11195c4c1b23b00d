"""Subspace distances, clustering, and dimension selection.

Everything here operates on plain arrays: embeddings as n x d matrices,
partitions as integer label vectors.  The subspace comparisons minimize over
the full orthogonal group (reflections included) since an eigenvector basis
is only defined up to such a transform.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    DomainError,
    EmptyRange,
    KTooLarge,
    LengthMismatch,
    NotOrthonormal,
    SingleCluster,
    TooFewValues,
)

_ORTHONORMAL_TOL = 1e-8


def procrustes_distance(X: np.ndarray, Y: np.ndarray) -> tuple[float, np.ndarray]:
    """min over orthogonal O of ||X - Y O||_F, with the minimizing O.

    The optimum has the closed form O = U V^T from the SVD of Y^T X.  The
    minimum is evaluated as ||X - Y O||_F directly: the algebraically equal
    sqrt(||X||^2 + ||Y||^2 - 2 sum of singular values) cancels
    catastrophically and floors near sqrt(eps) ||X|| when the fit is exact.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape != Y.shape or X.ndim != 2:
        raise DimensionMismatch("both embeddings must share one n x d shape")
    U, _, Vt = np.linalg.svd(Y.T @ X)
    O = U @ Vt
    return float(np.linalg.norm(X - Y @ O)), O


def canonical_angles(X: np.ndarray, Y: np.ndarray) -> tuple[np.ndarray, float]:
    """Principal angles between two column spans, plus ||sin Psi||_F.

    Both inputs must have orthonormal columns.  The cosines are the singular
    values of Y^T X; the sines come from the complement projection
    Y - X (X^T Y), whose singular values equal them exactly and, unlike
    sqrt(1 - cos^2), keep full precision for angles near zero.  Angles come
    back in decreasing order.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape != Y.shape or X.ndim != 2:
        raise DimensionMismatch("both frames must share one n x d shape")
    d = X.shape[1]
    for name, F in (("first", X), ("second", Y)):
        if np.linalg.norm(F.T @ F - np.eye(d)) > _ORTHONORMAL_TOL:
            raise NotOrthonormal(f"{name} argument lacks orthonormal columns")
    cosines = np.clip(np.linalg.svd(Y.T @ X, compute_uv=False), 0.0, 1.0)
    complement = Y - X @ (X.T @ Y)
    sines = np.clip(np.linalg.svd(complement, compute_uv=False), 0.0, 1.0)
    # cosines descending and sines descending describe the same principal
    # directions traversed in opposite order
    angles = np.arctan2(sines, cosines[::-1])
    return angles, float(np.linalg.norm(sines))


@dataclass(frozen=True)
class Clustering:
    """A hard partition: labels in [0, k), cluster centers, and its cost."""

    labels: np.ndarray
    k: int
    centers: np.ndarray
    wcss: float


def _plus_plus_init(points: np.ndarray, k: int, rng) -> np.ndarray:
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total > 0.0:
            idx = rng.choice(n, p=d2 / total)
        else:
            idx = rng.integers(n)
        centers[c] = points[idx]
        d2 = np.minimum(d2, ((points - centers[c]) ** 2).sum(axis=1))
    return centers


def _lloyd(points: np.ndarray, centers: np.ndarray, max_iters: int):
    n, k = points.shape[0], centers.shape[0]
    centers = centers.copy()
    labels = np.full(n, -1)
    prev_wcss = math.inf
    for _ in range(max_iters):
        dists = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = dists.argmin(axis=1)
        # revive empty clusters by seizing the point farthest from its center
        counts = np.bincount(new_labels, minlength=k)
        for c in np.nonzero(counts == 0)[0]:
            eligible = counts[new_labels] > 1
            if not eligible.any():
                break
            assigned = dists[np.arange(n), new_labels]
            assigned = np.where(eligible, assigned, -1.0)
            idx = int(assigned.argmax())
            counts[new_labels[idx]] -= 1
            new_labels[idx] = c
            counts[c] += 1
            centers[c] = points[idx]
            dists[:, c] = ((points - centers[c]) ** 2).sum(axis=1)
        wcss = float(dists[np.arange(n), new_labels].sum())
        assert wcss <= prev_wcss * (1.0 + 1e-9) + 1e-12, "cost rose within Lloyd"
        prev_wcss = wcss
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            members = points[labels == c]
            if members.size:
                centers[c] = members.mean(axis=0)
    return labels, centers, prev_wcss


def kmeans(
    points: np.ndarray,
    k: int,
    seed=0,
    *,
    max_iters: int = 100,
    restarts: int = 10,
) -> Clustering:
    """Lloyd iteration with D^2-weighted seeding, best of seeded restarts.

    Deterministic for a fixed seed; the within-cluster sum of squares is
    checked to be non-increasing across every Lloyd iteration.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[0]
    if k < 1:
        raise DomainError("k must be at least 1")
    if k > n:
        raise KTooLarge(f"k={k} clusters from {n} points")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(restarts):
        init = _plus_plus_init(points, k, rng)
        labels, centers, wcss = _lloyd(points, init, max_iters)
        if best is None or wcss < best[2]:
            best = (labels, centers, wcss)
    labels, centers, wcss = best
    return Clustering(labels=labels, k=k, centers=centers, wcss=wcss)


@dataclass(frozen=True)
class SilhouetteResult:
    """Per-point widths s(i), per-cluster means, and the global mean."""

    values: np.ndarray
    cluster_means: np.ndarray
    mean: float


def silhouette_width(points: np.ndarray, clustering: Clustering) -> SilhouetteResult:
    """s(i) = (b(i) - a(i)) / max(a(i), b(i)) under Euclidean distance.

    a(i) averages over the other members of i's cluster; b(i) is the best
    mean distance to a foreign cluster.  Singleton clusters score 0, as does
    the 0/0 case.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    labels = clustering.labels
    k = clustering.k
    if k < 2:
        raise SingleCluster("silhouette widths need at least two clusters")
    n = points.shape[0]
    if labels.shape != (n,):
        raise LengthMismatch("one label per point is required")
    sq = ((points[:, None, :] - points[None, :, :]) ** 2).sum(axis=2)
    dist = np.sqrt(np.clip(sq, 0.0, None))
    sizes = np.bincount(labels, minlength=k)
    # mean distance from every point to every cluster
    sums = np.zeros((n, k))
    for c in range(k):
        sums[:, c] = dist[:, labels == c].sum(axis=1)
    values = np.zeros(n)
    for i in range(n):
        c = labels[i]
        if sizes[c] <= 1:
            continue
        a = sums[i, c] / (sizes[c] - 1)
        foreign = [sums[i, o] / sizes[o] for o in range(k) if o != c and sizes[o] > 0]
        if not foreign:
            continue
        b = min(foreign)
        top = max(a, b)
        values[i] = (b - a) / top if top > 0 else 0.0
    cluster_means = np.array(
        [values[labels == c].mean() if sizes[c] else 0.0 for c in range(k)]
    )
    return SilhouetteResult(
        values=values, cluster_means=cluster_means, mean=float(values.mean())
    )


def choose_k_by_silhouette(
    points: np.ndarray, k_range, seed=0
) -> tuple[int, Clustering]:
    """Pick the cluster count maximizing mean silhouette width.

    Candidates are tried in increasing order and ties keep the smaller k.
    """
    candidates = sorted(int(k) for k in k_range)
    if not candidates:
        raise EmptyRange("no candidate cluster counts")
    best_k, best_clustering, best_score = None, None, -math.inf
    for k in candidates:
        clustering = kmeans(points, k, seed)
        score = silhouette_width(points, clustering).mean
        if score > best_score:
            best_k, best_clustering, best_score = k, clustering, score
    return best_k, best_clustering


def adjusted_rand_index(labels_a, labels_b) -> float:
    """Chance-adjusted pair-counting agreement between two partitions."""
    a = np.asarray(labels_a).reshape(-1)
    b = np.asarray(labels_b).reshape(-1)
    if a.size != b.size:
        raise LengthMismatch(f"label vectors of length {a.size} and {b.size}")
    if a.size == 0:
        raise LengthMismatch("empty label vectors")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    ka, kb = ai.max() + 1, bi.max() + 1
    table = np.zeros((ka, kb), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)

    def comb2(x):
        return x * (x - 1) // 2

    index = comb2(table).sum()
    sum_a = comb2(table.sum(axis=1)).sum()
    sum_b = comb2(table.sum(axis=0)).sum()
    total = comb2(np.int64(a.size))
    expected = sum_a * sum_b / total if total else 0.0
    maximum = 0.5 * (sum_a + sum_b)
    if maximum == expected:
        return 1.0
    return float((index - expected) / (maximum - expected))


def zhu_ghodsi_dimension(scree) -> int:
    """Elbow of a decreasing scree by two-segment Gaussian profile likelihood.

    Both segments share one variance (the pooled maximum-likelihood
    estimate).  A split with zero pooled variance fits perfectly and wins;
    ties go to the smaller split index.  Returns the size of the first
    segment.
    """
    x = np.asarray(scree, dtype=float).reshape(-1)
    m = x.size
    if m < 2:
        raise TooFewValues("a scree needs at least two values")
    scale = float(np.abs(x).max()) if m else 0.0
    if np.any(x < -1e-12 * max(1.0, scale)):
        raise DomainError("scree values must be nonnegative")
    if np.any(np.diff(x) > 1e-12 * max(1.0, scale)):
        raise DomainError("scree values must be decreasing")
    best_q, best_ll = None, -math.inf
    for q in range(1, m):
        head, tail = x[:q], x[q:]
        ss = ((head - head.mean()) ** 2).sum() + ((tail - tail.mean()) ** 2).sum()
        var = ss / m
        if var <= 1e-30 * max(1.0, scale**2):
            ll = math.inf
        else:
            ll = -0.5 * m * (math.log(2.0 * math.pi * var) + 1.0)
        if ll > best_ll:
            best_q, best_ll = q, ll
    return int(best_q)
