"""Lloyd k-means with deterministic farthest-point seeding."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError


@dataclass(frozen=True)
class KMeansResult:
    k: int
    centroids: np.ndarray  # k x d
    assignments: np.ndarray  # n
    inertia: float
    iterations: int

    def __post_init__(self) -> None:
        self.centroids.setflags(write=False)
        self.assignments.setflags(write=False)


def kmeans(points, k: int, max_iter: int = 100, seed: int = 0) -> KMeansResult:
    """Cluster points into k groups.

    Seeding: one seeded-random start, then farthest-point traversal for the
    remaining centroids. Nearest-centroid ties break toward the lowest
    cluster index. Deterministic for a fixed seed.
    """
    x = np.asarray(points, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    n = x.shape[0]
    if k < 1:
        raise ValidationError("k must be >= 1")
    if k > n:
        raise ValidationError(f"k={k} exceeds the number of points ({n})")

    centroids = _seed_centroids(x, k, seed)
    assignments = _assign(x, centroids)
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        new_centroids = centroids.copy()
        for c in range(k):
            members = x[assignments == c]
            if len(members):
                new_centroids[c] = members.mean(axis=0)
            # an emptied cluster keeps its previous centroid
        new_assignments = _assign(x, new_centroids)
        centroids = new_centroids
        if np.array_equal(new_assignments, assignments):
            assignments = new_assignments
            break
        assignments = new_assignments

    diffs = x - centroids[assignments]
    inertia = float(np.einsum("ij,ij->", diffs, diffs))
    return KMeansResult(k=k, centroids=centroids, assignments=assignments, inertia=inertia,
                        iterations=iterations)


def _assign(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # argmin returns the first (lowest-index) centroid on ties
    d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return d2.argmin(axis=1)


def _seed_centroids(x: np.ndarray, k: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    first = int(rng.integers(0, x.shape[0]))
    chosen = [first]
    min_d2 = ((x - x[first]) ** 2).sum(axis=1)
    while len(chosen) < k:
        nxt = int(min_d2.argmax())
        chosen.append(nxt)
        min_d2 = np.minimum(min_d2, ((x - x[nxt]) ** 2).sum(axis=1))
    return x[chosen].copy()
